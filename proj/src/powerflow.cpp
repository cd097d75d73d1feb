#include "fair_curtail/powerflow.hpp"

#include <cmath>

#include "fair_curtail/errors.hpp"

namespace fair_curtail {

Eigen::MatrixXcd build_admittance(const Network& net) {
    const int nb = static_cast<int>(net.buses.size());
    Eigen::MatrixXcd ybus = Eigen::MatrixXcd::Zero(nb, nb);
    const double z_base = net.impedance_base_ohm();
    for (const Line& ln : net.lines) {
        const int a = net.bus_index(ln.from_bus);
        const int b = net.bus_index(ln.to_bus);
        const std::complex<double> z_pu(ln.resistance / z_base, ln.reactance / z_base);
        const std::complex<double> y = 1.0 / z_pu;
        ybus(a, a) += y;
        ybus(b, b) += y;
        ybus(a, b) -= y;
        ybus(b, a) -= y;
    }
    return ybus;
}

PowerFlowSolution solve_pf(const Network& net, const std::vector<double>& injections_kw,
                           const PowerFlowOptions& opts) {
    const int nb = static_cast<int>(net.buses.size());
    if (static_cast<int>(injections_kw.size()) != nb) {
        throw DimensionMismatch("injection vector has " + std::to_string(injections_kw.size()) +
                                " entries for " + std::to_string(nb) + " buses");
    }
    const int slack = net.slack_index();
    const Eigen::MatrixXcd ybus = build_admittance(net);
    const Eigen::MatrixXd g = ybus.real();
    const Eigen::MatrixXd b = ybus.imag();

    std::vector<int> pq;  // bus indices carrying unknowns
    pq.reserve(nb - 1);
    for (int i = 0; i < nb; ++i) {
        if (i != slack) pq.push_back(i);
    }
    const int npq = static_cast<int>(pq.size());

    // Scheduled powers in p.u.; Q = 0 everywhere.
    Eigen::VectorXd p_spec(nb);
    for (int i = 0; i < nb; ++i) p_spec(i) = injections_kw[i] / net.power_base_kw();

    // Flat start at the slack magnitude.
    Eigen::VectorXd vm = Eigen::VectorXd::Constant(nb, net.slack_voltage);
    Eigen::VectorXd va = Eigen::VectorXd::Zero(nb);

    auto calc_pq = [&](int i, double& p_out, double& q_out) {
        double p = 0.0, q = 0.0;
        for (int k = 0; k < nb; ++k) {
            const double th = va(i) - va(k);
            const double ct = std::cos(th), st = std::sin(th);
            p += vm(k) * (g(i, k) * ct + b(i, k) * st);
            q += vm(k) * (g(i, k) * st - b(i, k) * ct);
        }
        p_out = vm(i) * p;
        q_out = vm(i) * q;
    };

    PowerFlowSolution sol;
    sol.iterations = 0;

    Eigen::VectorXd best_vm = vm, best_va = va;
    double best_mismatch = std::numeric_limits<double>::infinity();
    int best_iter = 0;

    Eigen::VectorXd p_calc(nb), q_calc(nb);
    for (int iter = 0; iter <= opts.max_iterations; ++iter) {
        for (int i = 0; i < nb; ++i) calc_pq(i, p_calc(i), q_calc(i));

        Eigen::VectorXd mismatch(2 * npq);
        for (int r = 0; r < npq; ++r) {
            const int i = pq[r];
            mismatch(r) = p_spec(i) - p_calc(i);
            mismatch(npq + r) = 0.0 - q_calc(i);
        }
        const double err = npq > 0 ? mismatch.cwiseAbs().maxCoeff() : 0.0;
        if (err < best_mismatch) {
            best_mismatch = err;
            best_vm = vm;
            best_va = va;
            best_iter = iter;
        }
        if (err <= opts.tolerance) {
            sol.converged = true;
            sol.iterations = iter;
            sol.max_mismatch = err;
            break;
        }
        if (iter == opts.max_iterations) break;

        // Standard polar-form Jacobian over [theta; vm] of the pq buses.
        Eigen::MatrixXd jac(2 * npq, 2 * npq);
        for (int r = 0; r < npq; ++r) {
            const int i = pq[r];
            for (int c = 0; c < npq; ++c) {
                const int j = pq[c];
                if (i == j) {
                    jac(r, c) = -q_calc(i) - b(i, i) * vm(i) * vm(i);
                    jac(r, npq + c) = p_calc(i) / vm(i) + g(i, i) * vm(i);
                    jac(npq + r, c) = p_calc(i) - g(i, i) * vm(i) * vm(i);
                    jac(npq + r, npq + c) = q_calc(i) / vm(i) - b(i, i) * vm(i);
                } else {
                    const double th = va(i) - va(j);
                    const double ct = std::cos(th), st = std::sin(th);
                    jac(r, c) = vm(i) * vm(j) * (g(i, j) * st - b(i, j) * ct);
                    jac(r, npq + c) = vm(i) * (g(i, j) * ct + b(i, j) * st);
                    jac(npq + r, c) = -vm(i) * vm(j) * (g(i, j) * ct + b(i, j) * st);
                    jac(npq + r, npq + c) = vm(i) * (g(i, j) * st - b(i, j) * ct);
                }
            }
        }

        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible()) {
            throw SingularJacobian("power-flow Jacobian singular at iteration " + std::to_string(iter));
        }
        const Eigen::VectorXd dx = lu.solve(mismatch);
        for (int r = 0; r < npq; ++r) {
            va(pq[r]) += dx(r);
            vm(pq[r]) += dx(npq + r);
        }
    }

    if (!sol.converged) {
        vm = best_vm;
        va = best_va;
        sol.iterations = best_iter;
        sol.max_mismatch = best_mismatch;
        for (int i = 0; i < nb; ++i) calc_pq(i, p_calc(i), q_calc(i));
    }

    sol.voltages.resize(nb);
    for (int i = 0; i < nb; ++i) sol.voltages[i] = std::polar(vm(i), va(i));
    sol.slack_injection_kw = p_calc(slack) * net.power_base_kw();

    sol.line_currents.resize(net.lines.size());
    const double z_base = net.impedance_base_ohm();
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const Line& ln = net.lines[l];
        const std::complex<double> z_pu(ln.resistance / z_base, ln.reactance / z_base);
        const std::complex<double> i_pu =
            (sol.voltages[net.bus_index(ln.from_bus)] - sol.voltages[net.bus_index(ln.to_bus)]) / z_pu;
        sol.line_currents[l] = std::abs(i_pu) * net.current_base_a();
    }
    return sol;
}

std::vector<double> prosumer_injections(const Network& net, const Snapshot& snap,
                                        const std::vector<double>& envelope_kw) {
    const std::size_t n = net.prosumer_count();
    if (snap.demand.size() != n || snap.potential.size() != n || envelope_kw.size() != n) {
        throw DimensionMismatch("envelope/snapshot size does not match " + std::to_string(n) + " prosumers");
    }
    std::vector<double> inj(net.buses.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int bi = net.bus_index(net.prosumers[i].bus);
        // Generation runs at the envelope, clipped by the available potential.
        inj[bi] += std::min(envelope_kw[i], snap.potential[i]) - snap.demand[i];
    }
    return inj;
}

double total_line_loss_kw(const Network& net, const PowerFlowSolution& sol) {
    double loss_pu = 0.0;
    const double z_base = net.impedance_base_ohm();
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
        const Line& ln = net.lines[l];
        const double i_pu = sol.line_currents[l] / net.current_base_a();
        loss_pu += i_pu * i_pu * (ln.resistance / z_base);
    }
    return loss_pu * net.power_base_kw();
}

}  // namespace fair_curtail
