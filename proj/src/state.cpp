#include "skrates/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skrates/optim.hpp"

namespace skr {

namespace {

void require_noise_order(const GaussianStateModel& m) {
    m.validate();
    if (m.N1 > m.N2)
        throw std::domain_error("gaussian bounds require N1 <= N2 (receiver at most as noisy as eavesdropper)");
}

struct QuadCoeffs {
    double a, b, c;
};

QuadCoeffs gamma_quad(const GaussianStateModel& m, double rho) {
    double spq = std::sqrt(m.P * m.Q);
    double r2 = rho * rho;
    return {-m.Q * ((1.0 - r2) * m.P + m.N1),
            2.0 * ((1.0 - r2) * m.P * m.Q - rho * spq * m.N1),
            m.P * ((1.0 - r2) * (m.P + 2.0 * rho * spq) - r2 * m.N1)};
}

// (1/2)[log2(1+Delta1) - log2(1+Delta2)]^+ at (rho, gamma); 0 on degenerate
// denominators (they only occur where the numerator vanishes too).
double full_rate_at(const GaussianStateModel& m, double rho, double gamma,
                    double* d1_out = nullptr, double* d2_out = nullptr) {
    double spq = std::sqrt(m.P * m.Q);
    double r2 = rho * rho;
    double num = m.P + gamma * m.Q + rho * (1.0 + gamma) * spq;
    num *= num;
    double common = (1.0 - r2) * (1.0 - gamma) * (1.0 - gamma) * m.P * m.Q;
    double load = m.P + gamma * gamma * m.Q + 2.0 * rho * gamma * spq;
    double den1 = common + m.N1 * load;
    double den2 = common + m.N2 * load;
    if (d1_out) *d1_out = 0.0;
    if (d2_out) *d2_out = 0.0;
    if (!(den1 > 1e-300) || !(den2 > 1e-300)) return 0.0;
    double delta1 = num / den1, delta2 = num / den2;
    if (d1_out) *d1_out = delta1;
    if (d2_out) *d2_out = delta2;
    return std::max(0.0, 0.5 * (std::log2(1.0 + delta1) - std::log2(1.0 + delta2)));
}

// Best gamma for a fixed rho; false when the feasible interval is empty.
bool best_gamma(const GaussianStateModel& m, double rho, double& gamma_out, double& rate_out) {
    QuadCoeffs qc = gamma_quad(m, rho);
    double g1, g2;
    if (qc.a == 0.0) {
        // Q = 0: the constraint degenerates to c >= 0 and the rate is
        // gamma-free; evaluate at gamma = 1.
        if (qc.c < 0.0) return false;
        gamma_out = 1.0;
        rate_out = full_rate_at(m, rho, 1.0);
        return true;
    }
    auto iv = quad_roots(qc.a, qc.b, qc.c);
    if (!iv) return false;
    g1 = (*iv)[0];
    g2 = (*iv)[1];
    if (g2 - g1 < 1e-12) {
        gamma_out = g1;
        rate_out = full_rate_at(m, rho, g1);
        return true;
    }
    auto obj = [&](const std::vector<double>& x) { return full_rate_at(m, rho, x[0]); };
    BoxSpec box{{{g1, g2}}, 513, 3};
    MaxResult r = maximize_box(obj, [](const std::vector<double>&) { return true; }, box);
    gamma_out = r.arg[0];
    rate_out = r.value;
    return true;
}

}  // namespace

BoundResult binary_state_outer(const BinaryStateModel& m) {
    m.validate();
    BoundResult out;
    out.rk = m.eps * (1.0 - m.beta) * h2(m.a) + h2(m.zeta);
    out.certified = true;
    return out;
}

BoundResult binary_state_inner(const BinaryStateModel& m) {
    m.validate();
    BoundResult out;
    out.rk = std::max(0.0, m.eps * h2(star(m.a, m.zeta)) - m.beta * h2(m.a) +
                               (1.0 - m.eps) * h2(m.zeta));
    out.certified = true;
    return out;
}

BoundResult gaussian_outer(const GaussianStateModel& m) {
    require_noise_order(m);
    double s = m.P + m.Q + 2.0 * std::sqrt(m.P * m.Q);
    BoundResult out;
    out.rk = std::max(0.0, gauss_cap(s / m.N1) - gauss_cap(s / m.N2));
    out.certified = true;
    out.aux = {{"rho", 1.0}};
    return out;
}

BoundResult gaussian_inner_closed(const GaussianStateModel& m) {
    require_noise_order(m);
    double spq = std::sqrt(m.P * m.Q);
    double rho;
    bool defaulted = false;
    if (m.P == 0.0) {
        rho = 0.0;
        defaulted = true;
    } else {
        double d = m.P + m.Q + 2.0 * spq + m.N1;
        double r2 = 1.0 - (m.N1 - m.N1 * m.N1 / d) / m.P;
        r2 = std::clamp(r2, 0.0, 1.0);
        rho = std::sqrt(r2);
    }
    double s = m.P + m.Q + 2.0 * rho * spq;
    double delta1 = s / m.N1, delta2 = s / m.N2;
    BoundResult out;
    out.rk = std::max(0.0, gauss_cap(delta1) - gauss_cap(delta2));
    out.certified = true;
    QuadCoeffs qc = gamma_quad(m, rho);
    out.aux = {{"rho", rho},       {"gamma", 1.0},    {"mu_bar", out.rk > 0.0 ? 1.0 : 0.0},
               {"delta1", delta1}, {"delta2", delta2}, {"quad_a", qc.a},
               {"quad_b", qc.b},   {"quad_c", qc.c}};
    if (defaulted) out.aux.emplace_back("rho_defaulted", 1.0);
    return out;
}

BoundResult gaussian_inner_full(const GaussianStateModel& m) {
    require_noise_order(m);
    auto obj = [&](const std::vector<double>& x) {
        double g, r;
        if (!best_gamma(m, x[0], g, r)) return 0.0;  // unreachable: guarded by feas
        return r;
    };
    auto feas = [&](const std::vector<double>& x) {
        double g, r;
        return best_gamma(m, x[0], g, r);
    };
    BoxSpec box{{{0.0, 1.0}}, 2049, 3};
    MaxResult r = maximize_box(obj, feas, box);
    BoundResult out;
    if (!r.feasible) {
        out.feasible = false;
        out.rk = 0.0;
        return out;
    }
    double rho = r.arg[0], gamma = 0.0, rate = 0.0;
    best_gamma(m, rho, gamma, rate);
    double d1 = 0.0, d2 = 0.0;
    full_rate_at(m, rho, gamma, &d1, &d2);
    QuadCoeffs qc = gamma_quad(m, rho);
    out.rk = rate;
    out.aux = {{"rho", rho},   {"gamma", gamma},  {"mu_bar", rate > 0.0 ? 1.0 : 0.0},
               {"delta1", d1}, {"delta2", d2},    {"quad_a", qc.a},
               {"quad_b", qc.b}, {"quad_c", qc.c}};
    return out;
}

}  // namespace skr
