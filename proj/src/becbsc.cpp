#include "skrates/becbsc.hpp"

#include <algorithm>
#include <stdexcept>

#include "skrates/optim.hpp"

namespace skr {

namespace {

double aux_lookup(const std::vector<std::pair<std::string, double>>& aux, const std::string& n) {
    for (const auto& kv : aux)
        if (kv.first == n) return kv.second;
    throw std::invalid_argument("BoundResult: no aux named '" + n + "'");
}

}  // namespace

double BoundResult::aux_value(const std::string& name) const { return aux_lookup(aux, name); }

bool BoundResult::has_aux(const std::string& name) const {
    for (const auto& kv : aux)
        if (kv.first == name) return true;
    return false;
}

BoundResult outer_bound(const BecBscModel& m) {
    m.validate();
    const double he = h2(m.epsilon), hz = h2(m.zeta);
    auto obj = [&](const std::vector<double>& x) {
        double v = x[0];
        return (1.0 - m.beta) * h2(v) + he - h2(star(v, m.epsilon)) + hz;
    };
    BoxSpec box{{{0.0, 0.5}}, 0, 3};
    MaxResult r = maximize_box(obj, [](const std::vector<double>&) { return true; }, box);
    BoundResult out;
    out.rk = std::max(0.0, r.value);
    out.feasible = true;
    out.slack = 0.0;
    out.aux = {{"v", r.arg[0]}};
    return out;
}

BoundResult inner_separate(const BecBscModel& m) {
    m.validate();
    const double hz = h2(m.zeta);
    auto obj = [&](const std::vector<double>& x) {
        double u = x[0], v = x[1], q = x[2];
        double vu = star(v, u);
        return (1.0 - m.beta) * (h2(vu) - h2(v)) + h2(star(v, m.epsilon)) -
               h2(star(vu, m.epsilon)) + hz + h2(q) - h2(star(m.zeta, q));
    };
    auto feas = [&](const std::vector<double>& x) {
        return m.beta * (1.0 - h2(star(x[1], x[0]))) <= 1.0 - h2(x[2]);
    };
    BoxSpec box{{{0.0, 0.5}, {0.0, 0.5}, {0.0, 0.5}}, 65, 3};
    MaxResult r = maximize_box(obj, feas, box);
    BoundResult out;
    out.rk = std::max(0.0, r.value);
    out.feasible = true;
    double u = r.arg[0], v = r.arg[1], q = r.arg[2];
    out.slack = (1.0 - h2(q)) - m.beta * (1.0 - h2(star(v, u)));
    out.aux = {{"u", u}, {"v", v}, {"q", q}};
    return out;
}

BoundResult inner_separate_1layer(const BecBscModel& m) {
    m.validate();
    const double hz = h2(m.zeta);
    auto obj = [&](const std::vector<double>& x) {
        double v = x[0];
        return h2(star(v, m.epsilon)) - (1.0 - m.beta) * h2(v) - m.beta + hz;
    };
    BoxSpec box{{{0.0, 0.5}}, 0, 3};
    MaxResult r = maximize_box(obj, [](const std::vector<double>&) { return true; }, box);
    BoundResult out;
    out.rk = std::max(0.0, r.value);
    out.feasible = true;
    out.slack = 0.0;
    out.aux = {{"v", r.arg[0]}};
    return out;
}

BoundResult inner_joint(const BecBscModel& m) {
    m.validate();
    const double ez = star(m.epsilon, m.zeta);
    const double hez = h2(ez);
    auto obj = [&](const std::vector<double>& x) {
        double v = x[0];
        return (1.0 - m.beta) * h2(v) + hez - h2(star(v, ez));
    };
    BoxSpec box{{{0.0, 0.5}}, 0, 3};
    MaxResult r = maximize_box(obj, [](const std::vector<double>&) { return true; }, box);
    double b1 = r.value, b2 = h2(m.zeta);
    BoundResult out;
    out.feasible = true;
    out.slack = 0.0;
    if (b1 >= b2) {
        out.rk = std::max(0.0, b1);
        out.aux = {{"branch", 1.0}, {"v", r.arg[0]}};
    } else {
        out.rk = b2;
        out.aux = {{"branch", 2.0}, {"v", r.arg[0]}};
    }
    return out;
}

std::vector<SweepRow> sweep(double zeta, double epsilon, const std::vector<double>& beta_grid) {
    if (beta_grid.empty()) throw std::invalid_argument("sweep: empty beta grid");
    for (std::size_t i = 0; i < beta_grid.size(); ++i) {
        if (!(beta_grid[i] >= 0.0 && beta_grid[i] <= 1.0))
            throw std::invalid_argument("sweep: beta outside [0,1]");
        if (i > 0 && beta_grid[i] < beta_grid[i - 1])
            throw std::invalid_argument("sweep: beta grid not ascending");
    }
    std::vector<SweepRow> rows(beta_grid.size());
    for (std::size_t i = 0; i < beta_grid.size(); ++i) {
        BecBscModel m{zeta, beta_grid[i], epsilon};
        rows[i].beta = beta_grid[i];
        rows[i].outer = outer_bound(m).rk;
        rows[i].i_sep = inner_separate(m).rk;
        rows[i].i_sep_1l = inner_separate_1layer(m).rk;
        rows[i].i_jscc = inner_joint(m).rk;
    }
    return rows;
}

}  // namespace skr
