#pragma once

#include <vector>

#include "skrates/bound_result.hpp"
#include "skrates/models.hpp"

namespace skr {

// Upper bound on the secret-key rate: max over v in [0,1/2] of
// (1-beta)h2(v) + h2(eps) - h2(v*eps) + h2(zeta). Always feasible.
// aux: ("v", argmax).
BoundResult outer_bound(const BecBscModel& m);

// Two-layer achievable rate: max over (u,v,q) in [0,1/2]^3 subject to
// beta[1 - h2(v*u)] <= 1 - h2(q) of
// (1-beta)[h2(v*u) - h2(v)] + h2(v*eps) - h2(v*u*eps)
//   + h2(zeta) + h2(q) - h2(zeta*q).
// aux: ("u",..), ("v",..), ("q",..); slack = constraint margin at argmax.
BoundResult inner_separate(const BecBscModel& m);

// One-layer achievable rate: max over v of
// h2(v*eps) - (1-beta)h2(v) - beta + h2(zeta), floored at 0. aux: ("v",..).
BoundResult inner_separate_1layer(const BecBscModel& m);

// Joint-scheme achievable rate: max of
//   branch 1: max over v of (1-beta)h2(v) + h2(eps*zeta) - h2(v*eps*zeta)
//   branch 2: h2(zeta)
// aux: ("branch", 1 or 2), ("v", branch-1 argmax).
BoundResult inner_joint(const BecBscModel& m);

struct SweepRow {
    double beta = 0.0;
    double outer = 0.0;
    double i_sep = 0.0;
    double i_sep_1l = 0.0;
    double i_jscc = 0.0;
};

// One row per beta grid value (grid must be non-empty, ascending, in [0,1]).
std::vector<SweepRow> sweep(double zeta, double epsilon, const std::vector<double>& beta_grid);

}  // namespace skr
