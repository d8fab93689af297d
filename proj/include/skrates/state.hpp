#pragma once

#include "skrates/bound_result.hpp"
#include "skrates/models.hpp"

namespace skr {

// Closed form eps*(1-beta)*h2(a) + h2(zeta). aux: none (no free parameter).
BoundResult binary_state_outer(const BinaryStateModel& m);

// Closed form [eps*h2(a*zeta) - beta*h2(a) + (1-eps)*h2(zeta)]^+.
BoundResult binary_state_inner(const BinaryStateModel& m);

// Closed form [C((P+Q+2sqrt(PQ))/N1) - C((P+Q+2sqrt(PQ))/N2)]^+ at full
// input/state correlation. Requires N1 <= N2. aux: ("rho", 1).
BoundResult gaussian_outer(const GaussianStateModel& m);

// Correlation-limited closed form: rho^2 = 1 - [N1 - N1^2/(P+Q+2sqrt(PQ)+N1)]/P
// clamped to [0,1] (rho := 0 with aux flag "rho_defaulted" when P = 0), then
// [C((P+Q+2rho sqrt(PQ))/N1) - C(same/N2)]^+. Requires N1 <= N2.
// aux: rho, gamma(=1), mu_bar, delta1, delta2, quad_a, quad_b, quad_c.
BoundResult gaussian_inner_closed(const GaussianStateModel& m);

// Full maximization over rho in [0,1] (2049-point grid + refinement) and, per
// rho, gamma in the interval where the feasibility quadratic
//   a = -Q[(1-rho^2)P + N1], b = 2[(1-rho^2)PQ - rho sqrt(PQ) N1],
//   c = P[(1-rho^2)(P + 2 rho sqrt(PQ)) - rho^2 N1]
// is nonnegative (513-point sub-search), of
//   (1/2)[log2(1+Delta1) - log2(1+Delta2)]^+ with
//   Delta_i = [P + gamma Q + rho(1+gamma)sqrt(PQ)]^2 /
//             [(1-rho^2)(1-gamma)^2 PQ + N_i (P + gamma^2 Q + 2 rho gamma sqrt(PQ))].
// rho values with an empty gamma interval are skipped. Requires N1 <= N2.
// aux: argmax rho, gamma, mu_bar, delta1, delta2, quad_a, quad_b, quad_c.
BoundResult gaussian_inner_full(const GaussianStateModel& m);

}  // namespace skr
