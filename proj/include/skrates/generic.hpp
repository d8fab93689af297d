#pragma once

#include <cstdint>
#include <optional>

#include "skrates/bound_result.hpp"
#include "skrates/info.hpp"
#include "skrates/models.hpp"

namespace skr {

// A source triple p(A,B,E) plus a memoryless channel p(Y,Z|X) (or p(Y,Z|X,A)
// when state_coupled) and the channel-uses-per-source-symbol ratio eta.
struct SystemSpec {
    FinitePmf source;   // axes exactly A,B,E
    CondPmf channel;    // given [X] (or [X,A] when state_coupled), out [Y,Z]
    double eta = 1.0;
    bool state_coupled = false;

    void validate() const;
    int card(const std::string& axis) const;  // alphabet size of A/B/E/X/Y/Z
};

SystemSpec make_system(const BecBscModel& m);        // eta = 1, uncoupled
SystemSpec make_system(const BinaryStateModel& m);   // eta = 1, state-coupled

// Auxiliary inputs for the separate-layer region: channel side p(T,X) with an
// optional refinement layer p(Q|T); source side chain p(V|A), p(U|V).
// Cardinality caps (relative to the system): |U| <= |A|+2,
// |V| <= (|A|+1)(|A|+2), |Q| <= |X|+2, |T| <= (|X|+1)(|X|+2).
struct AuxSpecSeparate {
    FinitePmf p_tx;                       // axes T,X
    std::optional<CondPmf> p_q_given_t;   // given T, out Q
    CondPmf p_v_given_a;                  // given A, out V
    CondPmf p_u_given_v;                  // given V, out U
};

// Auxiliary inputs for the joint region: p(V,X|A) and p(U|V).
// Caps: |U| <= |X||A|+4, |V| <= (|X||A|+2)(|X||A|+4).
struct AuxSpecJoint {
    CondPmf p_vx_given_a;  // given A, out V,X
    CondPmf p_u_given_v;   // given V, out U
};

struct OuterEval {
    double rate = 0.0;
    double slack = 0.0;  // eta I(X;Y) - I(V;A|B)
};

struct InnerSepEval {
    double rate = 0.0;
    double slack_u = 0.0;  // eta I(Q;Y) - I(U;A|B)
    double slack_v = 0.0;  // eta I(T;Y) - I(V;A|B)
};

struct InnerJointEval {
    double rate = 0.0;
    double slack_u = 0.0;  // I(U;BY) - I(U;A)
    double slack_v = 0.0;  // I(V;BY|U) - I(V;A|U)
};

// rate = eta[I(T;Y) - I(T;Z)] + I(V;B|U) - I(V;E|U). Q layer ignored.
// Rejects state-coupled systems.
OuterEval eval_outer_thm1(const SystemSpec& sys, const AuxSpecSeparate& aux);

// rate = eta[I(T;Y|Q) - I(T;Z|Q)] + I(V;B|U) - I(V;E|U); requires the Q layer.
// Rejects state-coupled systems.
InnerSepEval eval_inner_sep_thm2(const SystemSpec& sys, const AuxSpecSeparate& aux);

// rate = I(V;BY|U) - I(V;EZ|U); requires eta == 1; state coupling allowed.
InnerJointEval eval_inner_joint_thm3(const SystemSpec& sys, const AuxSpecJoint& aux);

enum class RegionKind { Outer, InnerSep, InnerJoint };

struct AuxCards {
    int T = 1;
    int Q = 1;
    int U = 1;
    int V = 1;
};

// Multi-start best-found search over the auxiliary simplices: Dirichlet(1,..)
// random starts, per-row projected pattern search with step 0.25 halving to
// 1e-4. Deterministic given seed; monotone in restarts. Result has
// certified=false; aux reports the best value's slacks and winning restart.
BoundResult optimize_generic(const SystemSpec& sys, RegionKind which, const AuxCards& cards,
                             int restarts, std::uint64_t seed);

// Named auxiliary families for binary-A systems.

// Binary flip chain for the separate region: T = X with X ~ B(1/2),
// Q = X xor B(q), V = A xor B(v), U = V xor B(u). All |.| = 2.
AuxSpecSeparate make_flip_chain_aux(double u, double v, double q);

// Joint-region choice with V ~ B(1/2) independent of A and X = V; U trivial
// (|U| = 1). Channel input carries V directly; the state stays unknown.
AuxSpecJoint make_uniform_passthrough_aux();

// Joint-region choice with V ~ B(1/2), X = V xor A (state cancellation) and
// U = V xor B(v).
AuxSpecJoint make_state_xor_aux(double v);

}  // namespace skr
