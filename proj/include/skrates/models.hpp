#pragma once

#include "skrates/info.hpp"

namespace skr {

// Erasure/crossover source pair with a noiseless main channel and a binary
// symmetric eavesdropper tap: A uniform binary, B a beta-erasure view of A
// (alphabet {0,1,erase=2}), E an epsilon-crossover view of A; the transmitted
// X reaches the receiver exactly and the eavesdropper through crossover zeta.
struct BecBscModel {
    double zeta = 0.0;
    double beta = 0.0;
    double epsilon = 0.0;
    void validate() const;
};

// Additive binary state model: A ~ Bernoulli(a) acts as channel state,
// Y = X xor A, Z = Y xor Bernoulli(zeta); B and E are erasure views of A
// with rates beta and eps (both ternary with erase=2).
struct BinaryStateModel {
    double a = 0.5;
    double zeta = 0.0;
    double beta = 0.0;
    double eps = 0.0;
    void validate() const;
};

// Additive Gaussian state model: Y = X + S + W1, Z = X + S + W2 with
// S ~ N(0,Q), Wi ~ N(0,Ni), input power E[X^2] <= P.
struct GaussianStateModel {
    double P = 1.0;
    double Q = 1.0;
    double N1 = 1.0;
    double N2 = 1.0;
    void validate() const;  // P,Q >= 0 and N1,N2 > 0
};

enum class SourceRegime { Degraded, LessNoisy, MoreCapable, Unordered };

const char* to_string(SourceRegime r);

// Half-open regime bands in beta for the erasure/crossover source pair:
// [0, 2e) Degraded, [2e, 4e(1-e)) LessNoisy, [4e(1-e), h2(e)) MoreCapable,
// [h2(e), 1] Unordered.
SourceRegime classify_source_regime(double eps, double beta);

// Joint source pmf over axes A(2), B(3), E(2) for the BecBsc model.
FinitePmf becbsc_joint_pmf(const BecBscModel& m);

// Joint source pmf over axes A(2), B(3), E(3) for the binary state model.
FinitePmf binary_state_source_pmf(const BinaryStateModel& m);

// Channel conditionals p(Y,Z | X) resp. p(Y,Z | X,A).
CondPmf becbsc_channel(const BecBscModel& m);
CondPmf binary_state_channel(const BinaryStateModel& m);

}  // namespace skr
