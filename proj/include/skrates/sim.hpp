#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "skrates/generic.hpp"

namespace skr {

using ModelVariant = std::variant<BecBscModel, BinaryStateModel>;

SystemSpec make_system(const ModelVariant& m);

// ceil(n * rate) with a small guard against floating-point wobble; the
// number of codewords at this rate is 2^exp_bits(n, rate).
int exp_bits(int n, double rate);

// --------------------------------------------------------------------------
// Joint source-channel scheme: one block of n symbols carries both the source
// description and the channel code (one channel use per source symbol).
// --------------------------------------------------------------------------

struct JointSimConfig {
    int n = 4;
    double R1 = 0.0;  // coarse-layer codewords: 2^ceil(n*R1)
    double R2 = 0.0;  // fine-layer codewords per (coarse, fictitious) pair
    double Rf = 0.0;  // fictitious-message randomization rate
    double Rk = 0.0;  // key rate; bin count 2^ceil(n*Rk)
    double delta = 0.1;
    int trials = 1;
    std::uint64_t seed = 0;
    ModelVariant model = BecBscModel{};

    // Aux-independent checks: n >= 2, rates >= 0, 0 < delta <= 1, trials >= 1,
    // key bits <= fine+fictitious bits, total exponent bits <= 20.
    void validate() const;
};

// Dense per-symbol reference statistics derived from (system, auxiliaries):
// codeword generators, typicality targets for encoder/decoder, and the
// mutual-information levels that delimit the scheme's operating region.
struct JointRefs {
    int nA = 0, nB = 0, nE = 0, nU = 0, nV = 0, nX = 0, nY = 0, nZ = 0;
    std::vector<double> p_abe;          // [A*B*E] source law (trial sampling)
    std::vector<double> p_u;            // [U] codeword layer 1
    std::vector<double> p_v_given_u;    // [U*V] codeword layer 2 rows
    std::vector<double> p_ua;           // [U*A] encoder stage-1 target
    std::vector<double> p_uva;          // [U*V*A] encoder stage-2 target
    std::vector<double> p_uvby;         // [U*V*B*Y] decoder target
    std::vector<double> p_x_given_va;   // [V*A*X] channel-input sampler
    std::vector<double> p_ez_given_va;  // [V*A*E*Z] eavesdropper view per symbol
    std::vector<double> p_yz_given_xa;  // [X*A*Y*Z] channel sampler
    double mi_u_a = 0.0;                // I(U;A)    covering threshold, layer 1
    double mi_v_a_given_u = 0.0;        // I(V;A|U)  covering threshold, layer 2
    double mi_uv_by = 0.0;              // I(UV;BY)  packing threshold, total
    double mi_v_by_given_u = 0.0;       // I(V;BY|U) packing threshold, layer 2
    double mi_v_ez_given_u = 0.0;       // I(V;EZ|U) leakage level
};

JointRefs make_joint_refs(const SystemSpec& sys, const AuxSpecJoint& aux);

struct JointCodebook {
    int n = 0;
    int b1 = 0, b2 = 0, bf = 0, kb = 0;  // exponent bits per layer / key
    double delta = 0.1;                  // typicality tolerance it was built at
    std::vector<std::vector<int>> u;     // [2^b1] words of length n
    std::vector<std::vector<int>> v;     // [(2^b1)*(2^b2)*(2^bf)] words, row-major (r1,r2,rf)
    std::vector<int> key_bin;            // [(2^b2)*(2^bf)] -> key in [0, 2^kb)
    std::uint64_t seed = 0;

    const std::vector<int>& v_word(int r1, int r2, int rf) const;
    int key_of(int r2, int rf) const;
};

// Draws layered codewords from the (conditional) typical sets by rejection and
// bins the fine-layer index space into 2^kb equal key bins. Checks the key
// rate against the leakage level of the configured auxiliaries. Deterministic
// in cfg.seed. Throws when a typical set is empty at cfg.delta.
JointCodebook build_joint_codebook(const JointSimConfig& cfg, const AuxSpecJoint& aux);

struct JointEncodeResult {
    int r1 = 0, r2 = 0, rf = 0;
    int key = 0;
    bool fallback_u = false;  // no coarse codeword was jointly typical
    bool fallback_v = false;  // no fine codeword was jointly typical
    std::vector<int> x;       // channel inputs, length n
};

// Picks a coarse index jointly typical with the state/source word (uniform
// among candidates; uniform over all indices when none, flagged), then a fine
// index inside the (r1, rf) row likewise, then samples channel inputs
// componentwise from p(x|v,a).
JointEncodeResult joint_encode(const JointCodebook& cb, const JointRefs& ref,
                               const std::vector<int>& a_seq, int rf, std::mt19937_64& g);

struct JointDecodeResult {
    bool ok = false;
    int r1 = 0, r2 = 0, rf = 0;
    int key = 0;
};

// Exhaustive scan for the unique index tuple whose (u, v, b, y) word is
// jointly typical at the codebook's tolerance; ok=false when none or several.
JointDecodeResult joint_decode(const JointCodebook& cb, const JointRefs& ref,
                               const std::vector<int>& b_seq, const std::vector<int>& y_seq);

// True when exact leakage enumeration fits the budget:
// n <= 6 and (|E||Z|)^n * 2^kb <= 2^22.
bool exact_leakage_in_budget(int n, int nE, int nZ, int kb);

// Assembles the exact joint law of (key, eavesdropper source word, channel
// tap word) for this codebook by summing over all state words, encoder index
// choices and channel-input laws, then returns I(K; E^n Z^n)/n in bits.
// Throws when out of budget.
double exact_leakage_joint(const JointCodebook& cb, const JointRefs& ref,
                           const JointSimConfig& cfg);

struct SimReport {
    double agreement_rate = 1.0;        // key match among decoded trials (1.0 if none decoded)
    double encode_failure_rate = 0.0;   // trials where an encoder fallback fired
    double decode_error_rate = 0.0;     // trials with no unique typical tuple
    double leakage_bits_per_symbol = 0.0;
    std::string leakage_method;         // "exact" | "plugin"
    int trials_run = 0;
};

// Runs cfg.trials Monte Carlo trials in batches of 250 with a fresh codebook
// per batch; per-trial RNG is derived from (seed, trial index) so a parallel
// schedule would reproduce the serial result. Leakage uses the exact
// enumerator when in budget, otherwise the plug-in estimate on the pooled
// (key, per-symbol (E,Z) count vector) samples.
SimReport run_joint_experiment(const JointSimConfig& cfg, const AuxSpecJoint& aux);

// --------------------------------------------------------------------------
// Separate source/channel scheme: n source symbols compressed into indices,
// carried over m = (integer) * n channel uses by a superposition code.
// --------------------------------------------------------------------------

struct SeparateSimConfig {
    int n = 4;  // source blocklength
    int m = 4;  // channel blocklength; m % n == 0
    double S1 = 0.0;    // coarse source codewords: 2^ceil(n*S1)
    double S2p = 0.0;   // fine source sub-codebook selector
    double S2pp = 0.0;  // fine source codewords per (s1, s2p)
    double R1 = 0.0;    // coarse-bin rate; R1 <= S1, bins B1
    double R2 = 0.0;    // fine-bin rate, bins B2(s1, .)
    double Rc = 0.0;    // channel cloud centers: 2^ceil(n*Rc)
    double Rp = 0.0;    // channel satellites per cloud (with Rf)
    double Rf = 0.0;    // fictitious-message rate
    std::optional<double> Rk;  // key rate; defaults to S1+S2p+S2pp
    double delta = 0.1;
    int trials = 1;
    std::uint64_t seed = 0;
    ModelVariant model = BecBscModel{};

    // Checks R1+R2 == Rc+Rp (and the same identity on exponent bits, which
    // the index map between source bins and channel messages requires),
    // R1 <= Rc, rate non-negativity, blocklengths, budgets.
    void validate() const;
    double key_rate() const;  // Rk or its default
};

struct SeparateRefs {
    int nA = 0, nB = 0, nE = 0, nU = 0, nV = 0, nX = 0, nY = 0, nZ = 0, nQ = 0, nT = 0;
    std::vector<double> p_abe;         // [A*B*E]
    std::vector<double> p_u;           // [U]
    std::vector<double> p_v_given_u;   // [U*V]
    std::vector<double> p_ua;          // [U*A]   encoder stage-1 target
    std::vector<double> p_uva;         // [U*V*A] encoder stage-2 target
    std::vector<double> p_ub;          // [U*B]   decoder stage-2 target
    std::vector<double> p_uvb;         // [U*V*B] decoder stage-3 target
    std::vector<double> p_q;           // [Q]
    std::vector<double> p_t_given_q;   // [Q*T]
    std::vector<double> p_qty;         // [Q*T*Y] decoder stage-1 target
    std::vector<double> p_x_given_t;   // [T*X]
    std::vector<double> p_yz_given_x;  // [X*Y*Z]
    double mi_u_a = 0.0;               // I(U;A)   covering threshold, coarse
    double mi_v_a_given_u = 0.0;       // I(V;A|U) covering threshold, fine
    double mi_u_b = 0.0;               // I(U;B)   binning threshold, coarse
    double mi_v_b_given_u = 0.0;       // I(V;B|U) binning threshold, fine
    double mi_t_y = 0.0;               // I(T;Y)   channel packing, total
    double mi_t_y_given_q = 0.0;       // I(T;Y|Q) channel packing, satellite
    double mi_q_y = 0.0;               // I(Q;Y)
    double mi_t_z_given_q = 0.0;       // I(T;Z|Q) fictitious-rate ceiling
};

// Requires an uncoupled channel and the Q refinement layer in aux.
SeparateRefs make_separate_refs(const SystemSpec& sys, const AuxSpecSeparate& aux);

struct SeparateCodebook {
    int n = 0, m = 0;
    int bs1 = 0, bs2p = 0, bs2pp = 0;  // source codeword index bits
    int b1 = 0, b2 = 0;                // source bin bits
    int bc = 0, bp = 0, bf = 0;        // channel index bits
    int kb = 0;                        // key bits
    double delta = 0.1;                // typicality tolerance it was built at
    std::vector<std::vector<int>> u;   // [2^bs1] words of length n
    std::vector<std::vector<int>> v;   // [(2^bs1)*(2^bs2p)*(2^bs2pp)] length n
    std::vector<int> bin1;             // [2^bs1] -> [0, 2^b1)
    std::vector<std::vector<int>> bin2;  // per s1: [(2^bs2p)*(2^bs2pp)] -> [0, 2^b2)
    std::vector<std::vector<int>> q;   // [2^bc] words of length m
    std::vector<std::vector<int>> t;   // [(2^bc)*(2^bp)*(2^bf)] length m
    std::uint64_t seed = 0;

    const std::vector<int>& v_word(int s1, int s2p, int s2pp) const;
    const std::vector<int>& t_word(int rc, int rp, int rf) const;
    // Bin indices (r1, r2) packed into one channel message, split as
    // (cloud rc, satellite rp); the coarse bin is recoverable from the cloud
    // alone: r1 = map_coarse(rc).
    std::pair<int, int> map_to_channel(int r1, int r2) const;
    std::pair<int, int> map_from_channel(int rc, int rp) const;
    int map_coarse(int rc) const;
    // Key from the codeword indices: packed verbatim when the key width
    // equals the total index width, otherwise mixed and truncated to kb bits.
    int key_of(int s1, int s2p, int s2pp) const;
};

// Also checks Rf <= (m/n) * I(T;Z|Q) + 1e-9 against the configured
// auxiliaries (the fictitious rate cannot exceed what the eavesdropper's
// channel absorbs).
SeparateCodebook build_separate_codebook(const SeparateSimConfig& cfg,
                                         const AuxSpecSeparate& aux);

struct SeparateEncodeResult {
    int s1 = 0, s2pp = 0;
    int r1 = 0, r2 = 0, rc = 0, rp = 0;
    bool fallback_s1 = false;   // no typical coarse word; smallest index used
    bool fallback_s2 = false;   // no typical fine word; smallest index used
    std::vector<int> x;         // channel inputs, length m
};

// Smallest typical coarse index, then smallest typical fine index within the
// (s1, s2p) slice (smallest-index fallback on failure, flagged), bin lookup,
// index map to the channel message, componentwise x ~ p(x|t).
SeparateEncodeResult separate_encode(const SeparateCodebook& cb, const SeparateRefs& ref,
                                     const std::vector<int>& a_seq, int s2p, int rf,
                                     std::mt19937_64& g);

struct SeparateDecodeResult {
    bool ok = false;
    int stage = 0;  // failing stage: 1 channel, 2 coarse source, 3 fine source
    int rc = 0, rp = 0, rf = 0;
    int s1 = 0, s2p = 0, s2pp = 0;
};

// Stage 1: unique (rc,rp,rf) with (q,t,y) jointly typical. Stage 2: unique s1
// in coarse bin map_coarse(rc) with (u,b) typical. Stage 3: unique (s2p,s2pp)
// in the fine bin with (u,v,b) typical.
SeparateDecodeResult separate_decode(const SeparateCodebook& cb, const SeparateRefs& ref,
                                     const std::vector<int>& b_seq,
                                     const std::vector<int>& y_seq);

// Batched trials as in run_joint_experiment. Leakage is always the plug-in
// estimate on (key, concatenated per-symbol count vectors of E^n and Z^m),
// reported per source symbol.
SimReport run_separate_experiment(const SeparateSimConfig& cfg, const AuxSpecSeparate& aux);

}  // namespace skr
