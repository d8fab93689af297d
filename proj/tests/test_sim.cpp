#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "skrates/generic.hpp"
#include "skrates/rng.hpp"
#include "skrates/sim.hpp"

using namespace skr;

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Joint auxiliary with V = X = A (the channel input copies the state) and a
// trivial U; useful because it makes the encoder's covering step depend only
// on how well the drawn codewords track the state sequence.
AuxSpecJoint ident_aux() {
    std::vector<double> t(2 * 4, 0.0);
    for (int a = 0; a < 2; ++a) t[a * 4 + a * 2 + a] = 1.0;
    CondPmf p_vx({{"A", 2}}, {{"V", 2}, {"X", 2}}, std::move(t));
    CondPmf p_u({{"V", 2}}, {{"U", 1}}, {1.0, 1.0});
    return AuxSpecJoint{std::move(p_vx), std::move(p_u)};
}

const BinaryStateModel kBsm{0.1, 0.25, 0.2, 0.6};

JointSimConfig joint_in_region_cfg() {
    JointSimConfig cfg;
    cfg.n = 10;
    cfg.R1 = 0.1;
    cfg.R2 = 0.15;
    cfg.Rf = 0.05;
    cfg.Rk = 0.009;
    cfg.delta = 0.25;
    cfg.trials = 500;
    cfg.seed = 7;
    cfg.model = kBsm;
    return cfg;
}

SeparateSimConfig separate_in_region_cfg() {
    SeparateSimConfig cfg;
    cfg.n = cfg.m = 10;
    cfg.S1 = 0.1;
    cfg.S2p = 0.1;
    cfg.S2pp = 0.15;
    cfg.R1 = 0.1;
    cfg.R2 = 0.25;
    cfg.Rc = 0.1;
    cfg.Rp = 0.25;
    cfg.Rf = 0.15;
    cfg.Rk = 0.1;
    cfg.delta = 0.35;
    cfg.trials = 500;
    cfg.seed = 7;
    cfg.model = BecBscModel{0.25, 0.1, 0.25};
    return cfg;
}

}  // namespace

TEST_CASE("exp_bits rounds rate exponents with a wobble guard") {
    CHECK(exp_bits(10, 0.15) == 2);
    CHECK(exp_bits(10, 0.2) == 2);  // 2.0 - guard stays at 2
    CHECK(exp_bits(5, 0.0) == 0);
    CHECK(exp_bits(6, 1.0) == 6);
    CHECK(exp_bits(10, 0.009) == 1);
    CHECK(exp_bits(4, 0.67) == 3);
    CHECK(exp_bits(10, 0.3) == 3);
    CHECK(exp_bits(3, 1.0 / 3.0) == 1);
}

TEST_CASE("joint config validation rejects malformed inputs") {
    JointSimConfig good = joint_in_region_cfg();
    CHECK_NOTHROW(good.validate());

    JointSimConfig c = good;
    c.n = 1;
    CHECK_THROWS_WITH_AS(c.validate(), "blocklength n must be >= 2", std::invalid_argument);

    c = good;
    c.delta = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), "delta must lie in (0, 1]", std::invalid_argument);
    c.delta = 1.2;
    CHECK_THROWS_WITH_AS(c.validate(), "delta must lie in (0, 1]", std::invalid_argument);

    c = good;
    c.trials = 0;
    CHECK_THROWS_WITH_AS(c.validate(), "trials must be >= 1", std::invalid_argument);

    c = good;
    c.R1 = -0.1;
    CHECK_THROWS_WITH(c.validate(), doctest::Contains("must be a finite non-negative rate"));

    c = good;
    c.R1 = 1.1;
    c.R2 = 1.0;
    c.Rf = 0.0;
    c.Rk = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), "codebook memory bound exceeded: 2^(n(R1+R2+Rf)) > 2^20",
                         std::invalid_argument);

    c = good;
    c.R2 = 0.1;
    c.Rf = 0.0;
    c.Rk = 0.2;
    CHECK_THROWS_WITH_AS(c.validate(), "key rate exceeds the fine-layer index rate R2+Rf",
                         std::invalid_argument);
}

TEST_CASE("joint codebook: shape, determinism, key-bin partition, build-time guards") {
    const JointSimConfig cfg = joint_in_region_cfg();
    const AuxSpecJoint sx = make_state_xor_aux(0.5);
    JointCodebook cb = build_joint_codebook(cfg, sx);

    CHECK(cb.n == 10);
    CHECK(cb.b1 == 1);
    CHECK(cb.b2 == 2);
    CHECK(cb.bf == 1);
    CHECK(cb.kb == 1);
    CHECK(cb.u.size() == 2);
    CHECK(cb.v.size() == 16);  // 2^(b1+b2+bf)
    CHECK(cb.key_bin.size() == 8);
    for (const auto& w : cb.u) CHECK(w.size() == 10);
    for (const auto& w : cb.v) CHECK(w.size() == 10);

    // v_word addresses the row-major (r1, r2, rf) layout
    for (int r1 = 0; r1 < 2; ++r1)
        for (int r2 = 0; r2 < 4; ++r2)
            for (int rf = 0; rf < 2; ++rf)
                CHECK(&cb.v_word(r1, r2, rf) ==
                      &cb.v[static_cast<std::size_t>(((r1 << cb.b2) | r2) << cb.bf | rf)]);

    // fine-index pairs are split into equal key bins: 8 pairs, 2 keys, 4 each
    std::map<int, int> key_count;
    for (int r2 = 0; r2 < 4; ++r2)
        for (int rf = 0; rf < 2; ++rf) {
            int k = cb.key_of(r2, rf);
            CHECK(k >= 0);
            CHECK(k < 2);
            ++key_count[k];
        }
    CHECK(key_count[0] == 4);
    CHECK(key_count[1] == 4);

    // deterministic in the seed
    JointCodebook cb2 = build_joint_codebook(cfg, sx);
    CHECK(cb2.u == cb.u);
    CHECK(cb2.v == cb.v);
    CHECK(cb2.key_bin == cb.key_bin);

    // a key rate far below the leakage level of the auxiliaries is rejected
    JointSimConfig bad = cfg;
    bad.R1 = 0.1;
    bad.R2 = 0.6;
    bad.Rf = 0.0;
    bad.Rk = 0.0;
    CHECK_THROWS_WITH_AS(build_joint_codebook(bad, sx),
                         "key rate inconsistent with the bin structure: Rk should be near "
                         "R2+Rf minus the eavesdropper information of the auxiliaries",
                         std::invalid_argument);
}

TEST_CASE("joint codewords are drawn from the robust typical sets") {
    // At delta = 0.1 and n = 6 a fair-coin word is typical iff it has exactly
    // three ones, and each of the four uniform (u, v) cells must be hit once
    // or twice.
    JointSimConfig cfg;
    cfg.n = 6;
    cfg.R1 = 0.5;
    cfg.R2 = 0.5;
    cfg.Rf = 0.0;
    cfg.Rk = 0.0;
    cfg.delta = 0.1;
    cfg.trials = 1;
    cfg.seed = 11;
    cfg.model = kBsm;
    const AuxSpecJoint sx = make_state_xor_aux(0.5);
    JointCodebook cb = build_joint_codebook(cfg, sx);
    REQUIRE(cb.b1 == 3);
    REQUIRE(cb.b2 == 3);

    for (const auto& w : cb.u) {
        int ones = 0;
        for (int s : w) ones += s;
        CHECK(ones == 3);
    }
    for (int r1 = 0; r1 < 8; ++r1) {
        const auto& uw = cb.u[static_cast<std::size_t>(r1)];
        for (int r2 = 0; r2 < 8; ++r2) {
            const auto& vw = cb.v_word(r1, r2, 0);
            int cell[4] = {0, 0, 0, 0};
            for (int i = 0; i < 6; ++i) ++cell[uw[static_cast<std::size_t>(i)] * 2 +
                                                vw[static_cast<std::size_t>(i)]];
            for (int c = 0; c < 4; ++c) {
                CHECK(cell[c] >= 1);
                CHECK(cell[c] <= 2);
            }
        }
    }
}

TEST_CASE("joint codebook build reports empty typical sets") {
    // n = 5 leaves no integer count within 0.05 of a fair coin
    JointSimConfig cfg;
    cfg.n = 5;
    cfg.R1 = 0.4;
    cfg.R2 = 0.4;
    cfg.Rf = 0.0;
    cfg.Rk = 0.2;
    cfg.delta = 0.05;
    cfg.trials = 1;
    cfg.seed = 1;
    cfg.model = kBsm;
    CHECK_THROWS_WITH_AS(build_joint_codebook(cfg, make_state_xor_aux(0.5)),
                         "typical set is empty at this blocklength and delta",
                         std::runtime_error);

    // with a 0.1 flip the (u, v) cells need counts in [2.58, 2.82] out of 6:
    // the coarse layer is fine but no conditional word exists
    JointSimConfig cfg2;
    cfg2.n = 6;
    cfg2.R1 = 0.5;
    cfg2.R2 = 0.5;
    cfg2.Rf = 0.0;
    cfg2.Rk = 0.4;
    cfg2.delta = 0.02;
    cfg2.trials = 1;
    cfg2.seed = 1;
    cfg2.model = kBsm;
    CHECK_THROWS_WITH_AS(build_joint_codebook(cfg2, make_state_xor_aux(0.1)),
                         "conditional typical set is empty at this delta", std::runtime_error);
}

TEST_CASE("joint encode/decode agree on clean trials and reject bad word lengths") {
    const JointSimConfig cfg = joint_in_region_cfg();
    const AuxSpecJoint sx = make_state_xor_aux(0.5);
    JointRefs ref = make_joint_refs(make_system(cfg.model), sx);
    JointCodebook cb = build_joint_codebook(cfg, sx);

    auto g0 = derive_engine(1, 0, 0);
    CHECK_THROWS_WITH_AS(joint_encode(cb, ref, std::vector<int>(5, 0), 0, g0),
                         "state word length mismatch", std::invalid_argument);

    int ok = 0, match = 0;
    for (int t = 0; t < 20; ++t) {
        auto g = derive_engine(cfg.seed, 2, static_cast<std::uint64_t>(t));
        std::vector<int> a(cfg.n), b(cfg.n);
        for (int i = 0; i < cfg.n; ++i) {
            int f = sample_weights(ref.p_abe.data(), ref.nA * ref.nB * ref.nE, g);
            a[i] = f / (ref.nB * ref.nE);
            b[i] = (f / ref.nE) % ref.nB;
        }
        int rf = static_cast<int>(uniform_below(g, 1u << cb.bf));
        JointEncodeResult enc = joint_encode(cb, ref, a, rf, g);
        CHECK(enc.rf == rf);
        CHECK(static_cast<int>(enc.x.size()) == cfg.n);
        CHECK(enc.key == cb.key_of(enc.r2, enc.rf));
        std::vector<int> y(cfg.n);
        for (int i = 0; i < cfg.n; ++i) {
            const double* row =
                ref.p_yz_given_xa.data() + (enc.x[i] * ref.nA + a[i]) * ref.nY * ref.nZ;
            int f2 = sample_weights(row, ref.nY * ref.nZ, g);
            y[i] = f2 / ref.nZ;
        }
        JointDecodeResult dec = joint_decode(cb, ref, b, y);
        if (dec.ok) {
            ++ok;
            if (dec.key == enc.key) ++match;
        }
    }
    // frozen: all 20 trials decode and every decoded key matches
    CHECK(ok == 20);
    CHECK(match == 20);
}

TEST_CASE("joint experiment inside the operating region: frozen report and determinism") {
    const JointSimConfig cfg = joint_in_region_cfg();
    const AuxSpecJoint sx = make_state_xor_aux(0.5);
    SimReport r = run_joint_experiment(cfg, sx);
    CHECK(r.trials_run == 500);
    CHECK(r.leakage_method == "plugin");
    CHECK(near(r.agreement_rate, 1.0, 1e-12));
    CHECK(near(r.encode_failure_rate, 0.006, 1e-12));
    CHECK(near(r.decode_error_rate, 0.008, 1e-12));
    CHECK(near(r.leakage_bits_per_symbol, 0.046684784, 1e-9));

    SimReport r2 = run_joint_experiment(cfg, sx);
    CHECK(r2.agreement_rate == r.agreement_rate);
    CHECK(r2.encode_failure_rate == r.encode_failure_rate);
    CHECK(r2.decode_error_rate == r.decode_error_rate);
    CHECK(r2.leakage_bits_per_symbol == r.leakage_bits_per_symbol);
    CHECK(r2.leakage_method == r.leakage_method);
    CHECK(r2.trials_run == r.trials_run);
}

TEST_CASE("joint experiment outside the region: packing and covering failures") {
    // fine rate far above the packing threshold: the decoder always fails
    JointSimConfig packing;
    packing.n = 10;
    packing.R1 = 0.05;
    packing.R2 = 1.05;
    packing.Rf = 0.1;
    packing.Rk = 0.96128;
    packing.delta = 0.25;
    packing.trials = 500;
    packing.seed = 7;
    packing.model = kBsm;
    SimReport rp = run_joint_experiment(packing, make_state_xor_aux(0.5));
    CHECK(rp.decode_error_rate == 1.0);

    // a state-tracking auxiliary needs enough codewords to cover the state:
    // raising the fine rate lowers the encoder fallback rate
    const BinaryStateModel cm{0.5, 0.25, 0.2, 0.6};
    double enc_rate[2];
    int idx = 0;
    for (double R2 : {0.85, 1.15}) {
        JointSimConfig c2;
        c2.n = 10;
        c2.R1 = 0.1;
        c2.R2 = R2;
        c2.Rf = 0.05;
        c2.Rk = R2 + 0.05 - 0.4;
        c2.delta = 0.25;
        c2.trials = 500;
        c2.seed = 7;
        c2.model = cm;
        enc_rate[idx++] = run_joint_experiment(c2, ident_aux()).encode_failure_rate;
    }
    CHECK(near(enc_rate[0], 0.658, 1e-12));
    CHECK(near(enc_rate[1], 0.114, 1e-12));
    CHECK(enc_rate[1] < enc_rate[0]);
}

TEST_CASE("joint decode errors grow as the key rate pushes past the leakage level") {
    // Rk tracks R2 + Rf - I(V;EZ|U); raising R2 (and the key with it) expands
    // the fine layer past the packing threshold and the decoder degrades.
    const AuxSpecJoint sx = make_state_xor_aux(0.5);
    const double want_dec[3] = {0.202, 0.384, 0.842};
    double prev = -1.0;
    int idx = 0;
    for (double R2 : {0.45, 0.65, 0.85}) {
        JointSimConfig cfg;
        cfg.n = 10;
        cfg.R1 = 0.05;
        cfg.R2 = R2;
        cfg.Rf = 0.1;
        cfg.Rk = R2 + 0.1 - 0.18872;
        cfg.delta = 0.25;
        cfg.trials = 500;
        cfg.seed = 7;
        cfg.model = kBsm;
        SimReport r = run_joint_experiment(cfg, sx);
        CHECK(near(r.decode_error_rate, want_dec[idx], 1e-12));
        CHECK(near(r.encode_failure_rate, 0.006, 1e-12));
        CHECK(r.decode_error_rate > prev);
        prev = r.decode_error_rate;
        ++idx;
    }
}

TEST_CASE("exact leakage: budget predicate, guards, and frozen decreasing trend") {
    CHECK(exact_leakage_in_budget(4, 3, 2, 1));
    CHECK(exact_leakage_in_budget(6, 3, 2, 0));
    CHECK_FALSE(exact_leakage_in_budget(7, 3, 2, 0));   // blocklength cap
    CHECK_FALSE(exact_leakage_in_budget(6, 3, 2, 10));  // 6^6 * 2^10 > 2^22
    CHECK_FALSE(exact_leakage_in_budget(2, 3, 2, 22));

    const AuxSpecJoint up = make_uniform_passthrough_aux();
    JointRefs ref = make_joint_refs(make_system(kBsm), up);

    double prev = 1e9;
    const double want[3] = {0.030989262, 0.012565135, 0.003025145};
    int idx = 0;
    for (int n : {4, 5, 6}) {
        JointSimConfig cfg;
        cfg.n = n;
        cfg.R1 = 0.0;
        cfg.R2 = 0.67;
        cfg.Rf = 0.1;
        cfg.Rk = 0.16;
        cfg.delta = 0.25;
        cfg.trials = 1;
        cfg.seed = 4;
        cfg.model = kBsm;
        JointCodebook cb = build_joint_codebook(cfg, up);
        double leak = exact_leakage_joint(cb, ref, cfg);
        CHECK(near(leak, want[idx], 1e-9));
        CHECK(leak < prev);
        prev = leak;
        ++idx;
    }

    // without a key there is nothing to leak
    JointSimConfig zk;
    zk.n = 4;
    zk.R1 = 0.0;
    zk.R2 = 0.67;
    zk.Rf = 0.1;
    zk.Rk = 0.0;
    zk.delta = 0.25;
    zk.trials = 1;
    zk.seed = 4;
    zk.model = kBsm;
    JointCodebook cbz = build_joint_codebook(zk, up);
    CHECK(exact_leakage_joint(cbz, ref, zk) == 0.0);

    // blocklength disagreement and budget overruns are rejected
    JointSimConfig other = zk;
    other.n = 5;
    CHECK_THROWS_WITH_AS(exact_leakage_joint(cbz, ref, other),
                         "config and codebook disagree on the blocklength",
                         std::invalid_argument);
    const JointSimConfig big = joint_in_region_cfg();
    const AuxSpecJoint sx = make_state_xor_aux(0.5);
    JointRefs ref_sx = make_joint_refs(make_system(kBsm), sx);
    JointCodebook cb_big = build_joint_codebook(big, sx);
    CHECK_THROWS_WITH_AS(exact_leakage_joint(cb_big, ref_sx, big),
                         "exact leakage enumeration budget exceeded; use the plug-in estimator",
                         std::runtime_error);
}

TEST_CASE("exact leakage on a hand-built codebook whose key equals a state bit") {
    // Two-symbol codebook over the state-copying auxiliary: the unique typical
    // fine word always equals the state word, the key bin is its first bit,
    // and the eavesdropper sees the state directly (no erasures at eps = 0).
    // The key is then one fair state bit per two symbols: exactly 0.5 bit/symbol.
    const BinaryStateModel noiseless_tap{0.5, 0.25, 0.2, 0.0};
    JointRefs ref = make_joint_refs(make_system(noiseless_tap), ident_aux());

    JointCodebook cb;
    cb.n = 2;
    cb.b1 = 0;
    cb.b2 = 2;
    cb.bf = 0;
    cb.kb = 1;
    cb.delta = 0.5;
    cb.u = {{0, 0}};
    cb.v = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    cb.key_bin = {0, 0, 1, 1};
    cb.seed = 0;

    JointSimConfig cfg;
    cfg.n = 2;
    cfg.R1 = 0.0;
    cfg.R2 = 1.0;
    cfg.Rf = 0.0;
    cfg.Rk = 0.5;
    cfg.delta = 0.5;
    cfg.trials = 1;
    cfg.seed = 0;
    cfg.model = noiseless_tap;

    CHECK(near(exact_leakage_joint(cb, ref, cfg), 0.5, 1e-12));
}

TEST_CASE("exact leakage matches a long plug-in estimate on a tiny codebook") {
    JointSimConfig cfg;
    cfg.n = 2;
    cfg.R1 = 0.0;
    cfg.R2 = 1.0;
    cfg.Rf = 0.5;
    cfg.Rk = 0.5;
    cfg.delta = 0.5;
    cfg.trials = 1;
    cfg.seed = 4;
    cfg.model = kBsm;
    const AuxSpecJoint up = make_uniform_passthrough_aux();
    JointRefs ref = make_joint_refs(make_system(kBsm), up);
    JointCodebook cb = build_joint_codebook(cfg, up);
    const double exact = exact_leakage_joint(cb, ref, cfg);
    CHECK(near(exact, 0.016724281, 1e-9));  // frozen at seed 4

    // 50000 independent protocol runs, then the empirical mutual information
    // between the key and the full eavesdropper word
    const int M = 50000;
    const int cells = ref.nE * ref.nZ;
    std::vector<double> hist(static_cast<std::size_t>(1 << cb.kb) * cells * cells, 0.0);
    for (int t = 0; t < M; ++t) {
        auto g = derive_engine(99, 2, static_cast<std::uint64_t>(t));
        std::vector<int> a(2), e(2);
        for (int i = 0; i < 2; ++i) {
            int f = sample_weights(ref.p_abe.data(), ref.nA * ref.nB * ref.nE, g);
            a[i] = f / (ref.nB * ref.nE);
            e[i] = f % ref.nE;
        }
        int rf = static_cast<int>(uniform_below(g, 1u << cb.bf));
        JointEncodeResult enc = joint_encode(cb, ref, a, rf, g);
        int sym[2];
        for (int i = 0; i < 2; ++i) {
            const double* row =
                ref.p_yz_given_xa.data() + (enc.x[i] * ref.nA + a[i]) * ref.nY * ref.nZ;
            int f2 = sample_weights(row, ref.nY * ref.nZ, g);
            sym[i] = e[i] * ref.nZ + (f2 % ref.nZ);
        }
        hist[(static_cast<std::size_t>(enc.key) * cells + sym[0]) * cells + sym[1]] += 1.0;
    }
    const int nk = 1 << cb.kb;
    std::vector<double> pk(nk, 0.0), pw(static_cast<std::size_t>(cells) * cells, 0.0);
    for (int k = 0; k < nk; ++k)
        for (int w = 0; w < cells * cells; ++w) {
            double p = hist[static_cast<std::size_t>(k) * cells * cells + w] / M;
            pk[static_cast<std::size_t>(k)] += p;
            pw[static_cast<std::size_t>(w)] += p;
        }
    double mi = 0.0;
    for (int k = 0; k < nk; ++k)
        for (int w = 0; w < cells * cells; ++w) {
            double p = hist[static_cast<std::size_t>(k) * cells * cells + w] / M;
            if (p > 0.0)
                mi += p * std::log2(p / (pk[static_cast<std::size_t>(k)] *
                                         pw[static_cast<std::size_t>(w)]));
        }
    CHECK(near(exact, mi / 2.0, 0.01));  // measured gap: 0.000847
}

TEST_CASE("separate config validation rejects malformed inputs") {
    SeparateSimConfig good = separate_in_region_cfg();
    CHECK_NOTHROW(good.validate());
    CHECK(good.key_rate() == 0.1);
    SeparateSimConfig dflt = good;
    dflt.Rk.reset();
    CHECK(near(dflt.key_rate(), 0.35, 1e-15));  // S1 + S2p + S2pp

    SeparateSimConfig c = good;
    c.n = 1;
    CHECK_THROWS_WITH_AS(c.validate(), "source blocklength n must be >= 2",
                         std::invalid_argument);
    c = good;
    c.m = 1;
    CHECK_THROWS_WITH_AS(c.validate(), "channel blocklength m must be >= 2",
                         std::invalid_argument);
    c = good;
    c.m = 15;
    CHECK_THROWS_WITH_AS(c.validate(), "channel blocklength must be an integer multiple of n",
                         std::invalid_argument);

    c = good;
    c.model = kBsm;
    CHECK_THROWS_WITH_AS(c.validate(),
                         "the separate scheme needs a channel that does not depend on the "
                         "source state",
                         std::invalid_argument);

    c = good;
    c.Rp = 0.3;
    CHECK_THROWS_WITH_AS(c.validate(), "bin rates must satisfy R1+R2 == Rc+Rp",
                         std::invalid_argument);

    c = good;
    c.R1 = 0.2;
    c.R2 = 0.15;
    c.Rc = 0.15;
    c.Rp = 0.2;  // sums still match, but the coarse bin outgrows the cloud
    CHECK_THROWS_WITH_AS(c.validate(), "coarse bin rate must satisfy R1 <= Rc",
                         std::invalid_argument);

    c = good;
    c.R1 = 0.11;
    c.R2 = 0.19;
    c.Rc = 0.2;
    c.Rp = 0.1;  // sums match, exponent bits split 2+2 vs 2+1
    CHECK_THROWS_WITH(c.validate(),
                      doctest::Contains("rate rounding breaks the bin-to-message index map"));

    c = good;
    c.S1 = 0.05;
    c.S2p = 0.0;
    c.S2pp = 0.0;
    c.R1 = 0.15;
    c.Rc = 0.15;
    c.R2 = 0.0;
    c.Rp = 0.0;
    c.Rf = 0.0;
    c.Rk = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), "coarse bins outnumber coarse codewords",
                         std::invalid_argument);

    c = good;
    c.S1 = 0.3;
    c.S2p = 0.0;
    c.S2pp = 0.1;
    c.Rk = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), "fine bins outnumber fine codewords",
                         std::invalid_argument);

    c = good;
    c.S1 = 2.1;
    c.S2p = 0.0;
    c.S2pp = 0.0;
    c.R1 = c.R2 = c.Rc = c.Rp = c.Rf = 0.0;
    c.Rk = 0.0;
    CHECK_THROWS_WITH_AS(c.validate(), "source codebook memory bound exceeded",
                         std::invalid_argument);

    c = good;
    c.Rf = 1.8;  // bc + bp + bf = 1 + 3 + 18
    CHECK_THROWS_WITH_AS(c.validate(), "channel codebook memory bound exceeded",
                         std::invalid_argument);

    c = good;
    c.Rk = 0.5;  // kb = 5 > bs1 + bs2p + bs2pp = 4
    CHECK_THROWS_WITH_AS(c.validate(), "key bits exceed the total codeword index bits",
                         std::invalid_argument);
}

TEST_CASE("separate reference laws: coupling and refinement-layer guards") {
    AuxSpecSeparate aux = make_flip_chain_aux(0.3, 0.3, 0.5);
    CHECK_THROWS_WITH_AS(make_separate_refs(make_system(kBsm), aux),
                         "separate scheme needs a channel without state coupling",
                         std::domain_error);

    AuxSpecSeparate no_q = make_flip_chain_aux(0.3, 0.3, 0.5);
    no_q.p_q_given_t.reset();
    CHECK_THROWS_WITH_AS(make_separate_refs(make_system(BecBscModel{0.25, 0.1, 0.25}), no_q),
                         "the refinement layer p(Q|T) is required here", std::invalid_argument);

    // the fictitious rate is capped by the eavesdropper information of the
    // channel auxiliaries: (m/n) * I(T;Z|Q) = 1 - h2(0.25) here
    SeparateSimConfig cfg = separate_in_region_cfg();
    cfg.Rf = 0.25;
    CHECK_THROWS_WITH(build_separate_codebook(cfg, aux),
                      doctest::Contains("fictitious-message rate exceeds"));
}

TEST_CASE("separate codebook: index maps, key packing, bin partitions, determinism") {
    const AuxSpecSeparate aux = make_flip_chain_aux(0.3, 0.3, 0.5);
    const SeparateSimConfig cfg = separate_in_region_cfg();
    SeparateCodebook cb = build_separate_codebook(cfg, aux);

    CHECK(cb.bs1 == 1);
    CHECK(cb.bs2p == 1);
    CHECK(cb.bs2pp == 2);
    CHECK(cb.b1 == 1);
    CHECK(cb.b2 == 3);
    CHECK(cb.bc == 1);
    CHECK(cb.bp == 3);
    CHECK(cb.bf == 2);
    CHECK(cb.kb == 1);

    // the source-bin to channel-message map is a bijection that keeps the
    // coarse bin recoverable from the cloud index alone
    for (int r1 = 0; r1 < 2; ++r1)
        for (int r2 = 0; r2 < 8; ++r2) {
            auto [rc, rp] = cb.map_to_channel(r1, r2);
            CHECK(rc >= 0);
            CHECK(rc < 2);
            CHECK(rp >= 0);
            CHECK(rp < 8);
            auto [g1, g2] = cb.map_from_channel(rc, rp);
            CHECK(g1 == r1);
            CHECK(g2 == r2);
            CHECK(cb.map_coarse(rc) == r1);
        }

    // kb below the index width: keys are mixed but still in range
    for (int s1 = 0; s1 < 2; ++s1)
        for (int s2p = 0; s2p < 2; ++s2p)
            for (int s2pp = 0; s2pp < 4; ++s2pp) {
                int k = cb.key_of(s1, s2p, s2pp);
                CHECK(k >= 0);
                CHECK(k < 2);
            }

    // kb equal to the index width: the key is the packed indices verbatim
    SeparateSimConfig ident = cfg;
    ident.Rf = 0.0;
    ident.Rk.reset();  // defaults to S1+S2p+S2pp = 0.35, i.e. kb = 4 = bs1+bs2p+bs2pp
    SeparateCodebook cbi = build_separate_codebook(ident, aux);
    REQUIRE(cbi.kb == 4);
    for (int s1 = 0; s1 < 2; ++s1)
        for (int s2p = 0; s2p < 2; ++s2p)
            for (int s2pp = 0; s2pp < 4; ++s2pp)
                CHECK(cbi.key_of(s1, s2p, s2pp) == ((((s1 << 1) | s2p) << 2) | s2pp));

    // kb = 0: the key collapses to the single value 0
    SeparateSimConfig zk = cfg;
    zk.Rk = 0.0;
    SeparateCodebook cbz = build_separate_codebook(zk, aux);
    CHECK(cbz.kb == 0);
    CHECK(cbz.key_of(1, 1, 3) == 0);

    // equal bin partitions on a codebook with more codewords than bins
    SeparateSimConfig part;
    part.n = part.m = 10;
    part.S1 = 0.5;
    part.S2p = 0.0;
    part.S2pp = 0.25;
    part.R1 = 0.168879;
    part.R2 = 0.2;
    part.Rc = 0.168879;
    part.Rp = 0.2;
    part.Rf = 0.0;
    part.delta = 0.35;
    part.trials = 1;
    part.seed = 7;
    part.model = BecBscModel{0.25, 0.1, 0.25};
    SeparateCodebook cbp = build_separate_codebook(part, make_flip_chain_aux(0.1, 0.1, 0.5));
    REQUIRE(cbp.bs1 == 5);
    REQUIRE(cbp.b1 == 2);
    REQUIRE(cbp.bs2p + cbp.bs2pp == 3);
    REQUIRE(cbp.b2 == 2);
    std::map<int, int> c1;
    for (int s1 = 0; s1 < 32; ++s1) {
        CHECK(cbp.bin1[static_cast<std::size_t>(s1)] >= 0);
        CHECK(cbp.bin1[static_cast<std::size_t>(s1)] < 4);
        ++c1[cbp.bin1[static_cast<std::size_t>(s1)]];
    }
    for (int b = 0; b < 4; ++b) CHECK(c1[b] == 8);
    for (int s1 = 0; s1 < 32; ++s1) {
        std::map<int, int> c2;
        for (int f = 0; f < 8; ++f) {
            int b = cbp.bin2[static_cast<std::size_t>(s1)][static_cast<std::size_t>(f)];
            CHECK(b >= 0);
            CHECK(b < 4);
            ++c2[b];
        }
        for (int b = 0; b < 4; ++b) CHECK(c2[b] == 2);
    }

    // deterministic rebuild
    SeparateCodebook cb2 = build_separate_codebook(cfg, aux);
    CHECK(cb2.u == cb.u);
    CHECK(cb2.v == cb.v);
    CHECK(cb2.bin1 == cb.bin1);
    CHECK(cb2.bin2 == cb.bin2);
    CHECK(cb2.q == cb.q);
    CHECK(cb2.t == cb.t);
}

TEST_CASE("separate encoder picks the smallest typical index and flags fallbacks") {
    // Auxiliaries that copy the source exactly: U = V = A, and the channel
    // input copies the cloud/satellite word. A codeword is typical with the
    // observed source word iff it matches it symbol for symbol (mismatch puts
    // mass on a zero cell). This pins down the encoder's choice completely.
    const BecBscModel model{0.25, 0.1, 0.25};
    const AuxSpecSeparate aux = make_flip_chain_aux(0.0, 0.0, 0.5);
    SeparateRefs ref = make_separate_refs(make_system(model), aux);

    auto make_cb = [](std::vector<std::vector<int>> uw) {
        SeparateCodebook cb;
        cb.n = cb.m = 4;
        cb.bs1 = 1;
        cb.bs2p = 0;
        cb.bs2pp = 0;
        cb.b1 = 1;
        cb.b2 = 0;
        cb.bc = 1;
        cb.bp = 0;
        cb.bf = 0;
        cb.kb = 1;
        cb.delta = 0.25;
        cb.v = uw;  // fine word per coarse index: the same word again (V = A)
        cb.u = std::move(uw);
        cb.bin1 = {0, 1};
        cb.bin2 = {{0}, {0}};
        cb.q = {{0, 0, 0, 0}, {1, 1, 1, 1}};
        cb.t = {{0, 0, 0, 0}, {1, 1, 1, 1}};
        cb.seed = 0;
        return cb;
    };
    const std::vector<int> a{0, 1, 0, 1};

    auto g = derive_engine(3, 0, 0);
    SeparateCodebook cbA = make_cb({{0, 1, 0, 1}, {1, 0, 1, 0}});
    CHECK_THROWS_WITH_AS(separate_encode(cbA, ref, std::vector<int>(3, 0), 0, 0, g),
                         "source word length mismatch", std::invalid_argument);
    SeparateEncodeResult eA = separate_encode(cbA, ref, a, 0, 0, g);
    CHECK(eA.s1 == 0);
    CHECK_FALSE(eA.fallback_s1);
    CHECK_FALSE(eA.fallback_s2);
    CHECK(eA.r1 == 0);
    CHECK(eA.rc == 0);
    CHECK(eA.x == cbA.t[0]);  // the channel input copies the selected word

    SeparateCodebook cbB = make_cb({{1, 0, 1, 0}, {0, 1, 0, 1}});
    SeparateEncodeResult eB = separate_encode(cbB, ref, a, 0, 0, g);
    CHECK(eB.s1 == 1);
    CHECK_FALSE(eB.fallback_s1);
    CHECK_FALSE(eB.fallback_s2);
    CHECK(eB.r1 == 1);
    CHECK(eB.rc == 1);
    CHECK(eB.x == cbB.t[1]);

    SeparateCodebook cbC = make_cb({{1, 0, 1, 0}, {1, 0, 1, 0}});
    SeparateEncodeResult eC = separate_encode(cbC, ref, a, 0, 0, g);
    CHECK(eC.s1 == 0);  // smallest index once nothing is typical
    CHECK(eC.fallback_s1);
    CHECK(eC.fallback_s2);
}

TEST_CASE("separate encoder covering failure is frozen at the measured rate") {
    // coarse codebook too small for the source at a tight tolerance: the
    // stage-1 fallback fires in 421 of 500 trials (and stage 2 with it)
    SeparateSimConfig cfg;
    cfg.n = cfg.m = 10;
    cfg.S1 = 0.271935;
    cfg.S2p = 0.0;
    cfg.S2pp = 0.3;
    cfg.R1 = 0.271935;
    cfg.R2 = 0.3;
    cfg.Rc = 0.271935;
    cfg.Rp = 0.3;
    cfg.Rf = 0.0;
    cfg.delta = 0.1;
    cfg.trials = 500;
    cfg.seed = 7;
    cfg.model = BecBscModel{0.25, 0.1, 0.25};
    const AuxSpecSeparate aux = make_flip_chain_aux(0.1, 0.1, 0.5);
    SeparateRefs ref = make_separate_refs(make_system(BecBscModel{0.25, 0.1, 0.25}), aux);
    SeparateCodebook cb = build_separate_codebook(cfg, aux);
    REQUIRE(cb.bs1 == 3);
    int fb1 = 0, fb2 = 0;
    for (int t = 0; t < 500; ++t) {
        auto g = derive_engine(cfg.seed, 2, static_cast<std::uint64_t>(t));
        std::vector<int> a(cfg.n), b(cfg.n);
        for (int i = 0; i < cfg.n; ++i) {
            int f = sample_weights(ref.p_abe.data(), ref.nA * ref.nB * ref.nE, g);
            a[i] = f / (ref.nB * ref.nE);
            b[i] = (f / ref.nE) % ref.nB;
        }
        int s2p = static_cast<int>(uniform_below(g, 1u << cb.bs2p));
        int rf = static_cast<int>(uniform_below(g, 1u << cb.bf));
        SeparateEncodeResult enc = separate_encode(cb, ref, a, s2p, rf, g);
        if (enc.fallback_s1) ++fb1;
        if (enc.fallback_s2) ++fb2;
    }
    CHECK(fb1 == 421);
    CHECK(fb2 == 421);
}

TEST_CASE("separate decoder fails at the coarse-source stage when bins are too big") {
    // binning rate far above I(U;B): stage 2 cannot isolate the codeword in
    // its bin, and every one of the 500 trials fails exactly there
    SeparateSimConfig cfg;
    cfg.n = cfg.m = 10;
    cfg.S1 = 0.5;
    cfg.S2p = 0.0;
    cfg.S2pp = 0.25;
    cfg.R1 = 0.168879;
    cfg.R2 = 0.25;
    cfg.Rc = 0.168879;
    cfg.Rp = 0.25;
    cfg.Rf = 0.0;
    cfg.delta = 0.35;
    cfg.trials = 500;
    cfg.seed = 7;
    cfg.model = BecBscModel{0.25, 0.1, 0.25};
    const AuxSpecSeparate aux = make_flip_chain_aux(0.1, 0.1, 0.5);
    SeparateRefs ref = make_separate_refs(make_system(BecBscModel{0.25, 0.1, 0.25}), aux);
    SeparateCodebook cb = build_separate_codebook(cfg, aux);
    REQUIRE(cb.b1 == 2);
    REQUIRE(cb.bs1 == 5);
    int st1 = 0, st2 = 0, st3 = 0, okc = 0;
    for (int t = 0; t < 500; ++t) {
        auto g = derive_engine(cfg.seed, 2, static_cast<std::uint64_t>(t));
        std::vector<int> a(cfg.n), b(cfg.n);
        for (int i = 0; i < cfg.n; ++i) {
            int f = sample_weights(ref.p_abe.data(), ref.nA * ref.nB * ref.nE, g);
            a[i] = f / (ref.nB * ref.nE);
            b[i] = (f / ref.nE) % ref.nB;
        }
        int s2p = static_cast<int>(uniform_below(g, 1u << cb.bs2p));
        int rf = static_cast<int>(uniform_below(g, 1u << cb.bf));
        SeparateEncodeResult enc = separate_encode(cb, ref, a, s2p, rf, g);
        std::vector<int> y(cfg.m);
        for (int i = 0; i < cfg.m; ++i) {
            const double* row = ref.p_yz_given_x.data() + enc.x[i] * ref.nY * ref.nZ;
            int f2 = sample_weights(row, ref.nY * ref.nZ, g);
            y[i] = f2 / ref.nZ;
        }
        SeparateDecodeResult dec = separate_decode(cb, ref, b, y);
        if (dec.ok)
            ++okc;
        else if (dec.stage == 1)
            ++st1;
        else if (dec.stage == 2)
            ++st2;
        else
            ++st3;
    }
    CHECK(okc == 0);
    CHECK(st1 == 0);
    CHECK(st2 == 500);
    CHECK(st3 == 0);
}

TEST_CASE("separate experiment inside the operating region: frozen report") {
    const AuxSpecSeparate aux = make_flip_chain_aux(0.3, 0.3, 0.5);
    const SeparateSimConfig cfg = separate_in_region_cfg();
    SimReport r = run_separate_experiment(cfg, aux);
    CHECK(r.trials_run == 500);
    CHECK(r.leakage_method == "plugin");  // the separate scheme always estimates
    CHECK(near(r.agreement_rate, 1.0, 1e-12));
    CHECK(near(r.encode_failure_rate, 0.004, 1e-12));
    CHECK(near(r.decode_error_rate, 0.004, 1e-12));
    CHECK(near(r.leakage_bits_per_symbol, 0.010397280, 1e-9));

    SimReport r2 = run_separate_experiment(cfg, aux);
    CHECK(r2.agreement_rate == r.agreement_rate);
    CHECK(r2.leakage_bits_per_symbol == r.leakage_bits_per_symbol);

    // doubled channel block and a loose tolerance: no errors at all
    SeparateSimConfig easy = cfg;
    easy.m = 20;
    easy.delta = 0.75;
    SimReport re = run_separate_experiment(easy, aux);
    CHECK(re.agreement_rate == 1.0);
    CHECK(re.encode_failure_rate == 0.0);
    CHECK(re.decode_error_rate == 0.0);

    // a constant coarse layer (|U| = 1) is always typical: no encode failures
    AuxSpecSeparate cu = make_flip_chain_aux(0.3, 0.3, 0.5);
    cu.p_u_given_v = CondPmf({{"V", 2}}, {{"U", 1}}, {1.0, 1.0});
    SeparateSimConfig ccfg = cfg;
    ccfg.delta = 0.6;
    SimReport rc = run_separate_experiment(ccfg, cu);
    CHECK(rc.agreement_rate == 1.0);
    CHECK(rc.encode_failure_rate == 0.0);
    CHECK(rc.decode_error_rate == 0.0);
}

TEST_CASE("the fictitious layer lowers eavesdropper leakage, key held fixed") {
    // same model, rates and key width; only the fictitious-message rate moves
    double leak[2];
    int idx = 0;
    for (double Rf : {0.15, 0.0}) {
        SeparateSimConfig cfg;
        cfg.n = cfg.m = 10;
        cfg.S1 = 0.1;
        cfg.S2p = 0.1;
        cfg.S2pp = 0.15;
        cfg.R1 = 0.1;
        cfg.R2 = 0.25;
        cfg.Rc = 0.1;
        cfg.Rp = 0.25;
        cfg.Rf = Rf;
        cfg.delta = 0.35;
        cfg.trials = 500;
        cfg.seed = 7;
        cfg.model = BecBscModel{0.02, 0.1, 0.02};
        SimReport r = run_separate_experiment(cfg, make_flip_chain_aux(0.3, 0.3, 0.5));
        CHECK(near(r.agreement_rate, 1.0, 1e-12));
        leak[idx++] = r.leakage_bits_per_symbol;
    }
    CHECK(near(leak[0], 0.042245371, 1e-9));  // with the fictitious layer
    CHECK(near(leak[1], 0.070097179, 1e-9));  // without it
    CHECK(leak[0] + 1e-9 < leak[1]);
}
