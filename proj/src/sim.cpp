#include "skrates/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>

#include "skrates/rng.hpp"

namespace skr {

namespace {

constexpr std::uint64_t kStreamCodebook = 1;
constexpr std::uint64_t kStreamTrial = 2;
constexpr std::uint64_t kStreamBatch = 3;
constexpr int kBatchTrials = 250;
constexpr int kMaxRejectionAttempts = 200000;

// Sums a joint law down to the named axes, returned row-major in exactly the
// requested order (FinitePmf::marginal keeps the original order instead).
std::vector<double> project(const FinitePmf& p, const std::vector<std::string>& order) {
    const auto& axes = p.axes();
    const int na = static_cast<int>(axes.size());
    std::vector<int> sizes(na);
    for (int i = 0; i < na; ++i) sizes[i] = axes[i].size;
    std::vector<int> src(order.size());
    std::vector<int> tsize(order.size());
    int total = 1;
    for (std::size_t k = 0; k < order.size(); ++k) {
        src[k] = p.axis_index(order[k]);
        tsize[k] = sizes[src[k]];
        total *= tsize[k];
    }
    std::vector<double> out(total, 0.0);
    std::vector<int> idx(na, 0);
    const auto& tab = p.table();
    for (std::size_t flat = 0; flat < tab.size(); ++flat) {
        int tf = 0;
        for (std::size_t k = 0; k < order.size(); ++k) tf = tf * tsize[k] + idx[src[k]];
        out[tf] += tab[flat];
        for (int d = na - 1; d >= 0; --d) {
            if (++idx[d] < sizes[d]) break;
            idx[d] = 0;
        }
    }
    return out;
}

// Normalizes each row of a [rows x cols] table; zero rows become uniform so
// samplers always see a valid distribution.
void normalize_rows(std::vector<double>& t, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        double s = 0.0;
        for (int c = 0; c < cols; ++c) s += t[r * cols + c];
        if (s > 0.0)
            for (int c = 0; c < cols; ++c) t[r * cols + c] /= s;
        else
            for (int c = 0; c < cols; ++c) t[r * cols + c] = 1.0 / cols;
    }
}

// Strong (robust) typicality of the tuple sequence's joint type against the
// reference law: cells the law assigns zero mass must not occur at all, and
// every positive cell's empirical frequency must lie within delta of its
// probability (with a tiny slop so exact-boundary cases are not lost to
// floating point). The zero-cell rule is what lets the decoders reject
// codewords that disagree with the observation even at short blocklengths.
bool typical(std::vector<int>& scratch, const std::vector<const std::vector<int>*>& seqs,
             const std::vector<int>& sizes, const std::vector<double>& ref, double delta) {
    const int n = static_cast<int>(seqs[0]->size());
    scratch.assign(ref.size(), 0);
    for (int i = 0; i < n; ++i) {
        int f = 0;
        for (std::size_t k = 0; k < seqs.size(); ++k) f = f * sizes[k] + (*seqs[k])[i];
        ++scratch[f];
    }
    const double inv = 1.0 / n;
    for (std::size_t c = 0; c < ref.size(); ++c) {
        if (ref[c] == 0.0) {
            if (scratch[c] != 0) return false;
        } else if (std::abs(scratch[c] * inv - ref[c]) > delta + 1e-12) {
            return false;
        }
    }
    return true;
}

// Exact nonemptiness of { integer count vectors c >= 0 : sum c = n,
// |c_i/n - p_i| <= delta }: the box bounds must individually be satisfiable
// and their sums must bracket n.
bool typical_set_nonempty(const std::vector<double>& p, int n, double delta) {
    long lo_sum = 0, hi_sum = 0;
    for (double pi : p) {
        long lo = 0, hi = 0;
        if (pi > 0.0) {
            lo = std::max(0L, static_cast<long>(std::ceil(n * (pi - delta) - 1e-9)));
            hi = std::min(static_cast<long>(n),
                          static_cast<long>(std::floor(n * (pi + delta) + 1e-9)));
        }
        if (lo > hi) return false;
        lo_sum += lo;
        hi_sum += hi;
    }
    return lo_sum <= n && n <= hi_sum;
}

// Conditional version: given the conditioning word's counts, each row of the
// conditional law gets its own box.
bool cond_typical_set_nonempty(const std::vector<int>& cond_counts,
                               const std::vector<double>& rows, int ncond, int nout, int n,
                               double delta) {
    for (int a = 0; a < ncond; ++a) {
        long lo_sum = 0, hi_sum = 0;
        for (int b = 0; b < nout; ++b) {
            long lo = 0, hi = 0;
            if (rows[a * nout + b] > 0.0) {
                double target = rows[a * nout + b] * cond_counts[a];
                lo = std::max(0L, static_cast<long>(std::ceil(target - delta * n - 1e-9)));
                hi = std::min(static_cast<long>(cond_counts[a]),
                              static_cast<long>(std::floor(target + delta * n + 1e-9)));
            }
            if (lo > hi) return false;
            lo_sum += lo;
            hi_sum += hi;
        }
        if (lo_sum > cond_counts[a] || cond_counts[a] > hi_sum) return false;
    }
    return true;
}

// Draws a length-n word i.i.d. from p conditioned on landing in the typical
// set, by rejection. Emptiness is checked exactly up front.
std::vector<int> draw_typical(const std::vector<double>& p, int n, double delta,
                              std::mt19937_64& g) {
    const int k = static_cast<int>(p.size());
    if (!typical_set_nonempty(p, n, delta))
        throw std::runtime_error("typical set is empty at this blocklength and delta");
    std::vector<int> w(n);
    std::vector<int> cnt(k);
    for (int attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
        std::fill(cnt.begin(), cnt.end(), 0);
        for (int i = 0; i < n; ++i) {
            w[i] = sample_weights(p.data(), k, g);
            ++cnt[w[i]];
        }
        bool ok = true;
        for (int s = 0; s < k; ++s) {
            if (p[s] == 0.0 ? cnt[s] != 0
                            : std::abs(cnt[s] / static_cast<double>(n) - p[s]) > delta + 1e-12) {
                ok = false;
                break;
            }
        }
        if (ok) return w;
    }
    throw std::runtime_error("typical-set sampling exhausted its attempt budget");
}

// Conditional codeword draw: i.i.d. rows[cond[i]] conditioned on the joint
// type staying within delta of rows[a][b] * (count of a in cond)/n.
std::vector<int> draw_cond_typical(const std::vector<int>& cond, const std::vector<double>& rows,
                                   int ncond, int nout, double delta, std::mt19937_64& g) {
    const int n = static_cast<int>(cond.size());
    std::vector<int> cc(ncond, 0);
    for (int s : cond) ++cc[s];
    if (!cond_typical_set_nonempty(cc, rows, ncond, nout, n, delta))
        throw std::runtime_error("conditional typical set is empty at this delta");
    std::vector<int> w(n);
    std::vector<int> cnt(ncond * nout);
    const double slack = n * (delta + 1e-12);
    for (int attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
        std::fill(cnt.begin(), cnt.end(), 0);
        for (int i = 0; i < n; ++i) {
            w[i] = sample_weights(&rows[cond[i] * nout], nout, g);
            ++cnt[cond[i] * nout + w[i]];
        }
        bool ok = true;
        for (int a = 0; a < ncond && ok; ++a)
            for (int b = 0; b < nout; ++b) {
                const double q = rows[a * nout + b];
                if (q == 0.0 ? cnt[a * nout + b] != 0
                             : std::abs(cnt[a * nout + b] - q * cc[a]) > slack) {
                    ok = false;
                    break;
                }
            }
        if (ok) return w;
    }
    throw std::runtime_error("conditional typical-set sampling exhausted its attempt budget");
}

// Equal-size random bins over [0, total): a shuffled identity is cut into
// 2^bin_bits contiguous chunks.
std::vector<int> make_bins(int total, int bin_bits, std::mt19937_64& g) {
    std::vector<int> perm(total);
    for (int i = 0; i < total; ++i) perm[i] = i;
    shuffle_vec(perm, g);
    const int shift_bits = static_cast<int>(std::round(std::log2(total))) - bin_bits;
    std::vector<int> bin(total, 0);
    for (int i = 0; i < total; ++i) bin[perm[i]] = i >> shift_bits;
    return bin;
}

double entropy_bits(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log2(v);
    return h;
}

// Empirical mutual information (bits) between the int key and a small count
// vector, from pooled samples.
double plugin_mi_bits(const std::vector<std::pair<int, std::vector<int>>>& samples) {
    if (samples.empty()) return 0.0;
    std::map<int, int> ck;
    std::map<std::vector<int>, int> cs;
    std::map<std::pair<int, std::vector<int>>, int> cj;
    for (const auto& s : samples) {
        ++ck[s.first];
        ++cs[s.second];
        ++cj[s];
    }
    const double N = static_cast<double>(samples.size());
    double mi = 0.0;
    for (const auto& [key, nij] : cj) {
        const double pij = nij / N;
        const double pi = ck.at(key.first) / N;
        const double pj = cs.at(key.second) / N;
        mi += pij * std::log2(pij / (pi * pj));
    }
    return std::max(0.0, mi);
}

void check_prob_rate(double r, const char* name) {
    if (!(r >= 0.0) || !std::isfinite(r))
        throw std::invalid_argument(std::string(name) + " must be a finite non-negative rate");
}

std::vector<int> sample_iid(const std::vector<double>& p, int k, int n, std::mt19937_64& g) {
    std::vector<int> w(n);
    for (int i = 0; i < n; ++i) w[i] = sample_weights(p.data(), k, g);
    return w;
}

}  // namespace

SystemSpec make_system(const ModelVariant& m) {
    return std::visit([](const auto& mm) { return make_system(mm); }, m);
}

int exp_bits(int n, double rate) {
    return static_cast<int>(std::ceil(n * rate - 1e-9));
}

// ---------------------------------------------------------------------------
// Joint scheme
// ---------------------------------------------------------------------------

void JointSimConfig::validate() const {
    if (n < 2) throw std::invalid_argument("blocklength n must be >= 2");
    check_prob_rate(R1, "R1");
    check_prob_rate(R2, "R2");
    check_prob_rate(Rf, "Rf");
    check_prob_rate(Rk, "Rk");
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("delta must lie in (0, 1]");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    std::visit([](const auto& mm) { mm.validate(); }, model);
    const int b1 = exp_bits(n, R1), b2 = exp_bits(n, R2), bf = exp_bits(n, Rf);
    if (b1 + b2 + bf > 20)
        throw std::invalid_argument("codebook memory bound exceeded: 2^(n(R1+R2+Rf)) > 2^20");
    if (Rk > R2 + Rf + 1e-12)
        throw std::invalid_argument("key rate exceeds the fine-layer index rate R2+Rf");
    if (exp_bits(n, Rk) > b2 + bf)
        throw std::invalid_argument("key bits exceed the fine-layer index bits");
}

JointRefs make_joint_refs(const SystemSpec& sys, const AuxSpecJoint& aux) {
    sys.validate();
    FinitePmf joint =
        sys.source.extend(aux.p_vx_given_a).extend(aux.p_u_given_v).extend(sys.channel);
    JointRefs r;
    r.nA = sys.card("A");
    r.nB = sys.card("B");
    r.nE = sys.card("E");
    r.nX = sys.card("X");
    r.nY = sys.card("Y");
    r.nZ = sys.card("Z");
    r.nV = aux.p_vx_given_a.out()[0].size;
    r.nU = aux.p_u_given_v.out()[0].size;

    r.p_abe = sys.source.table();
    r.p_u = project(joint, {"U"});
    r.p_v_given_u = project(joint, {"U", "V"});
    normalize_rows(r.p_v_given_u, r.nU, r.nV);
    r.p_ua = project(joint, {"U", "A"});
    r.p_uva = project(joint, {"U", "V", "A"});
    r.p_uvby = project(joint, {"U", "V", "B", "Y"});

    // Channel-input sampler straight from the auxiliary (uniform rows where
    // p(v|a) = 0, matching the encoder's fallback).
    r.p_x_given_va.assign(r.nV * r.nA * r.nX, 0.0);
    for (int v = 0; v < r.nV; ++v)
        for (int a = 0; a < r.nA; ++a)
            for (int x = 0; x < r.nX; ++x)
                r.p_x_given_va[(v * r.nA + a) * r.nX + x] = aux.p_vx_given_a.at(a, v * r.nX + x);
    normalize_rows(r.p_x_given_va, r.nV * r.nA, r.nX);

    // Per-symbol channel law with the state axis always present (broadcast
    // when the physical channel ignores it).
    r.p_yz_given_xa.assign(r.nX * r.nA * r.nY * r.nZ, 0.0);
    const bool coupled = sys.state_coupled;
    for (int x = 0; x < r.nX; ++x)
        for (int a = 0; a < r.nA; ++a)
            for (int yz = 0; yz < r.nY * r.nZ; ++yz)
                r.p_yz_given_xa[(x * r.nA + a) * r.nY * r.nZ + yz] =
                    sys.channel.at(coupled ? x * r.nA + a : x, yz);

    // What one symbol shows the eavesdropper given the codeword symbol and the
    // state: the source side p(e|a) times the channel tap through p(x|v,a).
    std::vector<double> p_ae = project(sys.source, {"A", "E"});
    normalize_rows(p_ae, r.nA, r.nE);
    r.p_ez_given_va.assign(r.nV * r.nA * r.nE * r.nZ, 0.0);
    for (int v = 0; v < r.nV; ++v)
        for (int a = 0; a < r.nA; ++a)
            for (int e = 0; e < r.nE; ++e)
                for (int z = 0; z < r.nZ; ++z) {
                    double pz = 0.0;
                    for (int x = 0; x < r.nX; ++x) {
                        double zc = 0.0;
                        for (int y = 0; y < r.nY; ++y)
                            zc += r.p_yz_given_xa[(x * r.nA + a) * r.nY * r.nZ + y * r.nZ + z];
                        pz += r.p_x_given_va[(v * r.nA + a) * r.nX + x] * zc;
                    }
                    r.p_ez_given_va[((v * r.nA + a) * r.nE + e) * r.nZ + z] =
                        p_ae[a * r.nE + e] * pz;
                }

    r.mi_u_a = cond_mutual_info(joint, {"U"}, {"A"}, {});
    r.mi_v_a_given_u = cond_mutual_info(joint, {"V"}, {"A"}, {"U"});
    r.mi_uv_by = cond_mutual_info(joint, {"U", "V"}, {"B", "Y"}, {});
    r.mi_v_by_given_u = cond_mutual_info(joint, {"V"}, {"B", "Y"}, {"U"});
    r.mi_v_ez_given_u = cond_mutual_info(joint, {"V"}, {"E", "Z"}, {"U"});
    return r;
}

const std::vector<int>& JointCodebook::v_word(int r1, int r2, int rf) const {
    return v[((static_cast<std::size_t>(r1) << b2 | r2) << bf) | rf];
}

int JointCodebook::key_of(int r2, int rf) const { return key_bin[(r2 << bf) | rf]; }

JointCodebook build_joint_codebook(const JointSimConfig& cfg, const AuxSpecJoint& aux) {
    cfg.validate();
    SystemSpec sys = make_system(cfg.model);
    JointRefs ref = make_joint_refs(sys, aux);

    // The key bin count must be consistent with how much the fine-layer index
    // exceeds the eavesdropper's per-symbol information, up to rounding.
    const double margin = cfg.Rk + ref.mi_v_ez_given_u - (cfg.R2 + cfg.Rf);
    if (margin < -3.0 / cfg.n - 1e-9)
        throw std::invalid_argument(
            "key rate inconsistent with the bin structure: Rk should be near "
            "R2+Rf minus the eavesdropper information of the auxiliaries");

    JointCodebook cb;
    cb.n = cfg.n;
    cb.b1 = exp_bits(cfg.n, cfg.R1);
    cb.b2 = exp_bits(cfg.n, cfg.R2);
    cb.bf = exp_bits(cfg.n, cfg.Rf);
    cb.kb = exp_bits(cfg.n, cfg.Rk);
    cb.delta = cfg.delta;
    cb.seed = cfg.seed;

    std::mt19937_64 g = derive_engine(cfg.seed, kStreamCodebook, 0);
    const int n1 = 1 << cb.b1, n2 = 1 << cb.b2, nf = 1 << cb.bf;
    cb.u.reserve(n1);
    for (int i = 0; i < n1; ++i) cb.u.push_back(draw_typical(ref.p_u, cfg.n, cfg.delta, g));
    cb.v.reserve(static_cast<std::size_t>(n1) * n2 * nf);
    for (int r1 = 0; r1 < n1; ++r1)
        for (int r2 = 0; r2 < n2; ++r2)
            for (int rf = 0; rf < nf; ++rf)
                cb.v.push_back(draw_cond_typical(cb.u[r1], ref.p_v_given_u, ref.nU, ref.nV,
                                                 cfg.delta, g));
    cb.key_bin = make_bins(n2 * nf, cb.kb, g);
    return cb;
}

JointEncodeResult joint_encode(const JointCodebook& cb, const JointRefs& ref,
                               const std::vector<int>& a_seq, int rf, std::mt19937_64& g) {
    if (static_cast<int>(a_seq.size()) != cb.n)
        throw std::invalid_argument("state word length mismatch");
    JointEncodeResult res;
    res.rf = rf;
    std::vector<int> scratch;
    const int n1 = 1 << cb.b1, n2 = 1 << cb.b2;

    std::vector<int> cands;
    for (int r1 = 0; r1 < n1; ++r1)
        if (typical(scratch, {&cb.u[r1], &a_seq}, {ref.nU, ref.nA}, ref.p_ua, cb.delta))
            cands.push_back(r1);
    if (!cands.empty()) {
        res.r1 = cands[uniform_below(g, cands.size())];
    } else {
        res.r1 = static_cast<int>(uniform_below(g, n1));
        res.fallback_u = true;
    }

    cands.clear();
    for (int r2 = 0; r2 < n2; ++r2)
        if (typical(scratch, {&cb.u[res.r1], &cb.v_word(res.r1, r2, rf), &a_seq},
                    {ref.nU, ref.nV, ref.nA}, ref.p_uva, cb.delta))
            cands.push_back(r2);
    if (!cands.empty()) {
        res.r2 = cands[uniform_below(g, cands.size())];
    } else {
        res.r2 = static_cast<int>(uniform_below(g, n2));
        res.fallback_v = true;
    }

    res.key = cb.key_of(res.r2, rf);
    const std::vector<int>& vw = cb.v_word(res.r1, res.r2, rf);
    res.x.resize(cb.n);
    for (int i = 0; i < cb.n; ++i)
        res.x[i] = sample_weights(&ref.p_x_given_va[(vw[i] * ref.nA + a_seq[i]) * ref.nX],
                                  ref.nX, g);
    return res;
}

JointDecodeResult joint_decode(const JointCodebook& cb, const JointRefs& ref,
                               const std::vector<int>& b_seq, const std::vector<int>& y_seq) {
    JointDecodeResult res;
    std::vector<int> scratch;
    const int n1 = 1 << cb.b1, n2 = 1 << cb.b2, nf = 1 << cb.bf;
    int matches = 0;
    for (int r1 = 0; r1 < n1 && matches < 2; ++r1) {
        for (int r2 = 0; r2 < n2 && matches < 2; ++r2)
            for (int rf = 0; rf < nf && matches < 2; ++rf)
                if (typical(scratch, {&cb.u[r1], &cb.v_word(r1, r2, rf), &b_seq, &y_seq},
                            {ref.nU, ref.nV, ref.nB, ref.nY}, ref.p_uvby, cb.delta)) {
                    ++matches;
                    res.r1 = r1;
                    res.r2 = r2;
                    res.rf = rf;
                }
    }
    if (matches == 1) {
        res.ok = true;
        res.key = cb.key_of(res.r2, res.rf);
    }
    return res;
}

bool exact_leakage_in_budget(int n, int nE, int nZ, int kb) {
    if (n > 6) return false;
    double cells = std::pow(static_cast<double>(nE) * nZ, n) * std::pow(2.0, kb);
    return cells <= 4194304.0;  // 2^22
}

double exact_leakage_joint(const JointCodebook& cb, const JointRefs& ref,
                           const JointSimConfig& cfg) {
    if (cfg.n != cb.n)
        throw std::invalid_argument("config and codebook disagree on the blocklength");
    if (!exact_leakage_in_budget(cb.n, ref.nE, ref.nZ, cb.kb))
        throw std::runtime_error("exact leakage enumeration budget exceeded; use the plug-in estimator");
    const int n = cb.n;
    const int EZ = ref.nE * ref.nZ;
    std::size_t ezn = 1;
    for (int i = 0; i < n; ++i) ezn *= static_cast<std::size_t>(EZ);
    const int K = 1 << cb.kb;
    std::vector<double> law(static_cast<std::size_t>(K) * ezn, 0.0);

    std::vector<double> p_a(ref.nA, 0.0);
    for (int a = 0; a < ref.nA; ++a)
        for (int be = 0; be < ref.nB * ref.nE; ++be)
            p_a[a] += ref.p_abe[a * ref.nB * ref.nE + be];

    const int n1 = 1 << cb.b1, n2 = 1 << cb.b2, nf = 1 << cb.bf;
    std::size_t nAn = 1;
    for (int i = 0; i < n; ++i) nAn *= static_cast<std::size_t>(ref.nA);

    std::vector<int> a_seq(n);
    std::vector<int> scratch;
    std::vector<double> buf, nxt;
    std::vector<int> ucands, vcands;

    for (std::size_t af = 0; af < nAn; ++af) {
        std::size_t rem = af;
        double pa = 1.0;
        for (int i = n - 1; i >= 0; --i) {
            a_seq[i] = static_cast<int>(rem % ref.nA);
            rem /= ref.nA;
            pa *= p_a[a_seq[i]];
        }
        if (pa <= 0.0) continue;

        ucands.clear();
        for (int r1 = 0; r1 < n1; ++r1)
            if (typical(scratch, {&cb.u[r1], &a_seq}, {ref.nU, ref.nA}, ref.p_ua, cb.delta))
                ucands.push_back(r1);
        const bool u_fallback = ucands.empty();
        const double w1 = u_fallback ? 1.0 / n1 : 1.0 / static_cast<double>(ucands.size());
        const int u_count = u_fallback ? n1 : static_cast<int>(ucands.size());

        for (int ui = 0; ui < u_count; ++ui) {
            const int r1 = u_fallback ? ui : ucands[ui];
            for (int rf = 0; rf < nf; ++rf) {
                vcands.clear();
                for (int r2 = 0; r2 < n2; ++r2)
                    if (typical(scratch, {&cb.u[r1], &cb.v_word(r1, r2, rf), &a_seq},
                                {ref.nU, ref.nV, ref.nA}, ref.p_uva, cb.delta))
                        vcands.push_back(r2);
                const bool v_fallback = vcands.empty();
                const double w2 = v_fallback ? 1.0 / n2 : 1.0 / static_cast<double>(vcands.size());
                const int v_count = v_fallback ? n2 : static_cast<int>(vcands.size());

                for (int vi = 0; vi < v_count; ++vi) {
                    const int r2 = v_fallback ? vi : vcands[vi];
                    const double weight = pa * w1 * (1.0 / nf) * w2;
                    const std::vector<int>& vw = cb.v_word(r1, r2, rf);
                    buf.assign(1, weight);
                    for (int i = 0; i < n; ++i) {
                        const double* row =
                            &ref.p_ez_given_va[(vw[i] * ref.nA + a_seq[i]) * EZ];
                        nxt.assign(buf.size() * EZ, 0.0);
                        for (std::size_t j = 0; j < buf.size(); ++j)
                            for (int t = 0; t < EZ; ++t) nxt[j * EZ + t] = buf[j] * row[t];
                        buf.swap(nxt);
                    }
                    double* dst = &law[static_cast<std::size_t>(cb.key_of(r2, rf)) * ezn];
                    for (std::size_t c = 0; c < ezn; ++c) dst[c] += buf[c];
                }
            }
        }
    }

    double total = 0.0;
    for (double v : law) total += v;
    if (std::abs(total - 1.0) > 1e-9)
        throw std::logic_error("assembled key/eavesdropper law does not normalize");

    std::vector<double> pk(K, 0.0);
    std::vector<double> pez(ezn, 0.0);
    for (int k = 0; k < K; ++k)
        for (std::size_t c = 0; c < ezn; ++c) {
            pk[k] += law[static_cast<std::size_t>(k) * ezn + c];
            pez[c] += law[static_cast<std::size_t>(k) * ezn + c];
        }
    const double mi = entropy_bits(pk) + entropy_bits(pez) - entropy_bits(law);
    return std::max(0.0, mi) / n;
}

SimReport run_joint_experiment(const JointSimConfig& cfg, const AuxSpecJoint& aux) {
    cfg.validate();
    SystemSpec sys = make_system(cfg.model);
    JointRefs ref = make_joint_refs(sys, aux);
    const bool exact = exact_leakage_in_budget(cfg.n, ref.nE, ref.nZ, exp_bits(cfg.n, cfg.Rk));

    SimReport rep;
    rep.trials_run = cfg.trials;
    rep.leakage_method = exact ? "exact" : "plugin";

    int encode_fail = 0, decode_err = 0, decoded = 0, agree = 0;
    double leak_weighted = 0.0;
    std::vector<std::pair<int, std::vector<int>>> samples;
    const int nbatch = (cfg.trials + kBatchTrials - 1) / kBatchTrials;

    for (int ib = 0; ib < nbatch; ++ib) {
        JointSimConfig bcfg = cfg;
        bcfg.seed = derive_seed(cfg.seed, kStreamBatch, static_cast<std::uint64_t>(ib));
        JointCodebook cb = build_joint_codebook(bcfg, aux);
        const int t0 = ib * kBatchTrials;
        const int t1 = std::min(cfg.trials, t0 + kBatchTrials);
        if (exact) leak_weighted += exact_leakage_joint(cb, ref, bcfg) * (t1 - t0);

        for (int t = t0; t < t1; ++t) {
            std::mt19937_64 g = derive_engine(cfg.seed, kStreamTrial, static_cast<std::uint64_t>(t));
            std::vector<int> a_seq(cfg.n), b_seq(cfg.n), e_seq(cfg.n);
            for (int i = 0; i < cfg.n; ++i) {
                int abe = sample_weights(ref.p_abe.data(),
                                         ref.nA * ref.nB * ref.nE, g);
                a_seq[i] = abe / (ref.nB * ref.nE);
                b_seq[i] = (abe / ref.nE) % ref.nB;
                e_seq[i] = abe % ref.nE;
            }
            const int rf = static_cast<int>(uniform_below(g, 1u << cb.bf));
            JointEncodeResult enc = joint_encode(cb, ref, a_seq, rf, g);
            std::vector<int> y_seq(cfg.n), z_seq(cfg.n);
            for (int i = 0; i < cfg.n; ++i) {
                int yz = sample_weights(
                    &ref.p_yz_given_xa[(enc.x[i] * ref.nA + a_seq[i]) * ref.nY * ref.nZ],
                    ref.nY * ref.nZ, g);
                y_seq[i] = yz / ref.nZ;
                z_seq[i] = yz % ref.nZ;
            }
            JointDecodeResult dec = joint_decode(cb, ref, b_seq, y_seq);

            if (enc.fallback_u || enc.fallback_v) ++encode_fail;
            if (dec.ok) {
                ++decoded;
                if (dec.key == enc.key) ++agree;
            } else {
                ++decode_err;
            }
            if (!exact) {
                std::vector<int> stat(ref.nE * ref.nZ, 0);
                for (int i = 0; i < cfg.n; ++i) ++stat[e_seq[i] * ref.nZ + z_seq[i]];
                samples.emplace_back(enc.key, std::move(stat));
            }
        }
    }

    rep.encode_failure_rate = static_cast<double>(encode_fail) / cfg.trials;
    rep.decode_error_rate = static_cast<double>(decode_err) / cfg.trials;
    rep.agreement_rate = decoded > 0 ? static_cast<double>(agree) / decoded : 1.0;
    rep.leakage_bits_per_symbol =
        exact ? leak_weighted / cfg.trials : plugin_mi_bits(samples) / cfg.n;
    return rep;
}

// ---------------------------------------------------------------------------
// Separate scheme
// ---------------------------------------------------------------------------

void SeparateSimConfig::validate() const {
    if (n < 2) throw std::invalid_argument("source blocklength n must be >= 2");
    if (m < 2) throw std::invalid_argument("channel blocklength m must be >= 2");
    if (m % n != 0)
        throw std::invalid_argument("channel blocklength must be an integer multiple of n");
    check_prob_rate(S1, "S1");
    check_prob_rate(S2p, "S2p");
    check_prob_rate(S2pp, "S2pp");
    check_prob_rate(R1, "R1");
    check_prob_rate(R2, "R2");
    check_prob_rate(Rc, "Rc");
    check_prob_rate(Rp, "Rp");
    check_prob_rate(Rf, "Rf");
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("delta must lie in (0, 1]");
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (std::holds_alternative<BinaryStateModel>(model))
        throw std::invalid_argument(
            "the separate scheme needs a channel that does not depend on the source state");
    std::visit([](const auto& mm) { mm.validate(); }, model);

    if (std::abs(R1 + R2 - (Rc + Rp)) > 1e-9)
        throw std::invalid_argument("bin rates must satisfy R1+R2 == Rc+Rp");
    if (R1 > Rc + 1e-12) throw std::invalid_argument("coarse bin rate must satisfy R1 <= Rc");
    const int b1 = exp_bits(n, R1), b2 = exp_bits(n, R2);
    const int bc = exp_bits(n, Rc), bp = exp_bits(n, Rp), bf = exp_bits(n, Rf);
    const int bs1 = exp_bits(n, S1), bs2p = exp_bits(n, S2p), bs2pp = exp_bits(n, S2pp);
    if (b1 + b2 != bc + bp)
        throw std::invalid_argument(
            "rate rounding breaks the bin-to-message index map: "
            "ceil(n R1)+ceil(n R2) must equal ceil(n Rc)+ceil(n Rp)");
    if (b1 > bc) throw std::invalid_argument("coarse bin bits exceed cloud-center bits");
    if (b1 > bs1) throw std::invalid_argument("coarse bins outnumber coarse codewords");
    if (b2 > bs2p + bs2pp) throw std::invalid_argument("fine bins outnumber fine codewords");
    if (bs1 + bs2p + bs2pp > 20)
        throw std::invalid_argument("source codebook memory bound exceeded");
    if (bc + bp + bf > 20) throw std::invalid_argument("channel codebook memory bound exceeded");
    if (Rk) {
        check_prob_rate(*Rk, "Rk");
        if (exp_bits(n, *Rk) > bs1 + bs2p + bs2pp)
            throw std::invalid_argument("key bits exceed the total codeword index bits");
    }
}

double SeparateSimConfig::key_rate() const { return Rk ? *Rk : S1 + S2p + S2pp; }

SeparateRefs make_separate_refs(const SystemSpec& sys, const AuxSpecSeparate& aux) {
    sys.validate();
    if (sys.state_coupled)
        throw std::domain_error("separate scheme needs a channel without state coupling");
    if (!aux.p_q_given_t)
        throw std::invalid_argument("the refinement layer p(Q|T) is required here");

    FinitePmf src = sys.source.extend(aux.p_v_given_a).extend(aux.p_u_given_v);  // A,B,E,V,U
    FinitePmf chan = aux.p_tx.extend(*aux.p_q_given_t).extend(sys.channel);      // T,X,Q,Y,Z

    SeparateRefs r;
    r.nA = sys.card("A");
    r.nB = sys.card("B");
    r.nE = sys.card("E");
    r.nX = sys.card("X");
    r.nY = sys.card("Y");
    r.nZ = sys.card("Z");
    r.nV = aux.p_v_given_a.out()[0].size;
    r.nU = aux.p_u_given_v.out()[0].size;
    r.nT = aux.p_tx.axes()[0].size;
    r.nQ = aux.p_q_given_t->out()[0].size;

    r.p_abe = sys.source.table();
    r.p_u = project(src, {"U"});
    r.p_v_given_u = project(src, {"U", "V"});
    normalize_rows(r.p_v_given_u, r.nU, r.nV);
    r.p_ua = project(src, {"U", "A"});
    r.p_uva = project(src, {"U", "V", "A"});
    r.p_ub = project(src, {"U", "B"});
    r.p_uvb = project(src, {"U", "V", "B"});

    r.p_q = project(chan, {"Q"});
    r.p_t_given_q = project(chan, {"Q", "T"});
    normalize_rows(r.p_t_given_q, r.nQ, r.nT);
    r.p_qty = project(chan, {"Q", "T", "Y"});
    r.p_x_given_t = project(chan, {"T", "X"});
    normalize_rows(r.p_x_given_t, r.nT, r.nX);

    r.p_yz_given_x.assign(r.nX * r.nY * r.nZ, 0.0);
    for (int x = 0; x < r.nX; ++x)
        for (int yz = 0; yz < r.nY * r.nZ; ++yz)
            r.p_yz_given_x[x * r.nY * r.nZ + yz] = sys.channel.at(x, yz);

    r.mi_u_a = cond_mutual_info(src, {"U"}, {"A"}, {});
    r.mi_v_a_given_u = cond_mutual_info(src, {"V"}, {"A"}, {"U"});
    r.mi_u_b = cond_mutual_info(src, {"U"}, {"B"}, {});
    r.mi_v_b_given_u = cond_mutual_info(src, {"V"}, {"B"}, {"U"});
    r.mi_t_y = cond_mutual_info(chan, {"T"}, {"Y"}, {});
    r.mi_t_y_given_q = cond_mutual_info(chan, {"T"}, {"Y"}, {"Q"});
    r.mi_q_y = cond_mutual_info(chan, {"Q"}, {"Y"}, {});
    r.mi_t_z_given_q = cond_mutual_info(chan, {"T"}, {"Z"}, {"Q"});
    return r;
}

const std::vector<int>& SeparateCodebook::v_word(int s1, int s2p, int s2pp) const {
    return v[((static_cast<std::size_t>(s1) << bs2p | s2p) << bs2pp) | s2pp];
}

const std::vector<int>& SeparateCodebook::t_word(int rc, int rp, int rf) const {
    return t[((static_cast<std::size_t>(rc) << bp | rp) << bf) | rf];
}

std::pair<int, int> SeparateCodebook::map_to_channel(int r1, int r2) const {
    const int i = (r1 << b2) | r2;
    return {i >> bp, i & ((1 << bp) - 1)};
}

std::pair<int, int> SeparateCodebook::map_from_channel(int rc, int rp) const {
    const int i = (rc << bp) | rp;
    return {i >> b2, i & ((1 << b2) - 1)};
}

int SeparateCodebook::map_coarse(int rc) const { return rc >> (bc - b1); }

int SeparateCodebook::key_of(int s1, int s2p, int s2pp) const {
    const std::uint64_t packed = ((static_cast<std::uint64_t>(s1) << bs2p | s2p) << bs2pp) | s2pp;
    if (kb == bs1 + bs2p + bs2pp) return static_cast<int>(packed);
    if (kb == 0) return 0;
    std::uint64_t s = packed;
    return static_cast<int>(splitmix64_next(s) & ((1ULL << kb) - 1));
}

SeparateCodebook build_separate_codebook(const SeparateSimConfig& cfg,
                                         const AuxSpecSeparate& aux) {
    cfg.validate();
    SystemSpec sys = make_system(cfg.model);
    SeparateRefs ref = make_separate_refs(sys, aux);
    const double ratio = static_cast<double>(cfg.m) / cfg.n;
    if (cfg.Rf > ratio * ref.mi_t_z_given_q + 1e-9)
        throw std::invalid_argument(
            "fictitious-message rate exceeds what the eavesdropper's channel absorbs");

    SeparateCodebook cb;
    cb.n = cfg.n;
    cb.m = cfg.m;
    cb.bs1 = exp_bits(cfg.n, cfg.S1);
    cb.bs2p = exp_bits(cfg.n, cfg.S2p);
    cb.bs2pp = exp_bits(cfg.n, cfg.S2pp);
    cb.b1 = exp_bits(cfg.n, cfg.R1);
    cb.b2 = exp_bits(cfg.n, cfg.R2);
    cb.bc = exp_bits(cfg.n, cfg.Rc);
    cb.bp = exp_bits(cfg.n, cfg.Rp);
    cb.bf = exp_bits(cfg.n, cfg.Rf);
    // Default key: the full codeword index triple; an explicit Rk narrows it.
    cb.kb = cfg.Rk ? exp_bits(cfg.n, *cfg.Rk) : cb.bs1 + cb.bs2p + cb.bs2pp;
    cb.delta = cfg.delta;
    cb.seed = cfg.seed;

    std::mt19937_64 g = derive_engine(cfg.seed, kStreamCodebook, 0);
    const int ns1 = 1 << cb.bs1, ns2 = 1 << (cb.bs2p + cb.bs2pp);
    cb.u.reserve(ns1);
    for (int i = 0; i < ns1; ++i) cb.u.push_back(draw_typical(ref.p_u, cfg.n, cfg.delta, g));
    cb.v.reserve(static_cast<std::size_t>(ns1) * ns2);
    for (int s1 = 0; s1 < ns1; ++s1)
        for (int j = 0; j < ns2; ++j)
            cb.v.push_back(
                draw_cond_typical(cb.u[s1], ref.p_v_given_u, ref.nU, ref.nV, cfg.delta, g));
    cb.bin1 = make_bins(ns1, cb.b1, g);
    cb.bin2.reserve(ns1);
    for (int s1 = 0; s1 < ns1; ++s1) cb.bin2.push_back(make_bins(ns2, cb.b2, g));

    const int nc = 1 << cb.bc, npf = 1 << (cb.bp + cb.bf);
    cb.q.reserve(nc);
    for (int i = 0; i < nc; ++i) cb.q.push_back(draw_typical(ref.p_q, cfg.m, cfg.delta, g));
    cb.t.reserve(static_cast<std::size_t>(nc) * npf);
    for (int rc = 0; rc < nc; ++rc)
        for (int j = 0; j < npf; ++j)
            cb.t.push_back(
                draw_cond_typical(cb.q[rc], ref.p_t_given_q, ref.nQ, ref.nT, cfg.delta, g));
    return cb;
}

SeparateEncodeResult separate_encode(const SeparateCodebook& cb, const SeparateRefs& ref,
                                     const std::vector<int>& a_seq, int s2p, int rf,
                                     std::mt19937_64& g) {
    if (static_cast<int>(a_seq.size()) != cb.n)
        throw std::invalid_argument("source word length mismatch");
    SeparateEncodeResult res;
    std::vector<int> scratch;
    const int ns1 = 1 << cb.bs1, ns2pp = 1 << cb.bs2pp;

    res.s1 = -1;
    for (int s1 = 0; s1 < ns1; ++s1)
        if (typical(scratch, {&cb.u[s1], &a_seq}, {ref.nU, ref.nA}, ref.p_ua, cb.delta)) {
            res.s1 = s1;
            break;
        }
    if (res.s1 < 0) {
        res.s1 = 0;
        res.fallback_s1 = true;
    }

    res.s2pp = -1;
    for (int s2pp = 0; s2pp < ns2pp; ++s2pp)
        if (typical(scratch, {&cb.u[res.s1], &cb.v_word(res.s1, s2p, s2pp), &a_seq},
                    {ref.nU, ref.nV, ref.nA}, ref.p_uva, cb.delta)) {
            res.s2pp = s2pp;
            break;
        }
    if (res.s2pp < 0) {
        res.s2pp = 0;
        res.fallback_s2 = true;
    }

    res.r1 = cb.bin1[res.s1];
    res.r2 = cb.bin2[res.s1][(s2p << cb.bs2pp) | res.s2pp];
    auto [rc, rp] = cb.map_to_channel(res.r1, res.r2);
    res.rc = rc;
    res.rp = rp;
    const std::vector<int>& tw = cb.t_word(rc, rp, rf);
    res.x.resize(cb.m);
    for (int j = 0; j < cb.m; ++j)
        res.x[j] = sample_weights(&ref.p_x_given_t[tw[j] * ref.nX], ref.nX, g);
    return res;
}

SeparateDecodeResult separate_decode(const SeparateCodebook& cb, const SeparateRefs& ref,
                                     const std::vector<int>& b_seq,
                                     const std::vector<int>& y_seq) {
    SeparateDecodeResult res;
    std::vector<int> scratch;
    const int nc = 1 << cb.bc, np = 1 << cb.bp, nf = 1 << cb.bf;

    int matches = 0;
    for (int rc = 0; rc < nc && matches < 2; ++rc)
        for (int rp = 0; rp < np && matches < 2; ++rp)
            for (int rf = 0; rf < nf && matches < 2; ++rf)
                if (typical(scratch, {&cb.q[rc], &cb.t_word(rc, rp, rf), &y_seq},
                            {ref.nQ, ref.nT, ref.nY}, ref.p_qty, cb.delta)) {
                    ++matches;
                    res.rc = rc;
                    res.rp = rp;
                    res.rf = rf;
                }
    if (matches != 1) {
        res.stage = 1;
        return res;
    }

    auto [r1, r2] = cb.map_from_channel(res.rc, res.rp);
    const int ns1 = 1 << cb.bs1;
    matches = 0;
    for (int s1 = 0; s1 < ns1 && matches < 2; ++s1) {
        if (cb.bin1[s1] != r1) continue;
        if (typical(scratch, {&cb.u[s1], &b_seq}, {ref.nU, ref.nB}, ref.p_ub, cb.delta)) {
            ++matches;
            res.s1 = s1;
        }
    }
    if (matches != 1) {
        res.stage = 2;
        return res;
    }

    const int ns2 = 1 << (cb.bs2p + cb.bs2pp);
    matches = 0;
    for (int j = 0; j < ns2 && matches < 2; ++j) {
        if (cb.bin2[res.s1][j] != r2) continue;
        const int s2p = j >> cb.bs2pp, s2pp = j & ((1 << cb.bs2pp) - 1);
        if (typical(scratch, {&cb.u[res.s1], &cb.v_word(res.s1, s2p, s2pp), &b_seq},
                    {ref.nU, ref.nV, ref.nB}, ref.p_uvb, cb.delta)) {
            ++matches;
            res.s2p = s2p;
            res.s2pp = s2pp;
        }
    }
    if (matches != 1) {
        res.stage = 3;
        return res;
    }
    res.ok = true;
    return res;
}

SimReport run_separate_experiment(const SeparateSimConfig& cfg, const AuxSpecSeparate& aux) {
    cfg.validate();
    SystemSpec sys = make_system(cfg.model);
    SeparateRefs ref = make_separate_refs(sys, aux);

    SimReport rep;
    rep.trials_run = cfg.trials;
    rep.leakage_method = "plugin";

    int encode_fail = 0, decode_err = 0, decoded = 0, agree = 0;
    std::vector<std::pair<int, std::vector<int>>> samples;
    const int nbatch = (cfg.trials + kBatchTrials - 1) / kBatchTrials;

    for (int ib = 0; ib < nbatch; ++ib) {
        SeparateSimConfig bcfg = cfg;
        bcfg.seed = derive_seed(cfg.seed, kStreamBatch, static_cast<std::uint64_t>(ib));
        SeparateCodebook cb = build_separate_codebook(bcfg, aux);
        const int t0 = ib * kBatchTrials;
        const int t1 = std::min(cfg.trials, t0 + kBatchTrials);

        for (int t = t0; t < t1; ++t) {
            std::mt19937_64 g = derive_engine(cfg.seed, kStreamTrial, static_cast<std::uint64_t>(t));
            std::vector<int> a_seq(cfg.n), b_seq(cfg.n), e_seq(cfg.n);
            for (int i = 0; i < cfg.n; ++i) {
                int abe = sample_weights(ref.p_abe.data(), ref.nA * ref.nB * ref.nE, g);
                a_seq[i] = abe / (ref.nB * ref.nE);
                b_seq[i] = (abe / ref.nE) % ref.nB;
                e_seq[i] = abe % ref.nE;
            }
            const int s2p = static_cast<int>(uniform_below(g, 1u << cb.bs2p));
            const int rf = static_cast<int>(uniform_below(g, 1u << cb.bf));
            SeparateEncodeResult enc = separate_encode(cb, ref, a_seq, s2p, rf, g);
            std::vector<int> y_seq(cfg.m), z_seq(cfg.m);
            for (int j = 0; j < cfg.m; ++j) {
                int yz = sample_weights(&ref.p_yz_given_x[enc.x[j] * ref.nY * ref.nZ],
                                        ref.nY * ref.nZ, g);
                y_seq[j] = yz / ref.nZ;
                z_seq[j] = yz % ref.nZ;
            }
            SeparateDecodeResult dec = separate_decode(cb, ref, b_seq, y_seq);

            if (enc.fallback_s1 || enc.fallback_s2) ++encode_fail;
            const int key = cb.key_of(enc.s1, s2p, enc.s2pp);
            if (dec.ok) {
                ++decoded;
                if (cb.key_of(dec.s1, dec.s2p, dec.s2pp) == key) ++agree;
            } else {
                ++decode_err;
            }
            std::vector<int> stat(ref.nE + ref.nZ, 0);
            for (int i = 0; i < cfg.n; ++i) ++stat[e_seq[i]];
            for (int j = 0; j < cfg.m; ++j) ++stat[ref.nE + z_seq[j]];
            samples.emplace_back(key, std::move(stat));
        }
    }

    rep.encode_failure_rate = static_cast<double>(encode_fail) / cfg.trials;
    rep.decode_error_rate = static_cast<double>(decode_err) / cfg.trials;
    rep.agreement_rate = decoded > 0 ? static_cast<double>(agree) / decoded : 1.0;
    rep.leakage_bits_per_symbol = plugin_mi_bits(samples) / cfg.n;
    return rep;
}

}  // namespace skr
