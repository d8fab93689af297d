#include "skrates/generic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "skrates/rng.hpp"

namespace skr {

namespace {

const std::vector<std::string> kA{"A"}, kB{"B"}, kE{"E"}, kU{"U"}, kV{"V"};
const std::vector<std::string> kT{"T"}, kQ{"Q"}, kX{"X"}, kY{"Y"}, kZ{"Z"};
const std::vector<std::string> kBY{"B", "Y"}, kEZ{"E", "Z"};
const std::vector<std::string> kNone{};

void check_axis_names(const std::vector<Axis>& axes, const std::vector<std::string>& want,
                      const char* what) {
    if (axes.size() != want.size())
        throw std::invalid_argument(std::string(what) + ": unexpected axis count");
    for (std::size_t i = 0; i < want.size(); ++i)
        if (axes[i].name != want[i])
            throw std::invalid_argument(std::string(what) + ": expected axis '" + want[i] +
                                        "', got '" + axes[i].name + "'");
}

}  // namespace

void SystemSpec::validate() const {
    check_axis_names(source.axes(), {"A", "B", "E"}, "SystemSpec source");
    if (state_coupled) {
        check_axis_names(channel.given(), {"X", "A"}, "SystemSpec channel given");
        if (channel.given()[1].size != source.axes()[0].size)
            throw std::invalid_argument("SystemSpec: channel state alphabet != source A alphabet");
    } else {
        check_axis_names(channel.given(), {"X"}, "SystemSpec channel given");
    }
    check_axis_names(channel.out(), {"Y", "Z"}, "SystemSpec channel out");
    if (!(eta >= 0.0)) throw std::invalid_argument("SystemSpec: eta must be >= 0");
}

int SystemSpec::card(const std::string& axis) const {
    for (const auto& a : source.axes())
        if (a.name == axis) return a.size;
    for (const auto& a : channel.given())
        if (a.name == axis) return a.size;
    for (const auto& a : channel.out())
        if (a.name == axis) return a.size;
    throw std::invalid_argument("SystemSpec: no axis named '" + axis + "'");
}

SystemSpec make_system(const BecBscModel& m) {
    return SystemSpec{becbsc_joint_pmf(m), becbsc_channel(m), 1.0, false};
}

SystemSpec make_system(const BinaryStateModel& m) {
    return SystemSpec{binary_state_source_pmf(m), binary_state_channel(m), 1.0, true};
}

namespace {

void check_sep_caps(const SystemSpec& sys, const AuxSpecSeparate& aux, bool need_q) {
    int nA = sys.card("A"), nX = sys.card("X");
    check_axis_names(aux.p_tx.axes(), {"T", "X"}, "p_tx");
    if (aux.p_tx.axes()[1].size != nX)
        throw std::invalid_argument("p_tx: X alphabet does not match the system");
    int nT = aux.p_tx.axes()[0].size;
    if (nT > (nX + 1) * (nX + 2)) throw std::invalid_argument("cardinality cap violated: |T|");
    check_axis_names(aux.p_v_given_a.given(), {"A"}, "p_v_given_a given");
    check_axis_names(aux.p_v_given_a.out(), {"V"}, "p_v_given_a out");
    if (aux.p_v_given_a.given()[0].size != nA)
        throw std::invalid_argument("p_v_given_a: A alphabet does not match the system");
    int nV = aux.p_v_given_a.out()[0].size;
    if (nV > (nA + 1) * (nA + 2)) throw std::invalid_argument("cardinality cap violated: |V|");
    check_axis_names(aux.p_u_given_v.given(), {"V"}, "p_u_given_v given");
    check_axis_names(aux.p_u_given_v.out(), {"U"}, "p_u_given_v out");
    if (aux.p_u_given_v.given()[0].size != nV)
        throw std::invalid_argument("p_u_given_v: V alphabet mismatch");
    if (aux.p_u_given_v.out()[0].size > nA + 2)
        throw std::invalid_argument("cardinality cap violated: |U|");
    if (need_q) {
        if (!aux.p_q_given_t)
            throw std::invalid_argument("the refinement layer p(Q|T) is required here");
        check_axis_names(aux.p_q_given_t->given(), {"T"}, "p_q_given_t given");
        check_axis_names(aux.p_q_given_t->out(), {"Q"}, "p_q_given_t out");
        if (aux.p_q_given_t->given()[0].size != nT)
            throw std::invalid_argument("p_q_given_t: T alphabet mismatch");
        if (aux.p_q_given_t->out()[0].size > nX + 2)
            throw std::invalid_argument("cardinality cap violated: |Q|");
    }
}

FinitePmf source_chain(const SystemSpec& sys, const AuxSpecSeparate& aux) {
    return sys.source.extend(aux.p_v_given_a).extend(aux.p_u_given_v);  // A,B,E,V,U
}

}  // namespace

OuterEval eval_outer_thm1(const SystemSpec& sys, const AuxSpecSeparate& aux) {
    sys.validate();
    if (sys.state_coupled)
        throw std::domain_error("outer evaluation requires sources independent of the channel");
    check_sep_caps(sys, aux, false);
    FinitePmf chan = aux.p_tx.extend(sys.channel);  // T,X,Y,Z
    FinitePmf src = source_chain(sys, aux);
    OuterEval r;
    r.rate = sys.eta * (cond_mutual_info(chan, kT, kY, kNone) - cond_mutual_info(chan, kT, kZ, kNone)) +
             cond_mutual_info(src, kV, kB, kU) - cond_mutual_info(src, kV, kE, kU);
    r.slack = sys.eta * cond_mutual_info(chan, kX, kY, kNone) - cond_mutual_info(src, kV, kA, kB);
    return r;
}

InnerSepEval eval_inner_sep_thm2(const SystemSpec& sys, const AuxSpecSeparate& aux) {
    sys.validate();
    if (sys.state_coupled)
        throw std::domain_error("separate-scheme evaluation requires sources independent of the channel");
    check_sep_caps(sys, aux, true);
    FinitePmf chan = aux.p_tx.extend(*aux.p_q_given_t).extend(sys.channel);  // T,X,Q,Y,Z
    FinitePmf src = source_chain(sys, aux);
    InnerSepEval r;
    r.rate = sys.eta * (cond_mutual_info(chan, kT, kY, kQ) - cond_mutual_info(chan, kT, kZ, kQ)) +
             cond_mutual_info(src, kV, kB, kU) - cond_mutual_info(src, kV, kE, kU);
    r.slack_u = sys.eta * cond_mutual_info(chan, kQ, kY, kNone) - cond_mutual_info(src, kU, kA, kB);
    r.slack_v = sys.eta * cond_mutual_info(chan, kT, kY, kNone) - cond_mutual_info(src, kV, kA, kB);
    return r;
}

InnerJointEval eval_inner_joint_thm3(const SystemSpec& sys, const AuxSpecJoint& aux) {
    sys.validate();
    if (std::abs(sys.eta - 1.0) > 1e-12)
        throw std::domain_error("joint-scheme evaluation is defined for eta = 1 only");
    int nA = sys.card("A"), nX = sys.card("X");
    check_axis_names(aux.p_vx_given_a.given(), {"A"}, "p_vx_given_a given");
    check_axis_names(aux.p_vx_given_a.out(), {"V", "X"}, "p_vx_given_a out");
    if (aux.p_vx_given_a.given()[0].size != nA)
        throw std::invalid_argument("p_vx_given_a: A alphabet does not match the system");
    if (aux.p_vx_given_a.out()[1].size != nX)
        throw std::invalid_argument("p_vx_given_a: X alphabet does not match the system");
    int nV = aux.p_vx_given_a.out()[0].size;
    int cap_u = nX * nA + 4;
    if (nV > (nX * nA + 2) * cap_u) throw std::invalid_argument("cardinality cap violated: |V|");
    check_axis_names(aux.p_u_given_v.given(), {"V"}, "p_u_given_v given");
    check_axis_names(aux.p_u_given_v.out(), {"U"}, "p_u_given_v out");
    if (aux.p_u_given_v.given()[0].size != nV)
        throw std::invalid_argument("p_u_given_v: V alphabet mismatch");
    if (aux.p_u_given_v.out()[0].size > cap_u)
        throw std::invalid_argument("cardinality cap violated: |U|");

    FinitePmf joint =
        sys.source.extend(aux.p_vx_given_a).extend(aux.p_u_given_v).extend(sys.channel);
    InnerJointEval r;
    double ivby_u = cond_mutual_info(joint, kV, kBY, kU);
    r.rate = ivby_u - cond_mutual_info(joint, kV, kEZ, kU);
    r.slack_u = cond_mutual_info(joint, kU, kBY, kNone) - cond_mutual_info(joint, kU, kA, kNone);
    r.slack_v = ivby_u - cond_mutual_info(joint, kV, kA, kU);
    return r;
}

namespace {

// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, tau = 0.0;
    int rho = -1;
    for (std::size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        double t = (css - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            rho = static_cast<int>(j);
            tau = t;
        }
    }
    (void)rho;
    double sum = 0.0;
    for (auto& x : v) {
        x = std::max(0.0, x - tau);
        sum += x;
    }
    // guard exact mass for downstream 1e-12 validation
    if (sum > 0.0)
        for (auto& x : v) x /= sum;
    else
        v.assign(v.size(), 1.0 / static_cast<double>(v.size()));
    return v;
}

std::vector<double> dirichlet_row(std::mt19937_64& g, std::size_t k) {
    std::vector<double> row(k);
    double sum = 0.0;
    for (auto& x : row) {
        double u;
        do {
            u = uniform01(g);
        } while (u <= 0.0);
        x = -std::log(u);
        sum += x;
    }
    for (auto& x : row) x /= sum;
    return row;
}

using Rows = std::vector<std::vector<double>>;

struct ParamShape {
    std::size_t rows = 0;
    std::size_t cols = 0;
};

struct Score {
    double value = 0.0;   // rate when feasible, else -1000 + min slack
    double rate = 0.0;
    double slack_a = 0.0;
    double slack_b = 0.0;
    bool feasible = false;
};

}  // namespace

BoundResult optimize_generic(const SystemSpec& sys, RegionKind which, const AuxCards& cards,
                             int restarts, std::uint64_t seed) {
    sys.validate();
    if (restarts < 1) throw std::invalid_argument("optimize_generic: restarts must be >= 1");
    if (cards.T < 1 || cards.Q < 1 || cards.U < 1 || cards.V < 1)
        throw std::invalid_argument("optimize_generic: cardinalities must be >= 1");
    const int nA = sys.card("A"), nX = sys.card("X");
    if (which == RegionKind::InnerJoint) {
        if (cards.U > nX * nA + 4 || cards.V > (nX * nA + 2) * (nX * nA + 4))
            throw std::invalid_argument("optimize_generic: cardinality cap violated");
    } else {
        if (cards.U > nA + 2 || cards.V > (nA + 1) * (nA + 2) || cards.Q > nX + 2 ||
            cards.T > (nX + 1) * (nX + 2))
            throw std::invalid_argument("optimize_generic: cardinality cap violated");
    }

    // parameter blocks, each a list of simplex rows
    std::vector<ParamShape> shapes;
    if (which == RegionKind::InnerJoint) {
        shapes.push_back({static_cast<std::size_t>(nA),
                          static_cast<std::size_t>(cards.V * nX)});  // p(v,x|a)
        shapes.push_back({static_cast<std::size_t>(cards.V),
                          static_cast<std::size_t>(cards.U)});       // p(u|v)
    } else {
        shapes.push_back({1, static_cast<std::size_t>(cards.T * nX)});  // p(t,x)
        if (which == RegionKind::InnerSep)
            shapes.push_back({static_cast<std::size_t>(cards.T),
                              static_cast<std::size_t>(cards.Q)});      // p(q|t)
        shapes.push_back({static_cast<std::size_t>(nA),
                          static_cast<std::size_t>(cards.V)});          // p(v|a)
        shapes.push_back({static_cast<std::size_t>(cards.V),
                          static_cast<std::size_t>(cards.U)});          // p(u|v)
    }

    auto flatten = [](const std::vector<Rows>& blocks, std::size_t b) { return blocks[b]; };
    (void)flatten;

    auto score = [&](const std::vector<Rows>& blocks) -> Score {
        Score s;
        if (which == RegionKind::InnerJoint) {
            std::vector<double> vx;
            for (const auto& row : blocks[0]) vx.insert(vx.end(), row.begin(), row.end());
            std::vector<double> uv;
            for (const auto& row : blocks[1]) uv.insert(uv.end(), row.begin(), row.end());
            AuxSpecJoint aux{
                CondPmf({{"A", nA}}, {{"V", cards.V}, {"X", nX}}, std::move(vx)),
                CondPmf({{"V", cards.V}}, {{"U", cards.U}}, std::move(uv))};
            InnerJointEval e = eval_inner_joint_thm3(sys, aux);
            s.rate = e.rate;
            s.slack_a = e.slack_u;
            s.slack_b = e.slack_v;
        } else {
            std::vector<double> tx = blocks[0][0];
            std::size_t bi = 1;
            std::optional<CondPmf> qt;
            if (which == RegionKind::InnerSep) {
                std::vector<double> q;
                for (const auto& row : blocks[bi]) q.insert(q.end(), row.begin(), row.end());
                qt.emplace(std::vector<Axis>{{"T", cards.T}}, std::vector<Axis>{{"Q", cards.Q}},
                           std::move(q));
                ++bi;
            }
            std::vector<double> va;
            for (const auto& row : blocks[bi]) va.insert(va.end(), row.begin(), row.end());
            ++bi;
            std::vector<double> uv;
            for (const auto& row : blocks[bi]) uv.insert(uv.end(), row.begin(), row.end());
            AuxSpecSeparate aux{
                FinitePmf({{"T", cards.T}, {"X", nX}}, std::move(tx)), std::move(qt),
                CondPmf({{"A", nA}}, {{"V", cards.V}}, std::move(va)),
                CondPmf({{"V", cards.V}}, {{"U", cards.U}}, std::move(uv))};
            if (which == RegionKind::Outer) {
                OuterEval e = eval_outer_thm1(sys, aux);
                s.rate = e.rate;
                s.slack_a = e.slack;
                s.slack_b = e.slack;
            } else {
                InnerSepEval e = eval_inner_sep_thm2(sys, aux);
                s.rate = e.rate;
                s.slack_a = e.slack_u;
                s.slack_b = e.slack_v;
            }
        }
        double min_slack = std::min(s.slack_a, s.slack_b);
        s.feasible = min_slack >= -1e-12;
        s.value = s.feasible ? s.rate : -1000.0 + min_slack;
        return s;
    };

    Score best;
    best.value = -std::numeric_limits<double>::infinity();
    int best_restart = -1;

    for (int rs = 0; rs < restarts; ++rs) {
        std::mt19937_64 g = derive_engine(seed, 0x6f7074u, static_cast<uint64_t>(rs));
        std::vector<Rows> blocks;
        for (const auto& sh : shapes) {
            Rows rows;
            for (std::size_t r = 0; r < sh.rows; ++r) rows.push_back(dirichlet_row(g, sh.cols));
            blocks.push_back(std::move(rows));
        }
        Score cur = score(blocks);
        double step = 0.25;
        while (step >= 1e-4) {
            bool improved = true;
            while (improved) {
                improved = false;
                for (std::size_t b = 0; b < blocks.size(); ++b)
                    for (std::size_t r = 0; r < blocks[b].size(); ++r)
                        for (std::size_t j = 0; j < blocks[b][r].size(); ++j)
                            for (double dir : {1.0, -1.0}) {
                                std::vector<double> save = blocks[b][r];
                                std::vector<double> cand = save;
                                cand[j] += dir * step;
                                cand = project_simplex(std::move(cand));
                                blocks[b][r] = cand;
                                Score cs = score(blocks);
                                if (cs.value > cur.value) {
                                    cur = cs;
                                    improved = true;
                                } else {
                                    blocks[b][r] = save;
                                }
                            }
            }
            step *= 0.5;
        }
        if (cur.value > best.value) {
            best = cur;
            best_restart = rs;
        }
    }

    BoundResult out;
    out.certified = false;
    out.feasible = best.feasible;
    if (!best.feasible) {
        out.rk = 0.0;
        out.slack = std::min(best.slack_a, best.slack_b);
        out.aux = {{"restart", static_cast<double>(best_restart)}};
        return out;
    }
    out.rk = std::max(0.0, best.rate);
    out.slack = std::min(best.slack_a, best.slack_b);
    out.aux = {{"raw_value", best.rate},
               {"slack_u", best.slack_a},
               {"slack_v", best.slack_b},
               {"restart", static_cast<double>(best_restart)}};
    return out;
}

namespace {

// Row-stochastic 2x2 table for "out = in xor B(p)".
std::vector<double> bsc_rows(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("flip probability outside [0,1]");
    return {1.0 - p, p, p, 1.0 - p};
}

}  // namespace

AuxSpecSeparate make_flip_chain_aux(double u, double v, double q) {
    FinitePmf p_tx({{"T", 2}, {"X", 2}}, {0.5, 0.0, 0.0, 0.5});
    CondPmf p_q_given_t({{"T", 2}}, {{"Q", 2}}, bsc_rows(q));
    CondPmf p_v_given_a({{"A", 2}}, {{"V", 2}}, bsc_rows(v));
    CondPmf p_u_given_v({{"V", 2}}, {{"U", 2}}, bsc_rows(u));
    return AuxSpecSeparate{std::move(p_tx), std::move(p_q_given_t), std::move(p_v_given_a),
                           std::move(p_u_given_v)};
}

AuxSpecJoint make_uniform_passthrough_aux() {
    // p(v,x|a) = 1/2 * [x == v], independent of a
    std::vector<double> t(2 * 4, 0.0);
    for (int a = 0; a < 2; ++a)
        for (int v = 0; v < 2; ++v) t[a * 4 + v * 2 + v] = 0.5;
    CondPmf p_vx({{"A", 2}}, {{"V", 2}, {"X", 2}}, std::move(t));
    CondPmf p_u({{"V", 2}}, {{"U", 1}}, {1.0, 1.0});
    return AuxSpecJoint{std::move(p_vx), std::move(p_u)};
}

AuxSpecJoint make_state_xor_aux(double v) {
    // p(w,x|a) = 1/2 * [x == w xor a] for the codeword symbol w
    std::vector<double> t(2 * 4, 0.0);
    for (int a = 0; a < 2; ++a)
        for (int w = 0; w < 2; ++w) t[a * 4 + w * 2 + (w ^ a)] = 0.5;
    CondPmf p_vx({{"A", 2}}, {{"V", 2}, {"X", 2}}, std::move(t));
    CondPmf p_u({{"V", 2}}, {{"U", 2}}, bsc_rows(v));
    return AuxSpecJoint{std::move(p_vx), std::move(p_u)};
}

}  // namespace skr
