#include "skrates/models.hpp"

#include <stdexcept>

namespace skr {

namespace {

void check01(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::domain_error(std::string(name) + " outside [0,1]");
}

}  // namespace

void BecBscModel::validate() const {
    check01(zeta, "zeta");
    check01(beta, "beta");
    check01(epsilon, "epsilon");
    if (zeta > 0.5) throw std::domain_error("zeta outside [0,1/2]");
    if (epsilon > 0.5) throw std::domain_error("epsilon outside [0,1/2]");
}

void BinaryStateModel::validate() const {
    check01(a, "a");
    check01(zeta, "zeta");
    check01(beta, "beta");
    check01(eps, "eps");  // eps is an erasure probability, so the full [0,1] is valid
    if (zeta > 0.5) throw std::domain_error("zeta outside [0,1/2]");
}

void GaussianStateModel::validate() const {
    if (!(P >= 0.0)) throw std::domain_error("P must be >= 0");
    if (!(Q >= 0.0)) throw std::domain_error("Q must be >= 0");
    if (!(N1 > 0.0)) throw std::domain_error("N1 must be > 0");
    if (!(N2 > 0.0)) throw std::domain_error("N2 must be > 0");
}

const char* to_string(SourceRegime r) {
    switch (r) {
        case SourceRegime::Degraded: return "degraded";
        case SourceRegime::LessNoisy: return "less_noisy";
        case SourceRegime::MoreCapable: return "more_capable";
        default: return "unordered";
    }
}

SourceRegime classify_source_regime(double eps, double beta) {
    check01(beta, "beta");
    if (!(eps >= 0.0 && eps <= 0.5)) throw std::domain_error("eps outside [0,1/2]");
    if (beta < 2.0 * eps) return SourceRegime::Degraded;
    if (beta < 4.0 * eps * (1.0 - eps)) return SourceRegime::LessNoisy;
    if (beta < h2(eps)) return SourceRegime::MoreCapable;
    return SourceRegime::Unordered;
}

FinitePmf becbsc_joint_pmf(const BecBscModel& m) {
    m.validate();
    std::vector<Axis> axes{{"A", 2}, {"B", 3}, {"E", 2}};
    std::vector<double> t(2 * 3 * 2, 0.0);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 3; ++b)
            for (int e = 0; e < 2; ++e) {
                double pb = (b == 2) ? m.beta : (b == a ? 1.0 - m.beta : 0.0);
                double pe = (e == a) ? 1.0 - m.epsilon : m.epsilon;
                t[(a * 3 + b) * 2 + e] = 0.5 * pb * pe;
            }
    return FinitePmf(std::move(axes), std::move(t));
}

FinitePmf binary_state_source_pmf(const BinaryStateModel& m) {
    m.validate();
    std::vector<Axis> axes{{"A", 2}, {"B", 3}, {"E", 3}};
    std::vector<double> t(2 * 3 * 3, 0.0);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 3; ++b)
            for (int e = 0; e < 3; ++e) {
                double pa = (a == 1) ? m.a : 1.0 - m.a;
                double pb = (b == 2) ? m.beta : (b == a ? 1.0 - m.beta : 0.0);
                double pe = (e == 2) ? m.eps : (e == a ? 1.0 - m.eps : 0.0);
                t[(a * 3 + b) * 3 + e] = pa * pb * pe;
            }
    return FinitePmf(std::move(axes), std::move(t));
}

CondPmf becbsc_channel(const BecBscModel& m) {
    m.validate();
    std::vector<Axis> given{{"X", 2}};
    std::vector<Axis> out{{"Y", 2}, {"Z", 2}};
    std::vector<double> t(2 * 4, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int z = 0; z < 2; ++z) {
                double py = (y == x) ? 1.0 : 0.0;
                double pz = (z == x) ? 1.0 - m.zeta : m.zeta;
                t[x * 4 + y * 2 + z] = py * pz;
            }
    return CondPmf(std::move(given), std::move(out), std::move(t));
}

CondPmf binary_state_channel(const BinaryStateModel& m) {
    m.validate();
    std::vector<Axis> given{{"X", 2}, {"A", 2}};
    std::vector<Axis> out{{"Y", 2}, {"Z", 2}};
    std::vector<double> t(4 * 4, 0.0);
    for (int x = 0; x < 2; ++x)
        for (int a = 0; a < 2; ++a)
            for (int y = 0; y < 2; ++y)
                for (int z = 0; z < 2; ++z) {
                    double py = (y == (x ^ a)) ? 1.0 : 0.0;
                    double pz = (z == y) ? 1.0 - m.zeta : m.zeta;
                    t[(x * 2 + a) * 4 + y * 2 + z] = py * pz;
                }
    return CondPmf(std::move(given), std::move(out), std::move(t));
}

}  // namespace skr
