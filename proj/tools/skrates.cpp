#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "skrates/becbsc.hpp"
#include "skrates/jsonio.hpp"
#include "skrates/models.hpp"
#include "skrates/sim.hpp"
#include "skrates/state.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArg = 2;
constexpr int kExitIo = 3;
constexpr int kExitAccept = 4;

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// Writes to stdout when path is empty, else to the file; false on I/O failure.
bool emit(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return static_cast<bool>(std::cout);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) return false;
    f << text;
    f.flush();
    return static_cast<bool>(f);
}

nlohmann::ordered_json bound_json(const skr::BoundResult& r) {
    nlohmann::ordered_json j;
    j["rk"] = r.rk;
    j["feasible"] = r.feasible;
    j["slack"] = r.slack;
    nlohmann::ordered_json am = nlohmann::ordered_json::object();
    for (const auto& [k, v] : r.aux) am[k] = v;
    j["argmax"] = am;
    return j;
}

struct SweepArgs {
    double zeta = 0.0, eps = 0.0;
    double beta_min = 0.0, beta_max = 1.0;
    int steps = 2;
    std::string out;
    std::string format = "csv";
};

int run_sweep(const SweepArgs& a) {
    if (!(a.beta_min >= 0.0 && a.beta_min <= a.beta_max && a.beta_max <= 1.0)) {
        std::cerr << "error: need 0 <= beta-min <= beta-max <= 1\n";
        return kExitArg;
    }
    if (a.steps < 1) {
        std::cerr << "error: steps must be >= 1\n";
        return kExitArg;
    }
    std::vector<double> grid(a.steps);
    for (int i = 0; i < a.steps; ++i)
        grid[i] = a.steps == 1
                      ? a.beta_min
                      : a.beta_min + (a.beta_max - a.beta_min) * i / (a.steps - 1);
    std::vector<skr::SweepRow> rows = skr::sweep(a.zeta, a.eps, grid);

    std::string text;
    if (a.format == "csv") {
        std::string s = "beta,outer,i_sep,i_sep_1l,i_jscc\n";
        for (const auto& r : rows)
            s += fmt6(r.beta) + "," + fmt6(r.outer) + "," + fmt6(r.i_sep) + "," +
                 fmt6(r.i_sep_1l) + "," + fmt6(r.i_jscc) + "\n";
        text = std::move(s);
    } else {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json row;
            row["beta"] = r.beta;
            row["outer"] = r.outer;
            row["i_sep"] = r.i_sep;
            row["i_sep_1l"] = r.i_sep_1l;
            row["i_jscc"] = r.i_jscc;
            arr.push_back(std::move(row));
        }
        text = arr.dump(2) + "\n";
    }
    if (!emit(a.out, text)) {
        std::cerr << "error: cannot write output to '" << a.out << "'\n";
        return kExitIo;
    }
    return kExitOk;
}

struct PointArgs {
    double zeta = 0.0, eps = 0.0, beta = 0.0;
    std::string bound = "all";
};

int run_point(const PointArgs& a) {
    skr::BecBscModel m{a.zeta, a.beta, a.eps};
    m.validate();
    nlohmann::ordered_json j;
    j["zeta"] = a.zeta;
    j["eps"] = a.eps;
    j["beta"] = a.beta;
    const bool all = a.bound == "all";
    if (all || a.bound == "outer") j["outer"] = bound_json(skr::outer_bound(m));
    if (all || a.bound == "sep") j["i_sep"] = bound_json(skr::inner_separate(m));
    if (all || a.bound == "sep1l") j["i_sep_1l"] = bound_json(skr::inner_separate_1layer(m));
    if (all || a.bound == "joint") j["i_jscc"] = bound_json(skr::inner_joint(m));
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int run_classify(double eps, double beta) {
    if (!(eps >= 0.0 && eps <= 0.5)) {
        std::cerr << "error: eps must lie in [0, 0.5]\n";
        return kExitArg;
    }
    if (!(beta >= 0.0 && beta <= 1.0)) {
        std::cerr << "error: beta must lie in [0, 1]\n";
        return kExitArg;
    }
    std::cout << skr::to_string(skr::classify_source_regime(eps, beta)) << "\n";
    return kExitOk;
}

int print_state_bounds(const skr::BoundResult& outer, const skr::BoundResult& inner) {
    nlohmann::ordered_json j;
    j["outer"] = outer.rk;
    j["inner"] = inner.rk;
    j["gap"] = outer.rk - inner.rk;
    nlohmann::ordered_json am = nlohmann::ordered_json::object();
    for (const auto& [k, v] : inner.aux) am[k] = v;
    j["argmax"] = am;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

struct SimArgs {
    std::string config;
    int trials = -1;          // -1: keep config value
    long long seed = -1;      // -1: keep config value
    std::string out;
};

int run_simulate(const SimArgs& a, bool joint_scheme) {
    std::ifstream f(a.config, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot read config file '" << a.config << "'\n";
        return kExitIo;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    skr::SimRun run = skr::parse_sim_config(ss.str());

    if (joint_scheme != std::holds_alternative<skr::JointRun>(run)) {
        std::cerr << "error: config field 'scheme' does not match the requested subcommand\n";
        return kExitArg;
    }
    skr::SimReport rep;
    skr::SimAcceptance accept;
    if (auto* jr = std::get_if<skr::JointRun>(&run)) {
        if (a.trials >= 0) jr->cfg.trials = a.trials;
        if (a.seed >= 0) jr->cfg.seed = static_cast<std::uint64_t>(a.seed);
        rep = skr::run_joint_experiment(jr->cfg, jr->aux);
        accept = jr->accept;
    } else {
        auto& sr = std::get<skr::SeparateRun>(run);
        if (a.trials >= 0) sr.cfg.trials = a.trials;
        if (a.seed >= 0) sr.cfg.seed = static_cast<std::uint64_t>(a.seed);
        rep = skr::run_separate_experiment(sr.cfg, sr.aux);
        accept = sr.accept;
    }
    if (!emit(a.out, skr::report_to_json(rep))) {
        std::cerr << "error: cannot write output to '" << a.out << "'\n";
        return kExitIo;
    }
    return accept.satisfied_by(rep) ? kExitOk : kExitAccept;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Secret-key rate bounds for wiretap channels with correlated "
                 "sources, plus a binning-protocol simulator"};
    app.require_subcommand(1);

    // becbsc sweep / point
    auto* becbsc = app.add_subcommand("becbsc", "Erasure/crossover source model bounds");
    becbsc->require_subcommand(1);
    SweepArgs sa;
    auto* sweep = becbsc->add_subcommand("sweep", "Bounds over a beta grid (CSV/JSON)");
    sweep->add_option("--zeta", sa.zeta, "Eavesdropper tap crossover")->required();
    sweep->add_option("--eps", sa.eps, "Source crossover to E")->required();
    sweep->add_option("--beta-min", sa.beta_min, "Grid start")->required();
    sweep->add_option("--beta-max", sa.beta_max, "Grid end")->required();
    sweep->add_option("--steps", sa.steps, "Grid points")->required();
    sweep->add_option("--out", sa.out, "Output path (default stdout)");
    sweep->add_option("--format", sa.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    PointArgs pa;
    auto* point = becbsc->add_subcommand("point", "Bounds at a single beta");
    point->add_option("--zeta", pa.zeta)->required();
    point->add_option("--eps", pa.eps)->required();
    point->add_option("--beta", pa.beta)->required();
    point->add_option("--bound", pa.bound, "Which bound to print")
        ->check(CLI::IsMember({"outer", "sep", "sep1l", "joint", "all"}));

    // classify
    double cl_eps = 0.0, cl_beta = 0.0;
    auto* classify =
        app.add_subcommand("classify", "Source ordering regime of (eps, beta)");
    classify->add_option("--eps", cl_eps)->required();
    classify->add_option("--beta", cl_beta)->required();

    // state binary / gaussian
    auto* state = app.add_subcommand("state", "Channel-state model bounds");
    state->require_subcommand(1);
    skr::BinaryStateModel bm;
    auto* sb = state->add_subcommand("binary", "Additive binary state");
    sb->add_option("--a", bm.a)->required();
    sb->add_option("--zeta", bm.zeta)->required();
    sb->add_option("--beta", bm.beta)->required();
    sb->add_option("--eps", bm.eps)->required();

    skr::GaussianStateModel gm;
    bool g_full = false;
    auto* sg = state->add_subcommand("gaussian", "Additive Gaussian state");
    sg->add_option("--p", gm.P)->required();
    sg->add_option("--q", gm.Q)->required();
    sg->add_option("--n1", gm.N1)->required();
    sg->add_option("--n2", gm.N2)->required();
    sg->add_flag("--full", g_full, "Maximize over the full (rho, gamma) region");

    // simulate joint / separate
    auto* sim = app.add_subcommand("simulate", "Monte Carlo protocol simulation");
    sim->require_subcommand(1);
    SimArgs ja, sepa;
    auto* simj = sim->add_subcommand("joint", "Joint source-channel scheme");
    simj->add_option("--config", ja.config, "JSON config path")->required();
    simj->add_option("--trials", ja.trials, "Override config trials");
    simj->add_option("--seed", ja.seed, "Override config seed");
    simj->add_option("--out", ja.out, "Report path (default stdout)");
    auto* sims = sim->add_subcommand("separate", "Separate source/channel scheme");
    sims->add_option("--config", sepa.config, "JSON config path")->required();
    sims->add_option("--trials", sepa.trials, "Override config trials");
    sims->add_option("--seed", sepa.seed, "Override config seed");
    sims->add_option("--out", sepa.out, "Report path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitArg;
    }

    try {
        if (sweep->parsed()) return run_sweep(sa);
        if (point->parsed()) return run_point(pa);
        if (classify->parsed()) return run_classify(cl_eps, cl_beta);
        if (sb->parsed()) {
            bm.validate();
            return print_state_bounds(skr::binary_state_outer(bm), skr::binary_state_inner(bm));
        }
        if (sg->parsed()) {
            gm.validate();
            return print_state_bounds(skr::gaussian_outer(gm),
                                      g_full ? skr::gaussian_inner_full(gm)
                                             : skr::gaussian_inner_closed(gm));
        }
        if (simj->parsed()) return run_simulate(ja, /*joint_scheme=*/true);
        if (sims->parsed()) return run_simulate(sepa, /*joint_scheme=*/false);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitArg;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitArg;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    std::cerr << "error: no subcommand selected\n";
    return kExitArg;
}
