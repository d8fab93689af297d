#include "skrates/jsonio.hpp"

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace skr {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw std::invalid_argument(msg); }

const json& field(const json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end()) bad(std::string("missing field '") + key + "' in " + ctx);
    return *it;
}

double num_field(const json& j, const char* key, const char* ctx) {
    const json& f = field(j, key, ctx);
    if (!f.is_number()) bad(std::string("field '") + ctx + "." + key + "' must be a number");
    return f.get<double>();
}

int int_field(const json& j, const char* key, const char* ctx) {
    const json& f = field(j, key, ctx);
    if (!f.is_number_integer()) bad(std::string("field '") + ctx + "." + key + "' must be an integer");
    return f.get<int>();
}

std::string str_field(const json& j, const char* key, const char* ctx) {
    const json& f = field(j, key, ctx);
    if (!f.is_string()) bad(std::string("field '") + ctx + "." + key + "' must be a string");
    return f.get<std::string>();
}

std::optional<double> opt_num(const json& j, const char* key, const char* ctx) {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_number()) bad(std::string("field '") + ctx + "." + key + "' must be a number");
    return it->get<double>();
}

ModelVariant parse_model(const json& j) {
    if (!j.is_object()) bad("field 'model' must be an object");
    const std::string type = str_field(j, "type", "model");
    if (type == "becbsc") {
        BecBscModel m;
        m.zeta = num_field(j, "zeta", "model");
        m.epsilon = num_field(j, "eps", "model");
        m.beta = num_field(j, "beta", "model");
        return m;
    }
    if (type == "binary_state") {
        BinaryStateModel m;
        m.a = num_field(j, "a", "model");
        m.zeta = num_field(j, "zeta", "model");
        m.beta = num_field(j, "beta", "model");
        m.eps = num_field(j, "eps", "model");
        return m;
    }
    bad("field 'model.type' must be \"becbsc\" or \"binary_state\"");
}

// Reads `rows` rows of `cols` numbers each (an array of arrays) into a flat
// row-major table.
std::vector<double> table_field(const json& j, const char* key, int rows, int cols,
                                const char* ctx) {
    const json& f = field(j, key, ctx);
    if (!f.is_array() || static_cast<int>(f.size()) != rows)
        bad(std::string("field 'aux.") + key + "' must be an array of " + std::to_string(rows) +
            " rows");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(rows) * cols);
    for (const auto& row : f) {
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            bad(std::string("field 'aux.") + key + "' rows must each hold " +
                std::to_string(cols) + " numbers");
        for (const auto& v : row) {
            if (!v.is_number()) bad(std::string("field 'aux.") + key + "' must hold numbers");
            out.push_back(v.get<double>());
        }
    }
    return out;
}

AuxSpecJoint parse_joint_aux(const json& j, const SystemSpec& sys) {
    if (!j.is_object()) bad("field 'aux' must be an object");
    const std::string family = str_field(j, "family", "aux");
    if (family == "uniform_passthrough") return make_uniform_passthrough_aux();
    if (family == "state_xor") return make_state_xor_aux(num_field(j, "v", "aux"));
    if (family == "tables") {
        const int nA = sys.card("A"), nX = sys.card("X");
        const int nV = int_field(j, "nV", "aux");
        const int nU = int_field(j, "nU", "aux");
        if (nV < 1 || nU < 1) bad("aux alphabet sizes must be >= 1");
        CondPmf p_vx({{"A", nA}}, {{"V", nV}, {"X", nX}},
                     table_field(j, "p_vx_given_a", nA, nV * nX, "aux"));
        CondPmf p_u({{"V", nV}}, {{"U", nU}}, table_field(j, "p_u_given_v", nV, nU, "aux"));
        return AuxSpecJoint{std::move(p_vx), std::move(p_u)};
    }
    bad("field 'aux.family' must be \"uniform_passthrough\", \"state_xor\" or \"tables\"");
}

AuxSpecSeparate parse_separate_aux(const json& j, const SystemSpec& sys) {
    if (!j.is_object()) bad("field 'aux' must be an object");
    const std::string family = str_field(j, "family", "aux");
    if (family == "flip_chain")
        return make_flip_chain_aux(num_field(j, "u", "aux"), num_field(j, "v", "aux"),
                                   num_field(j, "q", "aux"));
    if (family == "tables") {
        const int nA = sys.card("A"), nX = sys.card("X");
        const int nT = int_field(j, "nT", "aux");
        const int nQ = int_field(j, "nQ", "aux");
        const int nV = int_field(j, "nV", "aux");
        const int nU = int_field(j, "nU", "aux");
        if (nT < 1 || nQ < 1 || nV < 1 || nU < 1) bad("aux alphabet sizes must be >= 1");
        FinitePmf p_tx({{"T", nT}, {"X", nX}}, table_field(j, "p_tx", nT, nX, "aux"));
        CondPmf p_q({{"T", nT}}, {{"Q", nQ}}, table_field(j, "p_q_given_t", nT, nQ, "aux"));
        CondPmf p_v({{"A", nA}}, {{"V", nV}}, table_field(j, "p_v_given_a", nA, nV, "aux"));
        CondPmf p_u({{"V", nV}}, {{"U", nU}}, table_field(j, "p_u_given_v", nV, nU, "aux"));
        return AuxSpecSeparate{std::move(p_tx), std::move(p_q), std::move(p_v), std::move(p_u)};
    }
    bad("field 'aux.family' must be \"flip_chain\" or \"tables\"");
}

SimAcceptance parse_accept(const json& root) {
    SimAcceptance acc;
    auto it = root.find("accept");
    if (it == root.end()) return acc;
    if (!it->is_object()) bad("field 'accept' must be an object");
    acc.min_agreement = opt_num(*it, "min_agreement", "accept");
    acc.max_leakage = opt_num(*it, "max_leakage", "accept");
    acc.max_decode_error = opt_num(*it, "max_decode_error", "accept");
    acc.max_encode_failure = opt_num(*it, "max_encode_failure", "accept");
    return acc;
}

std::uint64_t seed_field(const json& j) {
    auto it = j.find("seed");
    if (it == j.end()) return 0;
    if (!it->is_number_integer() && !it->is_number_unsigned())
        bad("field 'seed' must be an integer");
    return it->get<std::uint64_t>();
}

}  // namespace

bool SimAcceptance::satisfied_by(const SimReport& rep) const {
    if (min_agreement && rep.agreement_rate < *min_agreement) return false;
    if (max_leakage && rep.leakage_bits_per_symbol > *max_leakage) return false;
    if (max_decode_error && rep.decode_error_rate > *max_decode_error) return false;
    if (max_encode_failure && rep.encode_failure_rate > *max_encode_failure) return false;
    return true;
}

SimRun parse_sim_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        bad(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) bad("config root must be an object");
    const int version = int_field(root, "schema_version", "config");
    if (version != 1) bad("unsupported schema_version (this build reads version 1)");

    const std::string scheme = str_field(root, "scheme", "config");
    ModelVariant model = parse_model(field(root, "model", "config"));
    SystemSpec sys = make_system(model);
    const json& rates = field(root, "rates", "config");
    if (!rates.is_object()) bad("field 'rates' must be an object");

    if (scheme == "joint") {
        JointSimConfig cfg;
        cfg.model = model;
        cfg.n = int_field(root, "n", "config");
        cfg.R1 = num_field(rates, "R1", "rates");
        cfg.R2 = num_field(rates, "R2", "rates");
        cfg.Rf = num_field(rates, "Rf", "rates");
        cfg.Rk = opt_num(rates, "Rk", "rates").value_or(0.0);
        if (auto d = opt_num(root, "delta", "config")) cfg.delta = *d;
        if (root.contains("trials")) cfg.trials = int_field(root, "trials", "config");
        cfg.seed = seed_field(root);
        AuxSpecJoint aux = parse_joint_aux(field(root, "aux", "config"), sys);
        return SimRun{JointRun{std::move(cfg), std::move(aux), parse_accept(root)}};
    }
    if (scheme == "separate") {
        SeparateSimConfig cfg;
        cfg.model = model;
        cfg.n = int_field(root, "n", "config");
        cfg.m = int_field(root, "m", "config");
        cfg.S1 = num_field(rates, "S1", "rates");
        cfg.S2p = num_field(rates, "S2p", "rates");
        cfg.S2pp = num_field(rates, "S2pp", "rates");
        cfg.R1 = num_field(rates, "R1", "rates");
        cfg.R2 = num_field(rates, "R2", "rates");
        cfg.Rc = num_field(rates, "Rc", "rates");
        cfg.Rp = num_field(rates, "Rp", "rates");
        cfg.Rf = num_field(rates, "Rf", "rates");
        cfg.Rk = opt_num(rates, "Rk", "rates");
        if (auto d = opt_num(root, "delta", "config")) cfg.delta = *d;
        if (root.contains("trials")) cfg.trials = int_field(root, "trials", "config");
        cfg.seed = seed_field(root);
        AuxSpecSeparate aux = parse_separate_aux(field(root, "aux", "config"), sys);
        return SimRun{SeparateRun{std::move(cfg), std::move(aux), parse_accept(root)}};
    }
    bad("field 'scheme' must be \"joint\" or \"separate\"");
}

std::string report_to_json(const SimReport& rep) {
    nlohmann::ordered_json j;
    j["agreement_rate"] = rep.agreement_rate;
    j["encode_failure_rate"] = rep.encode_failure_rate;
    j["decode_error_rate"] = rep.decode_error_rate;
    j["leakage_bits_per_symbol"] = rep.leakage_bits_per_symbol;
    j["leakage_method"] = rep.leakage_method;
    j["trials_run"] = rep.trials_run;
    return j.dump(2) + "\n";
}

}  // namespace skr
