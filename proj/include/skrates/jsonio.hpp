#pragma once

#include <optional>
#include <string>
#include <variant>

#include "skrates/sim.hpp"

namespace skr {

// Optional pass/fail thresholds a simulation config may carry; the CLI maps
// an unsatisfied predicate to its dedicated exit code.
struct SimAcceptance {
    std::optional<double> min_agreement;
    std::optional<double> max_leakage;
    std::optional<double> max_decode_error;
    std::optional<double> max_encode_failure;

    bool satisfied_by(const SimReport& rep) const;
};

struct JointRun {
    JointSimConfig cfg;
    AuxSpecJoint aux;
    SimAcceptance accept;
};

struct SeparateRun {
    SeparateSimConfig cfg;
    AuxSpecSeparate aux;
    SimAcceptance accept;
};

using SimRun = std::variant<JointRun, SeparateRun>;

// Parses a simulation config document (schema documented in the README;
// requires schema_version == 1). Throws std::invalid_argument naming the
// offending field on malformed input. Does not run cfg.validate().
SimRun parse_sim_config(const std::string& json_text);

// Serializes a report with a fixed field order so identical runs produce
// byte-identical documents.
std::string report_to_json(const SimReport& rep);

}  // namespace skr
