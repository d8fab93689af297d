#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace skr {

struct BoxDim {
    double lo = 0.0;
    double hi = 1.0;
};

// Search box for maximize_box. grid_points == 0 picks a per-dimension default
// (513 for 1-D, 129 for 2-D, 65 for 3-D, 33 for 4-D).
struct BoxSpec {
    std::vector<BoxDim> dims;
    int grid_points = 0;
    int refine_rounds = 3;
};

struct MaxResult {
    bool feasible = false;
    double value = 0.0;
    std::vector<double> arg;
};

using Objective = std::function<double(const std::vector<double>&)>;
using Feasible = std::function<bool(const std::vector<double>&)>;

// Deterministic derivative-free maximizer: dense grid scan (ties keep the
// lexicographically smallest point) followed by refine_rounds passes of
// per-coordinate golden-section refinement within +-1 original grid cell.
// Monotone: refinement never decreases the incumbent value. Returns
// feasible=false when no grid point satisfies the constraint. Throws on an
// empty box, bad grid size, or a non-finite objective at a feasible point.
MaxResult maximize_box(const Objective& objective, const Feasible& feasible, const BoxSpec& box);

// Interval where a*g^2 + b*g + c >= 0 for a < 0 (throws otherwise).
// nullopt when the quadratic is negative everywhere.
std::optional<std::array<double, 2>> quad_roots(double a, double b, double c);

}  // namespace skr
