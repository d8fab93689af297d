#pragma once

#include <string>
#include <utility>
#include <vector>

namespace skr {

// Result of a bound evaluation or search. rk is floored at 0; feasible=false
// (with rk=0) marks an empty search space. slack is the margin of the binding
// constraint at the reported argmax (0 for unconstrained closed forms).
// certified is true only for direct formula evaluations; any grid or
// multi-start search reports best-found semantics with certified=false.
// aux carries named argmax parameters in a fixed order.
struct BoundResult {
    double rk = 0.0;
    bool feasible = true;
    double slack = 0.0;
    bool certified = false;
    std::vector<std::pair<std::string, double>> aux;

    double aux_value(const std::string& name) const;
    bool has_aux(const std::string& name) const;
};

}  // namespace skr
