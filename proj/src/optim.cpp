#include "skrates/optim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace skr {

namespace {

constexpr double kGolden = 0.6180339887498949;  // 1/phi

int default_grid_points(std::size_t ndim) {
    switch (ndim) {
        case 1: return 513;
        case 2: return 129;
        case 3: return 65;
        default: return 33;
    }
}

}  // namespace

MaxResult maximize_box(const Objective& objective, const Feasible& feasible, const BoxSpec& box) {
    const std::size_t ndim = box.dims.size();
    if (ndim == 0 || ndim > 4) throw std::invalid_argument("maximize_box: need 1..4 dimensions");
    int n = box.grid_points > 0 ? box.grid_points : default_grid_points(ndim);
    if (n < 2) throw std::invalid_argument("maximize_box: need at least 2 grid points per dim");
    for (const auto& d : box.dims)
        if (!(d.lo < d.hi)) throw std::invalid_argument("maximize_box: empty box dimension");

    auto coord = [&](std::size_t d, int i) {
        return box.dims[d].lo + (box.dims[d].hi - box.dims[d].lo) * i / (n - 1);
    };

    auto eval = [&](const std::vector<double>& x) -> double {
        if (!feasible(x)) return -std::numeric_limits<double>::infinity();
        double v = objective(x);
        if (!std::isfinite(v))
            throw std::runtime_error("maximize_box: non-finite objective at feasible point");
        return v;
    };

    MaxResult best;
    best.value = -std::numeric_limits<double>::infinity();
    best.arg.assign(ndim, 0.0);

    // dense scan in lexicographic order; strict improvement keeps the first
    // (lexicographically smallest) achiever of the max
    std::vector<int> gi(ndim, 0);
    std::vector<double> x(ndim);
    bool done = false;
    while (!done) {
        for (std::size_t d = 0; d < ndim; ++d) x[d] = coord(d, gi[d]);
        double v = eval(x);
        if (v > best.value) {
            best.value = v;
            best.arg = x;
            best.feasible = true;
        }
        done = true;
        for (std::size_t d = ndim; d-- > 0;) {
            if (++gi[d] < n) {
                done = false;
                break;
            }
            gi[d] = 0;
        }
    }
    if (!best.feasible) {
        best.value = 0.0;
        best.arg.clear();
        return best;
    }

    // coordinate-wise golden-section refinement within one original grid cell
    for (int round = 0; round < box.refine_rounds; ++round) {
        for (std::size_t d = 0; d < ndim; ++d) {
            double cell = (box.dims[d].hi - box.dims[d].lo) / (n - 1);
            double lo = std::max(box.dims[d].lo, best.arg[d] - cell);
            double hi = std::min(box.dims[d].hi, best.arg[d] + cell);
            double a = lo, b = hi;
            std::vector<double> probe = best.arg;
            auto fd = [&](double t) {
                probe[d] = t;
                return eval(probe);
            };
            double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
            double f1 = fd(x1), f2 = fd(x2);
            double loc_v = best.value, loc_x = best.arg[d];
            for (int it = 0; it < 50; ++it) {
                if (f1 > loc_v) { loc_v = f1; loc_x = x1; }
                if (f2 > loc_v) { loc_v = f2; loc_x = x2; }
                if (f1 >= f2) {
                    b = x2; x2 = x1; f2 = f1;
                    x1 = b - kGolden * (b - a);
                    f1 = fd(x1);
                } else {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + kGolden * (b - a);
                    f2 = fd(x2);
                }
            }
            if (loc_v > best.value) {
                best.value = loc_v;
                best.arg[d] = loc_x;
            }
        }
    }
    return best;
}

std::optional<std::array<double, 2>> quad_roots(double a, double b, double c) {
    if (!(a < 0.0)) throw std::domain_error("quad_roots: leading coefficient must be negative");
    double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::nullopt;
    double sq = std::sqrt(disc);
    // numerically stable split: q = -(b + sign(b)*sq)/2, roots q/a and c/q
    double q = (b >= 0.0) ? -0.5 * (b + sq) : -0.5 * (b - sq);
    double r1, r2;
    if (q != 0.0) {
        r1 = q / a;
        r2 = c / q;
    } else {
        r1 = 0.0;
        r2 = 0.0;
    }
    if (r1 > r2) std::swap(r1, r2);
    return std::array<double, 2>{r1, r2};
}

}  // namespace skr
