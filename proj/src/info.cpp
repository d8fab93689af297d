#include "skrates/info.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

namespace skr {

double h2(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("h2: argument outside [0,1]");
    if (p == 0.0 || p == 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double h2_inv(double y) {
    if (!(y >= 0.0 && y <= 1.0)) throw std::domain_error("h2_inv: argument outside [0,1]");
    if (y == 0.0) return 0.0;
    if (y == 1.0) return 0.5;
    double lo = 0.0, hi = 0.5;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        double mid = 0.5 * (lo + hi);
        if (h2(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double star(double a, double b) {
    if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
        throw std::domain_error("star: arguments outside [0,1]");
    return a + b - 2.0 * a * b;
}

double gauss_cap(double x) {
    if (!(x >= 0.0)) throw std::domain_error("gauss_cap: negative snr");
    return 0.5 * std::log2(1.0 + x);
}

namespace {

std::vector<std::size_t> make_strides(const std::vector<Axis>& axes) {
    std::vector<std::size_t> strides(axes.size());
    std::size_t s = 1;
    for (std::size_t i = axes.size(); i-- > 0;) {
        strides[i] = s;
        s *= static_cast<std::size_t>(axes[i].size);
    }
    return strides;
}

void check_axes(const std::vector<Axis>& axes, const char* who) {
    std::unordered_set<std::string> seen;
    for (const auto& a : axes) {
        if (a.name.empty()) throw std::invalid_argument(std::string(who) + ": empty axis name");
        if (a.size < 1) throw std::invalid_argument(std::string(who) + ": axis '" + a.name + "' has size < 1");
        if (!seen.insert(a.name).second)
            throw std::invalid_argument(std::string(who) + ": duplicate axis name '" + a.name + "'");
    }
}

std::size_t axes_size(const std::vector<Axis>& axes) {
    std::size_t s = 1;
    for (const auto& a : axes) s *= static_cast<std::size_t>(a.size);
    return s;
}

}  // namespace

FinitePmf::FinitePmf(std::vector<Axis> axes, std::vector<double> table)
    : axes_(std::move(axes)), table_(std::move(table)) {
    check_axes(axes_, "FinitePmf");
    if (axes_.empty()) throw std::invalid_argument("FinitePmf: no axes");
    if (table_.size() != axes_size(axes_))
        throw std::invalid_argument("FinitePmf: table size does not match axes");
    double sum = 0.0;
    for (double v : table_) {
        if (!(v >= 0.0)) throw std::invalid_argument("FinitePmf: negative or NaN entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("FinitePmf: mass " + std::to_string(sum) + " not 1 within 1e-12");
    strides_ = make_strides(axes_);
}

bool FinitePmf::has_axis(const std::string& name) const {
    for (const auto& a : axes_)
        if (a.name == name) return true;
    return false;
}

int FinitePmf::axis_index(const std::string& name) const {
    for (std::size_t i = 0; i < axes_.size(); ++i)
        if (axes_[i].name == name) return static_cast<int>(i);
    throw std::invalid_argument("FinitePmf: no axis named '" + name + "'");
}

double FinitePmf::at(const std::vector<int>& idx) const {
    if (idx.size() != axes_.size()) throw std::invalid_argument("FinitePmf::at: wrong index arity");
    std::size_t flat = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= axes_[i].size)
            throw std::out_of_range("FinitePmf::at: index out of range");
        flat += strides_[i] * static_cast<std::size_t>(idx[i]);
    }
    return table_[flat];
}

FinitePmf FinitePmf::marginal(const std::vector<std::string>& keep) const {
    std::vector<int> kept_axes;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (std::find(keep.begin(), keep.end(), axes_[i].name) != keep.end())
            kept_axes.push_back(static_cast<int>(i));
    }
    for (const auto& k : keep)
        if (!has_axis(k)) throw std::invalid_argument("marginal: no axis named '" + k + "'");
    if (kept_axes.empty()) throw std::invalid_argument("marginal: empty result");

    std::vector<Axis> out_axes;
    for (int i : kept_axes) out_axes.push_back(axes_[i]);
    std::vector<std::size_t> out_strides = make_strides(out_axes);
    std::vector<double> out(axes_size(out_axes), 0.0);

    std::vector<int> idx(axes_.size(), 0);
    for (std::size_t flat = 0; flat < table_.size(); ++flat) {
        std::size_t oflat = 0;
        for (std::size_t j = 0; j < kept_axes.size(); ++j)
            oflat += out_strides[j] * static_cast<std::size_t>(idx[kept_axes[j]]);
        out[oflat] += table_[flat];
        for (std::size_t i = axes_.size(); i-- > 0;) {
            if (++idx[i] < axes_[i].size) break;
            idx[i] = 0;
        }
    }
    return FinitePmf(std::move(out_axes), std::move(out));
}

FinitePmf FinitePmf::extend(const CondPmf& cond) const {
    std::vector<int> given_pos;
    for (const auto& g : cond.given()) given_pos.push_back(axis_index(g.name));
    for (const auto& o : cond.out())
        if (has_axis(o.name))
            throw std::invalid_argument("extend: output axis '" + o.name + "' already present");

    std::vector<Axis> new_axes = axes_;
    for (const auto& o : cond.out()) new_axes.push_back(o);

    std::vector<std::size_t> given_strides = make_strides(cond.given());
    std::vector<double> out(table_.size() * cond.out_size());

    std::vector<int> idx(axes_.size(), 0);
    for (std::size_t flat = 0; flat < table_.size(); ++flat) {
        std::size_t gflat = 0;
        for (std::size_t j = 0; j < given_pos.size(); ++j)
            gflat += given_strides[j] * static_cast<std::size_t>(idx[given_pos[j]]);
        double base = table_[flat];
        std::size_t off = flat * cond.out_size();
        for (std::size_t o = 0; o < cond.out_size(); ++o)
            out[off + o] = base * cond.at(gflat, o);
        for (std::size_t i = axes_.size(); i-- > 0;) {
            if (++idx[i] < axes_[i].size) break;
            idx[i] = 0;
        }
    }
    return FinitePmf(std::move(new_axes), std::move(out));
}

CondPmf::CondPmf(std::vector<Axis> given, std::vector<Axis> out, std::vector<double> table)
    : given_(std::move(given)), out_(std::move(out)), table_(std::move(table)) {
    std::vector<Axis> all = given_;
    all.insert(all.end(), out_.begin(), out_.end());
    check_axes(all, "CondPmf");
    if (out_.empty()) throw std::invalid_argument("CondPmf: no output axes");
    given_size_ = axes_size(given_);
    out_size_ = axes_size(out_);
    if (table_.size() != given_size_ * out_size_)
        throw std::invalid_argument("CondPmf: table size does not match axes");
    for (std::size_t g = 0; g < given_size_; ++g) {
        double sum = 0.0;
        for (std::size_t o = 0; o < out_size_; ++o) {
            double v = table_[g * out_size_ + o];
            if (!(v >= 0.0)) throw std::invalid_argument("CondPmf: negative or NaN entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("CondPmf: row " + std::to_string(g) + " mass " +
                                        std::to_string(sum) + " not 1 within 1e-12");
    }
}

double cond_mutual_info(const FinitePmf& p,
                        const std::vector<std::string>& xs,
                        const std::vector<std::string>& ys,
                        const std::vector<std::string>& zs) {
    if (xs.empty() || ys.empty()) return 0.0;

    std::unordered_set<std::string> seen;
    for (const auto* grp : {&xs, &ys, &zs})
        for (const auto& n : *grp) {
            p.axis_index(n);
            if (!seen.insert(n).second)
                throw std::invalid_argument("cond_mutual_info: axis '" + n + "' appears in two groups");
        }

    // group membership per axis: 0=x, 1=y, 2=z, -1=marginalized out
    const auto& axes = p.axes();
    std::vector<int> group(axes.size(), -1);
    auto tag = [&](const std::vector<std::string>& names, int g) {
        for (const auto& n : names) group[static_cast<std::size_t>(p.axis_index(n))] = g;
    };
    tag(xs, 0);
    tag(ys, 1);
    tag(zs, 2);

    std::size_t nx = 1, ny = 1, nz = 1;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        if (group[i] == 0) nx *= static_cast<std::size_t>(axes[i].size);
        if (group[i] == 1) ny *= static_cast<std::size_t>(axes[i].size);
        if (group[i] == 2) nz *= static_cast<std::size_t>(axes[i].size);
    }

    // reduce to the (x,y,z) joint, flattening each group in axis order
    std::vector<double> pxyz(nx * ny * nz, 0.0);
    std::vector<int> idx(axes.size(), 0);
    const auto& table = p.table();
    for (std::size_t flat = 0; flat < table.size(); ++flat) {
        std::size_t fx = 0, fy = 0, fz = 0;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            std::size_t s = static_cast<std::size_t>(axes[i].size);
            if (group[i] == 0) fx = fx * s + static_cast<std::size_t>(idx[i]);
            if (group[i] == 1) fy = fy * s + static_cast<std::size_t>(idx[i]);
            if (group[i] == 2) fz = fz * s + static_cast<std::size_t>(idx[i]);
        }
        pxyz[(fx * ny + fy) * nz + fz] += table[flat];
        for (std::size_t i = axes.size(); i-- > 0;) {
            if (++idx[i] < axes[i].size) break;
            idx[i] = 0;
        }
    }

    std::vector<double> pxz(nx * nz, 0.0), pyz(ny * nz, 0.0), pz(nz, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t z = 0; z < nz; ++z) {
                double v = pxyz[(x * ny + y) * nz + z];
                pxz[x * nz + z] += v;
                pyz[y * nz + z] += v;
                pz[z] += v;
            }

    double mi = 0.0;
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t z = 0; z < nz; ++z) {
                double v = pxyz[(x * ny + y) * nz + z];
                if (v <= 0.0) continue;
                mi += v * std::log2(v * pz[z] / (pxz[x * nz + z] * pyz[y * nz + z]));
            }
    if (mi < 0.0 && mi > -1e-12) mi = 0.0;
    return mi;
}

}  // namespace skr
