#pragma once

#include <string>
#include <vector>

namespace skr {

// Binary entropy in bits. Domain [0,1]; h2(0)=h2(1)=0.
double h2(double p);

// Inverse of h2 restricted to [0, 1/2]. Domain [0,1].
double h2_inv(double y);

// Binary convolution a*b = a + b - 2ab. Domain [0,1] for both arguments.
double star(double a, double b);

// Gaussian capacity 0.5*log2(1+x) in bits. Domain x >= -1+eps, used with x >= 0.
double gauss_cap(double x);

struct Axis {
    std::string name;
    int size = 0;
};

class CondPmf;

// Dense joint pmf over named finite axes. Row-major storage, last axis fastest.
// Construction validates: nonempty unique axis names, sizes >= 1, entries >= 0,
// total mass within 1e-12 of 1. Never renormalizes silently.
class FinitePmf {
  public:
    FinitePmf(std::vector<Axis> axes, std::vector<double> table);

    const std::vector<Axis>& axes() const { return axes_; }
    const std::vector<double>& table() const { return table_; }
    std::size_t size() const { return table_.size(); }

    bool has_axis(const std::string& name) const;
    int axis_index(const std::string& name) const;  // throws if absent

    double at(const std::vector<int>& idx) const;

    // Marginal over the named axes, kept in their current relative order.
    FinitePmf marginal(const std::vector<std::string>& keep) const;

    // Product extension: appends cond's output axes, multiplying by
    // cond(out | given) where every given axis must already be present.
    FinitePmf extend(const CondPmf& cond) const;

  private:
    std::vector<Axis> axes_;
    std::vector<double> table_;
    std::vector<std::size_t> strides_;
};

// Conditional pmf table p(out | given). Rows (one per joint index of the given
// axes) must each sum to 1 within 1e-12 with nonnegative entries.
class CondPmf {
  public:
    CondPmf(std::vector<Axis> given, std::vector<Axis> out, std::vector<double> table);

    const std::vector<Axis>& given() const { return given_; }
    const std::vector<Axis>& out() const { return out_; }
    const std::vector<double>& table() const { return table_; }

    std::size_t given_size() const { return given_size_; }
    std::size_t out_size() const { return out_size_; }

    // row-major over given, then out; both last-axis-fastest
    double at(std::size_t given_flat, std::size_t out_flat) const {
        return table_[given_flat * out_size_ + out_flat];
    }

  private:
    std::vector<Axis> given_;
    std::vector<Axis> out_;
    std::vector<double> table_;
    std::size_t given_size_ = 0;
    std::size_t out_size_ = 0;
};

// Conditional mutual information I(X;Y|Z) in bits over disjoint axis-name
// groups of a joint pmf. Empty X or Y group gives exactly 0. Terms with a
// zero joint cell contribute 0. Result clamped to 0 when within 1e-12 below.
double cond_mutual_info(const FinitePmf& p,
                        const std::vector<std::string>& xs,
                        const std::vector<std::string>& ys,
                        const std::vector<std::string>& zs);

}  // namespace skr
