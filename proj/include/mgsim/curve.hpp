#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mgsim {

/// Piecewise-linear curve over x in [0, 1]. Knots must be sorted by x
/// (non-decreasing). Evaluation outside the knot range holds the end value.
class PiecewiseLinear {
 public:
  using Knot = std::pair<double, double>;

  PiecewiseLinear() = default;

  explicit PiecewiseLinear(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) {
      throw std::invalid_argument("curve needs at least one knot");
    }
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      const double x = knots_[i].first;
      if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("curve x-coordinate outside [0, 1]: " + std::to_string(x));
      }
      if (i > 0 && x < knots_[i - 1].first) {
        throw std::invalid_argument("curve x-coordinates must be non-decreasing");
      }
    }
  }

  double operator()(double x) const {
    if (knots_.empty()) {
      throw std::logic_error("evaluating an empty curve");
    }
    if (x <= knots_.front().first) return knots_.front().second;
    if (x >= knots_.back().first) return knots_.back().second;
    // first knot with knot.x > x; its predecessor has knot.x <= x
    auto hi = std::upper_bound(knots_.begin(), knots_.end(), x,
                               [](double v, const Knot& k) { return v < k.first; });
    auto lo = std::prev(hi);
    const double span = hi->first - lo->first;
    if (span <= 0.0) return hi->second;
    const double w = (x - lo->first) / span;
    return lo->second + w * (hi->second - lo->second);
  }

  const std::vector<Knot>& knots() const { return knots_; }
  bool empty() const { return knots_.empty(); }

  friend bool operator==(const PiecewiseLinear&, const PiecewiseLinear&) = default;

 private:
  std::vector<Knot> knots_;
};

}  // namespace mgsim
