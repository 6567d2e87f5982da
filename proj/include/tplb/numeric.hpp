#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tplb/error.hpp"

namespace tplb {

/// Correctly rounded sum of a sequence of doubles (Shewchuk partials, the same
/// scheme as Python's math.fsum). The result does not depend on input order, so
/// means computed over differently ordered or partitioned data agree bit-for-bit.
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  void add(const ExactSum& other) {
    for (double p : other.partials_) add(p);
  }

  double value() const {
    std::size_t n = partials_.size();
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
      const double x = hi;
      const double y = partials_[--n];
      hi = x + y;
      const double yr = hi - x;
      lo = y - yr;
      if (lo != 0.0) break;
    }
    // half-way case: round using the sign of the remaining partials
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
      const double y = lo * 2.0;
      const double x = hi + y;
      const double yr = x - hi;
      if (y == yr) hi = x;
    }
    return hi;
  }

 private:
  std::vector<double> partials_;
};

inline double exact_sum(std::span<const double> xs) {
  ExactSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

/// Mean with an order-independent, correctly rounded numerator.
inline std::optional<double> exact_mean(std::span<const double> xs) {
  if (xs.empty()) return std::nullopt;
  return exact_sum(xs) / static_cast<double>(xs.size());
}

/// Equal-width histogram on [lo, hi]. Bins are half-open [edge_k, edge_k+1)
/// except the last, which also takes `hi`. Values outside the range are clamped
/// into the first/last bin.
class Histogram {
 public:
  Histogram() = default;
  Histogram(double lo, double hi, std::size_t bins) : lo_(lo), hi_(hi), counts_(bins, 0) {
    if (bins == 0 || !(hi > lo)) fail(ErrorKind::InvalidArgument, "histogram needs bins >= 1 and hi > lo");
  }

  std::size_t bins() const noexcept { return counts_.size(); }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

  double edge(std::size_t k) const noexcept {
    if (k >= counts_.size()) return hi_;
    return lo_ + (hi_ - lo_) * static_cast<double>(k) / static_cast<double>(counts_.size());
  }
  double center(std::size_t k) const noexcept { return 0.5 * (edge(k) + edge(k + 1)); }

  std::size_t bin_of(double x) const noexcept {
    const std::size_t n = counts_.size();
    if (!(x > lo_)) return 0;
    if (x >= hi_) return n - 1;
    auto k = static_cast<std::size_t>((x - lo_) / (hi_ - lo_) * static_cast<double>(n));
    k = std::min(k, n - 1);
    // reconcile with the reported edges so boundary values land in the upper bin
    while (k > 0 && x < edge(k)) --k;
    while (k + 1 < n && x >= edge(k + 1)) ++k;
    return k;
  }

  void add(double x, std::uint64_t weight = 1) { counts_[bin_of(x)] += weight; }
  void add_bin(std::size_t k, std::uint64_t weight) { counts_.at(k) += weight; }

  void merge(const Histogram& other) {
    if (other.counts_.size() != counts_.size() || other.lo_ != lo_ || other.hi_ != hi_)
      fail(ErrorKind::Mismatch, "histogram layouts differ");
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  }

  std::uint64_t count(std::size_t k) const { return counts_.at(k); }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }

  std::uint64_t total() const noexcept {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<std::uint64_t> counts_;
};

/// Pearson correlation; nullopt when either side has zero variance or n < 2.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::Mismatch, "pearson: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const double mx = *exact_mean(x);
  const double my = *exact_mean(y);
  ExactSum sxy, sxx, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy.add(dx * dy);
    sxx.add(dx * dx);
    syy.add(dy * dy);
  }
  const double den = std::sqrt(sxx.value() * syy.value());
  if (!(den > 0.0)) return std::nullopt;
  return sxy.value() / den;
}

}  // namespace tplb
