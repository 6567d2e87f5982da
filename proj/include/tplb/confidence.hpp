#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "tplb/apt.hpp"
#include "tplb/core_types.hpp"
#include "tplb/numeric.hpp"

namespace tplb {

enum class ConfidenceAxis { AptAve, FreqAve };

constexpr std::string_view to_string(ConfidenceAxis a) noexcept { return a == ConfidenceAxis::AptAve ? "APT_AVE" : "FREQ_AVE"; }

/// Unweighted mean APT over the input's tokens. Tokens without an APT entry are
/// skipped; nullopt when none has one.
inline std::optional<double> apt_ave(const ClassifiedInput& input, const AptTable& apt) {
  if (input.tokens.empty()) fail(ErrorKind::EmptyInput, "input " + std::to_string(input.input_id) + " has no tokens");
  std::vector<double> values;
  values.reserve(input.tokens.size());
  for (TokenId t : input.tokens)
    if (t < apt.t_number())
      if (auto a = apt.apt(t)) values.push_back(*a);
  return exact_mean(values);
}

/// Mean corpus frequency of the input's tokens.
inline double freq_ave(const ClassifiedInput& input, const Vocab& vocab) {
  if (input.tokens.empty()) fail(ErrorKind::EmptyInput, "input " + std::to_string(input.input_id) + " has no tokens");
  std::vector<double> values;
  values.reserve(input.tokens.size());
  for (TokenId t : input.tokens) {
    if (!vocab.contains(t)) fail(ErrorKind::OutOfRange, "input token outside vocab");
    values.push_back(static_cast<double>(vocab.frequency(t)));
  }
  return *exact_mean(values);
}

struct ConfidenceBin {
  double lower = 0.0;
  double upper = 0.0;
  Count n_correct = 0;
  Count n_incorrect = 0;

  std::optional<double> confidence() const {
    const Count n = n_correct + n_incorrect;
    if (n == 0) return std::nullopt;
    return static_cast<double>(n_correct) / static_cast<double>(n);
  }
};

struct ConfidenceBins {
  ConfidenceAxis axis = ConfidenceAxis::AptAve;
  bool logarithmic = false;
  std::vector<ConfidenceBin> bins;
  Count skipped = 0;  // inputs with no defined axis value

  Count binned() const {
    Count n = 0;
    for (const auto& b : bins) n += b.n_correct + b.n_incorrect;
    return n;
  }

  std::optional<double> overall() const {
    Count c = 0;
    for (const auto& b : bins) c += b.n_correct;
    const Count n = binned();
    if (n == 0) return std::nullopt;
    return static_cast<double>(c) / static_cast<double>(n);
  }
};

struct ConfidenceBinning {
  std::size_t bins = 20;  // APT_AVE: linear on [0, 1]; FREQ_AVE: log-spaced over the observed range
};

namespace detail {

/// Index k with edges[k] <= x < edges[k+1]; the final edge is inclusive.
inline std::size_t locate(const std::vector<double>& edges, double x) {
  const std::size_t n = edges.size() - 1;
  if (x >= edges[n]) return n - 1;
  auto it = std::upper_bound(edges.begin(), edges.end(), x);
  if (it == edges.begin()) return 0;
  return std::min<std::size_t>(static_cast<std::size_t>(it - edges.begin()) - 1, n - 1);
}

}  // namespace detail

/// Confidence = N_correct / (N_correct + N_incorrect) per bin of the chosen axis.
inline ConfidenceBins confidence_bins(std::span<const ClassifiedInput> inputs, const AptTable& apt, const Vocab& vocab,
                                      ConfidenceAxis axis, ConfidenceBinning binning = {}) {
  if (inputs.empty()) fail(ErrorKind::EmptyInput, "no classified inputs");
  if (binning.bins < 1) fail(ErrorKind::InvalidArgument, "need at least one bin");

  ConfidenceBins out;
  out.axis = axis;
  std::vector<std::optional<double>> values;
  values.reserve(inputs.size());
  for (const auto& in : inputs)
    values.push_back(axis == ConfidenceAxis::AptAve ? apt_ave(in, apt) : std::optional(freq_ave(in, vocab)));

  std::vector<double> edges(binning.bins + 1);
  if (axis == ConfidenceAxis::AptAve) {
    for (std::size_t k = 0; k <= binning.bins; ++k)
      edges[k] = static_cast<double>(k) / static_cast<double>(binning.bins);
  } else {
    out.logarithmic = true;
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& v : values) {
      if (!v || !(*v > 0.0)) continue;
      lo = any ? std::min(lo, *v) : *v;
      hi = any ? std::max(hi, *v) : *v;
      any = true;
    }
    if (!any) {
      lo = 1.0;
      hi = 10.0;
    }
    if (hi == lo) hi = lo * 10.0;
    const double ratio = std::log(hi / lo);
    edges.front() = lo;
    edges.back() = hi;
    for (std::size_t k = 1; k < binning.bins; ++k)
      edges[k] = lo * std::exp(ratio * static_cast<double>(k) / static_cast<double>(binning.bins));
  }

  out.bins.resize(binning.bins);
  for (std::size_t k = 0; k < binning.bins; ++k) {
    out.bins[k].lower = edges[k];
    out.bins[k].upper = edges[k + 1];
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!values[i]) {
      ++out.skipped;
      continue;
    }
    auto& bin = out.bins[detail::locate(edges, *values[i])];
    if (inputs[i].correct())
      ++bin.n_correct;
    else
      ++bin.n_incorrect;
  }
  return out;
}

}  // namespace tplb
