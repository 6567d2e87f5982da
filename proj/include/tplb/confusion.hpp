#pragma once

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "tplb/core_types.hpp"
#include "tplb/numeric.hpp"

namespace tplb {

/// Accumulates (true, predicted) pairs; build() sorts and run-length encodes
/// them into CSR. Builders fed disjoint slices of a stream merge into the same
/// matrix regardless of the split.
class ConfusionBuilder {
 public:
  explicit ConfusionBuilder(std::size_t t_number) : t_number_(t_number) {}

  void add(TokenId truth, TokenId predicted) {
    if (truth >= t_number_ || predicted >= t_number_)
      fail(ErrorKind::OutOfRange, "confusion pair outside t_number");
    keys_.push_back((static_cast<std::uint64_t>(truth) << 32) | predicted);
  }

  void add(const MaskEvent& e) { add(e.truth, e.predicted); }

  void merge(ConfusionBuilder&& other) {
    if (other.t_number_ != t_number_) fail(ErrorKind::Mismatch, "confusion builders differ in t_number");
    keys_.insert(keys_.end(), other.keys_.begin(), other.keys_.end());
    other.keys_.clear();
  }

  std::size_t events() const noexcept { return keys_.size(); }

  ConfusionMatrix build() && {
    if (keys_.empty()) fail(ErrorKind::EmptyInput, "no events to build a confusion matrix from");
    std::sort(keys_.begin(), keys_.end());
    std::vector<Triplet> triplets;
    for (std::size_t k = 0; k < keys_.size();) {
      std::size_t run = k;
      while (run < keys_.size() && keys_[run] == keys_[k]) ++run;
      triplets.push_back({static_cast<TokenId>(keys_[k] >> 32), static_cast<TokenId>(keys_[k] & 0xFFFFFFFFu),
                          static_cast<Count>(run - k)});
      k = run;
    }
    keys_.clear();
    keys_.shrink_to_fit();
    return ConfusionMatrix::from_sorted(t_number_, triplets);
  }

 private:
  std::size_t t_number_;
  std::vector<std::uint64_t> keys_;
};

inline ConfusionMatrix build_confusion(std::span<const MaskEvent> events, std::size_t t_number) {
  ConfusionBuilder b(t_number);
  for (const auto& e : events) b.add(e);
  return std::move(b).build();
}

/// A row is retained iff its diagonal count is positive and no off-diagonal
/// count exceeds it (ties keep the row).
inline bool row_retained(const ConfusionMatrix& m, TokenId r) {
  Count diag = 0, max_off = 0;
  for (const auto& cell : m.row(r)) {
    if (cell.col == r)
      diag = cell.count;
    else
      max_off = std::max(max_off, cell.count);
  }
  return diag > 0 && diag >= max_off;
}

inline NormalizedConfusion normalize_confusion(const ConfusionMatrix& m) {
  const std::size_t n = m.t_number();
  std::vector<std::vector<NormalizedCell>> rows(n);
  std::vector<bool> retained(n, false);
  std::size_t kept = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = static_cast<TokenId>(r);
    if (!row_retained(m, row)) continue;
    retained[r] = true;
    ++kept;
    const auto diag = static_cast<double>(m.diagonal(row));
    auto& out = rows[r];
    out.reserve(m.row(row).size());
    for (const auto& cell : m.row(row)) out.push_back({cell.col, static_cast<double>(cell.count) / diag});
  }
  if (kept == 0) fail(ErrorKind::AllRowsExcluded, "every confusion row has a zero or non-maximal diagonal");
  return NormalizedConfusion(n, std::move(rows), std::move(retained));
}

struct ThresholdConfig {
  double th = 0.05;

  void validate() const {
    if (!(th > 0.0 && th <= 1.0)) fail(ErrorKind::InvalidArgument, "threshold must lie in (0, 1]");
  }
};

/// Edge (i, j) iff normalized value > th. Retained diagonals are always edges.
inline BinaryMatrix binarize_threshold(const NormalizedConfusion& n, ThresholdConfig cfg = {}) {
  cfg.validate();
  std::vector<std::vector<TokenId>> rows(n.t_number());
  for (std::size_t r = 0; r < n.t_number(); ++r) {
    const auto row = static_cast<TokenId>(r);
    if (!n.retained(row)) continue;
    for (const auto& cell : n.row(row))
      if (cell.col == row || cell.value > cfg.th) rows[r].push_back(cell.col);
  }
  return BinaryMatrix(n.t_number(), std::move(rows), ThresholdRule{cfg.th});
}

/// Mutual edges only: {i, j} with i != j survives iff both (i, j) and (j, i)
/// are set, i.e. the elementwise product of the pattern with its transpose.
inline AdjacencyMatrix adjacency(const BinaryMatrix& b) {
  std::vector<std::pair<TokenId, TokenId>> edges;
  for (std::size_t r = 0; r < b.t_number(); ++r) {
    const auto i = static_cast<TokenId>(r);
    for (TokenId j : b.row(i))
      if (i < j && b.has(j, i)) edges.emplace_back(i, j);
  }
  return AdjacencyMatrix(b.t_number(), std::move(edges));
}

struct TopKEntry {
  TokenId token = 0;
  double value = 0.0;

  friend bool operator==(const TopKEntry&, const TopKEntry&) = default;
};

struct TopKRow {
  TokenId token = 0;
  std::vector<TopKEntry> partners;

  friend bool operator==(const TopKRow&, const TopKRow&) = default;
};

/// One row per retained token, ascending token id.
using TopKTable = std::vector<TopKRow>;

struct TopKOptions {
  Count min_count = 0;  // rows whose total count is below this are skipped
};

/// The k largest off-diagonal normalized values of each retained row,
/// descending, ties by ascending token id.
inline TopKTable top_k(const NormalizedConfusion& n, std::size_t k, const ConfusionMatrix* counts = nullptr,
                       TopKOptions opts = {}) {
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be >= 1");
  TopKTable table;
  for (TokenId r : n.retained_rows()) {
    if (opts.min_count > 0 && counts != nullptr && counts->row_total(r) < opts.min_count) continue;
    std::vector<TopKEntry> row;
    for (const auto& cell : n.row(r))
      if (cell.col != r) row.push_back({cell.col, cell.value});
    auto better = [](const TopKEntry& a, const TopKEntry& b) {
      if (a.value != b.value) return a.value > b.value;
      return a.token < b.token;
    };
    const std::size_t keep = std::min(k, row.size());
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(keep), row.end(), better);
    row.resize(keep);
    table.push_back({r, std::move(row)});
  }
  return table;
}

/// Distribution of off-diagonal normalized values of retained rows on [0, 1].
inline Histogram offdiag_histogram(const NormalizedConfusion& n, std::size_t bins) {
  Histogram h(0.0, 1.0, bins);
  for (TokenId r : n.retained_rows())
    for (const auto& cell : n.row(r))
      if (cell.col != r) h.add(cell.value);
  return h;
}

}  // namespace tplb
