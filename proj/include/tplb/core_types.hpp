#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tplb/error.hpp"

namespace tplb {

using TokenId = std::uint32_t;
using Count = std::int64_t;

// ---------------------------------------------------------------------------
// Vocab
// ---------------------------------------------------------------------------

/// Unvalidated vocab row as read from disk or produced upstream.
struct RawVocabEntry {
  std::int64_t id = 0;
  std::string text;
  std::int64_t frequency = 0;
};

struct VocabEntry {
  TokenId id = 0;
  std::string text;
  std::uint64_t frequency = 0;

  friend bool operator==(const VocabEntry&, const VocabEntry&) = default;
};

class Vocab;
Vocab validate_vocab(std::vector<RawVocabEntry> raw);

/// Dense token table: ids are exactly 0..t_number-1. Built only through
/// validate_vocab().
class Vocab {
 public:
  Vocab() = default;

  std::size_t t_number() const noexcept { return entries_.size(); }
  bool contains(std::uint64_t id) const noexcept { return id < entries_.size(); }

  const VocabEntry& operator[](TokenId id) const { return entries_.at(id); }
  std::span<const VocabEntry> entries() const noexcept { return entries_; }
  std::string_view text(TokenId id) const { return entries_.at(id).text; }
  std::uint64_t frequency(TokenId id) const { return entries_.at(id).frequency; }

  /// Token ids ordered by descending corpus frequency, ties by ascending id.
  std::vector<TokenId> by_frequency() const {
    std::vector<TokenId> order(entries_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<TokenId>(i);
    std::stable_sort(order.begin(), order.end(), [this](TokenId a, TokenId b) {
      return entries_[a].frequency > entries_[b].frequency;
    });
    return order;
  }

  friend bool operator==(const Vocab&, const Vocab&) = default;

 private:
  explicit Vocab(std::vector<VocabEntry> entries) : entries_(std::move(entries)) {}
  friend Vocab validate_vocab(std::vector<RawVocabEntry> raw);

  std::vector<VocabEntry> entries_;
};

inline Vocab validate_vocab(std::vector<RawVocabEntry> raw) {
  if (raw.empty()) fail(ErrorKind::EmptyInput, "vocab has no entries");
  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawVocabEntry& a, const RawVocabEntry& b) { return a.id < b.id; });
  std::vector<VocabEntry> entries;
  entries.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& r = raw[i];
    if (r.frequency < 0)
      fail(ErrorKind::NegativeFrequency, "token " + std::to_string(r.id) + " has negative frequency");
    if (i > 0 && r.id == raw[i - 1].id)
      fail(ErrorKind::DuplicateId, "token id " + std::to_string(r.id) + " appears more than once");
    if (r.id != static_cast<std::int64_t>(i))
      fail(ErrorKind::GapInRange, "token ids must be 0..n-1; expected " + std::to_string(i) +
                                      ", found " + std::to_string(r.id));
    entries.push_back({static_cast<TokenId>(r.id), r.text, static_cast<std::uint64_t>(r.frequency)});
  }
  return Vocab(std::move(entries));
}

// ---------------------------------------------------------------------------
// Corpus / masking protocol
// ---------------------------------------------------------------------------

struct CorpusConfig {
  std::int64_t n_input = 128;
  std::int64_t e_length = 768;
  std::int64_t w_s = 90000;
  std::int64_t w_test = 90000;
  std::int64_t repetitions = 30;
  double mask_fraction = 0.15;
  std::array<double, 3> mask_split{0.8, 0.1, 0.1};  // masked / replaced / unchanged

  void validate() const {
    if (n_input <= 0 || e_length <= 0 || w_s <= 0 || w_test <= 0 || repetitions <= 0)
      fail(ErrorKind::InvalidArgument, "corpus sizes must be positive");
    if (!(mask_fraction > 0.0 && mask_fraction <= 1.0))
      fail(ErrorKind::InvalidArgument, "mask_fraction must lie in (0, 1]");
    double sum = 0.0;
    for (double s : mask_split) {
      if (!(s >= 0.0)) fail(ErrorKind::InvalidArgument, "mask_split components must be non-negative");
      sum += s;
    }
    if (std::fabs(sum - 1.0) > 1e-9) fail(ErrorKind::InvalidArgument, "mask_split must sum to 1");
  }
};

enum class ModKind : std::uint8_t { Masked = 0, Replaced = 1, Unchanged = 2 };

constexpr std::string_view to_string(ModKind k) noexcept {
  switch (k) {
    case ModKind::Masked: return "MASKED";
    case ModKind::Replaced: return "REPLACED";
    case ModKind::Unchanged: return "UNCHANGED";
  }
  return "?";
}

inline std::optional<ModKind> parse_mod_kind(std::string_view s) noexcept {
  if (s == "MASKED") return ModKind::Masked;
  if (s == "REPLACED") return ModKind::Replaced;
  if (s == "UNCHANGED") return ModKind::Unchanged;
  return std::nullopt;
}

struct MaskEvent {
  std::uint32_t input = 0;
  std::uint32_t position = 0;
  ModKind kind = ModKind::Masked;
  TokenId truth = 0;
  TokenId predicted = 0;

  friend bool operator==(const MaskEvent&, const MaskEvent&) = default;
};

inline void check_event_ids(const MaskEvent& e, std::size_t t_number) {
  if (e.truth >= t_number || e.predicted >= t_number)
    fail(ErrorKind::OutOfRange, "event token id out of vocab range (input " + std::to_string(e.input) +
                                    ", position " + std::to_string(e.position) + ")");
}

// ---------------------------------------------------------------------------
// Confusion matrix family
// ---------------------------------------------------------------------------

struct Triplet {
  TokenId row = 0;
  TokenId col = 0;
  Count count = 0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct ConfusionCell {
  TokenId col = 0;
  Count count = 0;

  friend bool operator==(const ConfusionCell&, const ConfusionCell&) = default;
};

/// Sparse T x T count matrix in CSR layout. Only positive counts are stored.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t t_number) : t_number_(t_number), row_ptr_(t_number + 1, 0) {}

  /// Triplets must be sorted by (row, col), unique, with positive counts.
  static ConfusionMatrix from_sorted(std::size_t t_number, std::span<const Triplet> triplets) {
    ConfusionMatrix m(t_number);
    m.cells_.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size(); ++k) {
      const auto& t = triplets[k];
      if (t.row >= t_number || t.col >= t_number)
        fail(ErrorKind::OutOfRange, "confusion cell (" + std::to_string(t.row) + "," +
                                        std::to_string(t.col) + ") outside t_number");
      if (t.count <= 0) fail(ErrorKind::InvalidArgument, "confusion counts must be positive");
      if (k > 0) {
        const auto& p = triplets[k - 1];
        if (p.row == t.row && p.col == t.col)
          fail(ErrorKind::DuplicateCell, "duplicate confusion cell (" + std::to_string(t.row) + "," +
                                             std::to_string(t.col) + ")");
        if (std::pair(p.row, p.col) > std::pair(t.row, t.col))
          fail(ErrorKind::Unsorted, "confusion triplets not sorted at row " + std::to_string(t.row));
      }
      m.cells_.push_back({t.col, t.count});
      ++m.row_ptr_[t.row + 1];
    }
    for (std::size_t r = 0; r < t_number; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  std::size_t t_number() const noexcept { return t_number_; }
  std::size_t nnz() const noexcept { return cells_.size(); }

  std::span<const ConfusionCell> row(TokenId r) const {
    check_row(r);
    return {cells_.data() + row_ptr_[r], cells_.data() + row_ptr_[r + 1]};
  }

  Count at(TokenId r, TokenId c) const {
    auto cells = row(r);
    auto it = std::lower_bound(cells.begin(), cells.end(), c,
                               [](const ConfusionCell& cell, TokenId col) { return cell.col < col; });
    return (it != cells.end() && it->col == c) ? it->count : 0;
  }

  Count diagonal(TokenId r) const { return at(r, r); }

  Count row_total(TokenId r) const {
    Count total = 0;
    for (const auto& cell : row(r)) total += cell.count;
    return total;
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(cells_.size());
    for (std::size_t r = 0; r < t_number_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        out.push_back({static_cast<TokenId>(r), cells_[k].col, cells_[k].count});
    return out;
  }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  void check_row(TokenId r) const {
    if (r >= t_number_) fail(ErrorKind::OutOfRange, "row " + std::to_string(r) + " outside t_number");
  }

  std::size_t t_number_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<ConfusionCell> cells_;
};

struct NormalizedCell {
  TokenId col = 0;
  double value = 0.0;

  friend bool operator==(const NormalizedCell&, const NormalizedCell&) = default;
};

/// Rows of a confusion matrix divided by their diagonal count. Excluded rows
/// carry no cells. Every retained row holds exactly 1.0 on its diagonal.
class NormalizedConfusion {
 public:
  NormalizedConfusion() = default;

  NormalizedConfusion(std::size_t t_number, std::vector<std::vector<NormalizedCell>> rows,
                      std::vector<bool> retained)
      : t_number_(t_number), retained_(std::move(retained)), row_ptr_(t_number + 1, 0) {
    if (rows.size() != t_number || retained_.size() != t_number)
      fail(ErrorKind::Mismatch, "normalized confusion: row count mismatch");
    for (std::size_t r = 0; r < t_number; ++r) {
      if (!retained_[r]) {
        if (!rows[r].empty()) fail(ErrorKind::Invariant, "excluded row carries cells");
        excluded_.push_back(static_cast<TokenId>(r));
      } else {
        bool diag_ok = false;
        for (const auto& c : rows[r])
          if (c.col == r) diag_ok = (c.value == 1.0);
        if (!diag_ok) fail(ErrorKind::Invariant, "retained row " + std::to_string(r) + " lacks unit diagonal");
      }
      for (const auto& c : rows[r]) cells_.push_back(c);
      row_ptr_[r + 1] = cells_.size();
    }
  }

  std::size_t t_number() const noexcept { return t_number_; }
  bool retained(TokenId r) const { return retained_.at(r); }
  const std::vector<TokenId>& excluded_rows() const noexcept { return excluded_; }

  std::vector<TokenId> retained_rows() const {
    std::vector<TokenId> out;
    for (std::size_t r = 0; r < t_number_; ++r)
      if (retained_[r]) out.push_back(static_cast<TokenId>(r));
    return out;
  }

  std::span<const NormalizedCell> row(TokenId r) const {
    if (r >= t_number_) fail(ErrorKind::OutOfRange, "row outside t_number");
    return {cells_.data() + row_ptr_[r], cells_.data() + row_ptr_[r + 1]};
  }

  double at(TokenId r, TokenId c) const {
    for (const auto& cell : row(r))
      if (cell.col == c) return cell.value;
    return 0.0;
  }

 private:
  std::size_t t_number_ = 0;
  std::vector<bool> retained_;
  std::vector<TokenId> excluded_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<NormalizedCell> cells_;
};

struct ThresholdRule {
  double th = 0.05;
  friend bool operator==(const ThresholdRule&, const ThresholdRule&) = default;
};
struct TopQRule {
  std::size_t q = 3;
  friend bool operator==(const TopQRule&, const TopQRule&) = default;
};
using BinaryProvenance = std::variant<ThresholdRule, TopQRule>;

/// Directed 0/1 pattern over [0, t_number)^2, rows stored as sorted column lists.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;

  BinaryMatrix(std::size_t t_number, std::vector<std::vector<TokenId>> rows, BinaryProvenance provenance)
      : t_number_(t_number), provenance_(provenance), row_ptr_(t_number + 1, 0) {
    if (rows.size() != t_number) fail(ErrorKind::Mismatch, "binary matrix: row count mismatch");
    for (std::size_t r = 0; r < t_number; ++r) {
      auto& cols = rows[r];
      std::sort(cols.begin(), cols.end());
      cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
      for (TokenId c : cols) {
        if (c >= t_number) fail(ErrorKind::OutOfRange, "binary edge column outside t_number");
        cols_.push_back(c);
      }
      row_ptr_[r + 1] = cols_.size();
    }
  }

  std::size_t t_number() const noexcept { return t_number_; }
  std::size_t nnz() const noexcept { return cols_.size(); }
  const BinaryProvenance& provenance() const noexcept { return provenance_; }

  std::span<const TokenId> row(TokenId r) const {
    if (r >= t_number_) fail(ErrorKind::OutOfRange, "row outside t_number");
    return {cols_.data() + row_ptr_[r], cols_.data() + row_ptr_[r + 1]};
  }

  bool has(TokenId r, TokenId c) const {
    auto cols = row(r);
    return std::binary_search(cols.begin(), cols.end(), c);
  }

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

 private:
  std::size_t t_number_ = 0;
  BinaryProvenance provenance_{ThresholdRule{}};
  std::vector<std::size_t> row_ptr_{0};
  std::vector<TokenId> cols_;
};

/// Undirected simple graph; symmetric by construction (both directions are
/// always stored together). Self-pairs are rejected.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;

  AdjacencyMatrix(std::size_t t_number, std::vector<std::pair<TokenId, TokenId>> edges)
      : t_number_(t_number) {
    for (auto& [a, b] : edges) {
      if (a >= t_number || b >= t_number) fail(ErrorKind::OutOfRange, "adjacency edge outside t_number");
      if (a == b) fail(ErrorKind::InvalidArgument, "adjacency edges must join distinct tokens");
      if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    std::vector<std::size_t> degree(t_number, 0);
    for (auto [a, b] : edges_) {
      ++degree[a];
      ++degree[b];
    }
    row_ptr_.assign(t_number + 1, 0);
    for (std::size_t v = 0; v < t_number; ++v) row_ptr_[v + 1] = row_ptr_[v] + degree[v];
    neighbors_.resize(row_ptr_[t_number]);
    std::vector<std::size_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
    for (auto [a, b] : edges_) {
      neighbors_[fill[a]++] = b;
      neighbors_[fill[b]++] = a;
    }
    for (std::size_t v = 0; v < t_number; ++v)
      std::sort(neighbors_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[v]),
                neighbors_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[v + 1]));
  }

  std::size_t t_number() const noexcept { return t_number_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  /// Unordered pairs (a < b), ascending.
  const std::vector<std::pair<TokenId, TokenId>>& edges() const noexcept { return edges_; }

  std::span<const TokenId> neighbors(TokenId v) const {
    if (v >= t_number_) fail(ErrorKind::OutOfRange, "vertex outside t_number");
    return {neighbors_.data() + row_ptr_[v], neighbors_.data() + row_ptr_[v + 1]};
  }

  bool has_edge(TokenId a, TokenId b) const {
    auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
  }

  friend bool operator==(const AdjacencyMatrix& x, const AdjacencyMatrix& y) {
    return x.t_number_ == y.t_number_ && x.edges_ == y.edges_;
  }

 private:
  std::size_t t_number_ = 0;
  std::vector<std::pair<TokenId, TokenId>> edges_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<TokenId> neighbors_;
};

/// Partition of the participating tokens. `universe` bounds the token ids.
class ClusterSet {
 public:
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  ClusterSet() = default;

  ClusterSet(std::size_t universe, std::vector<std::vector<TokenId>> clusters)
      : clusters_(std::move(clusters)), membership_(universe, kNone) {
    for (std::size_t k = 0; k < clusters_.size(); ++k) {
      if (clusters_[k].empty()) fail(ErrorKind::InvalidArgument, "clusters must be non-empty");
      for (TokenId t : clusters_[k]) {
        if (t >= universe) fail(ErrorKind::OutOfRange, "cluster member outside token range");
        if (membership_[t] != kNone)
          fail(ErrorKind::DuplicateId, "token " + std::to_string(t) + " appears in two clusters");
        membership_[t] = static_cast<std::uint32_t>(k);
      }
      participants_ += clusters_[k].size();
    }
  }

  std::size_t universe() const noexcept { return membership_.size(); }
  std::size_t size() const noexcept { return clusters_.size(); }
  std::size_t participants() const noexcept { return participants_; }
  const std::vector<std::vector<TokenId>>& clusters() const noexcept { return clusters_; }
  const std::vector<TokenId>& cluster(std::size_t k) const { return clusters_.at(k); }

  std::optional<std::size_t> membership(TokenId t) const {
    if (t >= membership_.size() || membership_[t] == kNone) return std::nullopt;
    return membership_[t];
  }

  friend bool operator==(const ClusterSet& a, const ClusterSet& b) {
    return a.membership_.size() == b.membership_.size() && a.clusters_ == b.clusters_;
  }

 private:
  std::vector<std::vector<TokenId>> clusters_;
  std::vector<std::uint32_t> membership_;
  std::size_t participants_ = 0;
};

/// Sort members ascending and clusters by (size descending, smallest member ascending).
inline ClusterSet canonicalize(const ClusterSet& c) {
  auto clusters = c.clusters();
  for (auto& members : clusters) std::sort(members.begin(), members.end());
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return ClusterSet(c.universe(), std::move(clusters));
}

// ---------------------------------------------------------------------------
// Embeddings, label fields, classified inputs
// ---------------------------------------------------------------------------

/// Dense row-major token-vector table; zero rows are rejected.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  EmbeddingMatrix(std::size_t t_number, std::size_t e_length, std::vector<double> values)
      : t_number_(t_number), e_length_(e_length), values_(std::move(values)) {
    if (t_number == 0 || e_length == 0) fail(ErrorKind::EmptyInput, "embedding must have rows and columns");
    if (values_.size() != t_number * e_length) fail(ErrorKind::Mismatch, "embedding payload size mismatch");
    for (std::size_t i = 0; i < t_number; ++i) {
      bool nonzero = false;
      for (double v : row(static_cast<TokenId>(i))) {
        if (!std::isfinite(v)) fail(ErrorKind::MalformedRecord, "non-finite value in row " + std::to_string(i));
        nonzero = nonzero || v != 0.0;
      }
      if (!nonzero) fail(ErrorKind::ZeroRow, "embedding row " + std::to_string(i) + " is all zero");
    }
  }

  std::size_t t_number() const noexcept { return t_number_; }
  std::size_t e_length() const noexcept { return e_length_; }
  const std::vector<double>& values() const noexcept { return values_; }

  std::span<const double> row(TokenId i) const {
    if (i >= t_number_) fail(ErrorKind::OutOfRange, "embedding row outside t_number");
    return {values_.data() + static_cast<std::size_t>(i) * e_length_, e_length_};
  }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t t_number_ = 0;
  std::size_t e_length_ = 0;
  std::vector<double> values_;
};

enum class ProbeUnit : std::uint32_t { Node = 0, Head = 1 };

constexpr std::string_view to_string(ProbeUnit u) noexcept { return u == ProbeUnit::Node ? "NODE" : "HEAD"; }

/// n_labels x n_labels field matrix probed through one node or head;
/// values(i, j) is the mean field on output j for inputs of label i.
struct LabelFieldMatrix {
  std::size_t n_labels = 0;
  ProbeUnit unit = ProbeUnit::Node;
  std::uint32_t unit_index = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values.at(i * n_labels + j); }
  double& at(std::size_t i, std::size_t j) { return values.at(i * n_labels + j); }

  friend bool operator==(const LabelFieldMatrix&, const LabelFieldMatrix&) = default;
};

struct ClassifiedInput {
  std::uint64_t input_id = 0;
  std::vector<TokenId> tokens;
  std::uint32_t true_label = 0;
  std::uint32_t predicted_label = 0;

  bool correct() const noexcept { return true_label == predicted_label; }
  friend bool operator==(const ClassifiedInput&, const ClassifiedInput&) = default;
};

}  // namespace tplb
