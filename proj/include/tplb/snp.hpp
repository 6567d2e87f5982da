#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "tplb/core_types.hpp"
#include "tplb/numeric.hpp"
#include "tplb/percolation.hpp"

namespace tplb {

inline void check_field_shape(const LabelFieldMatrix& m) {
  if (m.n_labels == 0) fail(ErrorKind::EmptyInput, "field matrix has no labels");
  if (m.values.size() != m.n_labels * m.n_labels)
    fail(ErrorKind::Mismatch, "field matrix payload is not n_labels^2");
}

/// Divides every entry by the maximum entry. Negative fields keep their sign.
inline LabelFieldMatrix normalize_fields(const LabelFieldMatrix& m) {
  check_field_shape(m);
  const double mx = *std::max_element(m.values.begin(), m.values.end());
  const bool all_zero = std::all_of(m.values.begin(), m.values.end(), [](double v) { return v == 0.0; });
  if (all_zero) fail(ErrorKind::InvalidArgument, "field matrix of unit " + std::to_string(m.unit_index) + " is all zero");
  if (!(mx > 0.0))
    fail(ErrorKind::InvalidArgument, "field matrix of unit " + std::to_string(m.unit_index) + " has no positive entry");
  LabelFieldMatrix out = m;
  for (double& v : out.values) v /= mx;
  return out;
}

/// Boolean clip: 1 iff value > threshold.
inline BinaryMatrix clip(const LabelFieldMatrix& m, double threshold = 0.6) {
  check_field_shape(m);
  std::vector<std::vector<TokenId>> rows(m.n_labels);
  for (std::size_t i = 0; i < m.n_labels; ++i)
    for (std::size_t j = 0; j < m.n_labels; ++j)
      if (m.at(i, j) > threshold) rows[i].push_back(static_cast<TokenId>(j));
  return BinaryMatrix(m.n_labels, std::move(rows), ThresholdRule{threshold});
}

/// One diagonal entry of the permuted matrix: row label matched to column label.
struct DiagonalPair {
  std::uint32_t row = 0;
  std::uint32_t col = 0;

  friend bool operator==(const DiagonalPair&, const DiagonalPair&) = default;
};

struct DiagonalCluster {
  std::vector<DiagonalPair> pairs;

  /// Distinct labels touching the cluster as row or column label.
  std::vector<std::uint32_t> labels() const {
    std::vector<std::uint32_t> out;
    for (const auto& p : pairs) {
      out.push_back(p.row);
      out.push_back(p.col);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

struct SnpStats {
  std::uint32_t unit_index = 0;
  std::size_t n_labels = 0;
  Count diag = 0;     // above-threshold diagonal entries after permutation
  Count n_c = 0;      // diagonal clusters
  double c_s = 0.0;   // diag / n_c (0 when there is no cluster)
  Count noise = 0;    // above-threshold entries outside every cluster block
  std::vector<std::uint32_t> row_order;  // permuted position -> row label
  std::vector<std::uint32_t> col_order;  // permuted position -> column label
  std::vector<DiagonalCluster> clusters;
};

namespace detail {

constexpr std::uint32_t kUnmatched = std::numeric_limits<std::uint32_t>::max();

/// Kuhn augmenting-path matcher on an L x L bipartite graph. Augmenting from a
/// new row never unmatches an already matched row.
class Matcher {
 public:
  explicit Matcher(const std::vector<std::vector<std::uint32_t>>& adj)
      : adj_(adj), match_row_(adj.size(), kUnmatched), match_col_(adj.size(), kUnmatched), seen_(adj.size()) {}

  bool augment(std::uint32_t r) {
    std::fill(seen_.begin(), seen_.end(), false);
    return dfs(r);
  }

  const std::vector<std::uint32_t>& match_row() const noexcept { return match_row_; }
  const std::vector<std::uint32_t>& match_col() const noexcept { return match_col_; }

 private:
  bool dfs(std::uint32_t r) {
    for (std::uint32_t c : adj_[r]) {
      if (seen_[c]) continue;
      seen_[c] = true;
      if (match_col_[c] == kUnmatched || dfs(match_col_[c])) {
        match_row_[r] = c;
        match_col_[c] = r;
        return true;
      }
    }
    return false;
  }

  const std::vector<std::vector<std::uint32_t>>& adj_;
  std::vector<std::uint32_t> match_row_, match_col_;
  std::vector<bool> seen_;
};

/// Vertices on the `adj` side reachable from its unmatched vertices by
/// alternating paths. Their complement is covered by every maximum matching.
inline std::vector<bool> alternating_reach(const std::vector<std::vector<std::uint32_t>>& adj,
                                           const std::vector<std::uint32_t>& match_self,
                                           const std::vector<std::uint32_t>& match_other) {
  const std::size_t n = adj.size();
  std::vector<bool> reached(n, false);
  std::queue<std::uint32_t> queue;
  for (std::uint32_t v = 0; v < n; ++v)
    if (match_self[v] == kUnmatched) {
      reached[v] = true;
      queue.push(v);
    }
  while (!queue.empty()) {
    const std::uint32_t v = queue.front();
    queue.pop();
    for (std::uint32_t w : adj[v]) {
      const std::uint32_t next = match_other[w];
      if (next != kUnmatched && !reached[next]) {
        reached[next] = true;
        queue.push(next);
      }
    }
  }
  return reached;
}

/// Max-weight basis of the transversal matroid on the `adj` side: greedy in
/// the given order, keeping a vertex iff the chosen set stays matchable.
inline std::vector<bool> greedy_basis(const std::vector<std::vector<std::uint32_t>>& adj,
                                      const std::vector<std::uint32_t>& order, std::size_t rank) {
  Matcher m(adj);
  std::vector<bool> chosen(adj.size(), false);
  std::size_t size = 0;
  for (std::uint32_t v : order) {
    if (size == rank) break;
    if (m.augment(v)) {
      chosen[v] = true;
      ++size;
    }
  }
  return chosen;
}

}  // namespace detail

/// Permutes rows and columns so the number of above-threshold diagonal entries
/// (Diag) is maximal, and among those permutations picks one whose diagonal
/// clusters leave the fewest above-threshold entries outside cluster blocks.
///
/// The matched row set R and column set C separate: by Dulmage-Mendelsohn, no
/// edge joins optional rows to optional columns, so |ones(R x C)| is a sum of
/// per-row weights (ones into always-covered columns) plus per-column weights
/// (ones from always-covered rows). Each side is a max-weight matroid basis,
/// found greedily; any such R and C are simultaneously matchable. Remaining
/// ties follow field value (descending) then label (ascending).
inline SnpStats diagonalize(const BinaryMatrix& b, const LabelFieldMatrix* fields = nullptr,
                            std::uint32_t unit_index = 0) {
  const std::size_t n = b.t_number();
  if (n == 0) fail(ErrorKind::EmptyInput, "cannot diagonalize an empty matrix");
  if (fields != nullptr && fields->n_labels != n) fail(ErrorKind::Mismatch, "field matrix size differs from clip");
  auto value = [&](std::uint32_t r, std::uint32_t c) { return fields ? fields->at(r, c) : 0.0; };

  std::vector<std::vector<std::uint32_t>> rows(n), cols(n);
  for (std::uint32_t r = 0; r < n; ++r)
    for (TokenId c : b.row(r)) {
      rows[r].push_back(c);
      cols[c].push_back(r);
    }
  for (std::uint32_t r = 0; r < n; ++r)
    std::stable_sort(rows[r].begin(), rows[r].end(),
                     [&](std::uint32_t x, std::uint32_t y) { return value(r, x) > value(r, y); });
  for (std::uint32_t c = 0; c < n; ++c)
    std::stable_sort(cols[c].begin(), cols[c].end(),
                     [&](std::uint32_t x, std::uint32_t y) { return value(x, c) > value(y, c); });

  // maximum matching and the always-covered vertex sets
  detail::Matcher base(rows);
  std::size_t rank = 0;
  for (std::uint32_t r = 0; r < n; ++r)
    if (base.augment(r)) ++rank;
  const auto optional_rows = detail::alternating_reach(rows, base.match_row(), base.match_col());
  const auto optional_cols = detail::alternating_reach(cols, base.match_col(), base.match_row());

  std::vector<std::size_t> row_weight(n, 0), col_weight(n, 0);
  std::vector<double> row_best(n, -std::numeric_limits<double>::infinity()), col_best = row_best;
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c : rows[r]) {
      if (!optional_cols[c]) ++row_weight[r];
      if (!optional_rows[r]) ++col_weight[c];
      row_best[r] = std::max(row_best[r], value(r, c));
      col_best[c] = std::max(col_best[c], value(r, c));
    }
  auto greedy_order = [n](const std::vector<std::size_t>& w, const std::vector<double>& best) {
    std::vector<std::uint32_t> order(n);
    for (std::uint32_t v = 0; v < n; ++v) order[v] = v;
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
      if (w[x] != w[y]) return w[x] > w[y];
      return best[x] > best[y];
    });
    return order;
  };
  const auto row_set = detail::greedy_basis(rows, greedy_order(row_weight, row_best), rank);
  const auto col_set = detail::greedy_basis(cols, greedy_order(col_weight, col_best), rank);

  // a perfect matching between the chosen sets
  std::vector<std::vector<std::uint32_t>> restricted(n);
  for (std::uint32_t r = 0; r < n; ++r)
    if (row_set[r])
      for (std::uint32_t c : rows[r])
        if (col_set[c]) restricted[r].push_back(c);
  detail::Matcher final_match(restricted);
  std::vector<DiagonalPair> pairs;
  for (std::uint32_t r = 0; r < n; ++r)
    if (row_set[r] && final_match.augment(r)) {
    }
  for (std::uint32_t r = 0; r < n; ++r)
    if (final_match.match_row()[r] != detail::kUnmatched) pairs.push_back({r, final_match.match_row()[r]});
  if (pairs.size() != rank) fail(ErrorKind::Invariant, "chosen row and column sets are not jointly matchable");

  // diagonal clusters: pairs p, q joined when (row_p, col_q) or (row_q, col_p) is set
  UnionFind uf(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (std::size_t q = p + 1; q < pairs.size(); ++q)
      if (b.has(pairs[p].row, pairs[q].col) || b.has(pairs[q].row, pairs[p].col))
        uf.unite(static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(q));
  std::vector<std::vector<DiagonalPair>> groups(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) groups[uf.find(static_cast<std::uint32_t>(p))].push_back(pairs[p]);

  SnpStats s;
  s.unit_index = unit_index;
  s.n_labels = n;
  for (auto& g : groups)
    if (!g.empty()) s.clusters.push_back({std::move(g)});
  std::sort(s.clusters.begin(), s.clusters.end(), [](const DiagonalCluster& x, const DiagonalCluster& y) {
    if (x.pairs.size() != y.pairs.size()) return x.pairs.size() > y.pairs.size();
    return x.pairs.front().row < y.pairs.front().row;
  });

  std::vector<std::uint32_t> row_cluster(n, detail::kUnmatched), col_cluster(n, detail::kUnmatched);
  for (std::size_t k = 0; k < s.clusters.size(); ++k)
    for (const auto& p : s.clusters[k].pairs) {
      row_cluster[p.row] = static_cast<std::uint32_t>(k);
      col_cluster[p.col] = static_cast<std::uint32_t>(k);
      s.row_order.push_back(p.row);
      s.col_order.push_back(p.col);
    }
  for (std::uint32_t v = 0; v < n; ++v) {
    if (row_cluster[v] == detail::kUnmatched) s.row_order.push_back(v);
    if (col_cluster[v] == detail::kUnmatched) s.col_order.push_back(v);
  }

  s.diag = static_cast<Count>(pairs.size());
  s.n_c = static_cast<Count>(s.clusters.size());
  s.c_s = s.n_c > 0 ? static_cast<double>(s.diag) / static_cast<double>(s.n_c) : 0.0;
  for (std::uint32_t r = 0; r < n; ++r)
    for (TokenId c : b.row(r)) {
      const bool inside = row_cluster[r] != detail::kUnmatched && row_cluster[r] == col_cluster[c];
      if (!inside) ++s.noise;
    }
  return s;
}

/// Normalize, clip and diagonalize one probed unit.
inline SnpStats analyze_unit(const LabelFieldMatrix& m, double threshold = 0.6) {
  const auto normalized = normalize_fields(m);
  const auto clipped = clip(normalized, threshold);
  return diagonalize(clipped, &normalized, m.unit_index);
}

/// SNR = N_labels * Diag / n; +inf when the noise is zero.
inline double compute_snr(std::size_t n_labels, double mean_diag, double mean_noise) {
  if (mean_noise == 0.0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(n_labels) * mean_diag / mean_noise;
}

struct SnpAggregate {
  std::size_t units = 0;
  double mean_diag = 0.0;
  double mean_n_c = 0.0;
  double mean_c_s = 0.0;  // over units with at least one cluster
  double mean_noise = 0.0;
  double snr = 0.0;

  bool snr_infinite() const noexcept { return std::isinf(snr); }
};

inline SnpAggregate aggregate(std::span<const SnpStats> stats, std::size_t n_labels) {
  if (stats.empty()) fail(ErrorKind::EmptyInput, "no units to aggregate");
  std::vector<double> diag, n_c, c_s, noise;
  for (const auto& s : stats) {
    diag.push_back(static_cast<double>(s.diag));
    n_c.push_back(static_cast<double>(s.n_c));
    noise.push_back(static_cast<double>(s.noise));
    if (s.n_c > 0) c_s.push_back(s.c_s);
  }
  SnpAggregate a;
  a.units = stats.size();
  a.mean_diag = *exact_mean(diag);
  a.mean_n_c = *exact_mean(n_c);
  a.mean_c_s = exact_mean(c_s).value_or(0.0);
  a.mean_noise = *exact_mean(noise);
  a.snr = compute_snr(n_labels, a.mean_diag, a.mean_noise);
  return a;
}

struct LabelAppearance {
  std::vector<Count> appearances;            // per label, summed over units
  std::optional<std::vector<double>> accuracy;
  std::optional<double> pearson_r;           // appearances vs accuracy
};

/// Counts, per label, the diagonal clusters (over all units) it belongs to.
inline LabelAppearance label_appearance(std::span<const SnpStats> stats, std::size_t n_labels,
                                        std::optional<std::span<const double>> accuracy = std::nullopt) {
  LabelAppearance out;
  out.appearances.assign(n_labels, 0);
  for (const auto& s : stats) {
    if (s.n_labels != n_labels) fail(ErrorKind::Mismatch, "unit label count differs from n_labels");
    for (const auto& cluster : s.clusters)
      for (std::uint32_t label : cluster.labels()) ++out.appearances[label];
  }
  if (accuracy) {
    if (accuracy->size() != n_labels)
      fail(ErrorKind::Mismatch, "accuracy vector has " + std::to_string(accuracy->size()) + " entries, expected " +
                                    std::to_string(n_labels));
    out.accuracy.emplace(accuracy->begin(), accuracy->end());
    std::vector<double> x(out.appearances.begin(), out.appearances.end());
    out.pearson_r = pearson(x, *out.accuracy);
  }
  return out;
}

}  // namespace tplb
