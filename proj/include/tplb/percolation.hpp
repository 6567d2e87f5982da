#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "tplb/confusion.hpp"
#include "tplb/core_types.hpp"

namespace tplb {

/// Disjoint-set forest with path compression and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

/// Connected components of (participants, adjacency edges). Tokens without
/// edges become unity clusters. Output is canonical: members ascending,
/// clusters by size descending then smallest member ascending.
inline ClusterSet percolate(const AdjacencyMatrix& adj, std::span<const TokenId> participants) {
  const std::size_t n = adj.t_number();
  std::vector<bool> is_participant(n, false);
  for (TokenId t : participants) {
    if (t >= n) fail(ErrorKind::OutOfRange, "participant outside t_number");
    is_participant[t] = true;
  }
  UnionFind uf(n);
  for (auto [a, b] : adj.edges()) {
    if (!is_participant[a] || !is_participant[b])
      fail(ErrorKind::InvalidArgument, "edge {" + std::to_string(a) + "," + std::to_string(b) +
                                           "} references a non-participant");
    uf.unite(a, b);
  }
  std::vector<std::vector<TokenId>> by_root(n);
  for (std::size_t t = 0; t < n; ++t)
    if (is_participant[t]) by_root[uf.find(static_cast<std::uint32_t>(t))].push_back(static_cast<TokenId>(t));
  std::vector<std::vector<TokenId>> clusters;
  for (auto& members : by_root)
    if (!members.empty()) clusters.push_back(std::move(members));
  return canonicalize(ClusterSet(n, std::move(clusters)));
}

struct SizeCount {
  std::size_t size = 0;
  std::size_t count = 0;

  friend bool operator==(const SizeCount&, const SizeCount&) = default;
};

/// (size, number of clusters of that size), sizes ascending.
using ClusterSizeDistribution = std::vector<SizeCount>;

inline ClusterSizeDistribution size_distribution(const ClusterSet& c) {
  std::vector<std::size_t> sizes;
  sizes.reserve(c.size());
  for (const auto& members : c.clusters()) sizes.push_back(members.size());
  std::sort(sizes.begin(), sizes.end());
  ClusterSizeDistribution out;
  for (std::size_t s : sizes) {
    if (out.empty() || out.back().size != s)
      out.push_back({s, 1});
    else
      ++out.back().count;
  }
  return out;
}

/// Normalize -> threshold -> mutual adjacency -> percolation over retained rows.
struct ConfusionClusters {
  NormalizedConfusion normalized;
  BinaryMatrix binary;
  AdjacencyMatrix adjacency;
  ClusterSet clusters;
};

inline ConfusionClusters confusion_clusters(const ConfusionMatrix& m, ThresholdConfig cfg = {}) {
  ConfusionClusters out;
  out.normalized = normalize_confusion(m);
  out.binary = binarize_threshold(out.normalized, cfg);
  out.adjacency = adjacency(out.binary);
  const auto participants = out.normalized.retained_rows();
  out.clusters = percolate(out.adjacency, participants);
  return out;
}

}  // namespace tplb
