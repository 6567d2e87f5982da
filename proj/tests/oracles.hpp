#pragma once

// Independent reference implementations used only by tests. They favour
// obviousness over speed and share no code with the library algorithms.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

#include <Eigen/Dense>

#include "tplb/core_types.hpp"

namespace oracle {

using Partition = std::vector<std::vector<std::uint32_t>>;

inline Partition canonical(Partition p) {
  for (auto& c : p) std::sort(c.begin(), c.end());
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  return p;
}

/// Components by repeated breadth-first search over a dense adjacency list.
inline Partition bfs_components(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                                const std::vector<std::uint32_t>& participants) {
  std::vector<std::vector<std::uint32_t>> nb(n);
  for (auto [a, b] : edges) {
    nb[a].push_back(b);
    nb[b].push_back(a);
  }
  std::vector<bool> part(n, false), seen(n, false);
  for (auto t : participants) part[t] = true;
  Partition out;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (!part[s] || seen[s]) continue;
    std::vector<std::uint32_t> comp;
    std::queue<std::uint32_t> q;
    q.push(s);
    seen[s] = true;
    while (!q.empty()) {
      auto v = q.front();
      q.pop();
      comp.push_back(v);
      for (auto w : nb[v])
        if (!seen[w]) {
          seen[w] = true;
          q.push(w);
        }
    }
    out.push_back(comp);
  }
  return canonical(out);
}

/// Rand index between two labelings of the same items.
inline double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::size_t agree = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      ++total;
      if ((a[i] == a[j]) == (b[i] == b[j])) ++agree;
    }
  return static_cast<double>(agree) / static_cast<double>(total);
}

struct DiagResult {
  long diag = 0;
  long n_c = 0;
  long noise = 0;
};

/// Every column permutation of a dense L x L Boolean matrix: maximal diagonal,
/// then minimal noise, where diagonal positions p, q share a cluster when they
/// are linked by a set entry (p, sigma(q)) or (q, sigma(p)) transitively.
inline DiagResult exhaustive_diagonalize(const std::vector<std::vector<bool>>& b) {
  const std::size_t n = b.size();
  std::vector<std::size_t> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  long total = 0;
  for (const auto& row : b)
    for (bool v : row) total += v;
  DiagResult best{-1, 0, 0};
  do {
    std::vector<std::size_t> diag;
    for (std::size_t p = 0; p < n; ++p)
      if (b[p][sigma[p]]) diag.push_back(p);
    const long d = static_cast<long>(diag.size());
    if (d < best.diag) continue;
    // label propagation for clusters among diagonal positions
    std::vector<std::size_t> label(n, n);
    for (auto p : diag) label[p] = p;
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto p : diag)
        for (auto q : diag)
          if ((b[p][sigma[q]] || b[q][sigma[p]]) && label[p] != label[q]) {
            const auto m = std::min(label[p], label[q]);
            label[p] = label[q] = m;
            changed = true;
          }
    }
    long inside = 0;
    for (auto p : diag)
      for (auto q : diag)
        if (label[p] == label[q] && b[p][sigma[q]]) ++inside;
    std::vector<std::size_t> roots;
    for (auto p : diag) roots.push_back(label[p]);
    std::sort(roots.begin(), roots.end());
    const long n_c = static_cast<long>(std::unique(roots.begin(), roots.end()) - roots.begin());
    const long noise = total - inside;
    if (d > best.diag || noise < best.noise) best = {d, n_c, noise};
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return best;
}

/// Cosine in long double straight from the definition.
inline long double cosine(const tplb::EmbeddingMatrix& e, std::uint32_t i, std::uint32_t j) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < e.e_length(); ++k) {
    const long double a = e.row(i)[k], b = e.row(j)[k];
    ab += a * b;
    aa += a * a;
    bb += b * b;
  }
  return ab / std::sqrt(aa * bb);
}

/// ABTT through a singular value decomposition of the centered rows: the
/// right singular vectors of X are the principal directions.
inline Eigen::MatrixXd abtt(const tplb::EmbeddingMatrix& e, std::size_t r) {
  const auto n = static_cast<Eigen::Index>(e.t_number());
  const auto d = static_cast<Eigen::Index>(e.e_length());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) x(i, k) = e.row(static_cast<std::uint32_t>(i))[static_cast<std::size_t>(k)];
  x.rowwise() -= x.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  const Eigen::MatrixXd top = svd.matrixV().leftCols(static_cast<Eigen::Index>(r));
  return x - (x * top) * top.transpose();
}

}  // namespace oracle
