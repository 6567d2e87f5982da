#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>
#include <vector>

#include "tplb/core_types.hpp"
#include "tplb/numeric.hpp"
#include "tplb/rng.hpp"

namespace tplb {

/// Cosine of two embedding rows: dot(a, b) / sqrt(dot(a, a) * dot(b, b)).
/// Symmetric bit-for-bit, exactly 1 for identical rows and -1 for negated ones.
inline double cosine(const EmbeddingMatrix& e, TokenId i, TokenId j) {
  const auto a = e.row(i);
  const auto b = e.row(j);
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  const double c = ab / std::sqrt(aa * bb);
  return std::clamp(c, -1.0, 1.0);
}

namespace detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline RowMatrix unit_rows(const EmbeddingMatrix& e) {
  RowMatrix u(e.t_number(), e.e_length());
  for (std::size_t i = 0; i < e.t_number(); ++i) {
    const auto row = e.row(static_cast<TokenId>(i));
    double norm2 = 0.0;
    for (double v : row) norm2 += v * v;
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t k = 0; k < row.size(); ++k) u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k] * inv;
  }
  return u;
}

struct BlockPair {
  std::size_t i0, i1, j0, j1;
  bool diagonal() const noexcept { return i0 == j0; }
};

inline std::vector<BlockPair> upper_block_pairs(std::size_t n, std::size_t block) {
  std::vector<BlockPair> pairs;
  for (std::size_t i0 = 0; i0 < n; i0 += block)
    for (std::size_t j0 = i0; j0 < n; j0 += block)
      pairs.push_back({i0, std::min(n, i0 + block), j0, std::min(n, j0 + block)});
  return pairs;
}

/// Visits the upper-triangular block pairs of U U^T. Work item k goes to
/// worker k % threads; each worker owns one State. Block boundaries never
/// depend on the thread count, so every similarity value is computed by the
/// same kernel call whatever the parallelism.
template <class State, class Visit>
std::vector<State> scan_blocks(const RowMatrix& u, std::size_t block, std::size_t threads, const State& init,
                               Visit visit) {
  const auto pairs = upper_block_pairs(static_cast<std::size_t>(u.rows()), block);
  threads = std::max<std::size_t>(1, std::min(threads, pairs.size()));
  std::vector<State> states(threads, init);
  auto worker = [&](std::size_t t) {
    RowMatrix g;
    for (std::size_t k = t; k < pairs.size(); k += threads) {
      const auto& p = pairs[k];
      const auto ni = static_cast<Eigen::Index>(p.i1 - p.i0);
      const auto nj = static_cast<Eigen::Index>(p.j1 - p.j0);
      g.resize(ni, nj);
      g.noalias() = u.middleRows(static_cast<Eigen::Index>(p.i0), ni) *
                    u.middleRows(static_cast<Eigen::Index>(p.j0), nj).transpose();
      visit(states[t], k, p, g);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  return states;
}

constexpr std::size_t kBlock = 512;

}  // namespace detail

struct SimilarityHistogram {
  Histogram hist;                    // all ordered pairs on [-1, 1], diagonal included
  std::uint64_t offdiag_pairs = 0;   // ordered off-diagonal pairs
  double offdiag_mean = 0.0;
  double offdiag_std = 0.0;
};

/// Streams U U^T block by block; the dense pair matrix is never held in memory.
inline SimilarityHistogram similarity_histogram(const EmbeddingMatrix& e, std::size_t bins, std::size_t threads = 1) {
  if (bins < 2) fail(ErrorKind::InvalidArgument, "histogram needs at least 2 bins");
  const auto u = detail::unit_rows(e);
  const auto n_pairs = detail::upper_block_pairs(e.t_number(), detail::kBlock).size();

  struct State {
    Histogram hist;
    std::vector<std::pair<std::size_t, std::pair<double, double>>> sums;  // item -> (sum, sum of squares)
  };
  const State init{Histogram(-1.0, 1.0, bins), {}};
  auto states = detail::scan_blocks(u, detail::kBlock, threads, init,
                                    [](State& s, std::size_t item, const detail::BlockPair& p, const detail::RowMatrix& g) {
                                      double sum = 0.0, sum2 = 0.0;
                                      for (Eigen::Index a = 0; a < g.rows(); ++a) {
                                        const Eigen::Index b0 = p.diagonal() ? a + 1 : 0;
                                        for (Eigen::Index b = b0; b < g.cols(); ++b) {
                                          const double c = g(a, b);
                                          s.hist.add(c, 2);
                                          sum += c;
                                          sum2 += c * c;
                                        }
                                      }
                                      s.sums.push_back({item, {sum, sum2}});
                                    });

  SimilarityHistogram out;
  out.hist = Histogram(-1.0, 1.0, bins);
  std::vector<double> sum(n_pairs, 0.0), sum2(n_pairs, 0.0);
  for (const auto& s : states) {
    out.hist.merge(s.hist);
    for (const auto& [item, v] : s.sums) {
      sum[item] = v.first;
      sum2[item] = v.second;
    }
  }
  // self-similarity is exactly 1
  out.hist.add(1.0, e.t_number());
  const auto n = static_cast<std::uint64_t>(e.t_number());
  out.offdiag_pairs = n * (n - 1);
  if (n > 1) {
    const double unordered = static_cast<double>(n * (n - 1) / 2);
    out.offdiag_mean = exact_sum(sum) / unordered;
    const double var = exact_sum(sum2) / unordered - out.offdiag_mean * out.offdiag_mean;
    out.offdiag_std = std::sqrt(std::max(0.0, var));
  }
  return out;
}

struct Neighbor {
  TokenId token = 0;
  double score = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Per token, its best-scoring other tokens, descending score, ties by id.
using SimilarityRowTop = std::vector<std::vector<Neighbor>>;

struct CslsConfig {
  std::size_t neighborhood = 10;

  void validate(std::size_t t_number) const {
    if (neighborhood < 1 || neighborhood >= t_number)
      fail(ErrorKind::InvalidArgument, "CSLS neighborhood must lie in [1, t_number)");
  }
};

namespace detail {

inline bool better(const Neighbor& a, const Neighbor& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.token < b.token;
}

/// Fixed-capacity sorted candidate lists, one per row.
class TopLists {
 public:
  TopLists(std::size_t rows, std::size_t k) : k_(k), fill_(rows, 0), data_(rows * k) {}

  void offer(std::size_t row, Neighbor cand) {
    Neighbor* list = data_.data() + row * k_;
    std::size_t& n = fill_[row];
    if (n == k_ && !better(cand, list[n - 1])) return;
    std::size_t pos = (n < k_) ? n++ : n - 1;
    while (pos > 0 && better(cand, list[pos - 1])) {
      list[pos] = list[pos - 1];
      --pos;
    }
    list[pos] = cand;
  }

  std::span<const Neighbor> row(std::size_t r) const { return {data_.data() + r * k_, fill_[r]}; }
  std::size_t rows() const noexcept { return fill_.size(); }

 private:
  std::size_t k_;
  std::vector<std::size_t> fill_;
  std::vector<Neighbor> data_;
};

/// Top-k others per row under score(i, j) = 2 cos - r_i - r_j when `density`
/// is given, plain cosine otherwise. Each unordered pair is scored once and the
/// value is offered to both rows, so the relation is exactly symmetric.
inline SimilarityRowTop top_neighbors(const RowMatrix& u, std::size_t k, std::size_t threads,
                                      const std::vector<double>* density) {
  const auto n = static_cast<std::size_t>(u.rows());
  const TopLists init(n, k);
  auto states = scan_blocks(u, kBlock, threads, init,
                            [density](TopLists& lists, std::size_t, const BlockPair& p, const RowMatrix& g) {
                              for (Eigen::Index a = 0; a < g.rows(); ++a) {
                                const auto i = static_cast<TokenId>(p.i0 + static_cast<std::size_t>(a));
                                const Eigen::Index b0 = p.diagonal() ? a + 1 : 0;
                                for (Eigen::Index b = b0; b < g.cols(); ++b) {
                                  const auto j = static_cast<TokenId>(p.j0 + static_cast<std::size_t>(b));
                                  double s = g(a, b);
                                  if (density != nullptr) s = 2.0 * s - (*density)[i] - (*density)[j];
                                  lists.offer(i, {j, s});
                                  lists.offer(j, {i, s});
                                }
                              }
                            });
  SimilarityRowTop out(n);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<Neighbor> merged;
    for (const auto& s : states) merged.insert(merged.end(), s.row(r).begin(), s.row(r).end());
    std::sort(merged.begin(), merged.end(), better);
    if (merged.size() > k) merged.resize(k);
    out[r] = std::move(merged);
  }
  return out;
}

}  // namespace detail

/// r(x): mean plain cosine of x to its `neighborhood` nearest other tokens.
inline std::vector<double> csls_density(const EmbeddingMatrix& e, CslsConfig cfg, std::size_t threads = 1) {
  cfg.validate(e.t_number());
  const auto u = detail::unit_rows(e);
  const auto nearest = detail::top_neighbors(u, cfg.neighborhood, threads, nullptr);
  std::vector<double> r(e.t_number());
  for (std::size_t i = 0; i < r.size(); ++i) {
    std::vector<double> cos;
    for (const auto& nb : nearest[i]) cos.push_back(nb.score);
    r[i] = *exact_mean(cos);
  }
  return r;
}

/// CSLS row for token i: score(i, j) = 2 cos(i, j) - r(i) - r(j) for every j.
inline std::vector<double> csls_scores(const EmbeddingMatrix& e, CslsConfig cfg, TokenId i) {
  const auto r = csls_density(e, cfg);
  std::vector<double> row(e.t_number());
  for (std::size_t j = 0; j < row.size(); ++j)
    row[j] = 2.0 * cosine(e, i, static_cast<TokenId>(j)) - r.at(i) - r[j];
  return row;
}

struct SimilarityOptions {
  std::size_t threads = 1;
  std::optional<CslsConfig> csls;  // rescale scores before ranking
};

inline SimilarityRowTop similarity_top(const EmbeddingMatrix& e, std::size_t k, SimilarityOptions opts = {}) {
  if (k < 1 || k >= e.t_number()) fail(ErrorKind::InvalidArgument, "k must lie in [1, t_number)");
  std::optional<std::vector<double>> density;
  if (opts.csls) density = csls_density(e, *opts.csls, opts.threads);
  const auto u = detail::unit_rows(e);
  return detail::top_neighbors(u, k, opts.threads, density ? &*density : nullptr);
}

/// Keeps, per row, edges to the q best-scoring other tokens. The result is
/// generally not symmetric; feed it through adjacency() for mutual edges.
inline BinaryMatrix top_q_binarize(const EmbeddingMatrix& e, std::size_t q, SimilarityOptions opts = {}) {
  if (q < 1 || q >= e.t_number()) fail(ErrorKind::InvalidArgument, "q must lie in [1, t_number)");
  const auto top = similarity_top(e, q, opts);
  std::vector<std::vector<TokenId>> rows(e.t_number());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto& nb : top[i]) rows[i].push_back(nb.token);
  return BinaryMatrix(e.t_number(), std::move(rows), TopQRule{q});
}

// ---------------------------------------------------------------------------
// All-but-the-top post-processing
// ---------------------------------------------------------------------------

struct AbttConfig {
  std::size_t r = 0;  // principal components removed

  static AbttConfig for_length(std::size_t e_length) {
    return {static_cast<std::size_t>(std::lround(static_cast<double>(e_length) / 100.0))};
  }

  void validate(std::size_t e_length) const {
    if (r >= e_length) fail(ErrorKind::InvalidArgument, "ABTT r must be below e_length");
  }
};

struct AbttModel {
  std::vector<double> mean;                     // e_length
  std::vector<std::vector<double>> directions;  // r unit vectors
  std::vector<double> variances;                // eigenvalues of X^T X, descending
};

/// Mean row and top-r principal directions from the eigendecomposition of
/// the centered X^T X. Each direction's largest-magnitude entry is positive.
inline AbttModel fit_abtt(const EmbeddingMatrix& e, const AbttConfig& cfg) {
  cfg.validate(e.e_length());
  const auto n = static_cast<Eigen::Index>(e.t_number());
  const auto d = static_cast<Eigen::Index>(e.e_length());
  AbttModel model;
  model.mean.resize(e.e_length());
  for (std::size_t k = 0; k < e.e_length(); ++k) {
    ExactSum s;
    for (std::size_t i = 0; i < e.t_number(); ++i) s.add(e.values()[i * e.e_length() + k]);
    model.mean[k] = s.value() / static_cast<double>(e.t_number());
  }
  if (cfg.r == 0) return model;
  detail::RowMatrix x = Eigen::Map<const detail::RowMatrix>(e.values().data(), n, d);
  x.rowwise() -= Eigen::Map<const Eigen::RowVectorXd>(model.mean.data(), d);
  const Eigen::MatrixXd cov = x.transpose() * x;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) fail(ErrorKind::NonConvergence, "ABTT eigendecomposition did not converge");
  for (std::size_t c = 0; c < cfg.r; ++c) {
    const Eigen::Index col = d - 1 - static_cast<Eigen::Index>(c);  // eigenvalues ascend
    Eigen::VectorXd v = es.eigenvectors().col(col);
    Eigen::Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    if (v(at) < 0) v = -v;
    model.directions.emplace_back(v.data(), v.data() + d);
    model.variances.push_back(es.eigenvalues()(col));
  }
  return model;
}

/// Mean-centers the rows and removes their projections on the top-r
/// principal directions.
inline EmbeddingMatrix abtt(const EmbeddingMatrix& e, const AbttConfig& cfg) {
  const auto model = fit_abtt(e, cfg);
  const auto n = static_cast<Eigen::Index>(e.t_number());
  const auto d = static_cast<Eigen::Index>(e.e_length());
  detail::RowMatrix x = Eigen::Map<const detail::RowMatrix>(e.values().data(), n, d);
  x.rowwise() -= Eigen::Map<const Eigen::RowVectorXd>(model.mean.data(), d);
  for (const auto& dir : model.directions) {
    const Eigen::Map<const Eigen::VectorXd> v(dir.data(), d);
    const Eigen::VectorXd proj = x * v;
    x -= proj * v.transpose();
  }
  std::vector<double> values(x.data(), x.data() + x.size());
  return EmbeddingMatrix(e.t_number(), e.e_length(), std::move(values));
}

}  // namespace tplb
