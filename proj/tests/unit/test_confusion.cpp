#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "tplb/confusion.hpp"
#include "tplb/synth.hpp"

using namespace tplb;

namespace {

ConfusionMatrix matrix(std::size_t n, std::vector<Triplet> t) { return ConfusionMatrix::from_sorted(n, t); }

}  // namespace

TEST(Confusion, BuilderCountsPairsAndSorts) {
  ConfusionBuilder b(3);
  b.add(2, 0);
  b.add(0, 0);
  b.add(2, 0);
  b.add(1, 2);
  const auto m = std::move(b).build();
  EXPECT_EQ(m.triplets(), (std::vector<Triplet>{{0, 0, 1}, {1, 2, 1}, {2, 0, 2}}));
  EXPECT_THROW(ConfusionBuilder(2).add(0, 2), Error);
  EXPECT_THROW(std::move(ConfusionBuilder(2)).build(), Error);
}

TEST(Confusion, MergeIsOrderIndependent) {
  const std::vector<std::pair<TokenId, TokenId>> pairs{{0, 1}, {1, 1}, {0, 0}, {2, 1}, {0, 1}};
  ConfusionBuilder all(3), a(3), b(3);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    all.add(pairs[i].first, pairs[i].second);
    (i < 2 ? b : a).add(pairs[i].first, pairs[i].second);
  }
  a.merge(std::move(b));
  EXPECT_EQ(std::move(a).build(), std::move(all).build());
}

TEST(Normalize, DividesByDiagonalAndExcludesWeakRows) {
  // row 0 retained, row 1 has zero diagonal, row 2 has an off-diagonal above its diagonal
  const auto m = matrix(3, {{0, 0, 10}, {0, 1, 2}, {1, 0, 4}, {2, 0, 5}, {2, 2, 3}});
  const auto n = normalize_confusion(m);
  EXPECT_TRUE(n.retained(0));
  EXPECT_FALSE(n.retained(1));
  EXPECT_FALSE(n.retained(2));
  EXPECT_EQ(n.at(0, 0), 1.0);
  EXPECT_EQ(n.at(0, 1), 0.2);
  EXPECT_EQ(n.excluded_rows(), (std::vector<TokenId>{1, 2}));
}

TEST(Normalize, TieWithDiagonalIsRetained) {
  const auto n = normalize_confusion(matrix(2, {{0, 0, 4}, {0, 1, 4}, {1, 1, 1}}));
  EXPECT_TRUE(n.retained(0));
  EXPECT_EQ(n.at(0, 1), 1.0);
}

TEST(Normalize, AllRowsExcludedIsAnError) {
  try {
    normalize_confusion(matrix(2, {{0, 1, 3}, {1, 0, 3}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AllRowsExcluded);
  }
}

TEST(Binarize, StrictThresholdKeepsDiagonal) {
  const auto n = normalize_confusion(matrix(3, {{0, 0, 100}, {0, 1, 5}, {0, 2, 6}, {1, 1, 1}, {2, 2, 1}}));
  const auto b = binarize_threshold(n, {0.05});
  EXPECT_TRUE(b.has(0, 0));
  EXPECT_FALSE(b.has(0, 1));  // exactly at the threshold
  EXPECT_TRUE(b.has(0, 2));
  EXPECT_THROW(binarize_threshold(n, {0.0}), Error);
  EXPECT_THROW(binarize_threshold(n, {1.5}), Error);
}

TEST(Adjacency, KeepsOnlyMutualPairs) {
  const auto n = normalize_confusion(matrix(3, {{0, 0, 10}, {0, 1, 5}, {0, 2, 5}, {1, 0, 5}, {1, 1, 10}, {2, 2, 10}}));
  const auto a = adjacency(binarize_threshold(n));
  EXPECT_EQ(a.edges(), (std::vector<std::pair<TokenId, TokenId>>{{0, 1}}));
}

TEST(TopK, OrdersByValueThenId) {
  const auto counts = matrix(4, {{0, 0, 100}, {0, 1, 20}, {0, 2, 30}, {0, 3, 20}, {1, 1, 5}, {2, 2, 5}, {3, 3, 5}});
  const auto n = normalize_confusion(counts);
  const auto t = top_k(n, 2);
  ASSERT_EQ(t.front().token, 0u);
  ASSERT_EQ(t.front().partners.size(), 2u);
  EXPECT_EQ(t.front().partners[0].token, 2u);
  EXPECT_EQ(t.front().partners[1].token, 1u);
  EXPECT_EQ(t.size(), 4u);
  const auto filtered = top_k(n, 3, &counts, {.min_count = 100});
  ASSERT_EQ(filtered.size(), 1u);
  EXPECT_EQ(filtered.front().token, 0u);
}

TEST(OffdiagHistogram, CountsRetainedOffDiagonalCells) {
  const auto n = normalize_confusion(matrix(2, {{0, 0, 4}, {0, 1, 1}, {1, 0, 2}, {1, 1, 4}}));
  const auto h = offdiag_histogram(n, 10);
  EXPECT_EQ(h.total(), 2u);
  EXPECT_EQ(h.count(2), 1u);  // 0.25
  EXPECT_EQ(h.count(5), 1u);  // 0.5
}

TEST(Confusion, RowsMatchGeneratorDistributions) {
  std::istringstream in("seed=4\nt_number=40\nzipf_exponent=0.5\nplanted=2-4:6\np_correct_mode=uniform\n"
                        "p_correct_low=0.3\np_correct_high=0.9\np_within=0.7\n");
  const auto spec = make_planted_spec(KeyValues::parse(in));
  const auto m = build_confusion(gen_events(spec, 1000000), 40);
  std::size_t cells = 0, outside = 0;
  for (TokenId r = 0; r < 40; ++r) {
    const auto expect = expected_row(spec, r);
    const double total = static_cast<double>(m.row_total(r));
    for (TokenId c = 0; c < 40; ++c) {
      const double p = expect[c];
      const double sigma = std::sqrt(total * p * (1 - p));
      ++cells;
      if (std::fabs(static_cast<double>(m.at(r, c)) - total * p) > 3 * sigma + 1e-9) ++outside;
    }
  }
  // 3 sigma covers 99.7% of cells; allow a 1% tail for skewed small counts
  EXPECT_LE(outside, cells / 100);
}
