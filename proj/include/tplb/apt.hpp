#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "tplb/core_types.hpp"
#include "tplb/numeric.hpp"

namespace tplb {

struct TokenApt {
  Count selected = 0;
  Count correct = 0;

  friend bool operator==(const TokenApt&, const TokenApt&) = default;
};

/// Accuracy per token plus the <APT> order parameter. Tokens never selected
/// have no APT and do not enter the mean.
class AptTable {
 public:
  AptTable() = default;

  explicit AptTable(std::vector<TokenApt> per_token) : per_token_(std::move(per_token)) {
    std::vector<double> apts;
    for (std::size_t t = 0; t < per_token_.size(); ++t) {
      const auto& c = per_token_[t];
      if (c.selected < 0 || c.correct < 0 || c.correct > c.selected)
        fail(ErrorKind::Invariant, "token " + std::to_string(t) + " has inconsistent APT counts");
      if (c.selected > 0) apts.push_back(ratio(c));
    }
    covered_ = apts.size();
    mean_ = exact_mean(apts).value_or(0.0);
  }

  std::size_t t_number() const noexcept { return per_token_.size(); }
  std::size_t covered_tokens() const noexcept { return covered_; }
  double mean_apt() const noexcept { return mean_; }

  const TokenApt& counts(TokenId t) const { return per_token_.at(t); }

  std::optional<double> apt(TokenId t) const {
    const auto& c = per_token_.at(t);
    if (c.selected == 0) return std::nullopt;
    return ratio(c);
  }

  std::vector<TokenId> covered() const {
    std::vector<TokenId> out;
    out.reserve(covered_);
    for (std::size_t t = 0; t < per_token_.size(); ++t)
      if (per_token_[t].selected > 0) out.push_back(static_cast<TokenId>(t));
    return out;
  }

  friend bool operator==(const AptTable& a, const AptTable& b) { return a.per_token_ == b.per_token_; }

 private:
  static double ratio(const TokenApt& c) {
    return static_cast<double>(c.correct) / static_cast<double>(c.selected);
  }

  std::vector<TokenApt> per_token_;
  std::size_t covered_ = 0;
  double mean_ = 0.0;
};

struct AptOptions {
  bool masked_only = false;
};

/// Streaming counter. Partial counters merge by addition, so the final table
/// does not depend on how the event stream was split.
class AptCounter {
 public:
  AptCounter(std::size_t t_number, AptOptions opts = {}) : opts_(opts), counts_(t_number) {}

  void add(const MaskEvent& e) {
    check_event_ids(e, counts_.size());
    if (opts_.masked_only && e.kind != ModKind::Masked) return;
    auto& c = counts_[e.truth];
    ++c.selected;
    if (e.predicted == e.truth) ++c.correct;
  }

  void merge(const AptCounter& other) {
    if (other.counts_.size() != counts_.size()) fail(ErrorKind::Mismatch, "APT counters differ in t_number");
    for (std::size_t t = 0; t < counts_.size(); ++t) {
      counts_[t].selected += other.counts_[t].selected;
      counts_[t].correct += other.counts_[t].correct;
    }
  }

  AptTable finish() const {
    AptTable table(counts_);
    if (table.covered_tokens() == 0) fail(ErrorKind::EmptyInput, "no token was ever selected");
    return table;
  }

 private:
  AptOptions opts_;
  std::vector<TokenApt> counts_;
};

inline AptTable compute_apt(std::span<const MaskEvent> events, const Vocab& vocab, AptOptions opts = {}) {
  AptCounter counter(vocab.t_number(), opts);
  for (const auto& e : events) counter.add(e);
  return counter.finish();
}

struct GroupApt {
  std::size_t group = 0;
  double mean_apt = 0.0;
  std::size_t tokens = 0;
};

/// Covered tokens ordered by descending corpus frequency (ties by id), split
/// into n_groups contiguous groups whose sizes differ by at most one (the
/// first groups take the remainder). Each group reports its unweighted mean.
inline std::vector<GroupApt> group_apt(const AptTable& apt, const Vocab& vocab, std::size_t n_groups) {
  if (apt.t_number() != vocab.t_number()) fail(ErrorKind::Mismatch, "APT table and vocab differ in size");
  if (n_groups < 1) fail(ErrorKind::InvalidArgument, "n_groups must be >= 1");
  std::vector<double> ordered;
  ordered.reserve(apt.covered_tokens());
  for (TokenId t : vocab.by_frequency())
    if (auto a = apt.apt(t)) ordered.push_back(*a);
  if (n_groups > ordered.size())
    fail(ErrorKind::InvalidArgument, "n_groups exceeds the number of covered tokens");

  const std::size_t base = ordered.size() / n_groups;
  const std::size_t extra = ordered.size() % n_groups;
  std::vector<GroupApt> out;
  out.reserve(n_groups);
  std::size_t begin = 0;
  for (std::size_t g = 0; g < n_groups; ++g) {
    const std::size_t len = base + (g < extra ? 1 : 0);
    std::span<const double> slice(ordered.data() + begin, len);
    out.push_back({g, *exact_mean(slice), len});
    begin += len;
  }
  return out;
}

/// Mean APT of the k highest-APT tokens (ties by ascending id).
inline double top_apt(const AptTable& apt, std::int64_t k) {
  if (k <= 0) fail(ErrorKind::InvalidArgument, "k must be positive");
  if (static_cast<std::size_t>(k) > apt.covered_tokens())
    fail(ErrorKind::InvalidArgument, "k exceeds the number of covered tokens");
  std::vector<std::pair<double, TokenId>> ranked;
  ranked.reserve(apt.covered_tokens());
  for (TokenId t : apt.covered()) ranked.emplace_back(*apt.apt(t), t);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<double> top;
  top.reserve(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) top.push_back(ranked[static_cast<std::size_t>(i)].first);
  return *exact_mean(top);
}

struct AptClusterSplit {
  std::optional<double> unity_mean;  // nullopt: no size-1 clusters
  std::optional<double> multi_mean;  // nullopt: no clusters larger than one
  std::size_t unity_tokens = 0;
  std::size_t multi_tokens = 0;
  Histogram unity_hist;
  Histogram multi_hist;
};

/// Unweighted APT means over tokens in unity clusters versus larger clusters,
/// with APT histograms on [0, 1] for both populations.
inline AptClusterSplit apt_by_cluster(const AptTable& apt, const ClusterSet& clusters, std::size_t bins = 20) {
  AptClusterSplit out;
  out.unity_hist = Histogram(0.0, 1.0, bins);
  out.multi_hist = Histogram(0.0, 1.0, bins);
  std::vector<double> unity, multi;
  for (const auto& members : clusters.clusters()) {
    for (TokenId t : members) {
      if (t >= apt.t_number() || !apt.apt(t))
        fail(ErrorKind::MissingInputs, "cluster token " + std::to_string(t) + " has no APT entry");
      const double a = *apt.apt(t);
      if (members.size() == 1) {
        unity.push_back(a);
        out.unity_hist.add(a);
      } else {
        multi.push_back(a);
        out.multi_hist.add(a);
      }
    }
  }
  out.unity_tokens = unity.size();
  out.multi_tokens = multi.size();
  out.unity_mean = exact_mean(unity);
  out.multi_mean = exact_mean(multi);
  return out;
}

}  // namespace tplb
