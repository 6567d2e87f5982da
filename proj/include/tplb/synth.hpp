#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "tplb/core_types.hpp"
#include "tplb/rng.hpp"

namespace tplb {

// Random stream ids, one per generated artefact.
inline constexpr std::uint64_t kStreamSpec = 1;
inline constexpr std::uint64_t kStreamEvents = 2;
inline constexpr std::uint64_t kStreamEmbedding = 3;
inline constexpr std::uint64_t kStreamFields = 4;
inline constexpr std::uint64_t kStreamInputs = 5;

/// key=value settings; '#' starts a comment. Keys not read by anyone are
/// reported by unused() so typos do not pass silently.
class KeyValues {
 public:
  KeyValues() = default;

  static KeyValues parse(std::istream& in) {
    KeyValues kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto eq = line.find('=');
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
      };
      if (trim(line).empty()) continue;
      if (eq == std::string::npos)
        fail(ErrorKind::MalformedRecord, "line " + std::to_string(lineno) + ": expected key=value");
      kv.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
  }

  void set(const std::string& key, const std::string& value) {
    if (key.empty()) fail(ErrorKind::MalformedRecord, "empty key");
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const std::string s = get(key, "");
    return has(key) ? parse_number<double>(key, s) : fallback;
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    const std::string s = get(key, "");
    return has(key) ? parse_number<std::int64_t>(key, s) : fallback;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    const std::string s = get(key, "");
    return has(key) ? parse_number<std::uint64_t>(key, s) : fallback;
  }

  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  template <class T>
  static T parse_number(const std::string& key, const std::string& s) {
    T v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      fail(ErrorKind::InvalidArgument, "setting " + key + ": cannot parse '" + s + "'");
    return v;
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

/// Ground-truth generative model for mask events.
struct PlantedSpec {
  std::uint64_t seed = 0;
  std::size_t t_number = 0;
  std::vector<std::vector<TokenId>> planted;  // disjoint token sets
  std::vector<double> p_correct;              // per token
  double p_within = 1.0;
  std::vector<double> frequency;              // per-token positive weights
  std::array<double, 3> mask_split{0.8, 0.1, 0.1};
  std::uint32_t positions_per_input = 128;

  void validate() const {
    if (t_number == 0) fail(ErrorKind::InvalidArgument, "t_number must be positive");
    if (p_correct.size() != t_number || frequency.size() != t_number)
      fail(ErrorKind::Mismatch, "per-token tables must have t_number entries");
    if (!(p_within >= 0.0 && p_within <= 1.0)) fail(ErrorKind::InvalidArgument, "p_within must lie in [0, 1]");
    for (double p : p_correct)
      if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::InvalidArgument, "p_correct must lie in [0, 1]");
    for (double w : frequency)
      if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorKind::InvalidArgument, "frequency weights must be positive");
    std::vector<bool> seen(t_number, false);
    for (const auto& c : planted) {
      if (c.empty()) fail(ErrorKind::InvalidArgument, "planted cluster is empty");
      for (TokenId t : c) {
        if (t >= t_number) fail(ErrorKind::OutOfRange, "planted token outside t_number");
        if (seen[t]) fail(ErrorKind::InvalidArgument, "planted clusters overlap at token " + std::to_string(t));
        seen[t] = true;
      }
    }
    double sum = 0.0;
    for (double s : mask_split) {
      if (!(s >= 0.0)) fail(ErrorKind::InvalidArgument, "mask_split components must be non-negative");
      sum += s;
    }
    if (std::fabs(sum - 1.0) > 1e-9) fail(ErrorKind::InvalidArgument, "mask_split must sum to 1");
    if (positions_per_input == 0) fail(ErrorKind::InvalidArgument, "positions_per_input must be positive");
  }

  /// Planted cluster index per token, ClusterSet::kNone when unplanted.
  std::vector<std::uint32_t> cluster_of() const {
    std::vector<std::uint32_t> out(t_number, ClusterSet::kNone);
    for (std::size_t k = 0; k < planted.size(); ++k)
      for (TokenId t : planted[k]) out[t] = static_cast<std::uint32_t>(k);
    return out;
  }

  /// Planted clusters plus a singleton for every unplanted token, canonical order.
  ClusterSet partition() const {
    auto clusters = planted;
    const auto of = cluster_of();
    for (TokenId t = 0; t < t_number; ++t)
      if (of[t] == ClusterSet::kNone) clusters.push_back({t});
    return canonicalize(ClusterSet(t_number, std::move(clusters)));
  }
};

/// Zipf weights 1/(rank+1)^s with rank = token id.
inline std::vector<double> zipf_profile(std::size_t t_number, double exponent) {
  std::vector<double> w(t_number);
  for (std::size_t r = 0; r < t_number; ++r) w[r] = std::pow(static_cast<double>(r + 1), -exponent);
  return w;
}

/// Vocabulary "tok<id>" with integer frequencies proportional to the profile.
inline Vocab synthetic_vocab(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<RawVocabEntry> raw;
  raw.reserve(weights.size());
  for (std::size_t t = 0; t < weights.size(); ++t)
    raw.push_back({static_cast<std::int64_t>(t), "tok" + std::to_string(t),
                   std::max<std::int64_t>(1, std::llround(1e9 * weights[t] / total))});
  return validate_vocab(std::move(raw));
}

namespace detail {

// "SIZE:COUNT" or "MIN-MAX:COUNT", comma separated.
struct PlantedGroup {
  std::size_t min_size = 0, max_size = 0, count = 0;
};

inline std::vector<PlantedGroup> parse_planted(const std::string& text) {
  std::vector<PlantedGroup> out;
  std::size_t pos = 0;
  auto number = [&](const std::string& s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
      fail(ErrorKind::InvalidArgument, "planted: cannot parse '" + s + "'");
    return v;
  };
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) fail(ErrorKind::InvalidArgument, "planted item '" + item + "' lacks ':COUNT'");
    const std::string size = item.substr(0, colon);
    PlantedGroup g;
    if (auto dash = size.find('-'); dash != std::string::npos) {
      g.min_size = number(size.substr(0, dash));
      g.max_size = number(size.substr(dash + 1));
    } else {
      g.min_size = g.max_size = number(size);
    }
    g.count = number(item.substr(colon + 1));
    if (g.min_size < 1 || g.max_size < g.min_size) fail(ErrorKind::InvalidArgument, "planted sizes must be >= 1");
    out.push_back(g);
  }
  return out;
}

inline std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    double v = 0.0;
    auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || p != item.data() + item.size())
      fail(ErrorKind::InvalidArgument, "setting " + key + ": cannot parse '" + item + "'");
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

/// Builds a PlantedSpec from settings. Recognized keys: seed, t_number,
/// zipf_exponent, p_correct, p_correct_mode (constant|uniform|linear),
/// p_correct_low, p_correct_high, p_correct_unplanted, p_within, planted,
/// planted_layout (shuffled|contiguous), mask_split, positions_per_input.
/// Random choices (cluster sizes, layout, uniform p_correct) come from the
/// spec stream of `seed`, in that order.
inline PlantedSpec make_planted_spec(const KeyValues& kv) {
  PlantedSpec s;
  s.seed = kv.get_u64("seed", 0);
  const auto t = kv.get_int("t_number", 1000);
  if (t <= 0) fail(ErrorKind::InvalidArgument, "t_number must be positive");
  s.t_number = static_cast<std::size_t>(t);
  s.frequency = zipf_profile(s.t_number, kv.get_double("zipf_exponent", 1.0));
  s.p_within = kv.get_double("p_within", 1.0);
  const auto ppi = kv.get_int("positions_per_input", 128);
  if (ppi <= 0) fail(ErrorKind::InvalidArgument, "positions_per_input must be positive");
  s.positions_per_input = static_cast<std::uint32_t>(ppi);
  if (kv.has("mask_split")) {
    const auto split = detail::parse_doubles("mask_split", kv.get("mask_split", ""));
    if (split.size() != 3) fail(ErrorKind::InvalidArgument, "mask_split needs three fractions");
    std::copy(split.begin(), split.end(), s.mask_split.begin());
  }

  RandomStream rng(s.seed, kStreamSpec);
  std::vector<std::size_t> sizes;
  for (const auto& g : detail::parse_planted(kv.get("planted", "")))
    for (std::size_t k = 0; k < g.count; ++k)
      sizes.push_back(g.min_size + static_cast<std::size_t>(rng.below(g.max_size - g.min_size + 1)));
  std::size_t needed = 0;
  for (auto z : sizes) needed += z;
  if (needed > s.t_number)
    fail(ErrorKind::Infeasible, "planted clusters need " + std::to_string(needed) + " tokens, t_number is " +
                                    std::to_string(s.t_number));
  std::vector<TokenId> ids(s.t_number);
  for (TokenId i = 0; i < s.t_number; ++i) ids[i] = i;
  const std::string layout = kv.get("planted_layout", "shuffled");
  if (layout == "shuffled")
    rng.shuffle(ids);
  else if (layout != "contiguous")
    fail(ErrorKind::InvalidArgument, "planted_layout must be shuffled or contiguous");
  std::size_t next = 0;
  for (auto z : sizes) {
    std::vector<TokenId> members(ids.begin() + static_cast<std::ptrdiff_t>(next),
                                 ids.begin() + static_cast<std::ptrdiff_t>(next + z));
    std::sort(members.begin(), members.end());
    s.planted.push_back(std::move(members));
    next += z;
  }

  const std::string mode = kv.get("p_correct_mode", "constant");
  const double p = kv.get_double("p_correct", 0.5);
  const double lo = kv.get_double("p_correct_low", 0.2);
  const double hi = kv.get_double("p_correct_high", 0.8);
  s.p_correct.resize(s.t_number);
  for (std::size_t i = 0; i < s.t_number; ++i) {
    if (mode == "constant")
      s.p_correct[i] = p;
    else if (mode == "uniform")
      s.p_correct[i] = lo + (hi - lo) * rng.uniform();
    else if (mode == "linear")  // high at the most frequent token, low at the rarest
      s.p_correct[i] = s.t_number == 1 ? hi
                                       : hi + (lo - hi) * static_cast<double>(i) / static_cast<double>(s.t_number - 1);
    else
      fail(ErrorKind::InvalidArgument, "p_correct_mode must be constant, uniform or linear");
  }
  if (kv.has("p_correct_unplanted")) {
    const double pu = kv.get_double("p_correct_unplanted", 0.0);
    const auto of = s.cluster_of();
    for (std::size_t i = 0; i < s.t_number; ++i)
      if (of[i] == ClusterSet::kNone || s.planted[of[i]].size() < 2) s.p_correct[i] = pu;
  }
  s.validate();
  return s;
}

/// Emits n_events events to `sink` in order. Per event the stream supplies,
/// in order: true token, modification kind, correctness, then the wrong-guess
/// draws. A wrong guess lands uniformly on the other members of the token's
/// planted cluster with probability p_within, else uniformly on the other
/// vocabulary tokens.
template <class Sink>
void generate_events(const PlantedSpec& spec, std::int64_t n_events, Sink&& sink) {
  if (n_events <= 0) fail(ErrorKind::InvalidArgument, "n_events must be positive");
  spec.validate();
  const std::size_t n = spec.t_number;
  std::vector<double> cumulative(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) cumulative[i] = acc += spec.frequency[i];
  const std::array<double, 3> kind_cum{spec.mask_split[0], spec.mask_split[0] + spec.mask_split[1], 1.0};
  const auto of = spec.cluster_of();

  RandomStream rng(spec.seed, kStreamEvents);
  for (std::int64_t i = 0; i < n_events; ++i) {
    MaskEvent e;
    e.input = static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) / spec.positions_per_input);
    e.position = static_cast<std::uint32_t>(static_cast<std::uint64_t>(i) % spec.positions_per_input);
    e.truth = static_cast<TokenId>(rng.categorical(cumulative));
    e.kind = static_cast<ModKind>(rng.categorical(kind_cum));
    e.predicted = e.truth;
    if (!rng.bernoulli(spec.p_correct[e.truth]) && n > 1) {
      const auto k = of[e.truth];
      if (k != ClusterSet::kNone && spec.planted[k].size() > 1 && rng.bernoulli(spec.p_within)) {
        const auto& mates = spec.planted[k];
        auto self = static_cast<std::size_t>(std::lower_bound(mates.begin(), mates.end(), e.truth) - mates.begin());
        auto pick = static_cast<std::size_t>(rng.below(mates.size() - 1));
        e.predicted = mates[pick >= self ? pick + 1 : pick];
      } else {
        auto pick = static_cast<TokenId>(rng.below(n - 1));
        e.predicted = pick >= e.truth ? pick + 1 : pick;
      }
    }
    sink(e);
  }
}

inline std::vector<MaskEvent> gen_events(const PlantedSpec& spec, std::int64_t n_events) {
  std::vector<MaskEvent> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n_events, 0)));
  generate_events(spec, n_events, [&](const MaskEvent& e) { out.push_back(e); });
  return out;
}

/// Exact prediction distribution of one confusion row under the spec.
inline std::vector<double> expected_row(const PlantedSpec& spec, TokenId t) {
  const std::size_t n = spec.t_number;
  std::vector<double> row(n, 0.0);
  const double p = spec.p_correct.at(t);
  row[t] = n == 1 ? 1.0 : p;
  if (n == 1) return row;
  const auto k = spec.cluster_of()[t];
  const bool clustered = k != ClusterSet::kNone && spec.planted[k].size() > 1;
  const double within = clustered ? spec.p_within : 0.0;
  const double spread = (1.0 - p) * (1.0 - within) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j)
    if (j != t) row[j] = spread;
  if (clustered) {
    const double share = (1.0 - p) * within / static_cast<double>(spec.planted[k].size() - 1);
    for (TokenId m : spec.planted[k])
      if (m != t) row[m] += share;
  }
  return row;
}

// ---------------------------------------------------------------------------
// Embeddings
// ---------------------------------------------------------------------------

struct EmbeddingSpec {
  std::size_t e_length = 768;
  double within_cos = 0.9;
  double between_max = 0.2;
};

struct SyntheticEmbedding {
  EmbeddingMatrix matrix;
  double min_within = 1.0;       // smallest pairwise cosine inside a planted cluster
  double max_between = -1.0;     // largest cross-cluster cosine (when verified)
  bool between_verified = false;  // exhaustive check ran (t_number <= 4096)
};

/// Planted cluster c of size m lies on an arc of its own plane {u_c, w_c}:
/// member k = cos(k d) u_c + sin(k d) w_c with d = acos(within_cos)/(m - 1),
/// so every pair inside the cluster has cosine >= within_cos. The planes are
/// mutually orthogonal (cross-cluster cosine 0). Unplanted tokens get further
/// orthogonal directions while dimensions last; otherwise they are Gaussian
/// vectors projected off every plane, and the cross-cluster bound is checked
/// exhaustively when t_number <= 4096.
inline SyntheticEmbedding gen_embedding(const PlantedSpec& spec, const EmbeddingSpec& es) {
  spec.validate();
  if (!(es.within_cos > es.between_max)) fail(ErrorKind::InvalidArgument, "within_cos must exceed between_max");
  if (!(es.within_cos >= -1.0 && es.within_cos <= 1.0)) fail(ErrorKind::InvalidArgument, "within_cos must lie in [-1, 1]");
  if (es.between_max < 0.0)
    fail(ErrorKind::Infeasible, "negative between_max is not attainable with orthogonal cluster planes");
  const auto of = spec.cluster_of();
  const bool has_unplanted = std::any_of(of.begin(), of.end(), [](auto k) { return k == ClusterSet::kNone; });
  const std::size_t dims_needed = 2 * spec.planted.size() + (has_unplanted ? 1 : 0);
  if (dims_needed > es.e_length)
    fail(ErrorKind::Infeasible, std::to_string(spec.planted.size()) + " clusters need " + std::to_string(dims_needed) +
                                    " dimensions, e_length is " + std::to_string(es.e_length));
  const std::size_t d = es.e_length;
  RandomStream rng(spec.seed, kStreamEmbedding);

  // orthonormal basis of 2K random directions by Gram-Schmidt (twice for stability)
  std::vector<std::vector<double>> basis;
  auto project_out = [&](std::vector<double>& v) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += v[i] * b[i];
        for (std::size_t i = 0; i < d; ++i) v[i] -= dot * b[i];
      }
  };
  auto norm = [d](const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += v[i] * v[i];
    return std::sqrt(s);
  };
  auto gaussian = [&] {
    std::vector<double> v(d);
    for (auto& x : v) x = rng.normal();
    return v;
  };
  const auto unplanted = static_cast<std::size_t>(std::count(of.begin(), of.end(), ClusterSet::kNone));
  const bool own_axes = 2 * spec.planted.size() + unplanted <= d;
  const std::size_t n_basis = 2 * spec.planted.size() + (own_axes ? unplanted : 0);
  while (basis.size() < n_basis) {
    auto v = gaussian();
    project_out(v);
    const double len = norm(v);
    if (len < 1e-6) continue;
    for (auto& x : v) x /= len;
    basis.push_back(std::move(v));
  }

  std::vector<double> values(spec.t_number * d, 0.0);
  const double span = std::acos(std::clamp(es.within_cos, -1.0, 1.0));
  for (std::size_t c = 0; c < spec.planted.size(); ++c) {
    const auto& members = spec.planted[c];
    const double step = members.size() > 1 ? span / static_cast<double>(members.size() - 1) : 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double a = step * static_cast<double>(k);
      const double ca = std::cos(a), sa = std::sin(a);
      double* row = values.data() + static_cast<std::size_t>(members[k]) * d;
      for (std::size_t i = 0; i < d; ++i) row[i] = ca * basis[2 * c][i] + sa * basis[2 * c + 1][i];
    }
  }
  std::size_t axis = 2 * spec.planted.size();
  for (TokenId t = 0; t < spec.t_number; ++t) {
    if (of[t] != ClusterSet::kNone) continue;
    if (own_axes) {
      std::copy(basis[axis].begin(), basis[axis].end(), values.begin() + static_cast<std::ptrdiff_t>(t * d));
      ++axis;
      continue;
    }
    std::vector<double> v;
    do {
      v = gaussian();
      project_out(v);
    } while (norm(v) < 1e-6);
    const double len = norm(v);
    std::copy(v.begin(), v.end(), values.begin() + static_cast<std::ptrdiff_t>(t * d));
    for (std::size_t i = 0; i < d; ++i) values[t * d + i] /= len;
  }

  SyntheticEmbedding out;
  out.matrix = EmbeddingMatrix(spec.t_number, d, std::move(values));
  auto cos = [&](TokenId a, TokenId b) {
    const auto x = out.matrix.row(a), y = out.matrix.row(b);
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      xy += x[i] * y[i];
      xx += x[i] * x[i];
      yy += y[i] * y[i];
    }
    return xy / std::sqrt(xx * yy);
  };
  for (const auto& members : spec.planted)
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) out.min_within = std::min(out.min_within, cos(members[a], members[b]));
  if (spec.t_number <= 4096) {
    out.between_verified = true;
    for (TokenId a = 0; a < spec.t_number; ++a)
      for (TokenId b = a + 1; b < spec.t_number; ++b)
        if (of[a] == ClusterSet::kNone || of[a] != of[b]) out.max_between = std::max(out.max_between, cos(a, b));
    if (out.max_between > es.between_max)
      fail(ErrorKind::Infeasible, "cross-cluster cosine " + std::to_string(out.max_between) + " exceeds between_max");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Label field matrices
// ---------------------------------------------------------------------------

struct FieldSpec {
  std::uint64_t seed = 0;
  std::size_t n_units = 1;
  std::size_t n_labels = 64;
  ProbeUnit unit = ProbeUnit::Node;
  std::size_t blocks_per_unit = 1;
  std::vector<std::size_t> block_sizes{2};  // each block's size drawn uniformly from this list
  double noise_rate = 0.0;

  void validate() const {
    if (n_units == 0 || n_labels == 0) fail(ErrorKind::InvalidArgument, "n_units and n_labels must be positive");
    if (blocks_per_unit == 0) fail(ErrorKind::InvalidArgument, "every unit needs at least one planted block");
    if (block_sizes.empty()) fail(ErrorKind::InvalidArgument, "block_sizes is empty");
    const auto largest = *std::max_element(block_sizes.begin(), block_sizes.end());
    if (*std::min_element(block_sizes.begin(), block_sizes.end()) == 0)
      fail(ErrorKind::InvalidArgument, "block sizes must be positive");
    if (largest * blocks_per_unit > n_labels) fail(ErrorKind::Infeasible, "planted blocks do not fit in n_labels");
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) fail(ErrorKind::InvalidArgument, "noise_rate must lie in [0, 1]");
  }
};

struct PlantedUnit {
  std::vector<std::vector<std::uint32_t>> blocks;  // disjoint label sets
  Count diag = 0;   // total block size
  Count noise = 0;  // planted off-block cells above threshold
};

struct SyntheticFields {
  std::vector<LabelFieldMatrix> units;
  std::vector<PlantedUnit> truth;
};

/// Value ranges relative to a 0.6 clip after max-normalization: block cells
/// in [0.7, 1], background in [0, 0.4], noise cells in [0.65, 0.95]. Noise
/// falls only in block rows outside every block column.
inline SyntheticFields gen_fields(const FieldSpec& fs) {
  fs.validate();
  RandomStream rng(fs.seed, kStreamFields);
  SyntheticFields out;
  const std::size_t n = fs.n_labels;
  for (std::size_t u = 0; u < fs.n_units; ++u) {
    LabelFieldMatrix m;
    m.n_labels = n;
    m.unit = fs.unit;
    m.unit_index = static_cast<std::uint32_t>(u);
    m.values.resize(n * n);
    for (auto& v : m.values) v = 0.4 * rng.uniform();

    std::vector<std::uint32_t> labels(n);
    for (std::uint32_t i = 0; i < n; ++i) labels[i] = i;
    rng.shuffle(labels);
    PlantedUnit truth;
    std::vector<bool> in_block(n, false);
    std::size_t next = 0;
    for (std::size_t b = 0; b < fs.blocks_per_unit; ++b) {
      const auto size = fs.block_sizes[rng.below(fs.block_sizes.size())];
      std::vector<std::uint32_t> block(labels.begin() + static_cast<std::ptrdiff_t>(next),
                                       labels.begin() + static_cast<std::ptrdiff_t>(next + size));
      next += size;
      std::sort(block.begin(), block.end());
      for (auto i : block) in_block[i] = true;
      for (auto i : block)
        for (auto j : block) m.at(i, j) = 0.7 + 0.3 * rng.uniform();
      truth.diag += static_cast<Count>(size);
      truth.blocks.push_back(std::move(block));
    }
    for (const auto& block : truth.blocks)
      for (auto i : block)
        for (std::size_t j = 0; j < n; ++j)
          if (!in_block[j] && rng.bernoulli(fs.noise_rate)) {
            m.at(i, j) = 0.65 + 0.3 * rng.uniform();
            ++truth.noise;
          }
    out.units.push_back(std::move(m));
    out.truth.push_back(std::move(truth));
  }
  return out;
}

inline FieldSpec make_field_spec(const KeyValues& kv) {
  FieldSpec fs;
  fs.seed = kv.get_u64("seed", 0);
  const auto units = kv.get_int("n_units", 1), labels = kv.get_int("n_labels", 64), blocks = kv.get_int("blocks_per_unit", 1);
  if (units <= 0 || labels <= 0 || blocks <= 0) fail(ErrorKind::InvalidArgument, "field sizes must be positive");
  fs.n_units = static_cast<std::size_t>(units);
  fs.n_labels = static_cast<std::size_t>(labels);
  fs.blocks_per_unit = static_cast<std::size_t>(blocks);
  const std::string unit = kv.get("unit", "node");
  if (unit == "head")
    fs.unit = ProbeUnit::Head;
  else if (unit != "node")
    fail(ErrorKind::InvalidArgument, "unit must be node or head");
  fs.block_sizes.clear();
  for (double v : detail::parse_doubles("block_sizes", kv.get("block_sizes", "2"))) {
    if (!(v >= 1.0) || v != std::floor(v)) fail(ErrorKind::InvalidArgument, "block sizes must be positive integers");
    fs.block_sizes.push_back(static_cast<std::size_t>(v));
  }
  fs.noise_rate = kv.get_double("noise_rate", 0.0);
  fs.validate();
  return fs;
}

// ---------------------------------------------------------------------------
// Classified inputs
// ---------------------------------------------------------------------------

struct InputSpec {
  std::uint64_t seed = 0;
  std::size_t n_inputs = 10000;
  std::size_t input_length = 16;
  std::uint32_t n_labels = 14;
  double accuracy = 0.8;  // probability a prediction is correct, independent of tokens
};

/// Tokens drawn from the spec's frequency profile; labels uniform; a wrong
/// prediction is uniform over the other labels.
inline std::vector<ClassifiedInput> gen_inputs(const PlantedSpec& spec, const InputSpec& is) {
  spec.validate();
  if (is.n_inputs == 0 || is.input_length == 0) fail(ErrorKind::InvalidArgument, "n_inputs and input_length must be positive");
  if (is.n_labels < 2) fail(ErrorKind::InvalidArgument, "need at least two labels");
  if (!(is.accuracy >= 0.0 && is.accuracy <= 1.0)) fail(ErrorKind::InvalidArgument, "accuracy must lie in [0, 1]");
  std::vector<double> cumulative(spec.t_number);
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.t_number; ++i) cumulative[i] = acc += spec.frequency[i];
  RandomStream rng(is.seed, kStreamInputs);
  std::vector<ClassifiedInput> out(is.n_inputs);
  for (std::size_t k = 0; k < is.n_inputs; ++k) {
    auto& in = out[k];
    in.input_id = k;
    in.tokens.resize(is.input_length);
    for (auto& t : in.tokens) t = static_cast<TokenId>(rng.categorical(cumulative));
    in.true_label = static_cast<std::uint32_t>(rng.below(is.n_labels));
    in.predicted_label = in.true_label;
    if (!rng.bernoulli(is.accuracy)) {
      const auto pick = static_cast<std::uint32_t>(rng.below(is.n_labels - 1));
      in.predicted_label = pick >= in.true_label ? pick + 1 : pick;
    }
  }
  return out;
}

inline InputSpec make_input_spec(const KeyValues& kv) {
  InputSpec is;
  is.seed = kv.get_u64("seed", 0);
  const auto n = kv.get_int("n_inputs", 10000), len = kv.get_int("input_length", 16), labels = kv.get_int("n_labels", 14);
  if (n <= 0 || len <= 0 || labels < 2) fail(ErrorKind::InvalidArgument, "input sizes out of range");
  is.n_inputs = static_cast<std::size_t>(n);
  is.input_length = static_cast<std::size_t>(len);
  is.n_labels = static_cast<std::uint32_t>(labels);
  is.accuracy = kv.get_double("accuracy", 0.8);
  return is;
}

}  // namespace tplb
