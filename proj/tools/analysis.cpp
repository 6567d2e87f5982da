#include <cmath>
#include <optional>

#include "commands.hpp"
#include "tplb/tplb.hpp"

namespace tplb::cli {
namespace {

std::string label(const Vocab* vocab, TokenId t) {
  if (vocab != nullptr && vocab->contains(t)) return std::string(vocab->text(t));
  return std::to_string(t);
}

std::optional<Vocab> maybe_vocab(RunContext& ctx, const std::string& path) {
  if (path.empty()) return std::nullopt;
  return read_vocab(ctx.input(path));
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// "size<TAB>count", one row per distinct cluster size.
void write_size_table(const fs::path& path, const ClusterSet& clusters) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& sc : size_distribution(clusters)) rows.push_back({std::to_string(sc.size), std::to_string(sc.count)});
  write_table(path, {"size", "count"}, rows);
}

json cluster_summary(const ClusterSet& clusters) {
  std::size_t unity = 0, multi_tokens = 0, largest = 0;
  for (const auto& members : clusters.clusters()) {
    if (members.size() == 1)
      ++unity;
    else
      multi_tokens += members.size();
    largest = std::max(largest, members.size());
  }
  return {{"participants", clusters.participants()},
          {"clusters", clusters.size()},
          {"unity_clusters", unity},
          {"multi_clusters", clusters.size() - unity},
          {"tokens_in_multi", multi_tokens},
          {"largest", largest}};
}

// ---------------------------------------------------------------------------

struct AptArgs {
  CommonOptions common;
  std::string events, vocab, clusters;
  std::size_t groups = 200;
  std::int64_t top_k = 50;
  bool masked_only = false;
  std::size_t bins = 20;
};

void run_apt(const AptArgs& a) {
  RunContext ctx("apt", a.common);
  ctx.param("groups", a.groups);
  ctx.param("top_k", a.top_k);
  ctx.param("masked_only", a.masked_only);
  ctx.param("group_weighting", "unweighted");
  ctx.param("group_order", "corpus-frequency");

  const auto vocab = read_vocab(ctx.input(a.vocab));
  AptCounter counter(vocab.t_number(), {a.masked_only});
  const auto n_events =
      for_each_event(ctx.input(a.events), vocab.t_number(), [&](const MaskEvent& e) { counter.add(e); });
  const auto apt = counter.finish();
  const auto groups = group_apt(apt, vocab, a.groups);
  const double top = top_apt(apt, a.top_k);

  write_apt_table(ctx.output("apt.tsv"), apt, vocab);
  std::vector<std::pair<double, double>> pts;
  for (const auto& g : groups) pts.emplace_back(static_cast<double>(g.group), g.mean_apt);
  write_plot(ctx.output("groups.tsv"), "group", "mean_apt", pts);

  json summary = {{"t_number", vocab.t_number()},
                  {"events", n_events},
                  {"covered_tokens", apt.covered_tokens()},
                  {"mean_apt", apt.mean_apt()},
                  {"top_k", a.top_k},
                  {"apt_top_k", top},
                  {"groups", a.groups},
                  {"masked_only", a.masked_only}};
  if (!a.clusters.empty()) {
    ctx.param("bins", a.bins);
    const auto clusters = read_clusters(ctx.input(a.clusters), vocab.t_number());
    const auto split = apt_by_cluster(apt, clusters, a.bins);
    write_plot(ctx.output("apt_unity_hist.tsv"), "apt", "tokens", histogram_points(split.unity_hist));
    write_plot(ctx.output("apt_multi_hist.tsv"), "apt", "tokens", histogram_points(split.multi_hist));
    summary["unity_mean_apt"] = optional_number(split.unity_mean);
    summary["multi_mean_apt"] = optional_number(split.multi_mean);
    summary["unity_tokens"] = split.unity_tokens;
    summary["multi_tokens"] = split.multi_tokens;
  }
  write_json(ctx.output("apt_summary.json"), summary);
  ctx.finish();
}

// ---------------------------------------------------------------------------

struct ConfuseArgs {
  CommonOptions common;
  std::string events, vocab;
  std::size_t t_number = 0;
};

void run_confuse(const ConfuseArgs& a) {
  RunContext ctx("confuse", a.common);
  std::size_t t_number = a.t_number;
  if (!a.vocab.empty()) {
    const auto vocab = read_vocab(ctx.input(a.vocab));
    if (t_number != 0 && t_number != vocab.t_number())
      fail(ErrorKind::Mismatch, "--t-number disagrees with the vocab size");
    t_number = vocab.t_number();
  }
  if (t_number == 0) fail(ErrorKind::InvalidArgument, "confuse needs --vocab or --t-number");
  ctx.param("t_number", t_number);

  ConfusionBuilder builder(t_number);
  for_each_event(ctx.input(a.events), t_number, [&](const MaskEvent& e) { builder.add(e); });
  const auto m = std::move(builder).build();
  write_confusion(ctx.output("confusion.tsv"), m);
  ctx.finish();
}

// ---------------------------------------------------------------------------

struct TopkArgs {
  CommonOptions common;
  std::string confusion, vocab;
  std::size_t k = 20;
  Count min_count = 0;
};

void run_topk(const TopkArgs& a) {
  RunContext ctx("topk", a.common);
  ctx.param("k", a.k);
  ctx.param("min_count", a.min_count);
  const auto vocab = maybe_vocab(ctx, a.vocab);
  const auto m = read_confusion(ctx.input(a.confusion), vocab ? std::optional(vocab->t_number()) : std::nullopt);
  const auto n = normalize_confusion(m);
  const auto table = top_k(n, a.k, &m, {a.min_count});

  const Vocab* v = vocab ? &*vocab : nullptr;
  std::vector<std::string> header{"token", "text"};
  for (std::size_t i = 1; i <= a.k; ++i) header.push_back("top" + std::to_string(i));
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : table) {
    std::vector<std::string> cells{std::to_string(row.token), label(v, row.token)};
    for (const auto& p : row.partners) cells.push_back(label(v, p.token) + " (" + fixed(p.value, 3) + ")");
    rows.push_back(std::move(cells));
  }
  write_table(ctx.output("topk.tsv"), header, rows);
  ctx.finish();
}

// ---------------------------------------------------------------------------

struct ClustersArgs {
  CommonOptions common;
  std::string confusion, adjacency, vocab;
  double th = 0.05;
  std::size_t bins = 100;
};

void run_clusters(const ClustersArgs& a) {
  if (a.confusion.empty() == a.adjacency.empty())
    fail(ErrorKind::InvalidArgument, "clusters needs exactly one of --confusion and --adjacency");
  RunContext ctx("clusters", a.common);
  const auto vocab = maybe_vocab(ctx, a.vocab);
  const Vocab* v = vocab ? &*vocab : nullptr;
  const std::optional<std::size_t> t_number = vocab ? std::optional(vocab->t_number()) : std::nullopt;

  json summary;
  ClusterSet clusters;
  if (!a.confusion.empty()) {
    ctx.param("th", a.th);
    ctx.param("bins", a.bins);
    const auto m = read_confusion(ctx.input(a.confusion), t_number);
    const auto cc = confusion_clusters(m, {a.th});
    clusters = cc.clusters;
    write_adjacency(ctx.output("adjacency.tsv"), cc.adjacency, cc.normalized.retained_rows());
    write_plot(ctx.output("offdiag_hist.tsv"), "normalized_value", "cells",
               histogram_points(offdiag_histogram(cc.normalized, a.bins)));
    summary = cluster_summary(clusters);
    summary["t_number"] = m.t_number();
    summary["th"] = a.th;
    summary["excluded_rows"] = cc.normalized.excluded_rows().size();
    summary["mutual_edges"] = cc.adjacency.edge_count();
  } else {
    const auto adj = read_adjacency(ctx.input(a.adjacency), t_number);
    clusters = percolate(adj.adjacency, adj.participants);
    summary = cluster_summary(clusters);
    summary["t_number"] = adj.adjacency.t_number();
    summary["mutual_edges"] = adj.adjacency.edge_count();
  }
  write_clusters(ctx.output("clusters.tsv"), clusters, v);
  write_size_table(ctx.output("cluster_sizes.tsv"), clusters);
  write_json(ctx.output("clusters_summary.json"), summary);
  ctx.finish();
}

// ---------------------------------------------------------------------------

struct CossimArgs {
  CommonOptions common;
  std::string embedding, vocab, mode = "hist";
  std::size_t q = 3, k = 20, bins = 200, csls_n = 0;
  int abtt_r = -1;
};

void run_cossim(const CossimArgs& a) {
  RunContext ctx("cossim", a.common, a.mode);
  ctx.param("mode", a.mode);
  ctx.param("abtt_r", a.abtt_r);
  ctx.param("csls_n", a.csls_n);
  const auto vocab = maybe_vocab(ctx, a.vocab);
  const Vocab* v = vocab ? &*vocab : nullptr;
  auto emb = read_embedding(ctx.input(a.embedding));
  if (vocab && vocab->t_number() != emb.t_number()) fail(ErrorKind::Mismatch, "embedding rows differ from vocab size");
  if (a.abtt_r >= 0) emb = abtt(emb, {static_cast<std::size_t>(a.abtt_r)});

  SimilarityOptions opts;
  opts.threads = ctx.threads();
  if (a.csls_n > 0) opts.csls = CslsConfig{a.csls_n};

  json summary = {{"t_number", emb.t_number()}, {"e_length", emb.e_length()}};
  if (a.mode == "hist") {
    ctx.param("bins", a.bins);
    const auto h = similarity_histogram(emb, a.bins, ctx.threads());
    write_plot(ctx.output("similarity_hist.tsv"), "cosine", "pairs", histogram_points(h.hist));
    summary["offdiag_pairs"] = h.offdiag_pairs;
    summary["offdiag_mean"] = h.offdiag_mean;
    summary["offdiag_std"] = h.offdiag_std;
    write_json(ctx.output("similarity_summary.json"), summary);
  } else if (a.mode == "topq") {
    ctx.param("q", a.q);
    const auto b = top_q_binarize(emb, a.q, opts);
    const auto adj = adjacency(b);
    std::vector<TokenId> all(emb.t_number());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<TokenId>(i);
    const auto clusters = percolate(adj, all);
    write_clusters(ctx.output("cossim_clusters.tsv"), clusters, v);
    write_size_table(ctx.output("cossim_sizes.tsv"), clusters);
    summary.update(cluster_summary(clusters));
    summary["q"] = a.q;
    summary["mutual_edges"] = adj.edge_count();
    write_json(ctx.output("cossim_summary.json"), summary);
  } else {
    ctx.param("k", a.k);
    const auto top = similarity_top(emb, a.k, opts);
    std::vector<std::string> header{"token", "text"};
    for (std::size_t i = 1; i <= a.k; ++i) header.push_back("top" + std::to_string(i));
    std::vector<std::vector<std::string>> rows;
    for (std::size_t t = 0; t < top.size(); ++t) {
      std::vector<std::string> cells{std::to_string(t), label(v, static_cast<TokenId>(t))};
      for (const auto& nb : top[t]) cells.push_back(label(v, nb.token) + " (" + fixed(nb.score, 4) + ")");
      rows.push_back(std::move(cells));
    }
    write_table(ctx.output("similarity_topk.tsv"), header, rows);
  }
  ctx.finish();
}

// ---------------------------------------------------------------------------

struct ConfidenceArgs {
  CommonOptions common;
  std::string inputs, apt, vocab, axis = "apt";
  std::size_t bins = 20;
};

void run_confidence(const ConfidenceArgs& a) {
  RunContext ctx("confidence", a.common, a.axis);
  ctx.param("axis", a.axis);
  ctx.param("bins", a.bins);
  const auto vocab = read_vocab(ctx.input(a.vocab));
  const auto apt = read_apt_table(ctx.input(a.apt), vocab.t_number());
  const auto inputs = read_classified(ctx.input(a.inputs), vocab.t_number());
  const auto axis = a.axis == "apt" ? ConfidenceAxis::AptAve : ConfidenceAxis::FreqAve;
  const auto result = confidence_bins(inputs, apt, vocab, axis, {a.bins});

  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<double, double>> pts;
  for (const auto& b : result.bins) {
    const auto c = b.confidence();
    rows.push_back({format_double(b.lower), format_double(b.upper), std::to_string(b.n_correct),
                    std::to_string(b.n_incorrect), c ? format_double(*c) : "-"});
    if (c) {
      const double x = result.logarithmic ? std::sqrt(b.lower * b.upper) : 0.5 * (b.lower + b.upper);
      pts.emplace_back(x, *c);
    }
  }
  const std::string stem = "confidence_" + a.axis;
  write_table(ctx.output(stem + ".tsv"), {"lower", "upper", "n_correct", "n_incorrect", "confidence"}, rows);
  write_plot(ctx.output(stem + "_plot.tsv"), std::string(to_string(axis)), "confidence", pts);
  write_json(ctx.output(stem + "_summary.json"), {{"axis", to_string(axis)},
                                                  {"logarithmic", result.logarithmic},
                                                  {"inputs", inputs.size()},
                                                  {"binned", result.binned()},
                                                  {"skipped", result.skipped},
                                                  {"overall", optional_number(result.overall())}});
  ctx.finish();
}

// ---------------------------------------------------------------------------

struct SnpArgs {
  CommonOptions common;
  std::string fields, accuracy;
  double threshold = 0.6;
  std::size_t labels = 0;
};

void run_snp(const SnpArgs& a) {
  RunContext ctx("snp", a.common);
  ctx.param("threshold", a.threshold);
  if (!(a.threshold > 0.0 && a.threshold < 1.0)) fail(ErrorKind::InvalidArgument, "--threshold must lie in (0, 1)");
  const auto units = read_fields(ctx.input(a.fields), a.labels ? std::optional(a.labels) : std::nullopt);
  if (units.empty()) fail(ErrorKind::EmptyInput, "field container holds no units");
  const std::size_t n_labels = units.front().n_labels;
  ctx.param("labels", n_labels);

  std::vector<SnpStats> stats(units.size());
  parallel_for(units.size(), ctx.threads(), [&](std::size_t k) { stats[k] = analyze_unit(units[k], a.threshold); });
  const auto agg = aggregate(stats, n_labels);

  std::vector<std::vector<std::string>> rows;
  bool any_head = false;
  for (std::size_t k = 0; k < units.size(); ++k) {
    const auto& s = stats[k];
    any_head = any_head || units[k].unit == ProbeUnit::Head;
    rows.push_back({std::string(to_string(units[k].unit)), std::to_string(s.unit_index), std::to_string(s.diag),
                    std::to_string(s.n_c), format_double(s.c_s), std::to_string(s.noise)});
  }
  write_table(ctx.output("snp_units.tsv"), {"unit", "index", "diag", "n_c", "c_s", "noise"}, rows);

  write_table(ctx.output("snp_table.tsv"), {"Diag", "N_C", "C_S", "n", "SNR"},
              {{fixed(agg.mean_diag, 2), fixed(agg.mean_n_c, 2), fixed(agg.mean_c_s, 2), fixed(agg.mean_noise, 1),
                fixed(agg.snr, 2)}});

  if (any_head) {
    std::vector<std::vector<std::string>> head_rows;
    for (std::size_t k = 0; k < units.size(); ++k) {
      if (units[k].unit != ProbeUnit::Head) continue;
      const auto& s = stats[k];
      head_rows.push_back({std::to_string(s.unit_index + 1), std::to_string(s.diag), std::to_string(s.n_c),
                           fixed(s.c_s, 2), std::to_string(s.noise)});
    }
    head_rows.push_back({"Ave", fixed(agg.mean_diag, 1), fixed(agg.mean_n_c, 1), fixed(agg.mean_c_s, 2),
                         fixed(agg.mean_noise, 2)});
    write_table(ctx.output("snp_heads.tsv"), {"Head", "Diag", "N_C", "C_S", "n"}, head_rows);
  }

  std::optional<std::vector<double>> accuracy;
  if (!a.accuracy.empty()) accuracy = read_label_accuracy(ctx.input(a.accuracy));
  const auto app = label_appearance(stats, n_labels,
                                    accuracy ? std::optional<std::span<const double>>(*accuracy) : std::nullopt);
  std::vector<std::pair<double, double>> hist;
  for (std::size_t l = 0; l < n_labels; ++l) hist.emplace_back(static_cast<double>(l), static_cast<double>(app.appearances[l]));
  write_plot(ctx.output("appearance.tsv"), "label", "appearances", hist);

  json summary = {{"units", agg.units},
                  {"n_labels", n_labels},
                  {"threshold", a.threshold},
                  {"mean_diag", agg.mean_diag},
                  {"mean_n_c", agg.mean_n_c},
                  {"mean_c_s", agg.mean_c_s},
                  {"mean_noise", agg.mean_noise},
                  {"snr", agg.snr_infinite() ? json("inf") : json(agg.snr)}};
  if (accuracy) {
    std::vector<std::pair<double, double>> scatter;
    for (std::size_t l = 0; l < n_labels; ++l)
      scatter.emplace_back(static_cast<double>(app.appearances[l]), (*app.accuracy)[l]);
    write_plot(ctx.output("appearance_accuracy.tsv"), "appearances", "accuracy", scatter);
    summary["pearson_r"] = optional_number(app.pearson_r);
  }
  write_json(ctx.output("snp_summary.json"), summary);
  ctx.finish();
}

}  // namespace

void register_analysis(CLI::App& app, Registry& reg) {
  {
    auto a = std::make_shared<AptArgs>();
    auto* sub = app.add_subcommand("apt", "Per-token accuracy (APT) from mask events");
    sub->add_option("--events", a->events, "Mask-event file")->required();
    sub->add_option("--vocab", a->vocab, "Vocab TSV")->required();
    sub->add_option("--groups", a->groups, "Popularity groups")->capture_default_str();
    sub->add_option("--top-k", a->top_k, "Tokens averaged for APT(k)")->capture_default_str();
    sub->add_flag("--masked-only", a->masked_only, "Count MASKED selections only");
    sub->add_option("--clusters", a->clusters, "Cluster file; splits APT by unity vs larger clusters");
    sub->add_option("--bins", a->bins, "Histogram bins for the cluster split")->capture_default_str();
    add_common(sub, a->common);
    reg.push_back({sub, [a] { run_apt(*a); }});
  }
  {
    auto a = std::make_shared<ConfuseArgs>();
    auto* sub = app.add_subcommand("confuse", "Confusion counts from mask events");
    sub->add_option("--events", a->events, "Mask-event file")->required();
    sub->add_option("--vocab", a->vocab, "Vocab TSV (fixes t_number)");
    sub->add_option("--t-number", a->t_number, "Token count when no vocab is given");
    add_common(sub, a->common);
    reg.push_back({sub, [a] { run_confuse(*a); }});
  }
  {
    auto a = std::make_shared<TopkArgs>();
    auto* sub = app.add_subcommand("topk", "Top-K confusion partners per token");
    sub->add_option("--confusion", a->confusion, "Confusion file")->required();
    sub->add_option("--vocab", a->vocab, "Vocab TSV for token texts");
    sub->add_option("--k", a->k, "Partners per token")->capture_default_str();
    sub->add_option("--min-count", a->min_count, "Skip rows with fewer events")->capture_default_str();
    add_common(sub, a->common);
    reg.push_back({sub, [a] { run_topk(*a); }});
  }
  {
    auto a = std::make_shared<ClustersArgs>();
    auto* sub = app.add_subcommand("clusters", "Percolation clusters from confusion counts or an adjacency file");
    sub->add_option("--confusion", a->confusion, "Confusion file (runs normalize, threshold, mutual edges)");
    sub->add_option("--adjacency", a->adjacency, "Adjacency file");
    sub->add_option("--vocab", a->vocab, "Vocab TSV for token texts");
    sub->add_option("--th", a->th, "Normalized-value threshold")->capture_default_str();
    sub->add_option("--bins", a->bins, "Off-diagonal histogram bins")->capture_default_str();
    add_common(sub, a->common);
    reg.push_back({sub, [a] { run_clusters(*a); }});
  }
  {
    auto a = std::make_shared<CossimArgs>();
    auto* sub = app.add_subcommand("cossim", "Embedding cosine similarity: histogram, top-q clusters, top-k tables");
    sub->add_option("--embedding", a->embedding, "Embedding file")->required();
    sub->add_option("--vocab", a->vocab, "Vocab TSV for token texts");
    sub->add_option("--mode", a->mode, "hist, topq or topk")
        ->check(CLI::IsMember({"hist", "topq", "topk"}))
        ->capture_default_str();
    sub->add_option("--q", a->q, "Neighbours kept per row for clustering")->capture_default_str();
    sub->add_option("--k", a->k, "Neighbours listed per token")->capture_default_str();
    sub->add_option("--abtt-r", a->abtt_r, "Remove the mean and top r directions first (-1: off)")
        ->capture_default_str();
    sub->add_option("--csls-n", a->csls_n, "CSLS neighbourhood size (0: off)")->capture_default_str();
    sub->add_option("--bins", a->bins, "Histogram bins on [-1, 1]")->capture_default_str();
    add_common(sub, a->common);
    reg.push_back({sub, [a] { run_cossim(*a); }});
  }
  {
    auto a = std::make_shared<ConfidenceArgs>();
    auto* sub = app.add_subcommand("confidence", "Classification confidence binned by APT_AVE or FREQ_AVE");
    sub->add_option("--inputs", a->inputs, "Classified-input file")->required();
    sub->add_option("--apt", a->apt, "APT table written by `apt`")->required();
    sub->add_option("--vocab", a->vocab, "Vocab TSV")->required();
    sub->add_option("--axis", a->axis, "apt or freq")->check(CLI::IsMember({"apt", "freq"}))->capture_default_str();
    sub->add_option("--bins", a->bins, "Bins")->capture_default_str();
    add_common(sub, a->common);
    reg.push_back({sub, [a] { run_confidence(*a); }});
  }
  {
    auto a = std::make_shared<SnpArgs>();
    auto* sub = app.add_subcommand("snp", "SNP/SHP diagonal-cluster statistics from label field matrices");
    sub->add_option("--fields", a->fields, "Field container")->required();
    sub->add_option("--threshold", a->threshold, "Clip threshold after max-normalization")->capture_default_str();
    sub->add_option("--labels", a->labels, "Expected label count (checked against the file)");
    sub->add_option("--accuracy", a->accuracy, "Per-label accuracy file for the appearance correlation");
    add_common(sub, a->common);
    reg.push_back({sub, [a] { run_snp(*a); }});
  }
}

}  // namespace tplb::cli
