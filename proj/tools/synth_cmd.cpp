#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "tplb/tplb.hpp"

namespace tplb::cli {
namespace {

struct SynthArgs {
  CommonOptions common;
  std::string kind, spec, format = "binary";
  std::optional<std::uint64_t> seed;
};

void reject_unused(const KeyValues& kv) {
  const auto extra = kv.unused();
  if (extra.empty()) return;
  std::string list;
  for (const auto& k : extra) list += (list.empty() ? "" : ", ") + k;
  fail(ErrorKind::InvalidArgument, "unknown spec keys: " + list);
}

json planted_json(const PlantedSpec& spec) {
  json sizes = json::object();
  for (const auto& sc : size_distribution(spec.partition())) sizes[std::to_string(sc.size)] = sc.count;
  return {{"seed", spec.seed},
          {"t_number", spec.t_number},
          {"p_within", spec.p_within},
          {"mask_split", spec.mask_split},
          {"positions_per_input", spec.positions_per_input},
          {"planted", spec.planted},
          {"partition_sizes", sizes},
          {"p_correct", spec.p_correct}};
}

void synth_events(RunContext& ctx, const KeyValues& kv, const std::string& format) {
  const auto spec = make_planted_spec(kv);
  const auto n_events = kv.get_int("n_events", 100000);
  reject_unused(kv);
  ctx.param("format", format);
  write_vocab(ctx.output("events.vocab.tsv"), synthetic_vocab(spec.frequency));
  const bool binary = format == "binary";
  EventWriter w(ctx.output(binary ? "events.bin" : "events.csv"), binary ? EventFormat::Binary : EventFormat::Text);
  generate_events(spec, n_events, [&](const MaskEvent& e) { w.add(e); });
  w.close();
  auto truth = planted_json(spec);
  truth["n_events"] = n_events;
  write_json(ctx.output("events.truth.json"), truth);
}

void synth_embedding(RunContext& ctx, const KeyValues& kv) {
  const auto spec = make_planted_spec(kv);
  EmbeddingSpec es;
  const auto e_length = kv.get_int("e_length", 768);
  if (e_length <= 0) fail(ErrorKind::InvalidArgument, "e_length must be positive");
  es.e_length = static_cast<std::size_t>(e_length);
  es.within_cos = kv.get_double("within_cos", es.within_cos);
  es.between_max = kv.get_double("between_max", es.between_max);
  reject_unused(kv);
  const auto syn = gen_embedding(spec, es);
  write_vocab(ctx.output("embedding.vocab.tsv"), synthetic_vocab(spec.frequency));
  write_embedding(ctx.output("embedding.bin"), syn.matrix);
  auto truth = planted_json(spec);
  truth.erase("p_correct");
  truth["e_length"] = es.e_length;
  truth["within_cos"] = es.within_cos;
  truth["between_max"] = es.between_max;
  truth["min_within"] = syn.min_within;
  truth["between_verified"] = syn.between_verified;
  if (syn.between_verified) truth["max_between"] = syn.max_between;
  write_json(ctx.output("embedding.truth.json"), truth);
}

void synth_fields(RunContext& ctx, const KeyValues& kv) {
  const auto fs = make_field_spec(kv);
  reject_unused(kv);
  const auto syn = gen_fields(fs);
  write_fields(ctx.output("fields.bin"), syn.units);
  json units = json::array();
  std::vector<double> diag, noise;
  for (std::size_t u = 0; u < syn.truth.size(); ++u) {
    const auto& t = syn.truth[u];
    units.push_back({{"unit_index", u}, {"blocks", t.blocks}, {"diag", t.diag}, {"noise", t.noise}});
    diag.push_back(static_cast<double>(t.diag));
    noise.push_back(static_cast<double>(t.noise));
  }
  const double mean_diag = *exact_mean(diag), mean_noise = *exact_mean(noise);
  const double snr = compute_snr(fs.n_labels, mean_diag, mean_noise);
  write_json(ctx.output("fields.truth.json"), {{"seed", fs.seed},
                                              {"n_units", fs.n_units},
                                              {"n_labels", fs.n_labels},
                                              {"unit", to_string(fs.unit)},
                                              {"noise_rate", fs.noise_rate},
                                              {"planted_mean_diag", mean_diag},
                                              {"planted_mean_noise", mean_noise},
                                              {"planted_snr", std::isinf(snr) ? json("inf") : json(snr)},
                                              {"units", units}});
}

void synth_inputs(RunContext& ctx, const KeyValues& kv) {
  const auto spec = make_planted_spec(kv);
  const auto is = make_input_spec(kv);
  reject_unused(kv);
  const auto inputs = gen_inputs(spec, is);
  write_vocab(ctx.output("inputs.vocab.tsv"), synthetic_vocab(spec.frequency));
  write_classified(ctx.output("inputs.csv"), inputs);
  std::size_t correct = 0;
  for (const auto& in : inputs) correct += in.correct() ? 1 : 0;
  write_json(ctx.output("inputs.truth.json"), {{"seed", is.seed},
                                              {"t_number", spec.t_number},
                                              {"n_inputs", is.n_inputs},
                                              {"input_length", is.input_length},
                                              {"n_labels", is.n_labels},
                                              {"accuracy", is.accuracy},
                                              {"n_correct", correct}});
}

void run_synth(const SynthArgs& a) {
  KeyValues kv;
  RunContext ctx("synth", a.common, a.kind);
  if (!a.spec.empty()) {
    std::ifstream in(ctx.input(a.spec));
    kv = KeyValues::parse(in);
  }
  if (a.seed) kv.set("seed", std::to_string(*a.seed));
  ctx.param("kind", a.kind);
  for (const auto& [k, v] : kv.values()) ctx.param("spec." + k, v);

  if (a.kind == "events")
    synth_events(ctx, kv, a.format);
  else if (a.kind == "embedding")
    synth_embedding(ctx, kv);
  else if (a.kind == "fields")
    synth_fields(ctx, kv);
  else
    synth_inputs(ctx, kv);
  ctx.finish();
}

}  // namespace

void register_synth(CLI::App& app, Registry& reg) {
  auto a = std::make_shared<SynthArgs>();
  auto* sub = app.add_subcommand("synth", "Generate synthetic data with planted ground truth");
  sub->add_option("--kind", a->kind, "events, embedding, fields or inputs")
      ->required()
      ->check(CLI::IsMember({"events", "embedding", "fields", "inputs"}));
  sub->add_option("--spec", a->spec, "key=value generator settings");
  sub->add_option("--seed", a->seed, "Overrides the spec's seed");
  sub->add_option("--format", a->format, "Event file format: binary or text")
      ->check(CLI::IsMember({"binary", "text"}))
      ->capture_default_str();
  add_common(sub, a->common);
  reg.push_back({sub, [a] { run_synth(*a); }});
}

}  // namespace tplb::cli
