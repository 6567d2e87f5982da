#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "commands.hpp"

namespace tplb::cli {
namespace {

struct ReportArgs {
  CommonOptions common;
  std::string dir;
};

constexpr std::uintmax_t kEmbedLimit = 4u << 20;  // larger tables are listed by digest only

int section_rank(const std::string& subcommand) {
  static const std::vector<std::string> order{"synth", "apt", "confuse", "topk", "clusters", "cossim", "confidence", "snp"};
  const auto it = std::find(order.begin(), order.end(), subcommand);
  return static_cast<int>(it - order.begin());
}

bool is_text(const fs::path& p) {
  const auto ext = p.extension().string();
  return ext == ".tsv" || ext == ".csv" || ext == ".json";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Manifest {
  std::string file;
  json body;
};

void run_report(const ReportArgs& a) {
  const fs::path dir = a.dir;
  if (!fs::is_directory(dir)) fail(ErrorKind::MissingInputs, "run directory not found: " + a.dir);
  CommonOptions common = a.common;
  if (common.out.empty()) common.out = a.dir;

  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path().filename().string());
  std::sort(files.begin(), files.end());

  auto is_own = [](const std::string& f) { return f == "report.md" || f == "report.manifest.json"; };
  std::vector<Manifest> manifests;
  for (const auto& f : files) {
    if (is_own(f) || f.size() <= 14 || f.compare(f.size() - 14, 14, ".manifest.json") != 0) continue;
    json body;
    try {
      body = json::parse(slurp(dir / f));
    } catch (const json::exception& e) {
      fail(ErrorKind::MalformedRecord, f + ": " + e.what());
    }
    if (!body.contains("subcommand") || !body.contains("outputs") || !body.contains("parameters"))
      fail(ErrorKind::MalformedRecord, f + ": not a run manifest");
    manifests.push_back({f, std::move(body)});
  }
  if (manifests.empty()) fail(ErrorKind::MissingInputs, "no run manifests in " + a.dir);

  std::set<std::string> claimed;
  for (const auto& m : manifests)
    for (const auto& out : m.body["outputs"]) {
      const std::string name = out.at("file");
      const fs::path p = dir / name;
      if (!fs::is_regular_file(p)) fail(ErrorKind::MissingInputs, m.file + " lists " + name + ", which is missing");
      if (sha256_file(p) != out.at("sha256").get<std::string>())
        fail(ErrorKind::Mismatch, name + " does not match the digest in " + m.file);
      claimed.insert(name);
    }
  for (const auto& f : files) {
    if (is_own(f) || f.ends_with(".manifest.json")) continue;
    if (!claimed.count(f)) fail(ErrorKind::MissingManifest, f + " is not covered by any manifest");
  }

  std::stable_sort(manifests.begin(), manifests.end(), [](const Manifest& x, const Manifest& y) {
    return section_rank(x.body["subcommand"]) < section_rank(y.body["subcommand"]);
  });

  RunContext ctx("report", common);
  std::string doc = "# Run report\n";
  for (const auto& m : manifests) {
    ctx.input((dir / m.file).string(), m.file);
    std::string title = m.body["subcommand"];
    if (m.body.contains("variant")) title += " (" + m.body["variant"].get<std::string>() + ")";
    doc += "\n## " + title + "\n\nManifest: `" + m.file + "`, tool version " + m.body.value("tool_version", "?") +
           ", " + m.body.value("timestamp", "?") + "\n\n| parameter | value |\n|---|---|\n";
    for (const auto& [k, v] : m.body["parameters"].items()) doc += "| " + k + " | " + v.get<std::string>() + " |\n";
    if (!m.body["inputs"].empty()) {
      doc += "\nInputs:\n\n";
      for (const auto& in : m.body["inputs"])
        doc += "- `" + in.at("path").get<std::string>() + "` sha256 " + in.at("sha256").get<std::string>() + "\n";
    }
    for (const auto& out : m.body["outputs"]) {
      const std::string name = out.at("file");
      const fs::path p = dir / name;
      doc += "\n### " + name + "\n\n";
      if (is_text(p) && fs::file_size(p) <= kEmbedLimit) {
        std::string body = slurp(p);
        if (!body.empty() && body.back() != '\n') body += '\n';
        doc += "```\n" + body + "```\n";
      } else {
        doc += std::to_string(fs::file_size(p)) + " bytes, sha256 " + out.at("sha256").get<std::string>() + "\n";
      }
    }
  }
  io_detail::write_file(ctx.output("report.md"), doc);
  ctx.finish();
}

}  // namespace

void register_report(CLI::App& app, Registry& reg) {
  auto a = std::make_shared<ReportArgs>();
  auto* sub = app.add_subcommand("report", "Stitch manifested outputs of a run directory into report.md");
  sub->add_option("--dir", a->dir, "Run directory")->required();
  a->common.out.clear();
  sub->add_option("--out", a->common.out, "Output directory (default: the run directory)");
  sub->add_option("--threads", a->common.threads, "Accepted for symmetry; report is single-threaded");
  reg.push_back({sub, [a] { run_report(*a); }});
}

}  // namespace tplb::cli
