#include <algorithm>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "tplb/synth.hpp"

namespace {

using tplb::cli::json;

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitInternal = 70;

int report_error(std::string_view kind, std::string_view message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit", code}}.dump() << std::endl;
  return code;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Splices `--config FILE` settings into the argument list. Keys name the
/// subcommand's long flags (underscores allowed for dashes); flags given on
/// the command line win.
std::vector<std::string> apply_config(const CLI::App& app, std::vector<std::string> args) {
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file argument");
      config = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config.empty()) return args;

  std::ifstream in(config);
  if (!in) tplb::fail(tplb::ErrorKind::Io, "cannot open config file " + config);
  const auto kv = tplb::KeyValues::parse(in);
  const auto sub_name = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind("-", 0) != 0; });
  if (sub_name == args.end()) throw UsageError("--config given without a subcommand");
  const CLI::App* sub = app.get_subcommand(*sub_name);

  for (const auto& [key, value] : kv.values()) {
    std::string flag = "--" + key;
    std::replace(flag.begin() + 2, flag.end(), '_', '-');
    const bool given = std::any_of(args.begin(), args.end(),
                                   [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    if (given) continue;
    const CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr) throw UsageError("config key '" + key + "' is not a flag of " + *sub_name);
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1" || value == "yes") args.push_back(flag);
    } else {
      args.push_back(flag);
      args.push_back(value);
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Token-level pre-training and fine-tuning analytics"};
  app.name("tplb");
  app.require_subcommand(1);
  tplb::cli::Registry registry;
  tplb::cli::register_synth(app, registry);
  tplb::cli::register_analysis(app, registry);
  tplb::cli::register_report(app, registry);
  app.footer("Every subcommand also accepts --config FILE with key=value lines naming its flags.");

  if (argc < 2) {
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    auto args = apply_config(app, std::vector<std::string>(argv + 1, argv + argc));
    std::vector<char*> cargs{argv[0]};
    for (auto& a : args) cargs.push_back(a.data());
    app.parse(static_cast<int>(cargs.size()), cargs.data());
    for (const auto& cmd : registry)
      if (cmd.app->parsed()) cmd.run();
    return 0;
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::Error& e) {
    return report_error("usage", e.what(), kExitUsage);
  } catch (const UsageError& e) {
    return report_error("usage", e.what(), kExitUsage);
  } catch (const tplb::Error& e) {
    const int code = e.kind() == tplb::ErrorKind::Invariant ? kExitInternal : kExitValidation;
    return report_error(tplb::to_string(e.kind()), e.what(), code);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitInternal);
  }
}
