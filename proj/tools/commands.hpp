#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <CLI11.hpp>

#include "run_context.hpp"

namespace tplb::cli {

/// A subcommand and the action to run once its flags are parsed.
struct Command {
  CLI::App* app = nullptr;
  std::function<void()> run;
};

using Registry = std::vector<Command>;

inline void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--out", c.out, "Output directory")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads (default: $TPLB_THREADS or 1)")->capture_default_str();
}

void register_analysis(CLI::App& app, Registry& reg);
void register_synth(CLI::App& app, Registry& reg);
void register_report(CLI::App& app, Registry& reg);

}  // namespace tplb::cli
