#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "tplb/error.hpp"
#include "tplb/io.hpp"

namespace tplb::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

inline std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    fail(ErrorKind::Invariant, "sha256 initialisation failed");
  }
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

/// UTC ISO-8601; SOURCE_DATE_EPOCH pins it for reproducible manifests.
inline std::string manifest_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (*end != '\0' || v < 0) fail(ErrorKind::InvalidArgument, "SOURCE_DATE_EPOCH must be a non-negative integer");
    t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::size_t default_threads() {
  if (const char* env = std::getenv("TPLB_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

/// Runs fn(k) for k in [0, n); item k goes to worker k % threads. Results
/// must be written by index so the outcome is independent of `threads`.
inline void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < n; k += threads) fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Flags shared by every subcommand.
struct CommonOptions {
  std::string out = ".";
  std::size_t threads = default_threads();
};

/// Collects what a subcommand read, wrote and was told; finish() writes
/// <subcommand>.manifest.json (or <subcommand>.<variant>.manifest.json for
/// subcommands whose modes may share one directory) next to the outputs.
class RunContext {
 public:
  RunContext(std::string subcommand, const CommonOptions& common, std::string variant = {})
      : subcommand_(std::move(subcommand)),
        variant_(std::move(variant)),
        out_dir_(common.out),
        threads_(common.threads) {
    if (threads_ == 0) fail(ErrorKind::InvalidArgument, "--threads must be positive");
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory " + out_dir_.string() + ": " + ec.message());
  }

  std::size_t threads() const noexcept { return threads_; }
  const fs::path& out_dir() const noexcept { return out_dir_; }

  template <class T>
  void param(const std::string& key, const T& value) {
    if constexpr (std::is_same_v<T, bool>)
      params_[key] = value ? "true" : "false";
    else if constexpr (std::is_floating_point_v<T>)
      params_[key] = format_double(static_cast<double>(value));
    else if constexpr (std::is_arithmetic_v<T>)
      params_[key] = std::to_string(value);
    else
      params_[key] = std::string(value);
  }

  /// Registers an input file and returns its path unchanged. `recorded`
  /// replaces the path in the manifest when given.
  fs::path input(const std::string& path, const std::string& recorded = {}) {
    if (!fs::is_regular_file(path)) fail(ErrorKind::Io, "input file not found: " + path);
    inputs_.push_back({recorded.empty() ? path : recorded, sha256_file(path)});
    return path;
  }

  /// Path of a new output file; recorded for the manifest.
  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return out_dir_ / name;
  }

  void finish() {
    json m;
    m["subcommand"] = subcommand_;
    if (!variant_.empty()) m["variant"] = variant_;
    m["tool_version"] = kToolVersion;
    m["timestamp"] = manifest_timestamp();
    m["parameters"] = params_;
    m["inputs"] = json::array();
    for (const auto& [path, digest] : inputs_) m["inputs"].push_back({{"path", path}, {"sha256", digest}});
    m["outputs"] = json::array();
    for (const auto& name : outputs_) m["outputs"].push_back({{"file", name}, {"sha256", sha256_file(out_dir_ / name)}});
    const std::string stem = variant_.empty() ? subcommand_ : subcommand_ + "." + variant_;
    io_detail::write_file(out_dir_ / (stem + ".manifest.json"), m.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  std::string variant_;
  fs::path out_dir_;
  std::size_t threads_;
  std::map<std::string, std::string> params_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
};

inline void write_json(const fs::path& path, const json& j) { io_detail::write_file(path, j.dump(2) + "\n"); }

/// Two-column plot data: a "# x<TAB>y" caption line naming the axes, then rows.
inline void write_plot(const fs::path& path, const std::string& x_name, const std::string& y_name,
                       const std::vector<std::pair<double, double>>& points) {
  std::string buf = "# " + x_name + "\t" + y_name + "\n";
  for (const auto& [x, y] : points) buf += format_double(x) + "\t" + format_double(y) + "\n";
  io_detail::write_file(path, buf);
}

/// Plain tab-separated table with one header row.
inline void write_table(const fs::path& path, const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
  auto join = [](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += '\t';
      line += cells[i];
    }
    return line + "\n";
  };
  std::string buf = join(header);
  for (const auto& r : rows) buf += join(r);
  io_detail::write_file(path, buf);
}

/// printf-style fixed formatting for published-style tables.
inline std::string fixed(double v, int decimals) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::vector<std::pair<double, double>> histogram_points(const Histogram& h) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < h.bins(); ++k)
    pts.emplace_back(h.center(k), static_cast<double>(h.count(k)));
  return pts;
}

}  // namespace tplb::cli
