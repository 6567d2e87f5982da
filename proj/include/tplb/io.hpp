#pragma once

#include <array>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tplb/apt.hpp"
#include "tplb/core_types.hpp"

// File formats
//
// Text files may start with a header line  #TPLB<TAB>1<TAB>KIND[<TAB>key=value]...
// Other lines starting with '#' are comments; blank lines are ignored.
//
// Binary files start with the 4 bytes "TPLB", then u32 version (1) and u32
// kind; all integers and floats are little-endian.
//   EVENTS     u64 count, count x (u32 input, u32 position, u32 kind, u32 true, u32 pred)
//   EMBEDDING  u32 rows, u32 cols, rows*cols f32 (row-major)
//   FIELDS     u32 count, count x (u32 unit, u32 unit_index, u32 n_labels, n_labels^2 f32)

namespace tplb {

enum class FileKind : std::uint32_t {
  Events = 1,
  Confusion = 2,
  Embedding = 3,
  Fields = 4,
  Labels = 5,
  Clusters = 6,
  Report = 7,
  Adjacency = 8,
  Vocab = 9,
  Apt = 10,
  Inputs = 11,
};

constexpr std::string_view to_string(FileKind k) noexcept {
  switch (k) {
    case FileKind::Events: return "EVENTS";
    case FileKind::Confusion: return "CONFUSION";
    case FileKind::Embedding: return "EMBEDDING";
    case FileKind::Fields: return "FIELDS";
    case FileKind::Labels: return "LABELS";
    case FileKind::Clusters: return "CLUSTERS";
    case FileKind::Report: return "REPORT";
    case FileKind::Adjacency: return "ADJACENCY";
    case FileKind::Vocab: return "VOCAB";
    case FileKind::Apt: return "APT";
    case FileKind::Inputs: return "INPUTS";
  }
  return "?";
}

inline constexpr std::uint32_t kFormatVersion = 1;

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), p);
}

namespace io_detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

inline std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

template <class T>
T parse_number(std::string_view s, const std::filesystem::path& path, std::size_t line, std::string_view what) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    fail(ErrorKind::MalformedRecord, where(path, line) + "bad " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

/// Line-oriented reader handling the optional header and comment lines.
class TextReader {
 public:
  TextReader(const std::filesystem::path& path, FileKind kind) : path_(path), in_(path) {
    if (!in_) fail(ErrorKind::Io, "cannot open " + path.string());
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      strip_cr(line);
      if (line.empty()) continue;
      if (line.rfind("#TPLB", 0) == 0) parse_header(line, kind);
      if (line[0] == '#') continue;
      pending_ = std::move(line);
      break;
    }
  }

  /// Next data line, nullopt at end of file.
  std::optional<std::string_view> next() {
    if (pending_) {
      current_ = std::move(*pending_);
      pending_.reset();
      return std::string_view(current_);
    }
    while (std::getline(in_, current_)) {
      ++line_no_;
      strip_cr(current_);
      if (current_.empty() || current_[0] == '#') continue;
      return std::string_view(current_);
    }
    return std::nullopt;
  }

  std::size_t line() const noexcept { return line_no_; }
  const std::filesystem::path& path() const noexcept { return path_; }

  std::optional<std::string> param(std::string_view key) const {
    for (const auto& [k, v] : params_)
      if (k == key) return v;
    return std::nullopt;
  }

  [[noreturn]] void error(ErrorKind kind, const std::string& msg) const { fail(kind, where(path_, line_no_) + msg); }

  template <class T>
  T number(std::string_view s, std::string_view what) const {
    return parse_number<T>(s, path_, line_no_, what);
  }

 private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  void parse_header(const std::string& line, FileKind kind) {
    const auto fields = split(line, '\t');
    if (fields.size() < 3 || fields[0] != "#TPLB") error(ErrorKind::BadHeader, "malformed header");
    if (fields[1] != "1") error(ErrorKind::BadHeader, "unsupported format version " + std::string(fields[1]));
    if (fields[2] != to_string(kind))
      error(ErrorKind::BadHeader, "expected " + std::string(to_string(kind)) + " file, found " + std::string(fields[2]));
    for (std::size_t i = 3; i < fields.size(); ++i) {
      const auto eq = fields[i].find('=');
      if (eq == std::string_view::npos) error(ErrorKind::BadHeader, "header parameter without '='");
      params_.emplace_back(std::string(fields[i].substr(0, eq)), std::string(fields[i].substr(eq + 1)));
    }
  }

  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
  std::optional<std::string> pending_;
  std::string current_;
  std::vector<std::pair<std::string, std::string>> params_;
};

class TextWriter {
 public:
  TextWriter(const std::filesystem::path& path, FileKind kind,
             std::vector<std::pair<std::string, std::string>> params = {}, std::string_view columns = {})
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) fail(ErrorKind::Io, "cannot write " + path.string());
    out_ << "#TPLB\t" << kFormatVersion << '\t' << to_string(kind);
    for (const auto& [k, v] : params) out_ << '\t' << k << '=' << v;
    out_ << '\n';
    if (!columns.empty()) out_ << "# " << columns << '\n';
  }

  std::ostream& stream() { return out_; }

  void close() {
    out_.close();
    if (!out_) fail(ErrorKind::Io, "failed writing " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_f32(std::string& buf, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(buf, bits);
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t get_u64(const unsigned char* p) {
  return static_cast<std::uint64_t>(get_u32(p)) | (static_cast<std::uint64_t>(get_u32(p + 4)) << 32);
}

inline float get_f32(const unsigned char* p) {
  const std::uint32_t bits = get_u32(p);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

inline std::string binary_header(FileKind kind) {
  std::string buf = "TPLB";
  put_u32(buf, kFormatVersion);
  put_u32(buf, static_cast<std::uint32_t>(kind));
  return buf;
}

/// Buffered reader over a binary container with exact-length checks.
class BinaryReader {
 public:
  BinaryReader(const std::filesystem::path& path, FileKind kind) : path_(path), in_(path, std::ios::binary) {
    if (!in_) fail(ErrorKind::Io, "cannot open " + path.string());
    unsigned char head[12];
    read(head, 12, "header");
    if (std::memcmp(head, "TPLB", 4) != 0) fail(ErrorKind::BadHeader, path.string() + ": missing TPLB magic");
    if (get_u32(head + 4) != kFormatVersion)
      fail(ErrorKind::BadHeader, path.string() + ": unsupported format version " + std::to_string(get_u32(head + 4)));
    if (get_u32(head + 8) != static_cast<std::uint32_t>(kind))
      fail(ErrorKind::BadHeader, path.string() + ": expected " + std::string(to_string(kind)) + " container, found kind " +
                                     std::to_string(get_u32(head + 8)));
  }

  void read(void* dst, std::size_t n, std::string_view what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      fail(ErrorKind::Truncated, path_.string() + ": file ends inside " + std::string(what) + " at byte " +
                                     std::to_string(offset_ + static_cast<std::size_t>(in_.gcount())));
    offset_ += n;
  }

  std::uint32_t u32(std::string_view what) {
    unsigned char b[4];
    read(b, 4, what);
    return get_u32(b);
  }

  std::uint64_t u64(std::string_view what) {
    unsigned char b[8];
    read(b, 8, what);
    return get_u64(b);
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof())
      fail(ErrorKind::TrailingGarbage, path_.string() + ": unexpected bytes after offset " + std::to_string(offset_));
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t offset_ = 0;
};

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) fail(ErrorKind::Io, "failed writing " + path.string());
}

inline bool has_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::memcmp(magic, "TPLB", 4) == 0;
}

inline void check_text_field(std::string_view s, std::string_view what) {
  if (s.find_first_of("\t\n\r") != std::string_view::npos)
    fail(ErrorKind::MalformedRecord, std::string(what) + " contains a tab or newline");
}

}  // namespace io_detail

// ---------------------------------------------------------------------------
// Vocabulary: id<TAB>text<TAB>frequency
// ---------------------------------------------------------------------------

inline Vocab read_vocab(const std::filesystem::path& path) {
  io_detail::TextReader r(path, FileKind::Vocab);
  std::vector<RawVocabEntry> raw;
  while (auto line = r.next()) {
    const auto f = io_detail::split(*line, '\t');
    if (f.size() != 3) r.error(ErrorKind::MalformedRecord, "expected id<TAB>text<TAB>frequency");
    raw.push_back({r.number<std::int64_t>(f[0], "id"), std::string(f[1]), r.number<std::int64_t>(f[2], "frequency")});
  }
  try {
    return validate_vocab(std::move(raw));
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

inline void write_vocab(const std::filesystem::path& path, const Vocab& vocab) {
  io_detail::TextWriter w(path, FileKind::Vocab, {}, "id\ttext\tfrequency");
  for (const auto& e : vocab.entries()) {
    io_detail::check_text_field(e.text, "token text");
    w.stream() << e.id << '\t' << e.text << '\t' << e.frequency << '\n';
  }
  w.close();
}

// ---------------------------------------------------------------------------
// Mask events: text "input,position,kind,true,pred" or the binary container
// ---------------------------------------------------------------------------

enum class EventFormat { Text, Binary };

/// Streams events to `fn`; ids are range-checked when t_number is given.
/// Returns the number of events read.
inline std::uint64_t for_each_event(const std::filesystem::path& path, std::optional<std::size_t> t_number,
                                    const std::function<void(const MaskEvent&)>& fn) {
  auto check = [&](const MaskEvent& e, const std::string& at) {
    if (t_number && (e.truth >= *t_number || e.predicted >= *t_number))
      fail(ErrorKind::OutOfRange, at + "token id out of vocab range");
  };
  if (io_detail::has_magic(path)) {
    io_detail::BinaryReader r(path, FileKind::Events);
    const std::uint64_t count = r.u64("event count");
    constexpr std::size_t kRecord = 20;
    constexpr std::size_t kChunk = 1 << 14;
    std::vector<unsigned char> buf(kRecord * kChunk);
    for (std::uint64_t done = 0; done < count;) {
      const auto n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, count - done));
      r.read(buf.data(), n * kRecord, "event records");
      for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* p = buf.data() + i * kRecord;
        const std::uint32_t kind = io_detail::get_u32(p + 8);
        if (kind > 2)
          fail(ErrorKind::MalformedRecord, path.string() + ": event " + std::to_string(done + i) + " has kind " +
                                               std::to_string(kind));
        MaskEvent e{io_detail::get_u32(p), io_detail::get_u32(p + 4), static_cast<ModKind>(kind),
                    io_detail::get_u32(p + 12), io_detail::get_u32(p + 16)};
        if (t_number && (e.truth >= *t_number || e.predicted >= *t_number))
          check(e, path.string() + ": event " + std::to_string(done + i) + ": ");
        fn(e);
      }
      done += n;
    }
    r.expect_end();
    return count;
  }
  io_detail::TextReader r(path, FileKind::Events);
  std::uint64_t count = 0;
  while (auto line = r.next()) {
    const auto f = io_detail::split(*line, ',');
    if (f.size() != 5) r.error(ErrorKind::MalformedRecord, "expected input,position,kind,true,pred");
    const auto kind = parse_mod_kind(f[2]);
    if (!kind) r.error(ErrorKind::MalformedRecord, "unknown modification kind '" + std::string(f[2]) + "'");
    MaskEvent e{r.number<std::uint32_t>(f[0], "input"), r.number<std::uint32_t>(f[1], "position"), *kind,
                r.number<TokenId>(f[3], "true token"), r.number<TokenId>(f[4], "predicted token")};
    if (t_number && (e.truth >= *t_number || e.predicted >= *t_number))
      check(e, io_detail::where(path, r.line()));
    fn(e);
    ++count;
  }
  return count;
}

inline std::vector<MaskEvent> read_events(const std::filesystem::path& path, std::optional<std::size_t> t_number = {}) {
  std::vector<MaskEvent> out;
  for_each_event(path, t_number, [&](const MaskEvent& e) { out.push_back(e); });
  return out;
}

/// Incremental event writer; the binary count is patched in on close().
class EventWriter {
 public:
  EventWriter(const std::filesystem::path& path, EventFormat format)
      : path_(path), format_(format), out_(path, std::ios::binary) {
    if (!out_) fail(ErrorKind::Io, "cannot write " + path.string());
    if (format_ == EventFormat::Binary) {
      buf_ = io_detail::binary_header(FileKind::Events);
      io_detail::put_u64(buf_, 0);
    } else {
      buf_ = "#TPLB\t1\tEVENTS\n# input,position,kind,true,pred\n";
    }
  }

  void add(const MaskEvent& e) {
    if (format_ == EventFormat::Binary) {
      io_detail::put_u32(buf_, e.input);
      io_detail::put_u32(buf_, e.position);
      io_detail::put_u32(buf_, static_cast<std::uint32_t>(e.kind));
      io_detail::put_u32(buf_, e.truth);
      io_detail::put_u32(buf_, e.predicted);
    } else {
      buf_ += std::to_string(e.input);
      buf_ += ',';
      buf_ += std::to_string(e.position);
      buf_ += ',';
      buf_ += to_string(e.kind);
      buf_ += ',';
      buf_ += std::to_string(e.truth);
      buf_ += ',';
      buf_ += std::to_string(e.predicted);
      buf_ += '\n';
    }
    ++count_;
    if (buf_.size() > (1u << 20)) flush();
  }

  void close() {
    flush();
    if (format_ == EventFormat::Binary) {
      std::string n;
      io_detail::put_u64(n, count_);
      out_.seekp(12);
      out_.write(n.data(), 8);
    }
    out_.close();
    if (!out_) fail(ErrorKind::Io, "failed writing " + path_.string());
  }

  std::uint64_t count() const noexcept { return count_; }

 private:
  void flush() {
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    buf_.clear();
  }

  std::filesystem::path path_;
  EventFormat format_;
  std::ofstream out_;
  std::string buf_;
  std::uint64_t count_ = 0;
};

inline void write_events(const std::filesystem::path& path, std::span<const MaskEvent> events,
                         EventFormat format = EventFormat::Text) {
  EventWriter w(path, format);
  for (const auto& e : events) w.add(e);
  w.close();
}

// ---------------------------------------------------------------------------
// Confusion counts: row<TAB>col<TAB>count, sorted, header t_number=N
// ---------------------------------------------------------------------------

inline ConfusionMatrix read_confusion(const std::filesystem::path& path, std::optional<std::size_t> t_number = {}) {
  io_detail::TextReader r(path, FileKind::Confusion);
  if (auto declared = r.param("t_number")) {
    const auto n = io_detail::parse_number<std::size_t>(*declared, path, 1, "t_number");
    if (t_number && *t_number != n)
      fail(ErrorKind::Mismatch, path.string() + ": t_number " + std::to_string(n) + " differs from vocab size " +
                                    std::to_string(*t_number));
    t_number = n;
  }
  std::vector<Triplet> triplets;
  std::size_t max_id = 0;
  while (auto line = r.next()) {
    const auto f = io_detail::split(*line, '\t');
    if (f.size() != 3) r.error(ErrorKind::MalformedRecord, "expected row<TAB>col<TAB>count");
    const auto count = r.number<Count>(f[2], "count");
    if (count < 0) r.error(ErrorKind::NegativeFrequency, "negative count");
    Triplet t{r.number<TokenId>(f[0], "row"), r.number<TokenId>(f[1], "col"), count};
    max_id = std::max<std::size_t>(max_id, std::max(t.row, t.col));
    triplets.push_back(t);
  }
  if (triplets.empty()) fail(ErrorKind::EmptyInput, path.string() + ": no confusion cells");
  try {
    return ConfusionMatrix::from_sorted(t_number.value_or(max_id + 1), triplets);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

inline void write_confusion(const std::filesystem::path& path, const ConfusionMatrix& m) {
  io_detail::TextWriter w(path, FileKind::Confusion, {{"t_number", std::to_string(m.t_number())}}, "row\tcol\tcount");
  std::string buf;
  for (const auto& t : m.triplets()) {
    buf += std::to_string(t.row);
    buf += '\t';
    buf += std::to_string(t.col);
    buf += '\t';
    buf += std::to_string(t.count);
    buf += '\n';
  }
  w.stream() << buf;
  w.close();
}

// ---------------------------------------------------------------------------
// Embedding container
// ---------------------------------------------------------------------------

inline EmbeddingMatrix read_embedding(const std::filesystem::path& path) {
  io_detail::BinaryReader r(path, FileKind::Embedding);
  const std::uint32_t rows = r.u32("row count");
  const std::uint32_t cols = r.u32("column count");
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> raw(n * 4);
  r.read(raw.data(), raw.size(), "embedding values");
  r.expect_end();
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = io_detail::get_f32(raw.data() + 4 * i);
  try {
    return EmbeddingMatrix(rows, cols, std::move(values));
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

/// Values are stored as f32.
inline void write_embedding(const std::filesystem::path& path, const EmbeddingMatrix& e) {
  std::string buf = io_detail::binary_header(FileKind::Embedding);
  io_detail::put_u32(buf, static_cast<std::uint32_t>(e.t_number()));
  io_detail::put_u32(buf, static_cast<std::uint32_t>(e.e_length()));
  buf.reserve(buf.size() + 4 * e.values().size());
  for (double v : e.values()) io_detail::put_f32(buf, static_cast<float>(v));
  io_detail::write_file(path, buf);
}

// ---------------------------------------------------------------------------
// Label field container
// ---------------------------------------------------------------------------

inline std::vector<LabelFieldMatrix> read_fields(const std::filesystem::path& path,
                                                 std::optional<std::size_t> n_labels = {}) {
  io_detail::BinaryReader r(path, FileKind::Fields);
  const std::uint32_t count = r.u32("record count");
  std::vector<LabelFieldMatrix> out;
  out.reserve(count);
  std::vector<unsigned char> raw;
  for (std::uint32_t k = 0; k < count; ++k) {
    LabelFieldMatrix m;
    const std::uint32_t unit = r.u32("unit kind");
    if (unit > 1) fail(ErrorKind::MalformedRecord, path.string() + ": record " + std::to_string(k) + " has unit kind " + std::to_string(unit));
    m.unit = static_cast<ProbeUnit>(unit);
    m.unit_index = r.u32("unit index");
    m.n_labels = r.u32("label count");
    if (m.n_labels == 0) fail(ErrorKind::MalformedRecord, path.string() + ": record " + std::to_string(k) + " has no labels");
    if (n_labels && m.n_labels != *n_labels)
      fail(ErrorKind::Mismatch, path.string() + ": record " + std::to_string(k) + " has " + std::to_string(m.n_labels) +
                                    " labels, expected " + std::to_string(*n_labels));
    raw.resize(4 * m.n_labels * m.n_labels);
    r.read(raw.data(), raw.size(), "field values");
    m.values.resize(m.n_labels * m.n_labels);
    for (std::size_t i = 0; i < m.values.size(); ++i) {
      m.values[i] = io_detail::get_f32(raw.data() + 4 * i);
      if (!std::isfinite(m.values[i]))
        fail(ErrorKind::MalformedRecord, path.string() + ": record " + std::to_string(k) + " has a non-finite value");
    }
    out.push_back(std::move(m));
  }
  r.expect_end();
  return out;
}

inline void write_fields(const std::filesystem::path& path, std::span<const LabelFieldMatrix> units) {
  std::string buf = io_detail::binary_header(FileKind::Fields);
  io_detail::put_u32(buf, static_cast<std::uint32_t>(units.size()));
  for (const auto& m : units) {
    if (m.values.size() != m.n_labels * m.n_labels) fail(ErrorKind::Mismatch, "field matrix payload is not n_labels^2");
    io_detail::put_u32(buf, static_cast<std::uint32_t>(m.unit));
    io_detail::put_u32(buf, m.unit_index);
    io_detail::put_u32(buf, static_cast<std::uint32_t>(m.n_labels));
    for (double v : m.values) io_detail::put_f32(buf, static_cast<float>(v));
  }
  io_detail::write_file(path, buf);
}

// ---------------------------------------------------------------------------
// Classified inputs: input-id,true-label,pred-label,tok tok tok
// ---------------------------------------------------------------------------

inline std::vector<ClassifiedInput> read_classified(const std::filesystem::path& path,
                                                    std::optional<std::size_t> t_number = {}) {
  io_detail::TextReader r(path, FileKind::Inputs);
  std::vector<ClassifiedInput> out;
  while (auto line = r.next()) {
    const auto f = io_detail::split(*line, ',');
    if (f.size() != 4) r.error(ErrorKind::MalformedRecord, "expected input-id,true-label,pred-label,tokens");
    ClassifiedInput in;
    in.input_id = r.number<std::uint64_t>(f[0], "input id");
    in.true_label = r.number<std::uint32_t>(f[1], "true label");
    in.predicted_label = r.number<std::uint32_t>(f[2], "predicted label");
    for (auto tok : io_detail::split(f[3], ' ')) {
      if (tok.empty()) continue;
      const auto t = r.number<TokenId>(tok, "token");
      if (t_number && t >= *t_number) r.error(ErrorKind::OutOfRange, "token " + std::to_string(t) + " outside vocab");
      in.tokens.push_back(t);
    }
    if (in.tokens.empty()) r.error(ErrorKind::EmptyInput, "input has no tokens");
    out.push_back(std::move(in));
  }
  if (out.empty()) fail(ErrorKind::EmptyInput, path.string() + ": no classified inputs");
  return out;
}

inline void write_classified(const std::filesystem::path& path, std::span<const ClassifiedInput> inputs) {
  io_detail::TextWriter w(path, FileKind::Inputs, {}, "input-id,true-label,pred-label,tokens");
  std::string buf;
  for (const auto& in : inputs) {
    buf += std::to_string(in.input_id) + ',' + std::to_string(in.true_label) + ',' + std::to_string(in.predicted_label) + ',';
    for (std::size_t i = 0; i < in.tokens.size(); ++i) {
      if (i) buf += ' ';
      buf += std::to_string(in.tokens[i]);
    }
    buf += '\n';
  }
  w.stream() << buf;
  w.close();
}

// ---------------------------------------------------------------------------
// Clusters: size<TAB>id id ...<TAB>text text ...
// ---------------------------------------------------------------------------

inline ClusterSet read_clusters(const std::filesystem::path& path, std::size_t universe) {
  io_detail::TextReader r(path, FileKind::Clusters);
  std::vector<std::vector<TokenId>> clusters;
  while (auto line = r.next()) {
    const auto f = io_detail::split(*line, '\t');
    if (f.size() < 2) r.error(ErrorKind::MalformedRecord, "expected size<TAB>ids");
    const auto size = r.number<std::size_t>(f[0], "size");
    std::vector<TokenId> members;
    for (auto id : io_detail::split(f[1], ' '))
      if (!id.empty()) members.push_back(r.number<TokenId>(id, "token id"));
    if (members.size() != size) r.error(ErrorKind::Mismatch, "cluster size column disagrees with member list");
    clusters.push_back(std::move(members));
  }
  try {
    return ClusterSet(universe, std::move(clusters));
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

inline void write_clusters(const std::filesystem::path& path, const ClusterSet& clusters, const Vocab* vocab = nullptr) {
  io_detail::TextWriter w(path, FileKind::Clusters, {{"t_number", std::to_string(clusters.universe())}},
                          "size\tids\ttexts");
  std::string buf;
  for (const auto& members : clusters.clusters()) {
    buf += std::to_string(members.size());
    buf += '\t';
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i) buf += ' ';
      buf += std::to_string(members[i]);
    }
    buf += '\t';
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i) buf += ' ';
      buf += vocab && vocab->contains(members[i]) ? std::string(vocab->text(members[i])) : std::to_string(members[i]);
    }
    buf += '\n';
  }
  w.stream() << buf;
  w.close();
}

// ---------------------------------------------------------------------------
// Adjacency: "i<TAB>j" per edge (i < j), lone "i" for an isolated participant
// ---------------------------------------------------------------------------

struct AdjacencyFile {
  AdjacencyMatrix adjacency;
  std::vector<TokenId> participants;  // ascending
};

inline AdjacencyFile read_adjacency(const std::filesystem::path& path, std::optional<std::size_t> t_number = {}) {
  io_detail::TextReader r(path, FileKind::Adjacency);
  if (auto declared = r.param("t_number")) t_number = io_detail::parse_number<std::size_t>(*declared, path, 1, "t_number");
  std::vector<std::pair<TokenId, TokenId>> edges;
  std::vector<TokenId> participants;
  while (auto line = r.next()) {
    const auto f = io_detail::split(*line, '\t');
    if (f.size() == 1) {
      participants.push_back(r.number<TokenId>(f[0], "token id"));
    } else if (f.size() == 2) {
      const TokenId a = r.number<TokenId>(f[0], "token id"), b = r.number<TokenId>(f[1], "token id");
      if (a == b) r.error(ErrorKind::InvalidArgument, "self-pair in adjacency");
      edges.emplace_back(std::min(a, b), std::max(a, b));
      participants.push_back(a);
      participants.push_back(b);
    } else {
      r.error(ErrorKind::MalformedRecord, "expected i<TAB>j or a lone id");
    }
  }
  if (participants.empty()) fail(ErrorKind::EmptyInput, path.string() + ": no adjacency records");
  const std::size_t max_id = *std::max_element(participants.begin(), participants.end());
  const std::size_t n = t_number.value_or(max_id + 1);
  if (max_id >= n) fail(ErrorKind::OutOfRange, path.string() + ": token id " + std::to_string(max_id) + " outside t_number");
  std::sort(participants.begin(), participants.end());
  participants.erase(std::unique(participants.begin(), participants.end()), participants.end());
  try {
    return {AdjacencyMatrix(n, std::move(edges)), std::move(participants)};
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

inline void write_adjacency(const std::filesystem::path& path, const AdjacencyMatrix& adj,
                            std::span<const TokenId> participants) {
  io_detail::TextWriter w(path, FileKind::Adjacency, {{"t_number", std::to_string(adj.t_number())}}, "i\tj");
  std::string buf;
  for (auto [a, b] : adj.edges()) buf += std::to_string(a) + '\t' + std::to_string(b) + '\n';
  for (TokenId t : participants)
    if (adj.neighbors(t).empty()) buf += std::to_string(t) + '\n';
  w.stream() << buf;
  w.close();
}

// ---------------------------------------------------------------------------
// APT table: token<TAB>text<TAB>frequency<TAB>selected<TAB>correct<TAB>apt
// ---------------------------------------------------------------------------

inline void write_apt_table(const std::filesystem::path& path, const AptTable& apt, const Vocab& vocab) {
  if (apt.t_number() != vocab.t_number()) fail(ErrorKind::Mismatch, "APT table and vocab differ in size");
  io_detail::TextWriter w(path, FileKind::Apt, {{"t_number", std::to_string(apt.t_number())}},
                          "token\ttext\tfrequency\tselected\tcorrect\tapt");
  std::string buf;
  for (TokenId t = 0; t < apt.t_number(); ++t) {
    const auto& c = apt.counts(t);
    const auto a = apt.apt(t);
    buf += std::to_string(t) + '\t' + std::string(vocab.text(t)) + '\t' + std::to_string(vocab.frequency(t)) + '\t' +
           std::to_string(c.selected) + '\t' + std::to_string(c.correct) + '\t' + (a ? format_double(*a) : "NA") + '\n';
  }
  w.stream() << buf;
  w.close();
}

/// APT values are recomputed from the selected/correct counts.
inline AptTable read_apt_table(const std::filesystem::path& path, std::optional<std::size_t> t_number = {}) {
  io_detail::TextReader r(path, FileKind::Apt);
  std::vector<TokenApt> per_token;
  while (auto line = r.next()) {
    const auto f = io_detail::split(*line, '\t');
    if (f.size() != 6) r.error(ErrorKind::MalformedRecord, "expected 6 tab-separated columns");
    const auto token = r.number<std::size_t>(f[0], "token");
    if (token != per_token.size()) r.error(ErrorKind::GapInRange, "tokens must be listed as 0..T-1 in order");
    TokenApt c{r.number<Count>(f[3], "selected"), r.number<Count>(f[4], "correct")};
    if (c.selected < 0 || c.correct < 0 || c.correct > c.selected) r.error(ErrorKind::MalformedRecord, "inconsistent counts");
    per_token.push_back(c);
  }
  if (per_token.empty()) fail(ErrorKind::EmptyInput, path.string() + ": empty APT table");
  if (t_number && per_token.size() != *t_number)
    fail(ErrorKind::Mismatch, path.string() + ": APT table covers " + std::to_string(per_token.size()) +
                                  " tokens, vocab has " + std::to_string(*t_number));
  return AptTable(std::move(per_token));
}

// ---------------------------------------------------------------------------
// Per-label accuracy: label<TAB>accuracy
// ---------------------------------------------------------------------------

inline std::vector<double> read_label_accuracy(const std::filesystem::path& path) {
  io_detail::TextReader r(path, FileKind::Labels);
  std::vector<double> out;
  while (auto line = r.next()) {
    const auto f = io_detail::split(*line, '\t');
    if (f.size() != 2) r.error(ErrorKind::MalformedRecord, "expected label<TAB>accuracy");
    if (r.number<std::size_t>(f[0], "label") != out.size())
      r.error(ErrorKind::GapInRange, "labels must be listed as 0..N-1 in order");
    out.push_back(r.number<double>(f[1], "accuracy"));
  }
  if (out.empty()) fail(ErrorKind::EmptyInput, path.string() + ": no label accuracies");
  return out;
}

inline void write_label_accuracy(const std::filesystem::path& path, std::span<const double> accuracy) {
  io_detail::TextWriter w(path, FileKind::Labels, {}, "label\taccuracy");
  for (std::size_t i = 0; i < accuracy.size(); ++i) w.stream() << i << '\t' << format_double(accuracy[i]) << '\n';
  w.close();
}

}  // namespace tplb
