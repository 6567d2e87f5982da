#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "tplb/io.hpp"
#include "tplb/synth.hpp"

using namespace tplb;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("tplb_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path file(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name), std::ios::binary) << text;
  }

  static ErrorKind kind_of(auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Invariant;
  }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_F(IoTest, VocabRoundTrip) {
  const auto v = validate_vocab({{0, "the", 100}, {1, "##ing", 7}, {2, "[UNK]", 0}});
  write_vocab(file("v.tsv"), v);
  EXPECT_EQ(read_vocab(file("v.tsv")), v);
  write("bad.tsv", "0\ta\t1\n2\tb\t1\n");
  EXPECT_EQ(kind_of([&] { read_vocab(file("bad.tsv")); }), ErrorKind::GapInRange);
  write("short.tsv", "0\ta\n");
  EXPECT_EQ(kind_of([&] { read_vocab(file("short.tsv")); }), ErrorKind::MalformedRecord);
}

TEST_F(IoTest, EventsRoundTripInBothFormats) {
  std::istringstream in("seed=1\nt_number=30\nplanted=2:5\n");
  const auto ev = gen_events(make_planted_spec(KeyValues::parse(in)), 3000);
  write_events(file("e.csv"), ev, EventFormat::Text);
  write_events(file("e.bin"), ev, EventFormat::Binary);
  EXPECT_EQ(read_events(file("e.csv")), ev);
  EXPECT_EQ(read_events(file("e.bin"), 30), ev);
  EXPECT_EQ(kind_of([&] { read_events(file("e.bin"), 10); }), ErrorKind::OutOfRange);
  EXPECT_EQ(kind_of([&] { read_events(file("e.csv"), 10); }), ErrorKind::OutOfRange);
}

TEST_F(IoTest, BinaryEventErrors) {
  write_events(file("e.bin"), std::vector<MaskEvent>{{0, 0, ModKind::Masked, 1, 2}}, EventFormat::Binary);
  const auto bytes = slurp(file("e.bin"));
  write("trunc.bin", bytes.substr(0, bytes.size() - 3));
  EXPECT_EQ(kind_of([&] { read_events(file("trunc.bin")); }), ErrorKind::Truncated);
  write("extra.bin", bytes + "x");
  EXPECT_EQ(kind_of([&] { read_events(file("extra.bin")); }), ErrorKind::TrailingGarbage);
  auto wrong = bytes;
  wrong[8] = 3;
  write("kind.bin", wrong);
  EXPECT_EQ(kind_of([&] { read_events(file("kind.bin")); }), ErrorKind::BadHeader);
}

TEST_F(IoTest, TextEventErrorsCarryLineNumbers) {
  write("e.csv", "0,0,MASKED,1,1\n0,1,SOMETHING,1,1\n");
  try {
    read_events(file("e.csv"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedRecord);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos);
  }
  write("h.csv", "#TPLB\t1\tCONFUSION\n0,0,MASKED,1,1\n");
  EXPECT_EQ(kind_of([&] { read_events(file("h.csv")); }), ErrorKind::BadHeader);
}

TEST_F(IoTest, ConfusionRoundTripAndValidation) {
  const std::vector<Triplet> t{{0, 0, 5}, {0, 2, 1}, {3, 3, 2}};
  const auto m = ConfusionMatrix::from_sorted(5, t);
  write_confusion(file("c.tsv"), m);
  EXPECT_EQ(read_confusion(file("c.tsv")), m);
  EXPECT_EQ(read_confusion(file("c.tsv")).t_number(), 5u);
  EXPECT_EQ(kind_of([&] { read_confusion(file("c.tsv"), 4); }), ErrorKind::Mismatch);
  write("u.tsv", "1\t1\t1\n0\t0\t1\n");
  EXPECT_EQ(kind_of([&] { read_confusion(file("u.tsv")); }), ErrorKind::Unsorted);
  write("d.tsv", "0\t0\t1\n0\t0\t1\n");
  EXPECT_EQ(kind_of([&] { read_confusion(file("d.tsv")); }), ErrorKind::DuplicateCell);
}

TEST_F(IoTest, EmbeddingRoundTripIsByteStable) {
  const EmbeddingMatrix e(2, 3, {0.5, -1.25, 3.0, 1e-3, 0.0, 2.0});
  write_embedding(file("e.bin"), e);
  const auto back = read_embedding(file("e.bin"));
  EXPECT_EQ(back.t_number(), 2u);
  write_embedding(file("e2.bin"), back);
  EXPECT_EQ(slurp(file("e.bin")), slurp(file("e2.bin")));
  const auto bytes = slurp(file("e.bin"));
  write("t.bin", bytes.substr(0, bytes.size() - 1));
  EXPECT_EQ(kind_of([&] { read_embedding(file("t.bin")); }), ErrorKind::Truncated);
  write("g.bin", bytes + "abcd");
  EXPECT_EQ(kind_of([&] { read_embedding(file("g.bin")); }), ErrorKind::TrailingGarbage);
  auto zero = bytes;
  for (std::size_t i = 20; i < 32; ++i) zero[i] = 0;
  write("z.bin", zero);
  EXPECT_EQ(kind_of([&] { read_embedding(file("z.bin")); }), ErrorKind::ZeroRow);
}

TEST_F(IoTest, FieldsRoundTripAndLabelMismatch) {
  FieldSpec spec;
  spec.n_units = 3;
  spec.n_labels = 6;
  spec.unit = ProbeUnit::Head;
  auto gen = gen_fields(spec);
  for (auto& m : gen.units)
    for (auto& v : m.values) v = static_cast<float>(v);
  write_fields(file("f.bin"), gen.units);
  EXPECT_EQ(read_fields(file("f.bin"), 6), gen.units);
  EXPECT_EQ(kind_of([&] { read_fields(file("f.bin"), 64); }), ErrorKind::Mismatch);
}

TEST_F(IoTest, ClassifiedClustersAdjacencyRoundTrip) {
  const std::vector<ClassifiedInput> in{{0, {1, 2, 3}, 1, 1}, {7, {4}, 0, 2}};
  write_classified(file("i.csv"), in);
  EXPECT_EQ(read_classified(file("i.csv")), in);
  EXPECT_EQ(kind_of([&] { read_classified(file("i.csv"), 4); }), ErrorKind::OutOfRange);

  const auto c = canonicalize(ClusterSet(6, {{0, 3}, {1}, {5}}));
  write_clusters(file("c.tsv"), c);
  EXPECT_EQ(read_clusters(file("c.tsv"), 6), c);

  const AdjacencyMatrix adj(6, {{0, 3}, {2, 4}});
  const std::vector<TokenId> part{0, 1, 2, 3, 4};
  write_adjacency(file("a.tsv"), adj, part);
  const auto back = read_adjacency(file("a.tsv"));
  EXPECT_EQ(back.adjacency, adj);
  EXPECT_EQ(back.participants, part);
}

TEST_F(IoTest, AptTableAndAccuracy) {
  const auto vocab = validate_vocab({{0, "a", 3}, {1, "b", 2}, {2, "c", 1}});
  const AptTable apt({{4, 3}, {0, 0}, {2, 2}});
  write_apt_table(file("apt.tsv"), apt, vocab);
  const auto back = read_apt_table(file("apt.tsv"), 3);
  EXPECT_EQ(back, apt);
  EXPECT_EQ(back.mean_apt(), apt.mean_apt());
  const std::vector<double> acc{0.5, 0.75};
  write_label_accuracy(file("acc.tsv"), acc);
  EXPECT_EQ(read_label_accuracy(file("acc.tsv")), acc);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}
