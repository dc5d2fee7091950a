#include <gtest/gtest.h>

#include <set>

#include "gos/util.hpp"
#include "test_support.hpp"

namespace gos {
namespace {

TEST(Csv, SplitsQuotedFields) {
  auto f = split_csv_record(R"(a,"b,c","say ""hi""",)");
  ASSERT_EQ(f.size(), 4u);
  EXPECT_EQ(f[0], "a");
  EXPECT_EQ(f[1], "b,c");
  EXPECT_EQ(f[2], "say \"hi\"");
  EXPECT_EQ(f[3], "");
}

TEST(Csv, EscapeRoundTrips) {
  for (std::string s : {"plain", "with,comma", "with \"quote\"", ""}) {
    auto f = split_csv_record(csv_escape(s) + ",x");
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f[0], s);
  }
}

TEST(Lines, DropsCarriageReturnsAndTrailingEmpty) {
  auto lines = split_lines("a\r\nb\n\nc\n");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "a");
  EXPECT_EQ(lines[2], "");
  EXPECT_EQ(lines[3], "c");
}

TEST(Seeds, MixSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) seen.insert(mix_seed(42, s));
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
}

TEST(Tokens, AreLongAndDistinct) {
  auto a = random_token(), b = random_token();
  EXPECT_EQ(a.size(), 32u);
  EXPECT_NE(a, b);
}

TEST(Files, WriteThenRead) {
  testing::TempDir dir;
  write_file(dir.path() / "x.txt", "hello\n");
  EXPECT_EQ(read_file(dir.path() / "x.txt"), "hello\n");
  EXPECT_THROW(read_file(dir.path() / "missing"), std::runtime_error);
}

TEST(Format, DoubleRoundTrips) {
  double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(v)), v);
}

}  // namespace
}  // namespace gos
