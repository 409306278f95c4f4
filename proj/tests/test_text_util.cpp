#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "plotline/error.hpp"
#include "plotline/text_util.hpp"

using namespace plotline::text;

TEST(TextUtil, CodepointCountIgnoresContinuationBytes) {
  EXPECT_EQ(codepoint_count(""), 0u);
  EXPECT_EQ(codepoint_count("abc"), 3u);
  EXPECT_EQ(codepoint_count("萧炎"), 2u);
  EXPECT_EQ(codepoint_count("a–b"), 3u);
}

TEST(TextUtil, CodepointPrefixNeverSplitsCharacters) {
  EXPECT_EQ(codepoint_prefix("初入乌坦城", 2), "初入");
  EXPECT_EQ(codepoint_prefix("ab", 5), "ab");
  EXPECT_EQ(codepoint_prefix("ab", 0), "");
}

TEST(TextUtil, Utf8Validation) {
  EXPECT_TRUE(is_valid_utf8("plain"));
  EXPECT_TRUE(is_valid_utf8("第1章"));
  EXPECT_FALSE(is_valid_utf8("\xC0\xAF"));          // overlong
  EXPECT_FALSE(is_valid_utf8("\xED\xA0\x80"));      // surrogate
  EXPECT_FALSE(is_valid_utf8("\xE7\xAC"));          // truncated
  EXPECT_FALSE(is_valid_utf8("\xFF"));
}

TEST(TextUtil, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
}

TEST(TextUtil, DoubleFormattingRoundTrips) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_THROW(parse_double("1.5x"), plotline::Error);
  EXPECT_THROW(parse_double(""), plotline::Error);
}

TEST(TextUtil, SplitKeepsEmptyFields) {
  auto parts = split("a,,b,", ',');
  ASSERT_EQ(parts.size(), 4u);
  EXPECT_EQ(parts[1], "");
  EXPECT_EQ(parts[3], "");
  EXPECT_EQ(trim("  x y \n"), "x y");
}

TEST(TextUtil, ReadMissingFileFails) { EXPECT_THROW(read_file("/nonexistent/plotline"), plotline::IoFailure); }
