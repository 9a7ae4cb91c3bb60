#include "doubt/json_format.hpp"

#include <cstdlib>
#include <cstring>
#include <random>
#include <string>

#include <gtest/gtest.h>

namespace doubt {
namespace {

TEST(FormatDouble, FrozenReferenceTable) {
  const struct {
    double value;
    const char* expected;
  } cases[] = {
      {0x0.0p+0, "0.0"},
      {-0x0.0p+0, "-0.0"},
      {0x1.0000000000000p+0, "1.0"},
      {-0x1.0000000000000p+0, "-1.0"},
      {0x1.0000000000000p-1, "0.5"},
      {0x1.999999999999ap-4, "0.1"},
      {0x1.3333333333333p-3, "0.15"},
      {0x1.4000000000000p+2, "5.0"},
      {0x1.9000000000000p+6, "100.0"},
      {0x1.aaaaaaaaaaaabp+1, "3.3333333333333335"},
      {0x1.c6bf526340000p+49, "1000000000000000.0"},
      {0x1.1c37937e08000p+53, "1e+16"},
      {0x1.1c37937e08000p+51, "2500000000000000.0"},
      {0x1.a36e2eb1c432dp-15, "5e-05"},
      {0x1.a36e2eb1c432dp-14, "0.0001"},
      {0x1.4f8b588e368f1p-17, "1e-05"},
      {-0x1.36bccc8b19c89p-994, "-7.25e-300"},
      {0x1.1eb2d66005835p+997, "1.5e+300"},
      {0x1.921fb54442d18p+0, "1.5707963267948966"},
      {0x1.3333333333334p-2, "0.30000000000000004"},
      {0x1.0000000000000p+53, "9007199254740992.0"},
      {0x1.fffffffffffffp+1023, "1.7976931348623157e+308"},
  };
  for (const auto& c : cases) {
    EXPECT_EQ(format_double(c.value), c.expected);
  }
}

TEST(FormatDouble, RoundTripsThroughStrtod) {
  std::mt19937_64 rng(501);
  int checked = 0;
  while (checked < 2000) {
    const std::uint64_t bits = rng();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    if (std::isnan(v) || std::isinf(v)) continue;
    const std::string text = format_double(v);
    const double back = std::strtod(text.c_str(), nullptr);
    EXPECT_EQ(std::memcmp(&back, &v, sizeof v), 0) << text;
    ++checked;
  }
}

TEST(AppendNumberToken, InfinityBecomesQuotedToken) {
  std::string out;
  append_number_token(out, std::numeric_limits<double>::infinity());
  EXPECT_EQ(out, "\"inf\"");
  out.clear();
  append_number_token(out, -std::numeric_limits<double>::infinity());
  EXPECT_EQ(out, "\"-inf\"");
  out.clear();
  append_number_token(out, ExtendedReal::infinity());
  EXPECT_EQ(out, "\"inf\"");
  out.clear();
  append_number_token(out, 0.25);
  EXPECT_EQ(out, "0.25");
}

TEST(AppendJsonString, EscapesSpecials) {
  std::string out;
  append_json_string(out, "a\"b\\c\nd\te\x01");
  EXPECT_EQ(out, "\"a\\\"b\\\\c\\nd\\te\\u0001\"");
}

}  // namespace
}  // namespace doubt
