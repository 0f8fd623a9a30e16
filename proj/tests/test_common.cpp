#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <set>

#include "scrapelab/common.hpp"

using namespace scrapelab;

namespace {

// Reference FNV-1a written out long-hand, against which the library's
// version is checked.
std::uint64_t fnv_reference(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

TEST_CASE("fnv1a64 matches the reference fold") {
  for (const char* s : {"", "a", "ab", "scrapelab"}) {
    CHECK(fnv1a64(s) == fnv_reference(s));
  }
  std::string_view with_nul("\x00\x01\xff", 3);
  CHECK(fnv1a64(with_nul) == fnv_reference(with_nul));
  CHECK(fnv1a64("") == 14695981039346656037ull);
  CHECK(fnv1a64("x") != fnv1a64("y"));
}

TEST_CASE("hex64 is 16 lowercase hex digits") {
  CHECK(hex64(0) == "0000000000000000");
  CHECK(hex64(0xdeadbeefcafe1234ull) == "deadbeefcafe1234");
  CHECK(hex64(std::numeric_limits<std::uint64_t>::max()) == "ffffffffffffffff");
}

TEST_CASE("format_double round-trips exactly") {
  const double cases[] = {0.0,
                          -0.0,
                          1.0,
                          0.1,
                          -0.1,
                          1.0 / 3.0,
                          3.141592653589793,
                          1e-300,
                          1e300,
                          -2.2250738585072014e-308,
                          123456789.123456789,
                          std::nextafter(1.0, 2.0)};
  for (double v : cases) {
    double back = parse_double(format_double(v));
    CHECK(std::memcmp(&back, &v, sizeof v) == 0);
  }
  CHECK_THROWS_AS(parse_double("not a number"), config_error);
  CHECK_THROWS_AS(parse_double(""), config_error);
  CHECK_THROWS_AS(parse_double("1.5x"), config_error);
}

TEST_CASE("stream_rng streams are independent and reproducible") {
  auto a1 = stream_rng(7, "alpha", 3);
  auto a2 = stream_rng(7, "alpha", 3);
  CHECK(a1() == a2());

  // Distinct tags, indices, or seeds give distinct streams.
  std::set<std::uint64_t> firsts;
  firsts.insert(stream_rng(7, "alpha", 3)());
  firsts.insert(stream_rng(7, "alpha", 4)());
  firsts.insert(stream_rng(7, "beta", 3)());
  firsts.insert(stream_rng(8, "alpha", 3)());
  CHECK(firsts.size() == 4);
}

TEST_CASE("draw_uniform stays in [0,1) and is roughly uniform") {
  auto rng = stream_rng(11, "u");
  double sum = 0, lo = 1, hi = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double v = draw_uniform(rng);
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // mean 0.5 with sd 1/sqrt(12n) ~ 0.00065
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
}

TEST_CASE("draw_open_uniform never returns an endpoint") {
  auto rng = stream_rng(12, "ou");
  for (int i = 0; i < 100000; ++i) {
    double v = draw_open_uniform(rng);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(std::isfinite(std::log(v)));
  }
}

TEST_CASE("draw_normal has standard moments") {
  auto rng = stream_rng(13, "n");
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    double v = draw_normal(rng);
    sum += v;
    sum2 += v * v;
  }
  double mean = sum / n;
  double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("format_sig6 renders six significant digits") {
  CHECK(format_sig6(1234567.0) == "1.23457e+06");
  CHECK(format_sig6(0.5) == "0.5");
  CHECK(format_sig6(0.0216) == "0.0216");
}
