// common.hpp
// Shared basics: virtual time, error taxonomy, deterministic RNG substreams,
// and number formatting helpers used across the library.

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace scrapelab {

// Virtual seconds. All liveness, scheduling, and survival math runs on this
// clock, decoupled from wall time.
using Seconds = double;

// Invalid configuration or invalid arguments to an operation. CLI maps this
// to exit code 1.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Transport or I/O failure at runtime. CLI maps this to exit code 2.
class transport_error : public std::runtime_error {
 public:
  explicit transport_error(const std::string& what) : std::runtime_error(what) {}
};

// Rejected attempt to move the virtual clock backwards.
class clock_error : public std::runtime_error {
 public:
  explicit clock_error(const std::string& what) : std::runtime_error(what) {}
};

// Frame-building strategy not available on the target site (e.g. catalogue
// disabled). Callers are expected to fall back to a heuristic.
class strategy_unavailable : public std::runtime_error {
 public:
  explicit strategy_unavailable(const std::string& what) : std::runtime_error(what) {}
};

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

// Deterministic RNG substream for (seed, tag, index). Draws from one stream
// never shift when an unrelated stream's parameters change, which keeps
// calibration sweeps stable.
std::mt19937_64 stream_rng(std::uint64_t seed, std::string_view tag,
                           std::uint64_t index = 0);

// Uniform draw in [0,1) with a fixed engine-output mapping (not the
// implementation-defined std::uniform_real_distribution).
double draw_uniform(std::mt19937_64& rng);

// Uniform draw in the open interval (0,1); safe under log().
double draw_open_uniform(std::mt19937_64& rng);

// Standard normal via Box-Muller; consumes two engine outputs per call.
double draw_normal(std::mt19937_64& rng);

// Shortest decimal string that round-trips the double exactly.
std::string format_double(double v);

// Inverse of format_double; throws config_error on garbage.
double parse_double(std::string_view s);

// Printf-style %.6g, used for CSV and text output.
std::string format_sig6(double v);

}  // namespace scrapelab
