#pragma once

///
/// \file cli.hpp
///
/// Command-line front end. `run` takes the arguments after the program name
/// and returns the process exit code:
///
///   0 ok, 1 internal or I/O failure, 2 configuration or parse error,
///   3 domain error (critical epsilon, instability), 4 resource cap.
///
/// Subcommands: moments, reduce, compare, simulate. Output files are named
/// <out>_<kind>.csv (or .json) and start with a `# config-hash: ...` line
/// (CSV) or carry a "config_hash" field (JSON).
///

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbmred/gbm.hpp"

namespace gbmred::cli {

/// {"n": n, "A": [[...]], "B": [[...]], "D": [[...]]}
nlohmann::json model_to_json(const GbmModel& model);

/// Throws ConfigError on malformed input.
GbmModel model_from_json(const nlohmann::json& j);

/// Bad command line or model file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A size cap was exceeded.
class CapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

/// 17 significant digits (%.17g).
std::string format_double(double v);

/// Largest number of values a --dump-paths file may hold.
inline constexpr long long kDumpCap = 10'000'000;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gbmred::cli
