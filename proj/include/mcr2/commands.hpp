#pragma once

// Experiment runners behind the `mcr2` executable. Every runner reads a JSON
// config (schema_version 1, unknown keys rejected), writes its outputs and a
// manifest.json into the output directory, prints a short summary, and
// returns a process exit code.

#include "mcr2/types.hpp"
#include "mcr2/verify.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace mcr2::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime or I/O failure
inline constexpr int kExitUsage = 2;    // bad flags or config

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

// Malformed config or command-line usage; maps to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;      // overrides the config seed
  std::optional<LogBase> log_base;        // overrides rate.log_base
};

struct VerifyOptions {
  std::optional<std::string> suite;
  std::optional<int> trials;
};

int run_simulate(const CommonOptions& opts, std::ostream& log);
int run_verify(const CommonOptions& opts, const VerifyOptions& vopts, std::ostream& log,
               const verify::RateBackend& backend = {});
int run_optimize(const CommonOptions& opts, std::ostream& log);
int run_train(const CommonOptions& opts, std::ostream& log);
int run_eval(const CommonOptions& opts, std::ostream& log);

}  // namespace mcr2::cli
