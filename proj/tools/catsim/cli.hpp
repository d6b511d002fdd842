#pragma once

// Batch front end: strict JSON run configs, experiment runners, CSV and
// run-summary emission.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace catsim::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 1;
inline constexpr int exit_numerical = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const char* version();

struct RunOptions {
  // Base directory for relative output paths; the config's directory when empty.
  std::filesystem::path output_dir;
};

/// Parses and validates the whole config, then runs it. Diagnostics go to
/// `err`. Returns one of the exit codes above.
int run_config_file(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& err);

}  // namespace catsim::cli
