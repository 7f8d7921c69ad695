#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sandpile::cli {

enum ExitCode : int { kOk = 0, kViolation = 1, kUsage = 2, kFailure = 3 };

/// Everything that determines a run's outputs. Serialized into every report.
struct RunConfig {
  std::string subcommand;
  int d = 2;
  std::int64_t n = 0;
  std::vector<std::int64_t> schedule;
  std::string strategy = "sweep";
  int threads = 1;
  std::int64_t tile = 32;
  std::uint64_t seed = 0;
  double mem_cap_gb = 8.0;
  double tol = 1e-10;
  double radius = 0.0;
  std::string in;
  std::string out;
  std::string odometer_out;
  std::string report;
  std::string fields_dir;
  std::string dump_dir = "counterexamples";
  std::string crop;
  std::string palette = "default";
  std::int64_t plane = 0;
  std::vector<std::string> phi;
  int samples = 256;
};

nlohmann::ordered_json to_json(const RunConfig& config);

/// Full command line handling; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sandpile::cli
