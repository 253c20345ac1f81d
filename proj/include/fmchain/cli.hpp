#pragma once

#include "fmchain/common.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fmc::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kInfeasible = 3,
  kNumeric = 4,
};

int exit_code_for(ErrorKind kind) noexcept;

struct RunConfig {
  std::string command;     // classical | fermi | scan | spectrum
  std::string input;
  std::string out_dir = ".";
  std::optional<long> n;
  std::optional<long> quad;
  std::optional<long> grid;
  std::optional<long> steps;
  std::uint64_t seed = 1;
  bool bits = false;

  Real unit() const noexcept;
  const char* unit_name() const noexcept { return bits ? "bits" : "nats"; }
};

/// Each command writes its artifacts into config.out_dir and a one-line
/// JSON summary to `out`. Errors propagate as fmc::Error.
void cmd_classical(const RunConfig& config, std::ostream& out);
void cmd_fermi(const RunConfig& config, std::ostream& out);
void cmd_scan(const RunConfig& config, std::ostream& out);
void cmd_spectrum(const RunConfig& config, std::ostream& out);

/// Full command line (args[0] is the program name). Failures are reported
/// as {"error": {...}} on `err` and mapped to the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fmc::cli
