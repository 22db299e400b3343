#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ehist/linalg.hpp"
#include "ehist/report.hpp"

namespace ehist::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitVerdictFail = 2;

struct Options {
  std::string command;
  std::optional<std::string> scenario;
  std::optional<std::string> out;
  double tol = 1e-10;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> restarts;
  std::optional<Index> dim;
  std::optional<std::uint64_t> cap;
  std::string format = "table";
  bool timing = false;
};

const std::vector<std::string>& commands();

// Runs one command. Input problems surface as ehist::Error.
Report execute(const Options& options);

// Full command line (without the program name). Writes the report to `out`
// and diagnostics to `err`; returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ehist::cli
