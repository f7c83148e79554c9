#pragma once

#include <exception>
#include <ostream>
#include <string>
#include <vector>

namespace mgeof::cli {

// Stable exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDomain = 2,
  kUnphysical = 3,
  kParse = 4,
  kOptimization = 5,
};

/// Environment variable holding the default optimizer seed.
inline constexpr const char* kSeedEnv = "MGEOF_SEED";

/// Writes a diagnostic for a failed command and returns its exit code.
int report_error(std::exception_ptr error, std::ostream& err);

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mgeof::cli
