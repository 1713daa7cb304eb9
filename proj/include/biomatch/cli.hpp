#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace biomatch::cli {

enum ExitCode : int {
  kExitOk = 0,
  /// Reject, NoMatch or UnknownId.
  kExitNegative = 1,
  kExitUsage = 2,
  kExitFault = 3,
};

/// Runs one `biomatch` invocation. argv[0] is the program name. Results go
/// to `out` as space-separated `key:value` pairs, one record per line;
/// usage text and faults go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Raw sample file: one decimal float per line, blank lines ignored.
std::vector<double> read_sample_file(const std::string& path);
void write_sample_file(const std::string& path, std::span<const double> values);

}  // namespace biomatch::cli
