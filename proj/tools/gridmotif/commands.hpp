#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridmotif::cli {

/// Runs `gridmotif <command> --config <file> [--out <dir>] [--key value ...]`.
/// args excludes the program name. Summaries go to out; failures print one
/// JSON error record to err. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridmotif::cli
