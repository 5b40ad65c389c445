#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mzzb {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3 };

/// Full command line including the program name. Diagnostics go to err.
int run_cli(const std::vector<std::string>& args, std::ostream& err);

/// Writes content to path through a temporary file in the same directory
/// followed by a rename.
void write_atomically(const std::string& path, const std::string& content);

}  // namespace mzzb
