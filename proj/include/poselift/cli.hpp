#pragma once

#include <string>
#include <vector>

namespace poselift {

/// Runs the batch CLI (subcommands: project | lift | evaluate | cluster |
/// retarget | augment | fuse). Returns the process exit code: 0 on success,
/// 1 on input errors, 2 on runtime failures. POSELIFT_LOG controls verbosity
/// (quiet | info | debug).
int run_cli(const std::vector<std::string>& args);

}  // namespace poselift
