#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pimbs {

// exit codes shared by all subcommands
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;   // config or usage error
constexpr int kExitIo = 3;       // filesystem failure
constexpr int kExitNumeric = 4;  // numerical failure (failed seeds, infeasible QP)

/// Entry point of the `pimbs` tool, callable in-process for tests.
/// `args` excludes the program name.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pimbs
