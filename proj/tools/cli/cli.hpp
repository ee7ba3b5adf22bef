#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cli_config.hpp"

namespace tbsynth::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitFixExhausted = 2,
  kExitBlueprintRejected = 3,
};

// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const EnvLookup& env = process_env());

}  // namespace tbsynth::cli
