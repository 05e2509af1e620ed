#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "diffstiff/evaluator.hpp"

namespace diffstiff::cli {

enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,
    kValidation = 2,
    kSingular = 3,
    kOptimizerFailure = 4,
};

struct Hooks {
    /// Called on every Evaluator the gradcheck command builds.
    std::function<void(Evaluator&)> evaluator;
};

/// Runs one command line (without the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Hooks& hooks = {});

}  // namespace diffstiff::cli
