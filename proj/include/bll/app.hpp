#pragma once

// Subcommand dispatch behind the bll executable.

#include "bll/errors.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bll {

struct AppOptions {
    std::string command;
    std::string config_path;
    std::optional<std::string> out_dir; // overrides [output] directory
    unsigned threads = 1;
    bool quiet = false;
};

const std::vector<std::string>& subcommands();

// Process exit status for each error category; 0 is success, 1 an
// unexpected failure.
int exit_code(ErrorKind kind);

// Runs one subcommand. Progress goes to `out` unless quiet, warnings and
// errors to `err`. Returns the exit status.
int run_app(const AppOptions& opt, std::ostream& out, std::ostream& err);

} // namespace bll
