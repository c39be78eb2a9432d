#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bdtr::cli {

/// Exit statuses; one per diagnostic category.
enum ExitCode : int {
    ok = 0,
    usage = 2,
    parse_failure = 3,
    invalid_scenario = 4,
    bad_configuration = 5,
    numerical_failure = 6,
    io_failure = 7,
};

/// Entry point of the `bdtr` tool with subcommands loss, metrics, toy, raster and template.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bdtr::cli
