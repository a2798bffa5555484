#pragma once

#include <cstdint>
#include <string>

#include "freebe/io.hpp"

namespace freebe::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNoConvergence = 2, kAssertionFailed = 3 };

struct RunOptions {
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    bool seed_given = false;
    int workers = 0;  // 0 = available parallelism
    bool verbose = false;
};

int cmd_solve(const io::json& config, const RunOptions& opts);
int cmd_clt_rate(const io::json& config, const RunOptions& opts);
int cmd_poly(const io::json& config, const RunOptions& opts);
int cmd_density(const io::json& config, const RunOptions& opts);
int cmd_check_linearization(const io::json& config, const RunOptions& opts);
int cmd_mc(const io::json& config, const RunOptions& opts);

/// Exit code for a library error: validation problems map to 1, numerical
/// failures to 2.
int exit_code_for(ErrorKind kind);

/// Full command line entry point.
int run(int argc, char** argv);

}  // namespace freebe::cli
