#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace smoothfix {

/// Exit contract: pass / fail / inconclusive-or-truncated are distinct so CI
/// can branch on Monte Carlo verdicts; config problems get their own code.
enum ExitCode : int {
    kExitPass = 0,
    kExitFail = 1,
    kExitInconclusive = 2,
    kExitConfigError = 64,
};

struct RunOptions {
    std::filesystem::path config_path;
    std::filesystem::path out_dir;       ///< overrides the config's "out"
    std::int64_t seed_override = -1;     ///< overrides the config's "seed" when >= 0
    int workers_override = 0;            ///< overrides config / SMOOTHFIX_WORKERS when > 0
};

/// Parses, validates, and executes one experiment configuration; writes the
/// manifest and artifact files atomically under the output directory.
int run_experiment(const RunOptions& options);

/// Same, but the configuration is given as a JSON string (used by tests).
int run_experiment_json(const std::string& config_json, const std::filesystem::path& out_dir,
                        std::int64_t seed_override = -1, int workers = 1);

}  // namespace smoothfix
