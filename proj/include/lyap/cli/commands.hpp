#pragma once

#include <string>

#include "lyap/cli/config.hpp"

namespace lyap::cli {

// Exit code contract: 0 success, 1 bad config or internal diagnostic,
// 2 infeasible target, 3 nonconverged dual, 4 I/O failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitNonconverged = 3;
inline constexpr int kExitIo = 4;

struct RunOutcome {
    int exit_code = kExitOk;
    Json report;
};

/// Dispatches one of: decompose, oracle, probe, detect, perturb, alpha.
/// Writes configured output files; the report document is always returned.
RunOutcome run_command(const std::string& command, const RunConfig& cfg);

}  // namespace lyap::cli
