#pragma once

#include <cmath>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vegspots/cli/config.hpp"
#include "vegspots/cli/output.hpp"
#include "vegspots/continuation.hpp"

namespace vegspots::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidInput = 2;

/// Flags shared by every subcommand. Empty / zero values leave the config alone.
struct CommandLine {
    std::string config_path;
    std::string out;
    std::string preset;
    std::vector<double> rho;
    std::vector<std::string> family;
    int max_workers = 0;
};

/// Loads the config file (or the defaults), applies flag overrides and validates.
ScenarioConfig resolve_config(const CommandLine& cl);

/// Bifurcation-point record for one shading value: closed-form constants,
/// normal-form coefficients, availability flags and the full-model onset.
json bifpoint_record(const ModelParams& params);

/// Converged starting profile of a family at the config's grid.
/// SpotA: large-core spot below p1 (spot_a_start). Gaps: leading-order seed
/// at gap_eps followed by Newton. Uniform families: the uniform state at params.p.
Profile seed_profile(const ScenarioConfig& cfg, const ModelParams& params, BranchFamily family,
                     const RadialGrid& grid);

struct BranchRun {
    double rho = 0.0;
    BranchFamily family = BranchFamily::SpotA;
    ModelParams params;
    RadialGrid grid;
    std::optional<Branch> branch;
    std::string error;          ///< empty on success
    double seconds = 0.0;
    double start_param = NAN;   ///< parameter of the seed profile
    std::optional<double> onset;
    std::optional<double> extent;
};

/// Seeds and traces one branch in both directions with stability. Failures
/// are caught and reported in BranchRun::error.
BranchRun run_branch(const ScenarioConfig& cfg, double rho, BranchFamily family);

/// Writes branch CSV and landmark profiles of a finished run into dir and
/// returns its manifest entry.
json write_branch_outputs(const BranchRun& run, const std::filesystem::path& dir);

int cmd_bifpoints(const ScenarioConfig& cfg, std::ostream& out);
int cmd_uniform(const ScenarioConfig& cfg, std::ostream& out);
int cmd_amplitude(const ScenarioConfig& cfg, std::ostream& out);
int cmd_solve(const ScenarioConfig& cfg, std::ostream& out);
int cmd_stability(const ScenarioConfig& cfg, std::ostream& out);
int cmd_continue(const ScenarioConfig& cfg, std::ostream& out);
int cmd_scenario(const ScenarioConfig& cfg, std::ostream& out);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv);

}  // namespace vegspots::cli
