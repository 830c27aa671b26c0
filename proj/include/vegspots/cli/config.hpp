#pragma once

#include <string>
#include <vector>

#include "vegspots/continuation.hpp"
#include "vegspots/model.hpp"
#include "vegspots/stability.hpp"

namespace vegspots::cli {

struct ScenarioConfig {
    ModelParams params;
    std::vector<double> rho_cases{1.5, 2.0, 2.5, 2.7};

    std::string preset = "desk";
    double r_star = 300.0;
    int T = 1000;

    std::vector<BranchFamily> families{BranchFamily::SpotA, BranchFamily::GapSub, BranchFamily::GapSuper};
    std::string output_dir = "vegspots_out";

    SpotStartOptions spot;
    double gap_eps = 0.3;          ///< leading-order gap seeds sit at p_c -/+ eps^2/(b0 delta)
    ContinuationOptions continuation = scenario_continuation_defaults();
    ExchangeOptions exchange;
    double newton_tol = 1e-10;

    /// amplitude subcommand; NaN means "take c0, c3 from the Turing normal form".
    double gl_c0 = NAN;
    double gl_c3 = NAN;

    /// solve / stability subcommands; NaN means "the family's seed value".
    double solve_p = NAN;

    int max_workers = 4;

    static ContinuationOptions scenario_continuation_defaults();
};

/// Known preset names: "desk" (300, 1000) and "paper" (400, 2000).
void apply_preset(ScenarioConfig& cfg, const std::string& name);

/// Reads a key = value file with [model], [scenario], [grid], [seeds],
/// [continuation], [stability], [amplitude], [solve] and [output] sections.
/// Keys left out keep their defaults. Unknown sections or keys, and values
/// that do not parse, raise ConfigError.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

/// Throws InvalidParams / ConfigError on inconsistent settings.
void validate(const ScenarioConfig& cfg);

BranchFamily parse_family(const std::string& name);
EigenMethod parse_eigen_method(const std::string& name);

}  // namespace vegspots::cli
