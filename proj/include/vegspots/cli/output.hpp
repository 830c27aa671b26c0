#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vegspots/continuation.hpp"
#include "vegspots/discretize.hpp"
#include "vegspots/solver.hpp"
#include "vegspots/stability.hpp"

namespace vegspots::cli {

using nlohmann::json;

/// Writes the whole file in one go. Writers that target the same path are
/// serialized; distinct paths proceed in parallel. Parent directories are
/// created on demand.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Columns: index,p,p-p_c,l2norm,stability,fold_flag
std::string branch_csv(const Branch& branch, double p_c);

/// Columns: r,n,w, every value printed with 17 significant digits.
std::string profile_csv(const Profile& profile, const RadialGrid& grid);

struct ProfileTable {
    std::vector<double> r, n, w;
};

/// Parses a file written by profile_csv. Throws ConfigError on malformed input.
ProfileTable read_profile_csv(const std::filesystem::path& path);

/// Max-norm residual of a stored profile, recomputed on build_grid(r_star, T).
double stored_residual(const SystemDef& sys, const ProfileTable& table, double param, double r_star);

json params_json(const ModelParams& params);
json eigen_report_json(const EigenReport& report);
/// Summary of a branch: family, termination, folds, point count, parameter range.
json branch_summary_json(const Branch& branch);

/// One curve of a bifurcation diagram.
struct DiagramCurve {
    std::string label;
    std::string colour;
    const Branch* branch = nullptr;
};

/// Self-contained SVG plot of l2norm against p - p_c. Stable stretches are
/// drawn solid, everything else dashed, folds marked by open circles.
std::string bifurcation_svg(const std::vector<DiagramCurve>& curves, double p_c, const std::string& title);

/// Stroke colour used for each family in the diagrams.
const char* family_colour(BranchFamily family);

}  // namespace vegspots::cli
