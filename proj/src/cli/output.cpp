#include "vegspots/cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>

#include "vegspots/errors.hpp"

namespace vegspots::cli {

namespace {

std::mutex& path_mutex(const std::filesystem::path& path) {
    static std::mutex registry_guard;
    static std::map<std::string, std::unique_ptr<std::mutex>> registry;
    const std::string key = std::filesystem::absolute(path).lexically_normal().string();
    std::lock_guard<std::mutex> lock(registry_guard);
    auto& slot = registry[key];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

}  // namespace

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::lock_guard<std::mutex> lock(path_mutex(path));
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

std::string branch_csv(const Branch& branch, double p_c) {
    std::string s = "index,p,p-p_c,l2norm,stability,fold_flag\n";
    for (std::size_t i = 0; i < branch.points.size(); ++i) {
        const BranchPoint& b = branch.points[i];
        s += fmt::format("{},{:.17g},{:.17g},{:.17g},{},{}\n", i, b.param, b.param - p_c, b.l2norm,
                         to_string(b.stability), b.fold_here ? 1 : 0);
    }
    return s;
}

std::string profile_csv(const Profile& profile, const RadialGrid& grid) {
    if (profile.size() != grid.T) throw DimensionMismatch("profile does not match the grid");
    std::string s = "r,n,w\n";
    for (int i = 0; i < grid.T; ++i) {
        s += fmt::format("{:.17g},{:.17g},{:.17g}\n", grid.r[i], profile.n[i], profile.w[i]);
    }
    return s;
}

ProfileTable read_profile_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || boost::algorithm::trim_copy(line) != "r,n,w") {
        throw ConfigError("'" + path.string() + "' lacks the r,n,w header");
    }
    ProfileTable t;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (boost::algorithm::trim_copy(line).empty()) continue;
        std::vector<std::string> cells;
        boost::algorithm::split(cells, line, boost::algorithm::is_any_of(","));
        if (cells.size() != 3) throw ConfigError(fmt::format("{}:{}: expected 3 columns", path.string(), row));
        try {
            t.r.push_back(std::stod(cells[0]));
            t.n.push_back(std::stod(cells[1]));
            t.w.push_back(std::stod(cells[2]));
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("{}:{}: not a number", path.string(), row));
        }
    }
    return t;
}

double stored_residual(const SystemDef& sys, const ProfileTable& table, double param, double r_star) {
    const int T = static_cast<int>(table.n.size());
    const RadialGrid grid = build_grid(r_star, T);
    const Eigen::VectorXd n = Eigen::Map<const Eigen::VectorXd>(table.n.data(), T);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(table.w.data(), T);
    return residual(sys, stack_state(n, w), param, grid).lpNorm<Eigen::Infinity>();
}

json params_json(const ModelParams& params) {
    return json{{"gamma", params.gamma}, {"sigma", params.sigma}, {"nu_mort", params.nu_mort},
                {"beta", params.beta},   {"delta", params.delta}, {"rho", params.rho},
                {"p", params.p}};
}

json eigen_report_json(const EigenReport& report) {
    json eig = json::array();
    for (const auto& z : report.rightmost) eig.push_back(json{{"re", z.real()}, {"im", z.imag()}});
    return json{{"banner", report.banner},
                {"method", to_string(report.method)},
                {"classification", to_string(report.classification)},
                {"certified", report.certified},
                {"tol_zero", report.tol_zero},
                {"max_real", report.rightmost.empty() ? json(nullptr) : json(report.max_real())},
                {"rightmost", eig},
                {"note", report.note}};
}

json branch_summary_json(const Branch& branch) {
    json folds = json::array();
    for (const Fold& f : branch.folds()) folds.push_back(json{{"index", f.index}, {"p", f.param}});
    double lo = INFINITY, hi = -INFINITY;
    for (const BranchPoint& b : branch.points) {
        lo = std::min(lo, b.param);
        hi = std::max(hi, b.param);
    }
    json j{{"family", to_string(branch.family)},
           {"points", branch.points.size()},
           {"terminated_reason", to_string(branch.terminated_reason)},
           {"message", branch.message},
           {"folds", folds}};
    if (!branch.points.empty()) {
        j["p_min"] = lo;
        j["p_max"] = hi;
    }
    return j;
}

const char* family_colour(BranchFamily family) {
    switch (family) {
        case BranchFamily::SpotA: return "#1f4e9c";
        case BranchFamily::GapSub: return "#b8341b";
        case BranchFamily::GapSuper: return "#2e8540";
        case BranchFamily::UniformVegetated: return "#555555";
        case BranchFamily::UniformBare: return "#999999";
    }
    return "#000000";
}

std::string bifurcation_svg(const std::vector<DiagramCurve>& curves, double p_c, const std::string& title) {
    const double W = 720, H = 480, left = 70, right = 170, top = 40, bottom = 55;
    double xmin = INFINITY, xmax = -INFINITY, ymax = 0;
    for (const auto& c : curves) {
        if (!c.branch) continue;
        for (const auto& b : c.branch->points) {
            xmin = std::min(xmin, b.param - p_c);
            xmax = std::max(xmax, b.param - p_c);
            ymax = std::max(ymax, b.l2norm);
        }
    }
    if (!(xmin < xmax)) {
        xmin = -0.05;
        xmax = 0.05;
    }
    const double pad = 0.04 * (xmax - xmin);
    xmin -= pad;
    xmax += pad;
    if (!(ymax > 0)) ymax = 1;
    ymax *= 1.05;
    const double pw = W - left - right, ph = H - top - bottom;
    auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto Y = [&](double y) { return top + (1.0 - y / ymax) * ph; };

    std::ostringstream s;
    s << fmt::format(R"svg(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">)svg", W, H,
                     W, H)
      << "\n";
    s << fmt::format(R"svg(<rect width="{}" height="{}" fill="white"/>)svg", W, H) << "\n";
    s << fmt::format(R"svg(<text x="{}" y="22" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>)svg",
                     left + pw / 2, title)
      << "\n";
    s << fmt::format(R"svg(<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>)svg", left, top, pw, ph)
      << "\n";
    for (int t = 0; t <= 5; ++t) {
        const double xv = xmin + t * (xmax - xmin) / 5, yv = t * ymax / 5;
        s << fmt::format(R"svg(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="11" text-anchor="middle">{:.3f}</text>)svg",
                         X(xv), top + ph + 16, xv)
          << "\n";
        s << fmt::format(R"svg(<text x="{:.1f}" y="{:.1f}" font-family="sans-serif" font-size="11" text-anchor="end">{:.3g}</text>)svg",
                         left - 6, Y(yv) + 4, yv)
          << "\n";
    }
    if (xmin < 0 && xmax > 0) {
        s << fmt::format(R"svg(<line x1="{0:.1f}" y1="{1}" x2="{0:.1f}" y2="{2}" stroke="#bbbbbb"/>)svg", X(0), top,
                         top + ph)
          << "\n";
    }
    s << fmt::format(R"svg(<text x="{}" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle">p - p_c</text>)svg",
                     left + pw / 2, H - 12)
      << "\n";
    s << fmt::format(R"svg(<text x="18" y="{}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">||n||</text>)svg",
                     top + ph / 2, top + ph / 2)
      << "\n";

    int legend = 0;
    for (const auto& c : curves) {
        if (!c.branch || c.branch->points.empty()) continue;
        const auto& P = c.branch->points;
        std::size_t i = 0;
        while (i + 1 < P.size()) {
            const bool stable = P[i].stability == Stability::Stable && P[i + 1].stability == Stability::Stable;
            std::size_t j = i + 1;
            while (j + 1 < P.size() &&
                   ((P[j].stability == Stability::Stable && P[j + 1].stability == Stability::Stable) == stable)) {
                ++j;
            }
            s << "<polyline fill=\"none\" stroke=\"" << c.colour << "\" stroke-width=\"1.6\""
              << (stable ? "" : " stroke-dasharray=\"5,4\"") << " points=\"";
            for (std::size_t t = i; t <= j; ++t) {
                s << fmt::format("{:.2f},{:.2f} ", X(P[t].param - p_c), Y(P[t].l2norm));
            }
            s << "\"/>\n";
            i = j;
        }
        for (const Fold& f : c.branch->folds()) {
            const BranchPoint& b = P[f.index];
            s << fmt::format(R"svg(<circle cx="{:.2f}" cy="{:.2f}" r="3.5" fill="none" stroke="{}"/>)svg",
                             X(b.param - p_c), Y(b.l2norm), c.colour)
              << "\n";
        }
        const double ly = top + 12 + 18 * legend++;
        s << fmt::format(R"svg(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"/>)svg", W - right + 12,
                         ly, W - right + 36, ly, c.colour)
          << "\n";
        s << fmt::format(R"svg(<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>)svg", W - right + 42,
                         ly + 4, c.label)
          << "\n";
    }
    const double ly = top + 12 + 18 * legend + 8;
    s << fmt::format(R"svg(<text x="{}" y="{}" font-family="sans-serif" font-size="11">solid: stable</text>)svg",
                     W - right + 12, ly)
      << "\n";
    s << fmt::format(R"svg(<text x="{}" y="{}" font-family="sans-serif" font-size="11">dashed: unstable</text>)svg",
                     W - right + 12, ly + 15)
      << "\n";
    s << "</svg>\n";
    return s.str();
}

}  // namespace vegspots::cli
