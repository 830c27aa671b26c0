#include "vegspots/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "vegspots/amplitude.hpp"
#include "vegspots/errors.hpp"
#include "vegspots/model.hpp"
#include "vegspots/solver.hpp"
#include "vegspots/stability.hpp"

namespace vegspots::cli {

namespace fs = std::filesystem;

namespace {

std::mutex log_mutex;

void log_line(std::ostream& out, const std::string& line) {
    std::lock_guard<std::mutex> lock(log_mutex);
    out << line << '\n' << std::flush;
}

std::string rho_tag(double rho) { return fmt::format("rho{:g}", rho); }

std::string family_tag(BranchFamily f) { return to_string(f); }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

bool is_gap(BranchFamily f) { return f == BranchFamily::GapSub || f == BranchFamily::GapSuper; }

ApproachOptions approach_for(BranchFamily f) {
    ApproachOptions ao;
    if (is_gap(f)) ao.amplitude_exponent = 1.0;
    return ao;
}

template <class F>
void run_pool(std::size_t tasks, int workers, F&& body) {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const std::size_t n = std::min<std::size_t>(tasks, static_cast<std::size_t>(std::max(workers, 1)));
    for (std::size_t t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < tasks; i = next++) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

double first_rho(const ScenarioConfig& cfg) {
    return cfg.rho_cases.empty() ? cfg.params.rho : cfg.rho_cases.front();
}

BranchFamily first_family(const ScenarioConfig& cfg) {
    return cfg.families.empty() ? BranchFamily::SpotA : cfg.families.front();
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json profile_stats(const Profile& prof) {
    const double far = prof.n[prof.size() - 1];
    return json{{"p", prof.param},
                {"converged", prof.converged},
                {"residual_norm", prof.residual_norm},
                {"iterations", prof.iterations},
                {"l2norm", prof.l2norm()},
                {"n_core", prof.n[0]},
                {"n_far", far},
                {"amplitude", (prof.n.array() - far).abs().maxCoeff()},
                {"min_n", prof.n.minCoeff()},
                {"physical", prof.n.minCoeff() >= 0.0}};
}

/// Profile at an optional requested p, continued by Newton from the seed.
Profile solve_profile(const ScenarioConfig& cfg, const ModelParams& params, BranchFamily family,
                      const RadialGrid& grid) {
    Profile prof = seed_profile(cfg, params, family, grid);
    if (std::isfinite(cfg.solve_p) && cfg.solve_p != prof.param) {
        NewtonOptions no = cfg.spot.newton;
        no.tol = cfg.newton_tol;
        prof = newton_solve(SystemDef::full(params), prof.state(), cfg.solve_p, grid, no);
    }
    return prof;
}

}  // namespace

ScenarioConfig resolve_config(const CommandLine& cl) {
    ScenarioConfig cfg = cl.config_path.empty() ? ScenarioConfig{} : load_config(cl.config_path);
    if (!cl.preset.empty()) apply_preset(cfg, cl.preset);
    if (!cl.out.empty()) cfg.output_dir = cl.out;
    if (!cl.rho.empty()) cfg.rho_cases = cl.rho;
    if (!cl.family.empty()) {
        cfg.families.clear();
        for (const auto& f : cl.family) cfg.families.push_back(parse_family(f));
    }
    if (cl.max_workers > 0) cfg.max_workers = cl.max_workers;
    validate(cfg);
    return cfg;
}

json bifpoint_record(const ModelParams& params) {
    params.validate();
    json rec;
    rec["rho"] = params.rho;
    rec["p_c"] = critical_precipitation(params);
    rec["within_reduction_bound"] = params.within_reduction_bound();
    rec["omega_star"] = kOmegaStar;
    try {
        const ReducedParams rp = reduced_params(params);
        rec["a0"] = rp.a0;
        rec["b0"] = rp.b0;
        rec["a"] = rp.a;
        rec["b"] = rp.b;
        rec["ab"] = rp.a * rp.b;
        rec["K"] = rp.K;
        const NormalFormCoeffs hom = normal_form_homogeneous(rp);
        rec["homogeneous"] = json{{"c0", hom.c0}, {"c2", hom.c2}};
        if (rp.turing) {
            const NormalFormCoeffs tur = normal_form_turing(rp);
            rec["k"] = rp.turing->k;
            rec["omega"] = rp.turing->omega;
            rec["P0"] = rp.turing->P0;
            rec["turing"] = json{{"c0", tur.c0}, {"c3", tur.c3}, {"nu_core", tur.nu_core}};
            const bool above = rp.turing->omega > kOmegaStar;
            rec["omega_above_omega_star"] = above;
            rec["spotB_available"] = above;
            rec["rings_available"] = above;
        } else {
            rec["turing"] = nullptr;
            rec["omega_above_omega_star"] = false;
            rec["spotB_available"] = false;
            rec["rings_available"] = false;
        }
    } catch (const OutOfValidity& e) {
        rec["reduction_error"] = e.what();
        rec["spotB_available"] = false;
        rec["rings_available"] = false;
    }
    try {
        const TuringOnset on = turing_onset_full(params);
        rec["p1"] = on.p1;
        rec["k1"] = on.k1;
        rec["p1_reduced_estimate"] = optional_json(on.p1_reduced_estimate);
    } catch (const NoOnsetFound& e) {
        rec["p1"] = nullptr;
        rec["k1"] = nullptr;
        rec["onset_error"] = e.what();
    }
    return rec;
}

Profile seed_profile(const ScenarioConfig& cfg, const ModelParams& params, BranchFamily family,
                     const RadialGrid& grid) {
    const SystemDef sys = SystemDef::full(params);
    NewtonOptions no = cfg.spot.newton;
    no.tol = cfg.newton_tol;
    switch (family) {
        case BranchFamily::SpotA: {
            SpotStartOptions so = cfg.spot;
            so.newton.tol = cfg.newton_tol;
            return spot_a_start(params, grid, so);
        }
        case BranchFamily::GapSub:
        case BranchFamily::GapSuper: {
            const GapBranch gb = family == BranchFamily::GapSub ? GapBranch::SubBare : GapBranch::SuperVegetated;
            const LeadingOrderProfile lo = leading_order_gap(params, cfg.gap_eps, gb, grid);
            Profile prof = newton_solve(sys, stack_state(to_vector(lo.n_of_r), to_vector(lo.w_of_r)), lo.p, grid, no);
            if (!prof.converged) {
                throw SeedFailure(fmt::format("Newton from the leading-order {} seed at p = {:.6f} did not converge",
                                              to_string(family), lo.p));
            }
            return prof;
        }
        case BranchFamily::UniformVegetated:
        case BranchFamily::UniformBare: {
            const auto u = family == BranchFamily::UniformBare ? sys.bare_state(params.p)
                                                                : sys.vegetated_state(params.p);
            const Eigen::VectorXd n = Eigen::VectorXd::Constant(grid.T, u[0]);
            const Eigen::VectorXd w = Eigen::VectorXd::Constant(grid.T, u[1]);
            return newton_solve(sys, stack_state(n, w), params.p, grid, no);
        }
    }
    throw InvalidParams("unknown family");
}

BranchRun run_branch(const ScenarioConfig& cfg, double rho, BranchFamily family) {
    BranchRun run;
    run.rho = rho;
    run.family = family;
    run.params = cfg.params.with_rho(rho);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        run.grid = build_grid(cfg.r_star, cfg.T);
        const SystemDef sys = SystemDef::full(run.params);
        const Profile start = seed_profile(cfg, run.params, family, run.grid);
        run.start_param = start.param;
        ContinuationOptions co = cfg.continuation;
        co.newton.tol = cfg.newton_tol;
        if (family == BranchFamily::SpotA) {
            run.branch = trace_localised_branch(sys, start, run.grid, family, co, cfg.exchange);
        } else {
            if (!is_gap(family)) co.check_tail = false;
            const Branch back = continue_branch(sys, start, run.grid, -1, family, co);
            const Branch fwd = continue_branch(sys, start, run.grid, +1, family, co);
            run.branch = join_branches(back, fwd);
        }
        if (family == BranchFamily::SpotA || is_gap(family)) {
            const ApproachOptions ao = approach_for(family);
            try {
                run.onset = detect_onset(*run.branch, ao);
                run.extent = branch_extent_in_p(*run.branch, ao);
            } catch (const Error&) {
                // Onset and extent stay absent; the branch itself is still reported.
            }
        }
    } catch (const std::exception& e) {
        run.error = e.what();
    }
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

json write_branch_outputs(const BranchRun& run, const fs::path& dir) {
    json entry{{"rho", run.rho}, {"family", to_string(run.family)}, {"seconds", run.seconds}};
    if (!run.branch) {
        entry["status"] = "failed";
        entry["error"] = run.error;
        return entry;
    }
    const Branch& br = *run.branch;
    const double p_c = critical_precipitation(run.params);
    const SystemDef sys = SystemDef::full(run.params);
    const std::string stem = family_tag(run.family) + "_" + rho_tag(run.rho);

    const std::string csv = "branch_" + stem + ".csv";
    write_text_file(dir / csv, branch_csv(br, p_c));
    entry["status"] = "ok";
    entry["csv"] = csv;
    entry["summary"] = branch_summary_json(br);
    entry["p_c"] = p_c;
    entry["onset"] = optional_json(run.onset);
    entry["extent"] = optional_json(run.extent);

    json landmarks = json::array();
    for (std::size_t i = 0; i < br.points.size(); ++i) {
        const BranchPoint& b = br.points[i];
        if (!b.profile) continue;
        std::string kind = "restart";
        if (i == 0 || i + 1 == br.points.size()) kind = "end";
        else if (b.fold_here) kind = "fold";
        else if (b.profile->param == run.start_param) kind = "start";
        const std::string file = fmt::format("profile_{}_pt{:04d}.csv", stem, i);
        write_text_file(dir / file, profile_csv(*b.profile, run.grid));
        const double res = residual(sys, b.profile->state(), b.profile->param, run.grid).lpNorm<Eigen::Infinity>();
        landmarks.push_back(json{{"file", file},
                                 {"kind", kind},
                                 {"index", i},
                                 {"p", b.profile->param},
                                 {"stability", to_string(b.stability)},
                                 {"residual_norm", res}});
    }
    entry["r_star"] = run.grid.r_star;
    entry["T"] = run.grid.T;
    entry["landmarks"] = landmarks;
    return entry;
}

int cmd_bifpoints(const ScenarioConfig& cfg, std::ostream& out) {
    const fs::path dir = cfg.output_dir;
    json records = json::array();
    int failures = 0;
    std::ostringstream table;
    table << fmt::format("{:>5} {:>9} {:>8} {:>8} {:>9} {:>8} {:>8} {:>9} {:>9} {:>9} {:>6} {:>10} {:>9}\n", "rho",
                         "p_c", "a", "b", "K", "k", "omega", "P0", "c3", "nu_core", "spotB", "p1", "k1");
    for (double rho : cfg.rho_cases) {
        const ModelParams mp = cfg.params.with_rho(rho);
        try {
            const json r = bifpoint_record(mp);
            records.push_back(r);
            if (r.contains("onset_error") || r.contains("reduction_error")) ++failures;
            auto num = [&](const char* key, int prec) -> std::string {
                if (r.contains(key) && r[key].is_number()) return fmt::format("{:.{}f}", r[key].get<double>(), prec);
                return "-";
            };
            const std::string c3 = r.contains("turing") && r["turing"].is_object()
                                       ? fmt::format("{:.5f}", r["turing"]["c3"].get<double>())
                                       : "-";
            const std::string nu = r.contains("turing") && r["turing"].is_object()
                                       ? fmt::format("{:.5f}", r["turing"]["nu_core"].get<double>())
                                       : "-";
            table << fmt::format("{:>5g} {:>9} {:>8} {:>8} {:>9} {:>8} {:>8} {:>9} {:>9} {:>9} {:>6} {:>10} {:>9}\n",
                                 rho, num("p_c", 6), num("a", 5), num("b", 5), num("K", 5), num("k", 5),
                                 num("omega", 5), num("P0", 6), c3, nu,
                                 r.value("spotB_available", false) ? "yes" : "no", num("p1", 6), num("k1", 5));
        } catch (const InvalidParams&) {
            throw;
        } catch (const Error& e) {
            ++failures;
            records.push_back(json{{"rho", rho}, {"error", e.what()}});
            table << fmt::format("{:>5g} error: {}\n", rho, e.what());
        }
    }
    const json doc{{"params", params_json(cfg.params)}, {"omega_star", kOmegaStar}, {"records", records}};
    write_text_file(dir / "bifpoints.json", doc.dump(2) + "\n");
    write_text_file(dir / "bifpoints.txt", table.str());
    out << table.str();
    return failures == 0 ? kExitOk : kExitFailure;
}

int cmd_uniform(const ScenarioConfig& cfg, std::ostream& out) {
    json records = json::array();
    std::ostringstream table;
    table << fmt::format("{:>5} {:>9} {:>10} {:>14} {:>14} {:>9} {:>10}\n", "rho", "p", "kind", "n*", "w*", "physical",
                         "residual");
    for (double rho : cfg.rho_cases) {
        const ModelParams mp = cfg.params.with_rho(rho);
        json states = json::array();
        for (const UniformState& u : uniform_states(mp)) {
            const char* kind = u.kind == UniformKind::Bare ? "bare" : "vegetated";
            states.push_back(json{{"kind", kind},
                                  {"n_star", u.n_star},
                                  {"w_star", u.w_star},
                                  {"physical", u.physical},
                                  {"residual", u.residual}});
            table << fmt::format("{:>5g} {:>9.5f} {:>10} {:>14.10f} {:>14.10f} {:>9} {:>10.2e}\n", rho, mp.p, kind,
                                 u.n_star, u.w_star, u.physical ? "yes" : "no", u.residual);
        }
        records.push_back(json{{"rho", rho}, {"p", mp.p}, {"p_c", critical_precipitation(mp)}, {"states", states}});
    }
    write_text_file(fs::path(cfg.output_dir) / "uniform.json",
                    json{{"params", params_json(cfg.params)}, {"records", records}}.dump(2) + "\n");
    out << table.str();
    return kExitOk;
}

int cmd_amplitude(const ScenarioConfig& cfg, std::ostream& out) {
    const fs::path dir = cfg.output_dir;
    auto gs_json = [](const GLGroundState& g) {
        return json{{"c0", g.c0},
                    {"c3", g.c3},
                    {"q_at_0", g.q_at_0},
                    {"q_at_0_shooting", g.q_at_0_shooting},
                    {"decay_rate", g.decay_rate},
                    {"max_residual", g.max_residual},
                    {"s_max", g.s_max},
                    {"points", g.s_grid.size()}};
    };
    auto gs_csv = [](const GLGroundState& g) {
        std::string s = "s,q\n";
        for (std::size_t i = 0; i < g.s_grid.size(); ++i) s += fmt::format("{:.17g},{:.17g}\n", g.s_grid[i], g.q[i]);
        return s;
    };

    const GLGroundState quad = solve_gl_quadratic();
    write_text_file(dir / "gl_quadratic.csv", gs_csv(quad));
    json doc{{"quadratic", gs_json(quad)}};
    out << fmt::format("quadratic: q(0) = {:.10f} (shooting {:.10f}), decay rate {:.6f}\n", quad.q_at_0,
                       quad.q_at_0_shooting, quad.decay_rate);

    double c0 = cfg.gl_c0, c3 = cfg.gl_c3;
    if (!std::isfinite(c0) || !std::isfinite(c3)) {
        const NormalFormCoeffs nf = normal_form_turing(reduced_params(cfg.params.with_rho(first_rho(cfg))));
        if (!std::isfinite(c0)) c0 = nf.c0;
        if (!std::isfinite(c3)) c3 = nf.c3;
    }
    try {
        const GLGroundState cub = solve_gl_cubic(c0, c3);
        write_text_file(dir / "gl_cubic.csv", gs_csv(cub));
        doc["cubic"] = gs_json(cub);
        doc["cubic"]["sqrt_c0"] = std::sqrt(c0);
        out << fmt::format("cubic (c0 = {:g}, c3 = {:g}): q0 = {:.10f}, decay rate {:.6f} (sqrt(c0) = {:.6f})\n", c0,
                           c3, cub.q_at_0, cub.decay_rate, std::sqrt(c0));
    } catch (const NoGroundState&) {
        doc["cubic"] = json{{"c0", c0}, {"c3", c3}, {"error", "NoGroundState"}};
        write_text_file(dir / "amplitude.json", doc.dump(2) + "\n");
        throw;
    }
    write_text_file(dir / "amplitude.json", doc.dump(2) + "\n");
    return kExitOk;
}

int cmd_solve(const ScenarioConfig& cfg, std::ostream& out) {
    const double rho = first_rho(cfg);
    const BranchFamily family = first_family(cfg);
    const ModelParams mp = cfg.params.with_rho(rho);
    const RadialGrid grid = build_grid(cfg.r_star, cfg.T);
    const fs::path dir = cfg.output_dir;
    const std::string stem = family_tag(family) + "_" + rho_tag(rho);

    json doc{{"family", to_string(family)}, {"rho", rho}, {"r_star", grid.r_star}, {"T", grid.T},
             {"params", params_json(mp)}};
    if (is_gap(family)) {
        const GapBranch gb = family == BranchFamily::GapSub ? GapBranch::SubBare : GapBranch::SuperVegetated;
        const LeadingOrderProfile lo = leading_order_gap(mp, cfg.gap_eps, gb, grid);
        Profile seed;
        seed.param = lo.p;
        seed.n = to_vector(lo.n_of_r);
        seed.w = to_vector(lo.w_of_r);
        write_text_file(dir / ("seed_" + stem + ".csv"), profile_csv(seed, grid));
        doc["seed"] = json{{"file", "seed_" + stem + ".csv"}, {"p", lo.p}, {"eps", cfg.gap_eps}, {"physical", lo.physical}};
    }
    const Profile prof = solve_profile(cfg, mp, family, grid);
    const std::string file = "solve_" + stem + ".csv";
    write_text_file(dir / file, profile_csv(prof, grid));
    doc["profile"] = profile_stats(prof);
    doc["profile"]["file"] = file;
    write_text_file(dir / "solve.json", doc.dump(2) + "\n");
    out << fmt::format("{} at rho = {:g}: p = {:.8f}, converged = {}, residual {:.2e}, n(0) = {:.6f}, n(r*) = {:.6f}\n",
                       to_string(family), rho, prof.param, prof.converged, prof.residual_norm, prof.n[0],
                       prof.n[grid.T - 1]);
    return prof.converged ? kExitOk : kExitFailure;
}

int cmd_stability(const ScenarioConfig& cfg, std::ostream& out) {
    const double rho = first_rho(cfg);
    const BranchFamily family = first_family(cfg);
    const ModelParams mp = cfg.params.with_rho(rho);
    const RadialGrid grid = build_grid(cfg.r_star, cfg.T);
    const Profile prof = solve_profile(cfg, mp, family, grid);
    if (!prof.converged) {
        out << "profile did not converge; no stability analysis\n";
        return kExitFailure;
    }
    const EigenReport rep = radial_stability(SystemDef::full(mp), prof, grid, cfg.continuation.stability);
    json doc = eigen_report_json(rep);
    doc["family"] = to_string(family);
    doc["rho"] = rho;
    doc["profile"] = profile_stats(prof);
    write_text_file(fs::path(cfg.output_dir) / "stability.json", doc.dump(2) + "\n");
    out << rep.banner << "\n";
    out << fmt::format("{} at rho = {:g}, p = {:.8f}: {} (max Re = {:.4e}, {}{})\n", to_string(family), rho,
                       prof.param, to_string(rep.classification), rep.max_real(), to_string(rep.method),
                       rep.certified ? ", certified" : ", uncertified");
    return rep.classification == Verdict::Unknown ? kExitFailure : kExitOk;
}

namespace {

int run_branches(const ScenarioConfig& cfg, const std::vector<std::pair<double, BranchFamily>>& tasks,
                 std::ostream& out, const char* manifest_name) {
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    std::vector<BranchRun> runs(tasks.size());
    std::vector<json> entries(tasks.size());
    run_pool(tasks.size(), cfg.max_workers, [&](std::size_t i) {
        const auto [rho, family] = tasks[i];
        log_line(out, fmt::format("[start] {} rho = {:g}", to_string(family), rho));
        runs[i] = run_branch(cfg, rho, family);
        try {
            entries[i] = write_branch_outputs(runs[i], dir);
        } catch (const std::exception& e) {
            entries[i] = json{{"rho", rho}, {"family", to_string(family)}, {"status", "failed"}, {"error", e.what()}};
            runs[i].branch.reset();
        }
        const BranchRun& r = runs[i];
        if (r.branch) {
            log_line(out, fmt::format("[done]  {} rho = {:g}: {} points, {} fold(s), {:.1f} s; {}", to_string(family),
                                      rho, r.branch->points.size(), r.branch->fold_count(), r.seconds,
                                      r.branch->message));
        } else {
            log_line(out, fmt::format("[fail]  {} rho = {:g}: {}", to_string(family), rho,
                                      entries[i].value("error", std::string("?"))));
        }
    });

    json diagrams = json::array();
    std::vector<double> rhos;
    for (const auto& t : tasks) {
        if (std::find(rhos.begin(), rhos.end(), t.first) == rhos.end()) rhos.push_back(t.first);
    }
    for (double rho : rhos) {
        std::vector<DiagramCurve> curves;
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (tasks[i].first != rho || !runs[i].branch) continue;
            curves.push_back(DiagramCurve{to_string(tasks[i].second), family_colour(tasks[i].second), &*runs[i].branch});
        }
        if (curves.empty()) continue;
        const double p_c = critical_precipitation(cfg.params.with_rho(rho));
        const std::string file = "diagram_" + rho_tag(rho) + ".svg";
        write_text_file(dir / file, bifurcation_svg(curves, p_c, fmt::format("rho = {:g}", rho)));
        diagrams.push_back(json{{"rho", rho}, {"file", file}});
    }

    int failed = 0;
    json branches = json::array();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!runs[i].branch) ++failed;
        branches.push_back(entries[i]);
    }
    json fam = json::array();
    for (BranchFamily f : cfg.families) fam.push_back(to_string(f));
    const json manifest{{"preset", cfg.preset},
                        {"r_star", cfg.r_star},
                        {"T", cfg.T},
                        {"params", params_json(cfg.params)},
                        {"rho_cases", cfg.rho_cases},
                        {"families", fam},
                        {"radial_caveat", kRadialCaveat},
                        {"branches", branches},
                        {"diagrams", diagrams},
                        {"failed", failed}};
    write_text_file(dir / manifest_name, manifest.dump(2) + "\n");
    log_line(out, fmt::format("{} of {} branches succeeded; manifest at {}", tasks.size() - failed, tasks.size(),
                              (dir / manifest_name).string()));
    return (!tasks.empty() && failed == static_cast<int>(tasks.size())) ? kExitFailure : kExitOk;
}

}  // namespace

int cmd_continue(const ScenarioConfig& cfg, std::ostream& out) {
    return run_branches(cfg, {{first_rho(cfg), first_family(cfg)}}, out, "continue.json");
}

int cmd_scenario(const ScenarioConfig& cfg, std::ostream& out) {
    std::vector<std::pair<double, BranchFamily>> tasks;
    for (double rho : cfg.rho_cases) {
        for (BranchFamily f : cfg.families) tasks.emplace_back(rho, f);
    }
    return run_branches(cfg, tasks, out, "manifest.json");
}

int run(int argc, char** argv) {
    CLI::App app{"Localised radial vegetation patterns: constants, ground states, branches and stability"};
    app.require_subcommand(1);
    CommandLine cl;
    app.add_option("--config", cl.config_path, "key = value configuration file");
    app.add_option("--out", cl.out, "output directory");
    app.add_option("--preset", cl.preset, "grid preset")->check(CLI::IsMember({"desk", "paper"}));
    app.add_option("--rho", cl.rho, "shading values, comma separated")->delimiter(',');
    app.add_option("--family", cl.family, "families, comma separated")->delimiter(',');
    app.add_option("--max-workers", cl.max_workers, "worker threads for scenario runs")->check(CLI::PositiveNumber);

    using Cmd = int (*)(const ScenarioConfig&, std::ostream&);
    const std::vector<std::tuple<const char*, const char*, Cmd>> commands{
        {"bifpoints", "closed-form constants, normal-form coefficients and the Turing onset", cmd_bifpoints},
        {"uniform", "uniform states at the configured p", cmd_uniform},
        {"amplitude", "quadratic and cubic amplitude-equation ground states", cmd_amplitude},
        {"solve", "converged profile of one family", cmd_solve},
        {"stability", "radial stability of one converged profile", cmd_stability},
        {"continue", "one branch traced in both directions", cmd_continue},
        {"scenario", "every shading case and family, with diagrams and a manifest", cmd_scenario},
    };
    Cmd chosen = nullptr;
    for (const auto& [name, help, fn] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        sub->callback([&chosen, fn = fn] { chosen = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalidInput;
    }

    try {
        const ScenarioConfig cfg = resolve_config(cl);
        return chosen(cfg, std::cout);
    } catch (const InvalidParams& e) {
        std::cerr << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const BadGrid& e) {
        std::cerr << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const NoGroundState& e) {
        std::cerr << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace vegspots::cli
