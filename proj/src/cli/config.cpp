#include "vegspots/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "vegspots/errors.hpp"

namespace vegspots::cli {

ContinuationOptions ScenarioConfig::scenario_continuation_defaults() {
    ContinuationOptions co;
    co.ds_init = 1e-3;
    co.ds_min = 1e-6;
    co.ds_max = 2e-3;
    co.max_steps = 2000;
    co.p_min = 0.0;
    co.p_max = 0.5;
    co.check_amplitude = true;
    co.amplitude_tol = 1e-6;
    co.check_tail = true;
    co.tail_fraction = 0.05;
    co.tail_tol = 1e-6;
    co.compute_stability = true;
    co.stability.method = EigenMethod::IterativeRightmost;
    return co;
}

void apply_preset(ScenarioConfig& cfg, const std::string& name) {
    if (name == "desk") {
        cfg.r_star = 300.0;
        cfg.T = 1000;
    } else if (name == "paper") {
        cfg.r_star = 400.0;
        cfg.T = 2000;
    } else {
        throw ConfigError("unknown preset '" + name + "' (expected desk or paper)");
    }
    cfg.preset = name;
}

BranchFamily parse_family(const std::string& name) {
    const std::string s = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(name));
    if (s == "spota") return BranchFamily::SpotA;
    if (s == "gapsub") return BranchFamily::GapSub;
    if (s == "gapsuper") return BranchFamily::GapSuper;
    if (s == "uniformvegetated") return BranchFamily::UniformVegetated;
    if (s == "uniformbare") return BranchFamily::UniformBare;
    throw ConfigError("unknown family '" + name + "'");
}

EigenMethod parse_eigen_method(const std::string& name) {
    const std::string s = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(name));
    if (s == "dense" || s == "densefull") return EigenMethod::DenseFull;
    if (s == "iterative" || s == "iterativerightmost") return EigenMethod::IterativeRightmost;
    if (s == "auto") return EigenMethod::Auto;
    throw ConfigError("unknown eigen method '" + name + "'");
}

namespace {

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != boost::algorithm::trim_copy(v).size()) throw std::invalid_argument("trailing text");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': '" + v + "' is not a number");
    }
}

int to_int(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError("key '" + key + "': '" + v + "' is not an integer");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    const std::string s = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(v));
    if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
    if (s == "false" || s == "no" || s == "0" || s == "off") return false;
    throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> parts;
    const std::string t = boost::algorithm::trim_copy(v);
    if (t.empty()) return parts;
    boost::algorithm::split(parts, t, boost::algorithm::is_any_of(","));
    for (auto& p : parts) boost::algorithm::trim(p);
    return parts;
}

using Setter = std::function<void(ScenarioConfig&, const std::string& key, const std::string& value)>;

Setter dbl(double ScenarioConfig::* m) {
    return [m](ScenarioConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto model = [](double ModelParams::* m) {
            return [m](ScenarioConfig& c, const std::string& k, const std::string& v) { c.params.*m = to_double(k, v); };
        };
        t["model.gamma"] = model(&ModelParams::gamma);
        t["model.sigma"] = model(&ModelParams::sigma);
        t["model.nu_mort"] = model(&ModelParams::nu_mort);
        t["model.beta"] = model(&ModelParams::beta);
        t["model.delta"] = model(&ModelParams::delta);
        t["model.rho"] = model(&ModelParams::rho);
        t["model.p"] = model(&ModelParams::p);

        t["scenario.rho_cases"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.rho_cases.clear();
            for (const auto& s : split_list(v)) c.rho_cases.push_back(to_double(k, s));
        };
        t["scenario.families"] = [](ScenarioConfig& c, const std::string&, const std::string& v) {
            c.families.clear();
            for (const auto& s : split_list(v)) c.families.push_back(parse_family(s));
        };
        t["scenario.max_workers"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.max_workers = to_int(k, v);
        };

        // The preset is applied first; explicit r_star / T then override it.
        t["grid.preset"] = [](ScenarioConfig&, const std::string&, const std::string&) {};
        t["grid.r_star"] = dbl(&ScenarioConfig::r_star);
        t["grid.T"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) { c.T = to_int(k, v); };

        t["seeds.spot_offset"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.spot.offset = to_double(k, v);
        };
        t["seeds.spot_rho_ref"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.spot.rho_ref = to_double(k, v);
        };
        t["seeds.spot_rho_step"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.spot.rho_step = to_double(k, v);
        };
        t["seeds.spot_gain"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.spot.gain = to_double(k, v);
        };
        t["seeds.gap_eps"] = dbl(&ScenarioConfig::gap_eps);

        auto cont = [](double ContinuationOptions::* m) {
            return [m](ScenarioConfig& c, const std::string& k, const std::string& v) {
                c.continuation.*m = to_double(k, v);
            };
        };
        t["continuation.ds_init"] = cont(&ContinuationOptions::ds_init);
        t["continuation.ds_min"] = cont(&ContinuationOptions::ds_min);
        t["continuation.ds_max"] = cont(&ContinuationOptions::ds_max);
        t["continuation.p_min"] = cont(&ContinuationOptions::p_min);
        t["continuation.p_max"] = cont(&ContinuationOptions::p_max);
        t["continuation.amplitude_tol"] = cont(&ContinuationOptions::amplitude_tol);
        t["continuation.tail_fraction"] = cont(&ContinuationOptions::tail_fraction);
        t["continuation.tail_tol"] = cont(&ContinuationOptions::tail_tol);
        t["continuation.max_steps"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.continuation.max_steps = to_int(k, v);
        };
        t["continuation.exchange_offset"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.exchange.offset = to_double(k, v);
        };
        t["continuation.newton_tol"] = dbl(&ScenarioConfig::newton_tol);

        t["stability.compute"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.continuation.compute_stability = to_bool(k, v);
        };
        t["stability.method"] = [](ScenarioConfig& c, const std::string&, const std::string& v) {
            c.continuation.stability.method = parse_eigen_method(v);
        };
        t["stability.tol_zero"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.continuation.stability.tol_zero = to_double(k, v);
        };
        t["stability.count"] = [](ScenarioConfig& c, const std::string& k, const std::string& v) {
            c.continuation.stability.count = to_int(k, v);
        };

        t["amplitude.c0"] = dbl(&ScenarioConfig::gl_c0);
        t["amplitude.c3"] = dbl(&ScenarioConfig::gl_c3);
        t["solve.p"] = dbl(&ScenarioConfig::solve_p);
        t["output.dir"] = [](ScenarioConfig& c, const std::string&, const std::string& v) {
            c.output_dir = boost::algorithm::trim_copy(v);
        };
        return t;
    }();
    return table;
}

ScenarioConfig from_tree(const boost::property_tree::ptree& tree) {
    ScenarioConfig cfg;
    if (auto grid = tree.get_child_optional("grid")) {
        if (auto preset = grid->get_optional<std::string>("preset")) {
            apply_preset(cfg, boost::algorithm::trim_copy(*preset));
        }
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigError("key '" + section + "' lies outside any section");
        }
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            const auto it = setters().find(full);
            if (it == setters().end()) throw ConfigError("unknown key '" + full + "'");
            it->second(cfg, full, value.data());
        }
    }
    cfg.continuation.newton.tol = cfg.newton_tol;
    return cfg;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    ScenarioConfig cfg = from_tree(tree);
    validate(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void validate(const ScenarioConfig& cfg) {
    cfg.params.validate();
    if (!(cfg.r_star > 0.0) || cfg.T < 4) throw ConfigError("grid needs r_star > 0 and T >= 4");
    if (cfg.max_workers < 1) throw ConfigError("max_workers must be at least 1");
    for (double r : cfg.rho_cases) {
        if (!(r > 0.0)) throw ConfigError("rho cases must be positive");
    }
    for (BranchFamily f : cfg.families) {
        if (f != BranchFamily::SpotA && f != BranchFamily::GapSub && f != BranchFamily::GapSuper) {
            throw ConfigError(std::string("scenario families are SpotA, GapSub and GapSuper, got ") + to_string(f));
        }
    }
    const ContinuationOptions& co = cfg.continuation;
    if (!(co.ds_min > 0.0 && co.ds_min <= co.ds_init && co.ds_init <= co.ds_max)) {
        throw ConfigError("continuation steps need 0 < ds_min <= ds_init <= ds_max");
    }
    if (co.max_steps < 1) throw ConfigError("max_steps must be positive");
    if (!(cfg.gap_eps > 0.0)) throw ConfigError("gap_eps must be positive");
    if (!(cfg.newton_tol > 0.0)) throw ConfigError("newton_tol must be positive");
}

}  // namespace vegspots::cli
