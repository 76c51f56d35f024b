#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hjmm/engine.hpp"
#include "hjmm/errors.hpp"
#include "hjmm/integration.hpp"

namespace hjmm {

// A scenario file is a versioned list of sections holding "key value" lines.
// The [driver] section repeats, once per driver, in order; everything else
// appears at most once. Keys inside a section may repeat where noted
// (checkpoint, snapshot).
struct ScenarioSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
};

struct ScenarioDoc {
    int version = 0;
    std::vector<ScenarioSection> sections;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

inline double parse_number(const std::string& tok, const std::string& context) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        throw ScenarioError(context + ": '" + tok + "' is not a number");
    }
    if (used != tok.size())
        throw ScenarioError(context + ": '" + tok + "' is not a number");
    return v;
}

inline long long parse_integer(const std::string& tok, const std::string& context) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(tok, &used);
    } catch (const std::exception&) {
        throw ScenarioError(context + ": '" + tok + "' is not an integer");
    }
    if (used != tok.size())
        throw ScenarioError(context + ": '" + tok + "' is not an integer");
    return v;
}

inline bool parse_flag(const std::string& tok, const std::string& context) {
    if (tok == "true") return true;
    if (tok == "false") return false;
    throw ScenarioError(context + ": expected true or false, got '" + tok + "'");
}

} // namespace detail

// Curve expressions are sums of chunks joined by a standalone '+':
//   const 0.05 + exp 0.01 -0.5 + term 0.001 1 -0.3
// with chunk forms const, poly, exp, shifted_exp, and term (coeff power rate).
inline AnalyticCurve parse_curve_spec(const std::string& spec) {
    const auto tokens = detail::split_tokens(spec);
    if (tokens.empty()) throw ScenarioError("curve expression is empty");
    AnalyticCurve out;
    std::size_t i = 0;
    bool first = true;
    while (i < tokens.size()) {
        if (!first) {
            if (tokens[i] != "+")
                throw ScenarioError("curve expression: expected '+' before '" + tokens[i] + "'");
            ++i;
            if (i >= tokens.size()) throw ScenarioError("curve expression ends after '+'");
        }
        first = false;
        const std::string head = tokens[i++];
        auto need = [&](std::size_t count) {
            if (i + count > tokens.size())
                throw ScenarioError("curve chunk '" + head + "' is missing arguments");
        };
        auto num = [&](const char* what) {
            return detail::parse_number(tokens[i++], std::string("curve chunk '") + head +
                                                         "' argument " + what);
        };
        if (head == "const") {
            need(1);
            out = out + AnalyticCurve::constant(num("value"));
        } else if (head == "poly") {
            std::vector<double> coeffs;
            while (i < tokens.size() && tokens[i] != "+")
                coeffs.push_back(num("coefficient"));
            if (coeffs.empty()) throw ScenarioError("curve chunk 'poly' needs coefficients");
            out = out + AnalyticCurve::polynomial(coeffs);
        } else if (head == "exp") {
            need(2);
            const double scale = num("scale");
            const double rate = num("rate");
            out = out + AnalyticCurve::exponential(scale, rate);
        } else if (head == "shifted_exp") {
            need(2);
            const double scale = num("scale");
            const double rate = num("rate");
            out = out + AnalyticCurve::shifted_exponential(scale, rate);
        } else if (head == "term") {
            need(3);
            const double coeff = num("coefficient");
            const double power = num("power");
            const double rate = num("rate");
            const int p = static_cast<int>(std::llround(power));
            if (p < 0 || std::abs(power - p) > 1e-12)
                throw ScenarioError("curve chunk 'term' needs a nonnegative integer power");
            out = out + AnalyticCurve({{coeff, p, rate}});
        } else {
            throw ScenarioError("unknown curve chunk '" + head + "'");
        }
    }
    return out;
}

// Functional expressions: "constant v", "short_rate_affine a b lo hi",
// "benchmark_affine a b xstar lo hi".
inline StateFunctional parse_functional_spec(const std::string& spec) {
    const auto tokens = detail::split_tokens(spec);
    if (tokens.empty()) throw ScenarioError("functional expression is empty");
    const std::string head = tokens[0];
    auto num = [&](std::size_t idx, const char* what) {
        if (idx >= tokens.size())
            throw ScenarioError("functional '" + head + "' is missing argument " + what);
        return detail::parse_number(tokens[idx], std::string("functional '") + head + "' " + what);
    };
    auto expect_count = [&](std::size_t count) {
        if (tokens.size() != count)
            throw ScenarioError("functional '" + head + "' takes " + std::to_string(count - 1) +
                                " arguments");
    };
    if (head == "constant") {
        expect_count(2);
        return StateFunctional::constant(num(1, "value"));
    }
    if (head == "short_rate_affine") {
        expect_count(5);
        return StateFunctional::short_rate_affine(num(1, "offset"), num(2, "slope"),
                                                  num(3, "clip_lo"), num(4, "clip_hi"));
    }
    if (head == "benchmark_affine") {
        expect_count(6);
        return StateFunctional::benchmark_affine(num(1, "offset"), num(2, "slope"),
                                                 num(3, "benchmark_x"), num(4, "clip_lo"),
                                                 num(5, "clip_hi"));
    }
    throw ScenarioError("unknown functional '" + head + "'");
}

inline WeightSpec parse_weight_spec(const std::string& spec) {
    const auto tokens = detail::split_tokens(spec);
    if (tokens.size() != 2)
        throw ScenarioError("weight expects 'exponential a' or 'polynomial a'");
    const double a = detail::parse_number(tokens[1], "weight parameter");
    if (tokens[0] == "exponential") return WeightSpec::exponential(a);
    if (tokens[0] == "polynomial") return WeightSpec::polynomial(a);
    throw ScenarioError("unknown weight kind '" + tokens[0] + "'");
}

inline ScenarioDoc parse_scenario_text(const std::string& text) {
    ScenarioDoc doc;
    bool saw_version = false;
    ScenarioSection* current = nullptr;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string line = detail::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ScenarioError("line " + std::to_string(line_no) + ": unterminated section");
            const std::string name = detail::trim(line.substr(1, line.size() - 2));
            if (name.empty())
                throw ScenarioError("line " + std::to_string(line_no) + ": empty section name");
            doc.sections.push_back({name, {}});
            current = &doc.sections.back();
            continue;
        }
        const auto sp = line.find_first_of(" \t");
        const std::string key = sp == std::string::npos ? line : line.substr(0, sp);
        const std::string value =
            sp == std::string::npos ? std::string() : detail::trim(line.substr(sp + 1));
        if (!current) {
            if (key == "version") {
                doc.version = static_cast<int>(
                    detail::parse_integer(value, "line " + std::to_string(line_no) + ": version"));
                saw_version = true;
                continue;
            }
            throw ScenarioError("line " + std::to_string(line_no) +
                                ": content before the first section must be 'version N'");
        }
        if (value.empty())
            throw ScenarioError("line " + std::to_string(line_no) + ": key '" + key +
                                "' has no value");
        current->entries.push_back({key, value});
    }
    if (!saw_version) throw ScenarioError("scenario file must start with 'version N'");
    return doc;
}

inline ScenarioDoc load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

inline std::string serialize_scenario(const ScenarioDoc& doc) {
    std::ostringstream out;
    out << "version " << doc.version << "\n";
    for (const auto& sec : doc.sections) {
        out << "\n[" << sec.name << "]\n";
        for (const auto& [k, v] : sec.entries) out << k << " " << v << "\n";
    }
    return out.str();
}

// Apply one override of the form "section.key=value" or "section[N].key=value"
// (N selects among repeated sections). The value replaces every existing entry
// for that key, or is appended if absent.
inline void apply_override(ScenarioDoc& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ScenarioError("override '" + assignment + "' is missing '='");
    const std::string path = detail::trim(assignment.substr(0, eq));
    const std::string value = detail::trim(assignment.substr(eq + 1));
    if (value.empty()) throw ScenarioError("override '" + assignment + "' has an empty value");
    const auto dot = path.find('.');
    if (dot == std::string::npos || dot + 1 >= path.size())
        throw ScenarioError("override path '" + path + "' must be section.key");
    std::string section = path.substr(0, dot);
    const std::string key = path.substr(dot + 1);
    std::size_t index = 0;
    const auto br = section.find('[');
    if (br != std::string::npos) {
        if (section.back() != ']')
            throw ScenarioError("override path '" + path + "' has a malformed index");
        const std::string idx = section.substr(br + 1, section.size() - br - 2);
        index = static_cast<std::size_t>(
            detail::parse_integer(idx, "override '" + assignment + "' index"));
        section = section.substr(0, br);
    }
    std::size_t seen = 0;
    for (auto& sec : doc.sections) {
        if (sec.name != section) continue;
        if (seen++ != index) continue;
        bool replaced = false;
        for (auto it = sec.entries.begin(); it != sec.entries.end();) {
            if (it->first == key) {
                if (!replaced) {
                    it->second = value;
                    replaced = true;
                    ++it;
                } else {
                    it = sec.entries.erase(it);
                }
            } else {
                ++it;
            }
        }
        if (!replaced) sec.entries.push_back({key, value});
        return;
    }
    throw ScenarioError("override targets missing section '" + section + "[" +
                        std::to_string(index) + "]'");
}

// driver and integrand settings for the dyadic integration subcommand
struct IntegrateConfig {
    std::size_t driver = 0;
    IntegrandKind integrand = IntegrandKind::Ramp;
    std::vector<int> levels = {4, 6, 8};
    int ref_level = 12;
    std::uint64_t n_paths = 200;
    double t_max = 1.0;
    std::uint64_t seed = 1;
};

struct OutputOptions {
    bool write_paths = true;
    bool write_curves = true;
};

namespace detail {

inline const ScenarioSection* find_section(const ScenarioDoc& doc, const std::string& name) {
    for (const auto& sec : doc.sections)
        if (sec.name == name) return &sec;
    return nullptr;
}

inline void check_keys(const ScenarioSection& sec, const std::set<std::string>& allowed,
                       const std::set<std::string>& repeatable = {}) {
    std::set<std::string> seen;
    for (const auto& [k, v] : sec.entries) {
        if (!allowed.count(k))
            throw ScenarioError("[" + sec.name + "] has unknown key '" + k + "'");
        if (!repeatable.count(k) && !seen.insert(k).second)
            throw ScenarioError("[" + sec.name + "] repeats key '" + k + "'");
    }
}

inline const std::string* maybe_value(const ScenarioSection& sec, const std::string& key) {
    for (const auto& [k, v] : sec.entries)
        if (k == key) return &v;
    return nullptr;
}

inline std::string need_value(const ScenarioSection& sec, const std::string& key) {
    const auto* v = maybe_value(sec, key);
    if (!v) throw ScenarioError("[" + sec.name + "] is missing key '" + key + "'");
    return *v;
}

inline LevyModel build_driver(const ScenarioSection& sec) {
    check_keys(sec, {"kind", "volatility", "intensity", "jump_mean", "jump_std", "alpha_plus",
                     "lambda_plus", "alpha_minus", "lambda_minus", "moment_lo", "moment_hi",
                     "working_lo", "working_hi"});
    const std::string kind = need_value(sec, "kind");
    Interval moment{-2.0, 2.0};
    Interval working{-1.0, 1.0};
    auto num = [&](const std::string& key) {
        return parse_number(need_value(sec, key), "[driver] " + key);
    };
    if (const auto* v = maybe_value(sec, "moment_lo")) moment.lo = parse_number(*v, "moment_lo");
    if (const auto* v = maybe_value(sec, "moment_hi")) moment.hi = parse_number(*v, "moment_hi");
    if (const auto* v = maybe_value(sec, "working_lo")) working.lo = parse_number(*v, "working_lo");
    if (const auto* v = maybe_value(sec, "working_hi")) working.hi = parse_number(*v, "working_hi");
    if (kind == "brownian") return brownian(num("volatility"), moment, working);
    if (kind == "poisson") return poisson(num("intensity"), moment, working);
    if (kind == "compound_poisson_normal")
        return compound_poisson_normal(num("intensity"), num("jump_mean"), num("jump_std"),
                                       moment, working);
    if (kind == "bilateral_gamma")
        return bilateral_gamma(num("alpha_plus"), num("lambda_plus"), num("alpha_minus"),
                               num("lambda_minus"), moment, working);
    throw ScenarioError("unknown driver kind '" + kind + "'");
}

inline VolatilitySpec build_volatility(const ScenarioSection& sec, std::size_t n_drivers) {
    std::set<std::string> allowed = {"family", "p", "delta", "eta"};
    for (std::size_t i = 1; i <= n_drivers; ++i) {
        allowed.insert("direction" + std::to_string(i));
        allowed.insert("phi" + std::to_string(i));
    }
    check_keys(sec, allowed);
    const std::string family = need_value(sec, "family");

    auto phi_or_one = [&](std::size_t i) {
        const auto* v = maybe_value(sec, "phi" + std::to_string(i));
        return v ? parse_functional_spec(*v) : StateFunctional::constant(1.0);
    };

    if (family == "direct" || family == "constant_direction") {
        std::vector<AnalyticCurve> dirs;
        std::vector<StateFunctional> phis;
        for (std::size_t i = 1; i <= n_drivers; ++i) {
            dirs.push_back(parse_curve_spec(need_value(sec, "direction" + std::to_string(i))));
            phis.push_back(phi_or_one(i));
        }
        try {
            return family == "direct" ? VolatilitySpec::direct(std::move(dirs), std::move(phis))
                                      : VolatilitySpec::constant_direction(std::move(dirs),
                                                                           std::move(phis));
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(std::string("[volatility] ") + e.what());
        }
    }
    if (family == "jump_diffusion_bs" || family == "state_dependent_eta") {
        const AnalyticCurve p = parse_curve_spec(need_value(sec, "p"));
        const double delta = parse_number(need_value(sec, "delta"), "[volatility] delta");
        try {
            if (family == "jump_diffusion_bs") {
                const double eta = parse_number(need_value(sec, "eta"), "[volatility] eta");
                return VolatilitySpec::jump_diffusion_bs(p, delta, eta, phi_or_one(1),
                                                         phi_or_one(2));
            }
            return VolatilitySpec::state_dependent_eta(
                p, delta, phi_or_one(1), phi_or_one(2),
                parse_functional_spec(need_value(sec, "eta")));
        } catch (const std::invalid_argument& e) {
            throw ScenarioError(std::string("[volatility] ") + e.what());
        }
    }
    throw ScenarioError("unknown volatility family '" + family + "'");
}

} // namespace detail

// Build the engine scenario from a parsed document. Relative csv paths for the
// initial curve resolve against base_dir when given.
inline SimulationScenario build_simulation(const ScenarioDoc& doc,
                                           const std::string& base_dir = "",
                                           OutputOptions* outputs = nullptr) {
    if (doc.version != 1)
        throw ScenarioError("unsupported scenario version " + std::to_string(doc.version));
    static const std::set<std::string> known = {"driver",      "volatility", "space",
                                                "initial_curve", "grid",     "monte_carlo",
                                                "outputs",     "engine",     "integrate"};
    for (const auto& sec : doc.sections)
        if (!known.count(sec.name)) throw ScenarioError("unknown section [" + sec.name + "]");

    SimulationScenario s;
    s.models.clear();
    for (const auto& sec : doc.sections)
        if (sec.name == "driver") {
            try {
                s.models.push_back(detail::build_driver(sec));
            } catch (const std::invalid_argument& e) {
                throw ScenarioError(std::string("[driver] ") + e.what());
            }
        }
    if (s.models.empty()) throw ScenarioError("scenario needs at least one [driver] section");

    const auto* vol = detail::find_section(doc, "volatility");
    if (!vol) throw ScenarioError("scenario is missing the [volatility] section");
    s.volatility = detail::build_volatility(*vol, s.models.size());

    const auto* space = detail::find_section(doc, "space");
    if (!space) throw ScenarioError("scenario is missing the [space] section");
    detail::check_keys(*space, {"beta", "gamma", "weight", "x_max", "points_per_year"});
    s.beta = detail::parse_number(detail::need_value(*space, "beta"), "[space] beta");
    s.gamma = detail::parse_number(detail::need_value(*space, "gamma"), "[space] gamma");
    if (const auto* w = detail::maybe_value(*space, "weight")) s.weight = parse_weight_spec(*w);
    s.x_max = detail::parse_number(detail::need_value(*space, "x_max"), "[space] x_max");
    s.points_per_year = static_cast<int>(detail::parse_integer(
        detail::need_value(*space, "points_per_year"), "[space] points_per_year"));

    const auto* init = detail::find_section(doc, "initial_curve");
    if (!init) throw ScenarioError("scenario is missing the [initial_curve] section");
    detail::check_keys(*init, {"kind", "spec", "path"});
    const std::string ikind = detail::need_value(*init, "kind");
    if (ikind == "analytic") {
        s.initial_curve = parse_curve_spec(detail::need_value(*init, "spec"));
    } else if (ikind == "csv") {
        std::string path = detail::need_value(*init, "path");
        if (!base_dir.empty() && !path.empty() && path.front() != '/')
            path = base_dir + "/" + path;
        try {
            s.initial_grid = read_curve_csv(path);
        } catch (const std::exception& e) {
            throw ScenarioError("initial curve csv: " + std::string(e.what()));
        }
    } else {
        throw ScenarioError("initial curve kind must be analytic or csv");
    }

    const auto* grid = detail::find_section(doc, "grid");
    if (!grid) throw ScenarioError("scenario is missing the [grid] section");
    detail::check_keys(*grid, {"t_max", "steps_per_year"});
    s.t_max = detail::parse_number(detail::need_value(*grid, "t_max"), "[grid] t_max");
    s.steps_per_year = static_cast<int>(detail::parse_integer(
        detail::need_value(*grid, "steps_per_year"), "[grid] steps_per_year"));

    const auto* mc = detail::find_section(doc, "monte_carlo");
    if (!mc) throw ScenarioError("scenario is missing the [monte_carlo] section");
    detail::check_keys(*mc, {"n_paths", "seed"});
    const long long np =
        detail::parse_integer(detail::need_value(*mc, "n_paths"), "[monte_carlo] n_paths");
    if (np < 1) throw ScenarioError("[monte_carlo] n_paths must be positive");
    s.n_paths = static_cast<std::uint64_t>(np);
    s.seed = static_cast<std::uint64_t>(
        detail::parse_integer(detail::need_value(*mc, "seed"), "[monte_carlo] seed"));

    if (const auto* out = detail::find_section(doc, "outputs")) {
        detail::check_keys(*out, {"checkpoint", "snapshot", "write_paths", "write_curves"},
                           {"checkpoint", "snapshot"});
        for (const auto& [k, v] : out->entries) {
            if (k == "checkpoint") {
                const auto toks = detail::split_tokens(v);
                if (toks.size() != 2)
                    throw ScenarioError("[outputs] checkpoint expects 't maturity'");
                s.checkpoints.push_back({detail::parse_number(toks[0], "checkpoint t"),
                                         detail::parse_number(toks[1], "checkpoint maturity")});
            } else if (k == "snapshot") {
                const auto toks = detail::split_tokens(v);
                if (toks.size() != 2) throw ScenarioError("[outputs] snapshot expects 'path t'");
                const long long pid = detail::parse_integer(toks[0], "snapshot path");
                if (pid < 0) throw ScenarioError("[outputs] snapshot path must be nonnegative");
                s.snapshots.push_back({static_cast<std::uint64_t>(pid),
                                       detail::parse_number(toks[1], "snapshot t")});
            } else if (k == "write_paths") {
                if (outputs) outputs->write_paths = detail::parse_flag(v, "[outputs] write_paths");
            } else if (k == "write_curves") {
                if (outputs) outputs->write_curves = detail::parse_flag(v, "[outputs] write_curves");
            }
        }
    }

    if (const auto* eng = detail::find_section(doc, "engine")) {
        detail::check_keys(*eng, {"strategy", "parallelism", "clamp_exposure", "allowance_factor",
                                  "max_failure_fraction", "track_norm_sup"});
        if (const auto* v = detail::maybe_value(*eng, "strategy")) {
            if (*v == "auto")
                s.strategy = EngineStrategy::Auto;
            else if (*v == "grid")
                s.strategy = EngineStrategy::Grid;
            else if (*v == "analytic")
                s.strategy = EngineStrategy::Analytic;
            else
                throw ScenarioError("[engine] strategy must be auto, grid, or analytic");
        }
        if (const auto* v = detail::maybe_value(*eng, "parallelism"))
            s.parallelism = static_cast<int>(detail::parse_integer(*v, "[engine] parallelism"));
        if (const auto* v = detail::maybe_value(*eng, "clamp_exposure"))
            s.clamp_exposure = detail::parse_flag(*v, "[engine] clamp_exposure");
        if (const auto* v = detail::maybe_value(*eng, "allowance_factor"))
            s.allowance_factor = detail::parse_number(*v, "[engine] allowance_factor");
        if (const auto* v = detail::maybe_value(*eng, "max_failure_fraction"))
            s.max_failure_fraction = detail::parse_number(*v, "[engine] max_failure_fraction");
        if (const auto* v = detail::maybe_value(*eng, "track_norm_sup"))
            s.track_norm_sup = detail::parse_flag(*v, "[engine] track_norm_sup");
    }
    return s;
}

inline IntegrateConfig build_integrate(const ScenarioDoc& doc, std::size_t n_drivers) {
    IntegrateConfig cfg;
    const auto* sec = detail::find_section(doc, "integrate");
    if (!sec) return cfg;
    detail::check_keys(*sec,
                       {"driver", "integrand", "levels", "ref_level", "n_paths", "t_max", "seed"});
    if (const auto* v = detail::maybe_value(*sec, "driver")) {
        const long long d = detail::parse_integer(*v, "[integrate] driver");
        if (d < 0 || static_cast<std::size_t>(d) >= n_drivers)
            throw ScenarioError("[integrate] driver index out of range");
        cfg.driver = static_cast<std::size_t>(d);
    }
    if (const auto* v = detail::maybe_value(*sec, "integrand")) {
        if (*v == "constant")
            cfg.integrand = IntegrandKind::Constant;
        else if (*v == "ramp")
            cfg.integrand = IntegrandKind::Ramp;
        else if (*v == "driver")
            cfg.integrand = IntegrandKind::Driver;
        else if (*v == "ramp_driver")
            cfg.integrand = IntegrandKind::RampDriver;
        else
            throw ScenarioError("[integrate] integrand must be constant, ramp, driver, or ramp_driver");
    }
    if (const auto* v = detail::maybe_value(*sec, "levels")) {
        cfg.levels.clear();
        for (const auto& tok : detail::split_tokens(*v))
            cfg.levels.push_back(
                static_cast<int>(detail::parse_integer(tok, "[integrate] levels")));
        if (cfg.levels.empty()) throw ScenarioError("[integrate] levels is empty");
    }
    if (const auto* v = detail::maybe_value(*sec, "ref_level"))
        cfg.ref_level = static_cast<int>(detail::parse_integer(*v, "[integrate] ref_level"));
    if (const auto* v = detail::maybe_value(*sec, "n_paths")) {
        const long long np = detail::parse_integer(*v, "[integrate] n_paths");
        if (np < 1) throw ScenarioError("[integrate] n_paths must be positive");
        cfg.n_paths = static_cast<std::uint64_t>(np);
    }
    if (const auto* v = detail::maybe_value(*sec, "t_max"))
        cfg.t_max = detail::parse_number(*v, "[integrate] t_max");
    if (const auto* v = detail::maybe_value(*sec, "seed"))
        cfg.seed = static_cast<std::uint64_t>(detail::parse_integer(*v, "[integrate] seed"));
    return cfg;
}

} // namespace hjmm
