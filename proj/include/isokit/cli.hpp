#pragma once

#include <iostream>

#include "CLI11.hpp"
#include "envelopes.hpp"
#include "verify.hpp"

namespace isokit {

// ---- config file -----------------------------------------------------------
//
// Flat `key = value` lines, '#' comments, TOML-style quoting and arrays.
// Each key maps to a flag of the subcommand being run (resolution -> --res,
// space_x -> --space-x); flags given on the command line win.

struct Config {
    std::optional<std::uint64_t> seed;
    std::optional<int> resolution;
    std::optional<std::string> kind;
    std::optional<int> dim;
    std::optional<std::string> space_x;
    std::vector<std::string> suites;
    std::optional<std::string> report;
    std::optional<std::string> out;
    bool operator==(const Config&) const = default;
};

namespace detail {

inline std::string quoted(const std::string& s) {
    std::string o = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') o += '\\';
        o += c;
    }
    return o + "\"";
}

}  // namespace detail

inline std::string config_text(const Config& c) {
    std::string o;
    if (c.seed) o += "seed = " + std::to_string(*c.seed) + "\n";
    if (c.resolution) o += "resolution = " + std::to_string(*c.resolution) + "\n";
    if (c.kind) o += "kind = " + detail::quoted(*c.kind) + "\n";
    if (c.dim) o += "dim = " + std::to_string(*c.dim) + "\n";
    if (c.space_x) o += "space_x = " + detail::quoted(*c.space_x) + "\n";
    if (!c.suites.empty()) {
        o += "suite = [";
        for (std::size_t i = 0; i < c.suites.size(); ++i) o += (i ? ", " : "") + detail::quoted(c.suites[i]);
        o += "]\n";
    }
    if (c.report) o += "report = " + detail::quoted(*c.report) + "\n";
    if (c.out) o += "out = " + detail::quoted(*c.out) + "\n";
    return o;
}

// key -> values, in file order, with the line each key came from
struct ConfigEntry {
    std::string key;
    std::vector<std::string> values;
    long line = 0;
};

inline std::vector<ConfigEntry> parse_config_entries(const std::string& text, const std::string& path) {
    std::vector<ConfigEntry> out;
    std::istringstream in(text);
    std::string line;
    long ln = 0;
    CLI::ConfigTOML toml;
    while (std::getline(in, line)) {
        ++ln;
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos || line[a] == '#') continue;
        if (line[a] == '[') throw input_error(path, ln, "sections are not supported");
        if (line.find('=') == std::string::npos) throw input_error(path, ln, "expected key = value");
        std::istringstream one(line);
        std::vector<CLI::ConfigItem> items;
        try {
            items = toml.from_config(one);
        } catch (const CLI::Error& e) {
            throw input_error(path, ln, e.what());
        }
        for (auto& it : items) {
            if (it.name == "++" || it.name == "--") continue;  // section markers
            if (it.name.empty() || it.name.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_-") != std::string::npos)
                throw input_error(path, ln, "bad key '" + it.name + "'");
            out.push_back({it.name, it.inputs, ln});
        }
    }
    return out;
}

inline Config parse_config(const std::string& text, const std::string& path = "<config>") {
    Config c;
    for (const auto& e : parse_config_entries(text, path)) {
        auto one = [&]() -> const std::string& {
            if (e.values.size() != 1) throw input_error(path, e.line, "'" + e.key + "' takes one value");
            return e.values[0];
        };
        auto integer = [&](const std::string& s) {
            try {
                std::size_t used = 0;
                long long v = std::stoll(s, &used);
                if (used != s.size()) throw std::invalid_argument(s);
                return v;
            } catch (const std::exception&) {
                throw input_error(path, e.line, "'" + e.key + "' needs an integer");
            }
        };
        if (e.key == "seed") c.seed = std::uint64_t(integer(one()));
        else if (e.key == "resolution" || e.key == "res") c.resolution = int(integer(one()));
        else if (e.key == "kind") c.kind = one();
        else if (e.key == "dim") c.dim = int(integer(one()));
        else if (e.key == "space_x" || e.key == "space-x") c.space_x = one();
        else if (e.key == "suite" || e.key == "suites") c.suites = e.values;
        else if (e.key == "report") c.report = one();
        else if (e.key == "out") c.out = one();
        else throw input_error(path, e.line, "unknown key '" + e.key + "'");
    }
    return c;
}

inline Config load_config(const std::string& path) { return parse_config(read_text(path), path); }

inline void save_config(const Config& c, const std::string& path) { write_text(path, config_text(c)); }

// Flags implied by a config file, skipping the ones already present.
inline std::vector<std::string> config_args(const Config& c, const std::vector<std::string>& present) {
    std::vector<std::string> args;
    auto has = [&](const std::string& f) { return std::find(present.begin(), present.end(), f) != present.end(); };
    auto put = [&](const std::string& flag, const std::string& v) {
        if (has(flag)) return;
        args.push_back(flag);
        args.push_back(v);
    };
    if (c.seed) put("--seed", std::to_string(*c.seed));
    if (c.resolution) put("--res", std::to_string(*c.resolution));
    if (c.kind) put("--kind", *c.kind);
    if (c.dim) put("--dim", std::to_string(*c.dim));
    if (c.space_x) put("--space-x", *c.space_x);
    if (!c.suites.empty() && !has("--suite"))
        for (const auto& s : c.suites) {
            args.push_back("--suite");
            args.push_back(s);
        }
    if (c.report) put("--report", *c.report);
    if (c.out) put("--out", *c.out);
    return args;
}

// ---- commands --------------------------------------------------------------

namespace detail {

inline std::vector<double> parse_t_grid(const std::string& spec) {
    auto parts = split(spec, ':');
    if (parts.size() != 3) throw std::invalid_argument("--t-grid expects lo:hi:n");
    double lo = parse_real(parts[0]), hi = parse_real(parts[1]);
    long n = std::lround(parse_real(parts[2]));
    if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw std::invalid_argument("--t-grid: need 0 < lo <= hi and n >= 1");
    return n == 1 ? std::vector<double>{lo} : log_grid(lo, hi, std::size_t(n));
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") out << text;
    else write_text(path, text);
}

inline GridFunction load_on(const DiscreteSpace& S, const std::string& path) {
    GridFunction f = load_function(path);
    if (f.size() != S.size())
        throw input_error(path, long(f.size()), "function has " + std::to_string(f.size()) + " values, space has " +
                                                    std::to_string(S.size()) + " points");
    return f;
}

inline std::string growth_bound_kind(const SpaceDescriptor& X, double n) {
    if (X.tag == NormTag::Lp && X.p < n) return "sobolev_lp";
    if (X.tag == NormTag::Lp && X.p == n) return "limiting_lp";
    if (X.tag == NormTag::Lorentz && X.p == n) return "limiting_lorentz";
    return "sobolev_ri";
}

}  // namespace detail

inline int run_command(std::vector<std::string> argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"isokit: rearrangements, K-functionals and isoperimetric inequalities on grids", "isokit"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key = value file supplying flags for the subcommand");

    // space
    auto* space = app.add_subcommand("space", "build or inspect discrete spaces");
    space->require_subcommand(1);
    auto* sb = space->add_subcommand("build", "build a grid space");
    std::string kind = "cube", out_path;
    int dim = 2, res = 64;
    std::vector<std::string> kv;
    sb->add_option("--kind", kind, "interval|cube|gaussian|mu_r_alpha")->capture_default_str();
    sb->add_option("--dim", dim, "dimension 1..3")->capture_default_str();
    sb->add_option("--res", res, "cells per axis")->capture_default_str();
    sb->add_option("--param", kv, "extra parameter key=value (r, alpha, truncation_radius)");
    sb->add_option("-o,--out", out_path, "output JSON")->required();
    auto* si = space->add_subcommand("info", "summarize a space file");
    std::string space_path;
    si->add_option("-s,--space", space_path, "space JSON")->required();

    // rearrange
    auto* ra = app.add_subcommand("rearrange", "decreasing rearrangement of a function");
    std::string fpath;
    bool signed_r = false;
    std::vector<double> ts;
    ra->add_option("-s,--space", space_path, "space JSON")->required();
    ra->add_option("-f,--function", fpath, "function file (CSV or JSON array)")->required();
    ra->add_flag("--signed", signed_r, "rearrange f instead of |f|");
    ra->add_option("--t", ts, "evaluate f*, f** and f**-f* at these t");
    ra->add_option("-o,--out", out_path, "CSV output (default stdout)");

    // kfun
    auto* kf = app.add_subcommand("kfun", "K-functional K(t, f; X, S_X)");
    std::string sx = "lp:2", tgrid;
    int iters = 20000;
    bool trivial = false;
    kf->add_option("-s,--space", space_path, "space JSON")->required();
    kf->add_option("-f,--function", fpath, "function file")->required();
    kf->add_option("--space-x", sx, "r.i. norm descriptor")->capture_default_str();
    kf->add_option("--t", ts, "t values");
    kf->add_option("--t-grid", tgrid, "log grid lo:hi:n");
    kf->add_option("--iters", iters, "solver iteration cap")->capture_default_str();
    kf->add_flag("--family-only", trivial, "skip the solver; candidate family only");
    kf->add_option("-o,--out", out_path, "CSV output (default stdout)");

    // bmo-norm
    auto* bm = app.add_subcommand("bmo-norm", "mean-oscillation BMO norm over metric balls");
    int ladder = 16;
    bm->add_option("-s,--space", space_path, "space JSON")->required();
    bm->add_option("-f,--function", fpath, "function file")->required();
    bm->add_option("--ladder", ladder, "radii per centre")->capture_default_str();

    // verify
    auto* vf = app.add_subcommand("verify", "run verification suites");
    std::vector<std::string> suites;
    std::uint64_t seed = 42;
    std::string report;
    VerifyOptions vo;
    vf->add_option("--suite", suites, "suite name or 'all' (repeatable)");
    vf->add_option("--seed", seed, "corpus seed")->capture_default_str();
    vf->add_option("--report", report, "JSON report path");
    vf->add_flag("--trivial-k", vo.trivial_k, "bound K by the trivial decomposition only");
    vf->add_option("--k-solves", vo.k_solves, "solver runs per K curve")->capture_default_str();
    vf->add_option("--k-iter", vo.k_iter, "iterations per solver run")->capture_default_str();

    // envelope
    auto* en = app.add_subcommand("envelope", "growth or continuity envelope of W^1_X");
    std::string ekind = "growth", family = "logs";
    int eres = 0;
    en->add_option("--space-x", sx, "r.i. norm X of W^1_X")->capture_default_str();
    en->add_option("--kind", ekind, "growth|continuity")->capture_default_str();
    en->add_option("--family", family, "logs|extremal|bumps")->capture_default_str();
    en->add_option("--res", eres, "grid resolution (default 256 growth, 64 continuity)");
    en->add_option("--dim", dim, "dimension")->capture_default_str();
    en->add_option("--t-grid", tgrid, "log grid lo:hi:n");
    en->add_option("-o,--out", out_path, "CSV output (default stdout)");

    // config: find --config before parsing so its values can be merged in
    for (std::size_t i = 1; i + 1 < argv.size(); ++i)
        if (argv[i] == "--config") config_path = argv[i + 1];
    try {
        if (!config_path.empty()) {
            auto extra = config_args(load_config(config_path), argv);
            argv.insert(argv.end(), extra.begin(), extra.end());
        }
        std::vector<std::string> rev(argv.rbegin(), argv.rend() - 1);  // CLI11 wants reversed, no argv[0]
        try {
            app.parse(rev);
        } catch (const CLI::CallForHelp&) {
            out << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp&) {
            out << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            err << "isokit: " << e.what() << "\n";
            auto subs = app.get_subcommands();
            err << (subs.empty() ? app.help() : subs.back()->help());
            return 2;
        }

        if (*sb) {
            std::map<std::string, double> params;
            for (const auto& p : kv) {
                auto eq = p.find('=');
                if (eq == std::string::npos) throw std::invalid_argument("--param expects key=value");
                params[p.substr(0, eq)] = detail::parse_real(p.substr(eq + 1));
            }
            DiscreteSpace S = build_space(kind, dim, res, params);
            save_space(S, out_path);
            out << "wrote " << out_path << ": " << S.size() << " points, total measure "
                << format_double(S.total_measure) << "\n";
            return 0;
        }
        if (*si) {
            DiscreteSpace S = load_space(space_path);
            nlohmann::json j = {{"kind", to_string(S.kind)},
                                {"dim", S.dim},
                                {"points", S.size()},
                                {"edges", S.neighbors.size()},
                                {"total_measure", S.total_measure},
                                {"spacing", S.spacing()},
                                {"params", S.params}};
            out << j.dump(1) << "\n";
            return 0;
        }
        if (*ra) {
            DiscreteSpace S = load_space(space_path);
            GridFunction f = detail::load_on(S, fpath);
            StepFunction r = signed_r ? decreasing_rearrangement(S, f) : abs_rearrangement(S, f);
            std::string text;
            if (ts.empty()) {
                text = "t_lo,t_hi,value\n";
                for (std::size_t k = 0; k < r.segments(); ++k)
                    text += format_double(r.breakpoints[k]) + "," + format_double(r.breakpoints[k + 1]) + "," +
                            format_double(r.values[k]) + "\n";
            } else {
                text = "t,rearranged,maximal_average,oscillation\n";
                for (double t : ts) {
                    double a = maximal_average(r, t), v = r(t);
                    text += format_double(t) + "," + format_double(v) + "," + format_double(a) + "," +
                            format_double(a - v) + "\n";
                }
            }
            detail::emit(text, out_path, out);
            return 0;
        }
        if (*kf) {
            DiscreteSpace S = load_space(space_path);
            GridFunction f = detail::load_on(S, fpath);
            SpaceDescriptor X = parse_descriptor(sx);
            std::vector<double> grid = ts;
            if (!tgrid.empty()) {
                auto g = detail::parse_t_grid(tgrid);
                grid.insert(grid.end(), g.begin(), g.end());
            }
            if (grid.empty()) throw std::invalid_argument("kfun: give --t or --t-grid");
            KOptions opt;
            opt.max_iter = iters;
            opt.run_solver = !trivial && GridNorm(X, S.measures).smooth_supported();
            std::vector<GridFunction> fam = k_candidate_family(S, f, X);
            std::vector<KResult> res_k(grid.size());
            parallel_for(grid.size(), [&](std::size_t i) { res_k[i] = k_functional(S, f, X, grid[i], opt, &fam); });
            std::string text = "t,K,residual_norm,gradient_norm\n";
            for (std::size_t i = 0; i < grid.size(); ++i)
                text += format_double(grid[i]) + "," + format_double(res_k[i].value) + "," +
                        format_double(res_k[i].residual_norm) + "," + format_double(res_k[i].gradient_norm) + "\n";
            detail::emit(text, out_path, out);
            return 0;
        }
        if (*bm) {
            DiscreteSpace S = load_space(space_path);
            GridFunction f = detail::load_on(S, fpath);
            out << format_double(bmo_norm(S, f, metric_ball_family(S, ladder))) << "\n";
            return 0;
        }
        if (*vf) {
            vo.seed = seed;
            if (suites.empty()) suites = {"all"};
            VerifyResult V = run_verify(suites, vo);
            for (const auto& r : V.reports) {
                const char* tagw = r.asserted_constant ? (r.asserted_ok() ? "PASS" : "FAIL") : "INFO";
                out << tagw << " " << r.check_id << " max_ratio=" << format_double(r.max_ratio())
                    << " pass=" << r.pass_count() << "/" << r.cases.size();
                if (r.asserted_constant) out << " C=" << format_double(*r.asserted_constant);
                out << "\n";
            }
            if (!report.empty()) write_text(report, to_json(V).dump(1) + "\n");
            return V.asserted_ok() ? 0 : 1;
        }
        if (*en) {
            SpaceDescriptor X = parse_descriptor(sx);
            bool growth = ekind == "growth";
            if (!growth && ekind != "continuity") throw std::invalid_argument("--kind must be growth or continuity");
            int r = eres > 0 ? eres : (growth ? 256 : 64);
            DiscreteSpace S = build_space(dim == 1 ? SpaceKind::interval : SpaceKind::cube, dim, r);
            Family F = family == "logs"       ? truncated_log_family(S, X)
                       : family == "extremal" ? extremal_family(S, X)
                       : family == "bumps"    ? bump_family(S, X)
                                              : throw std::invalid_argument("--family must be logs|extremal|bumps");
            std::vector<double> grid = !tgrid.empty() ? detail::parse_t_grid(tgrid)
                                       : growth       ? log_grid(1e-4, 0.1, 24)
                                                      : log_grid(2.0 * S.spacing(), 0.25, 10);
            EnvelopeCurve E = growth ? growth_envelope(S, F, grid) : continuity_envelope(S, F, grid);
            std::vector<double> bound(grid.size(), std::numeric_limits<double>::quiet_NaN());
            EnvelopeParams P;
            P.n = dim;
            P.X = X;
            P.p = X.p;
            P.q = X.q;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                if (growth && grid[i] < 0.5) bound[i] = envelope_bound(detail::growth_bound_kind(X, dim), P, grid[i]);
                else if (!growth && X.tag == NormTag::Lp && X.p > dim) bound[i] = std::pow(grid[i], -dim / X.p);
            }
            detail::emit(envelope_csv(E, bound), out_path, out);
            return 0;
        }
    } catch (const input_error& e) {
        err << "isokit: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "isokit: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "isokit: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

inline int run_command(int argc, char** argv) {
    return run_command(std::vector<std::string>(argv, argv + argc));
}

}  // namespace isokit
