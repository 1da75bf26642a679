#pragma once

// Command-line front end. Each command builds a Table (or a JSON report) from a
// RunConfig; run() parses argv with CLI11 and maps failures to exit codes:
// 0 success, 1 failed duality relation, 2 configuration or I/O error.

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "fdual/duality.hpp"

namespace fdual::cli {

struct Range {
    double lo = 0.0, hi = 1.0;
};

struct Grid {
    int nx = 0, ny = 0;  // 0 selects the command default
};

struct RunConfig {
    std::string command;
    ModelParams params{0.5, 0.0, 0.25, 1.0};
    Op rho0 = Op::Zero(2, 2);  // set to |0><0| by parse
    Grid grid;
    std::optional<Range> eps_range, temp_range, gamma_range, re_range, im_range;
    std::string times;  // "a:b:n" or "t1,t2,..." in units of 1/Gamma
    std::string out, breakdown_out, family, export_family, perturb;
    std::string format;  // empty: csv for tables, json for the duality report
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    int n_max = 2;
    unsigned threads = 0;
    bool to_stdout = false;
};

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
};

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string to_csv(const Table& t) {
    std::string s;
    for (std::size_t i = 0; i < t.header.size(); ++i) s += (i ? "," : "") + t.header[i];
    s += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ',';
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>) s += format_double(v);
                    else if constexpr (std::is_same_v<V, long long>) s += std::to_string(v);
                    else s += v;
                },
                row[i]);
        }
        s += '\n';
    }
    return s;
}

inline json to_json_rows(const Table& t) {
    json arr = json::array();
    for (const auto& row : t.rows) {
        json o = json::object();
        for (std::size_t i = 0; i < row.size(); ++i)
            std::visit(
                [&](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, double>) {
                        if (std::isfinite(v)) o[t.header[i]] = v;
                        else o[t.header[i]] = format_double(v);
                    } else {
                        o[t.header[i]] = v;
                    }
                },
                row[i]);
        arr.push_back(o);
    }
    return arr;
}

// ---------------------------------------------------------------------------
// Parsing helpers

inline Range parse_range(const std::string& s, const char* flag) {
    const auto c = s.find(':');
    if (c == std::string::npos) throw config_error(std::string(flag) + " expects lo:hi");
    Range r;
    try {
        r.lo = std::stod(s.substr(0, c));
        r.hi = std::stod(s.substr(c + 1));
    } catch (const std::exception&) {
        throw config_error(std::string(flag) + ": not a number range: " + s);
    }
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi)
        throw config_error(std::string(flag) + " needs finite lo <= hi");
    return r;
}

inline Grid parse_grid(const std::string& s) {
    Grid g;
    try {
        const auto x = s.find('x');
        g.nx = std::stoi(s.substr(0, x));
        g.ny = x == std::string::npos ? g.nx : std::stoi(s.substr(x + 1));
    } catch (const std::exception&) {
        throw config_error("--grid expects N or NXxNY");
    }
    if (g.nx < 1 || g.ny < 1) throw config_error("--grid counts must be positive");
    return g;
}

// "a:b:n" (inclusive, n points) or a comma list.
inline std::vector<double> parse_times(const std::string& s) {
    std::vector<double> out;
    try {
        if (std::count(s.begin(), s.end(), ':') == 2) {
            const auto c1 = s.find(':'), c2 = s.find(':', c1 + 1);
            const double a = std::stod(s.substr(0, c1)), b = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
            const int n = std::stoi(s.substr(c2 + 1));
            if (n < 1 || !(a <= b)) throw config_error("--times a:b:n needs a <= b and n >= 1");
            for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
        } else {
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
        }
    } catch (const config_error&) {
        throw;
    } catch (const std::exception&) {
        throw config_error("--times expects a:b:n or a comma list: " + s);
    }
    if (out.empty()) throw config_error("--times is empty");
    for (double t : out)
        if (!std::isfinite(t) || t < 0) throw config_error("--times must be finite and nonnegative");
    return out;
}

inline Op parse_rho0(const std::string& s) {
    json j;
    try {
        j = json::parse(s);
    } catch (const json::exception& e) {
        throw config_error(std::string("--rho0 is not JSON: ") + e.what());
    }
    const Op rho = j.is_object() ? operator_from_json(j) : matrix_from_json(j);
    if (rho.rows() != 2 || rho.cols() != 2) throw dimension_error("--rho0 must be 2x2");
    return rho;
}

inline Mutation parse_perturb(const std::string& s) {
    Mutation m;
    if (s.empty()) return m;
    const auto eq = s.find('=');
    if (eq == std::string::npos || s.substr(0, eq) != "gamma")
        throw config_error("--perturb supports gamma=<scale> only");
    try {
        m.gamma_scale = std::stod(s.substr(eq + 1));
    } catch (const std::exception&) {
        throw config_error("--perturb: bad scale");
    }
    if (!std::isfinite(m.gamma_scale) || m.gamma_scale <= 0) throw config_error("--perturb: scale must be positive");
    return m;
}

// Cell centers when centered, otherwise endpoints included.
inline std::vector<double> axis(Range r, int n, bool centered) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) {
        if (centered) v[i] = r.lo + (r.hi - r.lo) * (i + 0.5) / n;
        else v[i] = n == 1 ? r.lo : r.lo + (r.hi - r.lo) * i / (n - 1);
    }
    return v;
}

// Evaluates fn(i) for i < n across threads; results land in index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, unsigned threads, F fn) {
    std::vector<T> out(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_m;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_m);
                if (!err) err = std::current_exception();
                next = n;
            }
        }
    };
    const unsigned k = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < k; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

// ---------------------------------------------------------------------------
// Commands

inline Table cmd_dynamics(const RunConfig& cfg) {
    const ModelParams& th = cfg.params;
    const RlmProvider rp(th);
    const auto times = parse_times(cfg.times.empty() ? "0:10:201" : cfg.times);
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw config_error("dynamics needs strictly increasing times");
    const SuperOp S = slip_operator(th).matrix;
    const Op N = rlm::number();
    Table t{{"t", "occ_exact", "occ_semigroup", "occ_slip", "current_exact", "current_closed_form"}, {}};
    auto occ = [&](const SuperOp& map) { return (N * apply<double>(map, cfg.rho0)).trace().real(); };
    t.rows = parallel_map<std::vector<Cell>>(times.size(), cfg.threads, [&](std::size_t i) {
        const double s = times[i] / std::abs(th.gamma);
        const SuperOp Pi = rp.propagator(s);
        const SuperOp semi = semigroup_propagator(s, th);
        // particle current into the dot, d<N>/dt with d Pi/dt = -i G Pi
        const Op drho = apply<double>(SuperOp(cplx(0, -1) * rp.generator(s) * Pi), cfg.rho0);
        const double current = (N * drho).trace().real();
        return std::vector<Cell>{s, occ(Pi), occ(semi), occ(SuperOp(semi * S)), current, rp.current(s, cfg.rho0)};
    });
    return t;
}

inline Table cmd_divisibility_map(const RunConfig& cfg) {
    const int nx = cfg.grid.nx ? cfg.grid.nx : 121, ny = cfg.grid.ny ? cfg.grid.ny : 121;
    const Range xr = cfg.eps_range.value_or(Range{0.0, 3.0}), yr = cfg.temp_range.value_or(Range{0.02, 3.0});
    if (!(yr.lo > 0)) throw config_error("--T-range must be positive");
    const double G = cfg.params.gamma, mu = cfg.params.mu;
    if (!(G > 0)) throw config_error("--gamma must be positive");
    const auto xs = axis(xr, nx, false), ys = axis(yr, ny, false);
    Table t{{"x", "y", "max_g", "max_g_dual"}, {}};
    t.rows = parallel_map<std::vector<Cell>>(xs.size() * ys.size(), cfg.threads, [&](std::size_t k) {
        const double y = ys[k / xs.size()], x = xs[k % xs.size()];
        const ModelParams th{mu + x * G, mu, y * G, G};
        const auto g = divisibility_max(DivisibilityFunction::g, th);
        const auto gd = divisibility_max(DivisibilityFunction::g_dual, th);
        const double dual = gd.diverges ? std::numeric_limits<double>::infinity() : gd.max_value;
        return std::vector<Cell>{x, y, g.max_value, dual};
    });
    return t;
}

inline Table cmd_frequency_map(const RunConfig& cfg) {
    const ModelParams& th = cfg.params;
    const double G = std::abs(th.gamma);
    // Even default counts keep cell centers off E = 0, -i Gamma/2 and -i Gamma.
    const int nx = cfg.grid.nx ? cfg.grid.nx : 160, ny = cfg.grid.ny ? cfg.grid.ny : 120;
    const Range xr = cfg.re_range.value_or(Range{-2.0, 2.0}), yr = cfg.im_range.value_or(Range{-2.5, 0.5});
    const auto xs = axis(xr, nx, true), ys = axis(yr, ny, true);
    const RlmProvider rp(th);
    const SuperOp S = slip_operator(th).matrix;
    std::vector<cplx> poles = stationary_eigenvalues(th);
    Table t{{"re_E", "im_E", "abs_exact", "abs_error_semigroup", "abs_error_slip"}, {}};
    t.rows = parallel_map<std::vector<Cell>>(xs.size() * ys.size(), cfg.threads, [&](std::size_t k) {
        cplx E(xs[k % xs.size()] * G, ys[k / xs.size()] * G);
        for (cplx p : poles)  // exact pole hit on a user grid: shift off it
            if (std::abs(E - p) < 1e-12 * G) E += cplx(1e-9 * G, 1e-9 * G);
        const cplx exact = rp.propagator_hat(E)(0, 0);
        const SuperOp semi = semigroup_propagator_hat(E, th);
        const cplx e1 = exact - semi(0, 0), e2 = exact - SuperOp(semi * S)(0, 0);
        return std::vector<Cell>{E.real() / G, E.imag() / G, std::abs(exact), std::abs(e1), std::abs(e2)};
    });
    return t;
}

struct MarkovTables {
    Table onset, breakdown;
};

inline MarkovTables cmd_markov(const RunConfig& cfg) {
    const double T = cfg.params.temperature;
    if (!(T > 0)) throw config_error("--T must be positive");
    const int nx = cfg.grid.nx ? cfg.grid.nx : 41, ny = cfg.grid.ny ? cfg.grid.ny : 41;
    const Range xr = cfg.eps_range.value_or(Range{0.0, 4.0}), yr = cfg.gamma_range.value_or(Range{0.1, 20.0});
    if (!(yr.lo > 0)) throw config_error("--gamma-range must be positive");
    const auto xs = axis(xr, nx, false), ys = axis(yr, ny, false);
    MarkovTables out;
    out.onset.header = {"detuning_over_T", "gamma_over_T", "cp_onset_time_T", "min_choi_eigenvalue_at_zero"};
    out.onset.rows = parallel_map<std::vector<Cell>>(xs.size() * ys.size(), cfg.threads, [&](std::size_t k) {
        const double x = xs[k / ys.size()], y = ys[k % ys.size()];
        const auto r = cp_onset_time({cfg.params.mu + x * T, cfg.params.mu, T, y * T});
        Cell onset;
        switch (r.kind) {
            case OnsetResult::Kind::always: onset = std::string("always"); break;
            case OnsetResult::Kind::never: onset = std::string("never"); break;
            default: onset = r.time * T;
        }
        return std::vector<Cell>{x, y, onset, r.min_eigenvalue_at_zero};
    });
    out.breakdown.header = {"detuning_over_T", "n", "gamma_over_T", "height"};
    for (double x : xs) {
        if (x == 0.0) continue;  // the breakdown points need eps != mu
        const auto scan = breakdown_locator(T, x * T, cfg.n_max);
        for (std::size_t n = 0; n < scan.peaks.size(); ++n)
            out.breakdown.rows.push_back({x, static_cast<long long>(n), scan.peaks[n].gamma / T, scan.peaks[n].height});
    }
    return out;
}

struct DualityOutcome {
    json report;
    bool all_pass = false;
    json exported;  // recorded family when requested
};

inline std::vector<ModelParams> suite_params_for(const RunConfig& cfg, const json* family) {
    std::vector<ModelParams> ps;
    if (family && family->contains("suite_params")) {
        for (const auto& p : family->at("suite_params")) ps.push_back(params_from_json(p));
    } else if (family) {
        std::set<ModelParams> seen;
        for (const auto& s : family->at("samples")) {
            const ModelParams th = params_from_json(s.at("theta"));
            if (th.gamma > 0 && seen.insert(th).second) ps.push_back(th);
        }
    } else {
        ps = default_suite_params();
    }
    if (cfg.seed) {
        std::mt19937_64 rng(*cfg.seed);
        std::uniform_real_distribution<double> e(-2, 2), m(-1, 1), T(0.1, 2);
        for (int i = 0; i < 3; ++i) {
            const double eps = e(rng), mu = m(rng), temp = T(rng);
            ps.push_back({eps, mu, temp, 1.0});
        }
    }
    return ps;
}

inline DualityOutcome cmd_duality_check(const RunConfig& cfg) {
    SuiteConfig sc;
    sc.threads = cfg.threads;
    sc.mutation = parse_perturb(cfg.perturb);
    if (cfg.tol) {
        if (!(*cfg.tol > 0)) throw config_error("--tol must be positive");
        sc.tol = {*cfg.tol, *cfg.tol, *cfg.tol, *cfg.tol};
    }
    SuperOpFamily fam;
    std::shared_ptr<FamilyRecord> rec;
    json file;
    if (!cfg.family.empty()) {
        std::ifstream in(cfg.family);
        if (!in) throw config_error("cannot open family file " + cfg.family);
        try {
            file = json::parse(in);
        } catch (const json::exception& e) {
            throw config_error(std::string("family file is not JSON: ") + e.what());
        }
        fam = family_from_json(file);
        if (file.contains("suite_times")) sc.times = file.at("suite_times").get<std::vector<double>>();
    } else {
        fam = rlm_family();
        if (!cfg.export_family.empty()) {
            rec = std::make_shared<FamilyRecord>();
            fam = recording_family(fam, rec);
        }
    }
    if (!cfg.times.empty()) sc.times = parse_times(cfg.times);
    sc.params = suite_params_for(cfg, cfg.family.empty() ? nullptr : &file);
    const auto reports = run_suite(fam, sc);
    DualityOutcome out;
    out.report = json::array();
    out.all_pass = true;
    for (const auto& r : reports) {
        out.report.push_back(report_to_json(r));
        out.all_pass = out.all_pass && r.pass;
    }
    if (rec) {
        out.exported = rec->to_json(fam.parity_operator);
        json ps = json::array();
        for (const auto& p : sc.params) ps.push_back(params_to_json(p));
        out.exported["suite_params"] = ps;
        out.exported["suite_times"] = sc.times;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Output and entry point

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::ios_base::failure("cannot open " + path + " for writing");
    f << text;
    if (!f) throw std::ios_base::failure("write failed: " + path);
}

inline std::string render(const Table& t, const std::string& format) {
    return format == "json" ? to_json_rows(t).dump(1) + "\n" : to_csv(t);
}

inline std::string sibling_path(const std::string& out, const std::string& suffix) {
    const std::filesystem::path p(out);
    return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

// Emits text to --out and, with --stdout, to the stream.
inline void emit(const RunConfig& cfg, const std::string& path, const std::string& text, std::ostream& out) {
    if (!path.empty()) write_text(path, text);
    if (cfg.to_stdout) out << text;
}

inline int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.format.empty() && cfg.format != "csv" && cfg.format != "json") throw config_error("--format must be csv or json");
    if (cfg.out.empty() && !cfg.to_stdout) throw config_error("no output selected: give --out or --stdout");
    if (cfg.command == "dynamics") {
        emit(cfg, cfg.out, render(cmd_dynamics(cfg), cfg.format), out);
    } else if (cfg.command == "divisibility-map") {
        emit(cfg, cfg.out, render(cmd_divisibility_map(cfg), cfg.format), out);
    } else if (cfg.command == "frequency-map") {
        emit(cfg, cfg.out, render(cmd_frequency_map(cfg), cfg.format), out);
    } else if (cfg.command == "markov") {
        const auto m = cmd_markov(cfg);
        if (cfg.format == "json") {
            const json j = {{"onset", to_json_rows(m.onset)}, {"breakdown", to_json_rows(m.breakdown)}};
            emit(cfg, cfg.out, j.dump(1) + "\n", out);
        } else {
            const std::string bpath =
                !cfg.breakdown_out.empty() ? cfg.breakdown_out
                                           : (cfg.out.empty() ? std::string() : sibling_path(cfg.out, "_breakdown"));
            emit(cfg, cfg.out, to_csv(m.onset), out);
            if (cfg.to_stdout) out << '\n';
            emit(cfg, bpath, to_csv(m.breakdown), out);
        }
    } else if (cfg.command == "duality-check") {
        const auto d = cmd_duality_check(cfg);
        if (cfg.format == "csv") {
            Table t{{"relation_id", "epsilon", "mu", "temperature", "gamma", "max_residual", "tolerance", "pass"}, {}};
            for (const auto& r : d.report) {
                const auto& p = r.at("params");
                t.rows.push_back({r.at("relation_id").get<std::string>(), p.at("epsilon").get<double>(),
                                  p.at("mu").get<double>(), p.at("temperature").get<double>(),
                                  p.at("gamma").get<double>(), r.at("max_residual").is_number() ? r.at("max_residual").get<double>()
                                                                      : std::numeric_limits<double>::infinity(), r.at("tolerance").get<double>(),
                                  static_cast<long long>(r.at("pass").get<bool>())});
            }
            emit(cfg, cfg.out, to_csv(t), out);
        } else {
            emit(cfg, cfg.out, d.report.dump(1) + "\n", out);
        }
        if (!cfg.export_family.empty()) write_text(cfg.export_family, d.exported.dump() + "\n");
        if (!d.all_pass) {
            std::size_t failed = 0;
            for (const auto& r : d.report) failed += r.at("pass").get<bool>() ? 0 : 1;
            err << "duality-check: " << failed << " of " << d.report.size() << " reports failed\n";
            return 1;
        }
    } else {
        throw config_error("unknown command " + cfg.command);
    }
    return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Fermionic duality for the wide-band resonant level model"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string rho0, grid, eps_range, temp_range, gamma_range, re_range, im_range;
    std::optional<double> eps, mu, T, gamma;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--eps", eps, "dot level energy");
        sub->add_option("--mu", mu, "reservoir chemical potential");
        sub->add_option("--T", T, "reservoir temperature");
        sub->add_option("--gamma", gamma, "coupling rate Gamma");
        sub->add_option("--out", cfg.out, "output file");
        sub->add_option("--format", cfg.format, "csv or json");
        sub->add_option("--grid", grid, "grid counts N or NXxNY");
        sub->add_option("--threads", cfg.threads, "worker threads (0: hardware)");
        sub->add_flag("--stdout", cfg.to_stdout, "also write results to stdout");
    };
    auto* dyn = app.add_subcommand("dynamics", "occupation and current traces");
    common(dyn);
    dyn->add_option("--rho0", rho0, "initial 2x2 state as JSON");
    dyn->add_option("--times", cfg.times, "a:b:n or list, units of 1/Gamma");
    auto* div = app.add_subcommand("divisibility-map", "max|g| and max|gbar| over (eps-mu)/Gamma, T/Gamma");
    common(div);
    div->add_option("--eps-range", eps_range, "x = (eps-mu)/Gamma range lo:hi");
    div->add_option("--T-range", temp_range, "y = T/Gamma range lo:hi");
    auto* freq = app.add_subcommand("frequency-map", "|(0|Pi-hat(E)|0)| and approximation errors");
    common(freq);
    freq->add_option("--re-range", re_range, "Re E / Gamma range lo:hi");
    freq->add_option("--im-range", im_range, "Im E / Gamma range lo:hi");
    auto* dual = app.add_subcommand("duality-check", "run the duality relation suite");
    common(dual);
    dual->add_option("--family", cfg.family, "external family JSON file");
    dual->add_option("--export-family", cfg.export_family, "record the evaluated RLM family to JSON");
    dual->add_option("--tol", cfg.tol, "uniform tolerance override");
    dual->add_option("--times", cfg.times, "sample times, units of 1/Gamma");
    dual->add_option("--perturb", cfg.perturb, "test hook: gamma=<scale> on one side");
    dual->add_option("--seed", cfg.seed, "add three random parameter sets");
    auto* mk = app.add_subcommand("markov", "CP onset of the slip approximation and breakdown points");
    common(mk);
    mk->add_option("--eps-range", eps_range, "(eps-mu)/T range lo:hi");
    mk->add_option("--gamma-range", gamma_range, "Gamma/T range lo:hi");
    mk->add_option("--n-max", cfg.n_max, "highest breakdown index");
    mk->add_option("--breakdown-out", cfg.breakdown_out, "breakdown CSV (default: <out>_breakdown)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
        if (eps) cfg.params.epsilon = *eps;
        if (mu) cfg.params.mu = *mu;
        if (T) cfg.params.temperature = *T;
        if (gamma) cfg.params.gamma = *gamma;
        for (double v : {cfg.params.epsilon, cfg.params.mu, cfg.params.temperature, cfg.params.gamma})
            if (!std::isfinite(v)) throw config_error("model parameters must be finite");
        validate(cfg.params);
        cfg.rho0(0, 0) = 1.0;
        if (!rho0.empty()) cfg.rho0 = parse_rho0(rho0);
        if (!grid.empty()) cfg.grid = parse_grid(grid);
        if (!eps_range.empty()) cfg.eps_range = parse_range(eps_range, "--eps-range");
        if (!temp_range.empty()) cfg.temp_range = parse_range(temp_range, "--T-range");
        if (!gamma_range.empty()) cfg.gamma_range = parse_range(gamma_range, "--gamma-range");
        if (!re_range.empty()) cfg.re_range = parse_range(re_range, "--re-range");
        if (!im_range.empty()) cfg.im_range = parse_range(im_range, "--im-range");
        if (cfg.n_max < 0) throw config_error("--n-max must be nonnegative");
        return dispatch(cfg, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace fdual::cli
