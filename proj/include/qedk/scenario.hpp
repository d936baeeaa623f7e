#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "qedk/check_report.hpp"
#include "qedk/coupling.hpp"
#include "qedk/errors.hpp"
#include "qedk/field.hpp"
#include "qedk/frequency_grid.hpp"
#include "qedk/kernels.hpp"
#include "qedk/kk.hpp"
#include "qedk/laplace.hpp"
#include "qedk/medium.hpp"

namespace qedk {

struct TimeWindow {
    double t0 = 0.0;
    double t1 = 10.0;
    double dt = 0.1;
};

struct GridSpec {
    std::size_t n = 2000;
    double omega_max = 40.0;
    double omega_min = 0.0; // used by the log rule only
    GridRule rule = GridRule::uniform_trapezoid;
};

// One scenario = one medium + one mode + one job. Parsed from a JSON config
// file; every invalid or missing key surfaces as a ConfigError carrying the
// dotted key path.
struct ScenarioConfig {
    MediumModel medium;
    std::string kind; // kernels|coupling|commutator|energy|kk|example1..example4
    double omega_q = 1.0;
    TimeWindow window;
    GridSpec grid;
    Branch branch = Branch::forward;
    std::string out_dir; // empty = unset
};

struct TimeSeries {
    std::vector<double> t;
    std::vector<cplx> v;
};

struct RunResult {
    std::vector<CheckReport> reports;
    std::vector<std::string> files;
    bool pass = false;
    int exit_code = 1;
};

struct RunOptions {
    std::string out_dir;     // overrides the config's scenario.out
    bool emit_series = true; // false = checks only, nothing written
};

inline const char* branch_label(Branch b) {
    return b == Branch::forward ? "forward" : "backward";
}

// ---------------------------------------------------------------- parsing

namespace detail {

inline const nlohmann::ordered_json* child(const nlohmann::ordered_json& j, const char* key) {
    if (!j.is_object()) return nullptr;
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline double req_num(const nlohmann::ordered_json& j, const char* key, const std::string& path) {
    const auto* c = child(j, key);
    if (!c) throw ConfigError(path, "is required");
    if (!c->is_number()) throw ConfigError(path, "must be a number");
    return c->get<double>();
}

inline double opt_num(const nlohmann::ordered_json& j, const char* key, const std::string& path,
                      double dflt) {
    const auto* c = child(j, key);
    if (!c) return dflt;
    if (!c->is_number()) throw ConfigError(path, "must be a number");
    return c->get<double>();
}

inline std::string req_str(const nlohmann::ordered_json& j, const char* key,
                           const std::string& path) {
    const auto* c = child(j, key);
    if (!c) throw ConfigError(path, "is required");
    if (!c->is_string()) throw ConfigError(path, "must be a string");
    return c->get<std::string>();
}

inline std::string opt_str(const nlohmann::ordered_json& j, const char* key,
                           const std::string& path, const std::string& dflt) {
    const auto* c = child(j, key);
    if (!c) return dflt;
    if (!c->is_string()) throw ConfigError(path, "must be a string");
    return c->get<std::string>();
}

// Two-column CSV `t,chi` with a header row. Samples must sit on a uniform
// grid t = dt, 2dt, ...; a leading t = 0 row is tolerated and dropped.
inline TabulatedKernel load_tabulated_csv(const std::filesystem::path& file,
                                          const std::string& key) {
    std::ifstream in(file);
    if (!in) throw ConfigError(key, "cannot open '" + file.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(key, "'" + file.string() + "' is empty");

    std::vector<double> ts, chis;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t a = line.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) continue;
        double tv = 0.0, cv = 0.0;
        if (std::sscanf(line.c_str(), "%lf , %lf", &tv, &cv) != 2)
            throw ConfigError(key, "'" + file.string() + "' line " + std::to_string(lineno) +
                                       ": expected `t,chi`");
        ts.push_back(tv);
        chis.push_back(cv);
    }
    std::size_t first = 0;
    if (!ts.empty() && std::abs(ts.front()) < 1e-12) first = 1; // causal: chi(0) = 0
    if (ts.size() - first < 2)
        throw ConfigError(key, "'" + file.string() + "' needs at least two samples past t = 0");

    double dt = ts[first + 1] - ts[first];
    if (!(dt > 0.0))
        throw ConfigError(key, "'" + file.string() + "' times must be strictly increasing");
    for (std::size_t i = first; i + 1 < ts.size(); ++i)
        if (std::abs(ts[i + 1] - ts[i] - dt) > 1e-6 * dt)
            throw ConfigError(key, "'" + file.string() + "' samples are not uniformly spaced");
    if (std::abs(ts[first] - dt) > 1e-6 * dt)
        throw ConfigError(key,
                          "'" + file.string() + "' samples must start at t = dt (one spacing)");

    TabulatedKernel k;
    k.dt = dt;
    k.samples.assign(chis.begin() + static_cast<std::ptrdiff_t>(first), chis.end());
    return k;
}

inline SusceptibilityKernel parse_kernel(const nlohmann::ordered_json* node,
                                         const std::string& path,
                                         const std::filesystem::path& base_dir) {
    if (!node || node->is_null()) return ZeroKernel{};
    if (!node->is_object()) throw ConfigError(path, "must be an object");
    std::string kind = req_str(*node, "kind", path + ".kind");

    if (kind == "zero") return ZeroKernel{};

    if (kind == "box") {
        BoxKernel b;
        b.chi0 = req_num(*node, "chi0", path + ".chi0");
        b.delta = req_num(*node, "delta", path + ".delta");
        if (!(b.chi0 > 0.0)) throw ConfigError(path + ".chi0", "must be > 0");
        if (!(b.delta > 0.0)) throw ConfigError(path + ".delta", "must be > 0");
        return b;
    }

    if (kind == "step") {
        StepKernel s;
        s.beta = req_num(*node, "beta", path + ".beta");
        if (!(s.beta > 0.0)) throw ConfigError(path + ".beta", "must be > 0");
        return s;
    }

    if (kind == "lorentz") {
        LorentzKernel l;
        l.omega0 = req_num(*node, "omega0", path + ".omega0");
        l.gamma = opt_num(*node, "gamma", path + ".gamma", 0.0);
        l.omega_p = req_num(*node, "omega_p", path + ".omega_p");
        if (!(l.omega0 > 0.0)) throw ConfigError(path + ".omega0", "must be > 0");
        if (!(l.gamma >= 0.0)) throw ConfigError(path + ".gamma", "must be >= 0");
        if (!(l.gamma < 2.0 * l.omega0))
            throw ConfigError(path + ".gamma", "must be < 2*omega0");
        if (!(l.omega_p > 0.0)) throw ConfigError(path + ".omega_p", "must be > 0");
        return l;
    }

    if (kind == "tabulated") {
        if (const auto* f = child(*node, "file")) {
            if (!f->is_string()) throw ConfigError(path + ".file", "must be a string");
            std::filesystem::path p = f->get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            return load_tabulated_csv(p, path + ".file");
        }
        const auto* s = child(*node, "samples");
        if (!s) throw ConfigError(path + ".samples", "is required (or give `file`)");
        if (!s->is_array() || s->size() < 2)
            throw ConfigError(path + ".samples", "must be an array of at least two numbers");
        TabulatedKernel k;
        for (const auto& e : *s) {
            if (!e.is_number())
                throw ConfigError(path + ".samples", "must contain numbers only");
            k.samples.push_back(e.get<double>());
        }
        k.dt = req_num(*node, "dt", path + ".dt");
        if (!(k.dt > 0.0)) throw ConfigError(path + ".dt", "must be > 0");
        return k;
    }

    throw ConfigError(path + ".kind",
                      "unknown kind '" + kind + "' (zero, box, step, lorentz, tabulated)");
}

inline Branch parse_branch(const std::string& s, const std::string& path) {
    if (s == "forward") return Branch::forward;
    if (s == "backward") return Branch::backward;
    throw ConfigError(path, "must be 'forward' or 'backward'");
}

inline GridRule parse_rule(const std::string& s, const std::string& path) {
    if (s == "linear" || s == "uniform" || s == "uniform-trapezoid")
        return GridRule::uniform_trapezoid;
    if (s == "gauss" || s == "gauss-legendre") return GridRule::gauss_legendre;
    if (s == "log" || s == "log-trapezoid") return GridRule::log_trapezoid;
    throw ConfigError(path, "must be 'linear', 'gauss', or 'log'");
}

inline bool known_scenario_kind(const std::string& k) {
    static const char* kinds[] = {"kernels",  "coupling", "commutator",
                                  "energy",   "kk",       "example1",
                                  "example2", "example3", "example4"};
    for (const char* s : kinds)
        if (k == s) return true;
    return false;
}

} // namespace detail

inline ScenarioConfig parse_config(const nlohmann::ordered_json& j,
                                   const std::filesystem::path& base_dir = ".") {
    ScenarioConfig cfg;

    SusceptibilityKernel ke = ZeroKernel{}, km = ZeroKernel{};
    if (const auto* med = detail::child(j, "medium")) {
        if (!med->is_object()) throw ConfigError("medium", "must be an object");
        ke = detail::parse_kernel(detail::child(*med, "chi_e"), "medium.chi_e", base_dir);
        km = detail::parse_kernel(detail::child(*med, "chi_m"), "medium.chi_m", base_dir);
    }
    UnitsSystem units;
    if (const auto* u = detail::child(j, "units")) {
        if (!u->is_object()) throw ConfigError("units", "must be an object");
        units.omega_ref = detail::opt_num(*u, "omega_ref", "units.omega_ref", 1.0);
        if (!(units.omega_ref > 0.0)) throw ConfigError("units.omega_ref", "must be > 0");
    }
    cfg.medium = MediumModel(std::move(ke), std::move(km), units);

    const auto* sc = detail::child(j, "scenario");
    if (!sc) throw ConfigError("scenario", "is required");
    if (!sc->is_object()) throw ConfigError("scenario", "must be an object");

    cfg.kind = detail::req_str(*sc, "kind", "scenario.kind");
    if (!detail::known_scenario_kind(cfg.kind))
        throw ConfigError("scenario.kind",
                          "unknown kind '" + cfg.kind +
                              "' (kernels, coupling, commutator, energy, kk, example1..example4)");

    cfg.omega_q = detail::req_num(*sc, "omega_q", "scenario.omega_q");
    if (!(cfg.omega_q > 0.0)) throw ConfigError("scenario.omega_q", "must be > 0");

    cfg.window.t0 = detail::opt_num(*sc, "t0", "scenario.t0", 0.0);
    cfg.window.t1 = detail::opt_num(*sc, "t1", "scenario.t1", 10.0);
    cfg.window.dt = detail::opt_num(*sc, "dt", "scenario.dt", 0.1);
    if (!(cfg.window.t0 >= 0.0)) throw ConfigError("scenario.t0", "must be >= 0");
    if (!(cfg.window.t1 > cfg.window.t0)) throw ConfigError("scenario.t1", "must be > t0");
    if (!(cfg.window.dt > 0.0)) throw ConfigError("scenario.dt", "must be > 0");
    if ((cfg.window.t1 - cfg.window.t0) / cfg.window.dt > 2e6)
        throw ConfigError("scenario.dt", "time window resolves to more than 2e6 samples");

    cfg.branch = detail::parse_branch(
        detail::opt_str(*sc, "branch", "scenario.branch", "forward"), "scenario.branch");
    cfg.out_dir = detail::opt_str(*sc, "out", "scenario.out", "");

    if (const auto* gr = detail::child(j, "grid")) {
        if (!gr->is_object()) throw ConfigError("grid", "must be an object");
        double n = detail::opt_num(*gr, "n", "grid.n", 2000.0);
        if (!(n >= 8.0) || n != std::floor(n))
            throw ConfigError("grid.n", "must be an integer >= 8");
        cfg.grid.n = static_cast<std::size_t>(n);
        cfg.grid.omega_max = detail::opt_num(*gr, "omega_max", "grid.omega_max", 40.0);
        if (!(cfg.grid.omega_max > 0.0)) throw ConfigError("grid.omega_max", "must be > 0");
        cfg.grid.omega_min = detail::opt_num(*gr, "omega_min", "grid.omega_min", 0.0);
        if (cfg.grid.omega_min < 0.0) throw ConfigError("grid.omega_min", "must be >= 0");
        cfg.grid.rule = detail::parse_rule(
            detail::opt_str(*gr, "rule", "grid.rule", "linear"), "grid.rule");
        if (cfg.grid.rule == GridRule::log_trapezoid && !(cfg.grid.omega_min > 0.0))
            throw ConfigError("grid.omega_min", "the log rule needs omega_min > 0");
    }

    return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path, std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j, std::filesystem::path(path).parent_path());
}

// ---------------------------------------------------------------- emission

// CSV time series: header `t,re,im`, 17 significant digits, newline
// terminated. Byte-stable across runs by construction.
inline void emit_csv(const TimeSeries& series, const std::string& path) {
    if (series.t.empty())
        throw std::invalid_argument("emit_csv: refusing to write an empty series");
    if (series.t.size() != series.v.size())
        throw std::invalid_argument("emit_csv: t/value size mismatch");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("emit_csv: cannot open '" + path + "' for writing");
    std::fputs("t,re,im\n", f);
    for (std::size_t i = 0; i < series.t.size(); ++i)
        std::fprintf(f, "%.17g,%.17g,%.17g\n", series.t[i], series.v[i].real(),
                     series.v[i].imag());
    bool bad = std::ferror(f) != 0;
    std::fclose(f);
    if (bad) throw IoError("emit_csv: write failed for '" + path + "'");
}

namespace detail {

struct Emitter {
    std::filesystem::path dir = ".";
    bool enabled = true;
    std::vector<std::string> files;

    void csv(const TimeSeries& s, const std::string& name) {
        if (!enabled) return;
        std::string p = (dir / name).string();
        emit_csv(s, p);
        files.push_back(p);
    }

    void json(const nlohmann::ordered_json& j, const std::string& name) {
        if (!enabled) return;
        std::string p = (dir / name).string();
        std::FILE* f = std::fopen(p.c_str(), "wb");
        if (!f) throw IoError("cannot open '" + p + "' for writing");
        std::string body = j.dump(2);
        body += '\n';
        bool bad = std::fwrite(body.data(), 1, body.size(), f) != body.size();
        std::fclose(f);
        if (bad) throw IoError("write failed for '" + p + "'");
        files.push_back(p);
    }
};

inline std::vector<double> window_times(const TimeWindow& w) {
    std::vector<double> t;
    auto n = static_cast<long long>(std::floor((w.t1 - w.t0) / w.dt + 1e-9));
    t.reserve(static_cast<std::size_t>(n) + 1);
    for (long long i = 0; i <= n; ++i) t.push_back(w.t0 + w.dt * static_cast<double>(i));
    return t;
}

inline std::vector<double> thin(const std::vector<double>& v, std::size_t cap) {
    if (v.size() <= cap) return v;
    std::vector<double> out;
    out.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i)
        out.push_back(v[i * (v.size() - 1) / (cap - 1)]);
    return out;
}

inline std::string fmt_value(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%g", v);
    return b;
}

inline FrequencyGrid build_grid(const GridSpec& g) {
    int n = static_cast<int>(g.n);
    switch (g.rule) {
        case GridRule::uniform_trapezoid: return make_uniform_grid(n, g.omega_max);
        case GridRule::gauss_legendre: return make_gauss_grid(n, g.omega_max);
        case GridRule::log_trapezoid: return make_log_grid(n, g.omega_min, g.omega_max);
    }
    throw std::logic_error("build_grid: unhandled rule");
}

inline std::string series_name(const char* kind, double omega_q, Branch b) {
    return std::string(kind) + "_wq" + fmt_value(omega_q) + "_" + branch_label(b) + ".csv";
}

} // namespace detail

// ------------------------------------------------------- scenario bodies

namespace detail {

inline void scenario_kernels(const ScenarioConfig& cfg, Emitter& em,
                             std::vector<CheckReport>& reports) {
    auto K = make_kernels(cfg.medium, cfg.omega_q, cfg.branch);
    auto times = window_times(cfg.window);

    TimeSeries Zs, rs, hs;
    Zs.t = rs.t = hs.t = times;
    for (double t : times) {
        Zs.v.push_back(K.Z(t));
        rs.v.push_back(K.r(t));
        hs.v.push_back(K.h(t));
    }
    em.csv(Zs, series_name("Z", cfg.omega_q, cfg.branch));
    em.csv(rs, series_name("r", cfg.omega_q, cfg.branch));
    em.csv(hs, series_name("h", cfg.omega_q, cfg.branch));

    std::vector<double> wk;
    for (double frac : {0.05, 0.1, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95})
        wk.push_back(frac * cfg.grid.omega_max);
    reports.push_back(kernel_consistency(K, thin(times, 33), wk));
}

// The round trip chi -> |f|^2 -> chi, reported with a floored relative
// metric so near-zeros of chi do not dominate. Tolerances are per kernel
// family; the box kernel excludes a window around its memory cutoff where
// any truncated spectral reconstruction rings.
inline CheckReport coupling_roundtrip_report(const SusceptibilityKernel& kernel,
                                             const CouplingSpectrum& sp,
                                             const std::vector<double>& all_times) {
    double excl_lo = 0.0, excl_hi = -1.0;
    if (const auto* b = std::get_if<BoxKernel>(&kernel)) {
        excl_lo = b->delta - 0.5;
        excl_hi = b->delta + 0.5;
    }
    std::vector<double> times;
    for (double t : all_times) {
        if (!(t > 0.0)) continue;
        if (t >= excl_lo && t <= excl_hi) continue;
        times.push_back(t);
    }
    if (times.empty())
        throw ConfigError("scenario.t1", "no usable round-trip sample times in the window");

    CouplingSpectrum detached = sp;
    detached.source.reset(); // residuals are this report's business
    auto got = chi_from_coupling(detached, times);

    std::vector<double> want(times.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        want[i] = chi_time(kernel, times[i]);
        scale = std::max(scale, std::abs(want[i]));
    }

    double tol = 1e-4;
    if (std::holds_alternative<ZeroKernel>(kernel)) tol = 1e-12;
    if (const auto* l = std::get_if<LorentzKernel>(&kernel); l && l->gamma == 0.0) tol = 1e-10;
    if (std::holds_alternative<BoxKernel>(kernel)) tol = 1e-3;
    if (std::holds_alternative<TabulatedKernel>(kernel)) tol = 1e-2;

    CheckReport rep;
    rep.check = "coupling-roundtrip";
    rep.medium = "chi_e=" + kernel_label(kernel);
    rep.grid_n = sp.grid.size();
    rep.grid_omega_max = sp.grid.omega_max;
    for (std::size_t i = 0; i < times.size(); ++i) {
        double res = scale > 0.0
                         ? std::abs(got[i] - want[i]) / std::max(std::abs(want[i]), 1e-3 * scale)
                         : std::abs(got[i]);
        rep.samples.push_back({times[i], got[i], want[i], res});
        rep.max_residual = std::max(rep.max_residual, res);
    }
    rep.tolerance = tol;
    rep.params["spectrum"] = coupling_kind_name(sp.kind);
    rep.params["residual_floor"] = "1e-3 of max |chi| over the window";
    if (sp.delta) {
        rep.params["delta_weight"] = sp.delta->weight;
        rep.params["delta_center"] = sp.delta->center;
    }
    if (excl_hi > excl_lo)
        rep.params["excluded_window"] = {excl_lo, excl_hi};
    rep.pass = rep.max_residual <= rep.tolerance;
    return rep;
}

inline void scenario_coupling(const ScenarioConfig& cfg, Emitter& em,
                              std::vector<CheckReport>& reports) {
    auto grid = build_grid(cfg.grid);
    auto sp = coupling_from_chi(cfg.medium.chi_e, CouplingKind::electric, grid);

    TimeSeries f2; // abscissa column holds omega here
    f2.t = grid.nodes;
    for (double v : sp.values) f2.v.push_back(cplx(v, 0.0));
    em.csv(f2, "coupling_f2.csv");

    auto rep = coupling_roundtrip_report(cfg.medium.chi_e, sp, window_times(cfg.window));

    TimeSeries rec;
    for (const auto& s : rep.samples) {
        rec.t.push_back(s.t);
        rec.v.push_back(cplx(s.value, 0.0));
    }
    em.csv(rec, "roundtrip_chi.csv");
    reports.push_back(std::move(rep));
}

inline void scenario_commutator(const ScenarioConfig& cfg, Emitter& em,
                                std::vector<CheckReport>& reports) {
    if (cfg.grid.n < 200)
        throw ConfigError("grid.n", "commutator scenario needs at least 200 nodes");
    if (cfg.grid.omega_max < 20.0 * cfg.omega_q)
        throw ConfigError("grid.omega_max", "must reach 20*omega_q for the commutator check");
    auto grid = build_grid(cfg.grid);
    if (grid.nodes.front() > cfg.omega_q / 20.0)
        throw ConfigError("grid.n",
                          "first node sits above omega_q/20; raise n or lower omega_max");

    auto times = window_times(cfg.window);
    TimeSeries cs;
    CheckReport rep;
    rep.check = "commutator-bounds";
    rep.medium = medium_label(cfg.medium);
    rep.grid_n = grid.size();
    rep.grid_omega_max = grid.omega_max;
    rep.tolerance = 5e-3;
    CommutatorLedger last{};
    for (double t : times) {
        auto led = commutator_check(cfg.medium, cfg.omega_q, t, grid, cfg.branch);
        cs.t.push_back(t);
        cs.v.push_back(cplx(led.value, 0.0));
        double res = std::abs(led.value - 1.0);
        rep.samples.push_back({t, led.value, 1.0, res});
        rep.max_residual = std::max(rep.max_residual, res);
        last = led;
    }
    rep.params["omega_q"] = cfg.omega_q;
    rep.params["branch"] = branch_label(cfg.branch);
    rep.params["final_photonic"] = last.photonic;
    rep.params["final_electric"] = last.electric;
    rep.params["final_magnetic"] = last.magnetic;
    rep.pass = rep.max_residual <= rep.tolerance;
    em.csv(cs, series_name("c", cfg.omega_q, cfg.branch));
    reports.push_back(std::move(rep));
}

// The energy scenario reads the box amplitudes as instantaneous
// susceptibilities (their small-width limit); a zero kernel means vacuum.
inline double instantaneous_chi(const SusceptibilityKernel& k, const std::string& key) {
    if (std::holds_alternative<ZeroKernel>(k)) return 0.0;
    if (const auto* b = std::get_if<BoxKernel>(&k)) return b->chi0;
    throw ConfigError(key, "energy scenario needs kind 'box' (instantaneous limit) or 'zero'");
}

inline void scenario_energy(const ScenarioConfig& cfg, Emitter& em,
                            std::vector<CheckReport>& reports) {
    double ce = instantaneous_chi(cfg.medium.chi_e, "medium.chi_e.kind");
    double cm = instantaneous_chi(cfg.medium.chi_m, "medium.chi_m.kind");
    auto rep = energy_example2(ce, cm, cfg.omega_q, window_times(cfg.window));
    TimeSeries u;
    for (const auto& s : rep.samples) {
        u.t.push_back(s.t);
        u.v.push_back(cplx(s.value, 0.0));
    }
    em.csv(u, "energy_wq" + fmt_value(cfg.omega_q) + ".csv");
    reports.push_back(std::move(rep));
}

inline void scenario_kk(const ScenarioConfig& cfg, Emitter& em,
                        std::vector<CheckReport>& reports) {
    if (cfg.grid.n < 32) throw ConfigError("grid.n", "kk scenario needs at least 32 nodes");
    double lo, hi;
    if (const auto* lz = std::get_if<LorentzKernel>(&cfg.medium.chi_e)) {
        lo = lz->omega0 / 50.0;
        hi = 50.0 * lz->omega0;
    } else if (cfg.grid.omega_min > 0.0) {
        lo = cfg.grid.omega_min;
        hi = cfg.grid.omega_max;
    } else {
        lo = cfg.grid.omega_max / 2500.0;
        hi = cfg.grid.omega_max;
    }
    auto grid = make_log_grid(static_cast<int>(cfg.grid.n), lo, hi);

    TimeSeries eps; // abscissa column holds omega
    eps.t = grid.nodes;
    for (double w : grid.nodes) eps.v.push_back(permittivity(cfg.medium, w, cfg.branch));
    em.csv(eps, "epsilon.csv");
    reports.push_back(kk_check(cfg.medium, grid));
}

inline void scenario_example1(const ScenarioConfig& cfg, Emitter& em,
                              std::vector<CheckReport>& reports) {
    auto K = make_kernels(cfg.medium, cfg.omega_q, cfg.branch);
    int sg = branch_sign(cfg.branch);
    auto times = window_times(cfg.window);

    CheckReport rep;
    rep.check = "vacuum-reduction";
    rep.medium = medium_label(cfg.medium);
    rep.grid_n = times.size();
    rep.grid_omega_max = 0.0;
    rep.tolerance = 1e-12;

    TimeSeries Zs;
    Zs.t = times;
    for (double t : times) {
        cplx z = K.Z(t);
        cplx want = std::exp(cplx(0.0, -sg * cfg.omega_q * t));
        Zs.v.push_back(z);
        double res = std::abs(z - want);
        rep.samples.push_back({t, std::abs(z), 1.0, res});
        rep.max_residual = std::max(rep.max_residual, res);
    }
    double wmax = 0.0;
    for (double frac : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        double w = frac * cfg.omega_q;
        wmax = std::max({wmax, spectrum_value(cfg.medium.chi_e, w),
                         spectrum_value(cfg.medium.chi_m, w)});
    }
    rep.params["omega_q"] = cfg.omega_q;
    rep.params["branch"] = branch_label(cfg.branch);
    rep.params["max_coupling_weight"] = wmax;
    rep.pass = rep.max_residual <= rep.tolerance && wmax == 0.0;

    em.csv(Zs, series_name("Z", cfg.omega_q, cfg.branch));
    reports.push_back(std::move(rep));
}

inline void scenario_example3(const ScenarioConfig& cfg, Emitter& em,
                              std::vector<CheckReport>& reports) {
    const auto* st = std::get_if<StepKernel>(&cfg.medium.chi_e);
    if (!st)
        throw ConfigError("medium.chi_e.kind", "example3 needs a step electric kernel");
    if (!is_zero_kernel(cfg.medium.chi_m))
        throw ConfigError("medium.chi_m.kind", "example3 needs chi_m = zero");

    double beta = st->beta, wq = cfg.omega_q;
    int sg = branch_sign(cfg.branch);
    auto K = make_kernels(cfg.medium, wq, cfg.branch);
    auto times = window_times(cfg.window);

    // damped-oscillator closed form; complex Omega covers the overdamped
    // side, the critical point gets its limit expression
    cplx om2(wq * wq - beta * beta / 4.0, 0.0);
    cplx Om = std::sqrt(om2);
    bool critical = std::abs(om2) < 1e-12 * wq * wq;
    auto closed = [&](double t) -> cplx {
        cplx head = std::exp(cplx(-beta * t / 2.0, 0.0));
        cplx lin(beta / 2.0, -sg * wq);
        if (critical) return head * (1.0 + lin * t);
        return head * (std::cos(Om * t) + lin / Om * std::sin(Om * t));
    };

    CheckReport rep;
    rep.check = "step-closed-form";
    rep.medium = medium_label(cfg.medium);
    rep.grid_n = times.size();
    rep.grid_omega_max = 0.0;
    rep.tolerance = std::abs(beta - 2.0 * wq) < 1e-6 * wq ? 1e-8 : 1e-10;

    TimeSeries Zs;
    Zs.t = times;
    for (double t : times) {
        cplx z = K.Z(t);
        cplx want = closed(t);
        Zs.v.push_back(z);
        double res = std::abs(z - want) / std::max(std::abs(want), 1e-12);
        rep.samples.push_back({t, std::abs(z), std::abs(want), res});
        rep.max_residual = std::max(rep.max_residual, res);
    }
    rep.params["beta"] = beta;
    rep.params["omega_q"] = wq;
    rep.params["branch"] = branch_label(cfg.branch);
    rep.params["mode_poles"] = poles_to_json(K.mode_poles.poles);
    rep.pass = rep.max_residual <= rep.tolerance;

    em.csv(Zs, series_name("Z", cfg.omega_q, cfg.branch));
    reports.push_back(std::move(rep));
}

inline void scenario_example4(const ScenarioConfig& cfg, Emitter& em,
                              std::vector<CheckReport>& reports) {
    const auto* lz = std::get_if<LorentzKernel>(&cfg.medium.chi_e);
    if (!lz)
        throw ConfigError("medium.chi_e.kind", "example4 needs a lorentz electric kernel");
    if (!is_zero_kernel(cfg.medium.chi_m))
        throw ConfigError("medium.chi_m.kind", "example4 needs chi_m = zero");

    double w0 = lz->omega0, g = lz->gamma, wp = lz->omega_p, wq = cfg.omega_q;
    auto K = make_kernels(cfg.medium, wq, cfg.branch);
    auto times = window_times(cfg.window);

    cplx e1 = 0.0, e4 = 1.0;
    for (const auto& p : K.mode_poles.poles) {
        for (int m = 0; m < p.multiplicity; ++m) {
            e1 += p.location;
            e4 *= p.location;
        }
    }

    CheckReport rep;
    rep.check = "lorentz-pole-structure";
    rep.medium = medium_label(cfg.medium);
    rep.grid_n = times.size();
    rep.grid_omega_max = 0.0;
    rep.tolerance = 1e-10;

    // Vieta on the quartic: product of roots = w0^2 wq^2, sum = -gamma
    double prod_t = w0 * w0 * wq * wq;
    double res_prod = std::abs(e4 - cplx(prod_t, 0.0)) / prod_t;
    double res_sum = std::abs(e1 + cplx(g, 0.0)) / std::max(g, 1.0);
    rep.samples.push_back({0.0, std::abs(e4), prod_t, res_prod});
    rep.samples.push_back({1.0, std::abs(e1), g, res_sum});
    rep.max_residual = std::max(res_prod, res_sum);

    if (g == 0.0) {
        std::vector<double> oms;
        for (const auto& p : K.mode_poles.poles)
            if (p.location.imag() > 0.0) oms.push_back(p.location.imag());
        std::sort(oms.begin(), oms.end());
        if (oms.size() == 2) {
            double T = w0 * w0 + wp * wp + wq * wq;
            double disc = std::sqrt(T * T - 4.0 * prod_t);
            double lo = std::sqrt((T - disc) / 2.0), hi = std::sqrt((T + disc) / 2.0);
            double rlo = std::abs(oms[0] - lo) / lo;
            double rhi = std::abs(oms[1] - hi) / hi;
            double rprod = std::abs(oms[0] * oms[1] - w0 * wq) / (w0 * wq);
            double rsum = std::abs(oms[0] * oms[0] + oms[1] * oms[1] - T) / T;
            rep.samples.push_back({2.0, oms[0], lo, rlo});
            rep.samples.push_back({3.0, oms[1], hi, rhi});
            rep.samples.push_back({4.0, oms[0] * oms[1], w0 * wq, rprod});
            rep.samples.push_back({5.0, oms[0] * oms[0] + oms[1] * oms[1], T, rsum});
            rep.max_residual = std::max({rep.max_residual, rlo, rhi, rprod, rsum});
            rep.params["Omega_minus"] = oms[0];
            rep.params["Omega_plus"] = oms[1];
        } else {
            rep.max_residual = std::max(rep.max_residual, 1.0);
            rep.params["note"] = "expected two conjugate pole pairs on the imaginary axis";
        }
    }
    rep.params["omega0"] = w0;
    rep.params["gamma"] = g;
    rep.params["omega_p"] = wp;
    rep.params["omega_q"] = wq;
    rep.params["mode_poles"] = poles_to_json(K.mode_poles.poles);
    rep.pass = rep.max_residual <= rep.tolerance;

    TimeSeries Zs, hs;
    Zs.t = hs.t = times;
    for (double t : times) {
        Zs.v.push_back(K.Z(t));
        hs.v.push_back(K.h(t));
    }
    em.csv(Zs, series_name("Z", cfg.omega_q, cfg.branch));
    em.csv(hs, series_name("h", cfg.omega_q, cfg.branch));
    reports.push_back(std::move(rep));
}

} // namespace detail

// --------------------------------------------------------------- running

inline RunResult run(const ScenarioConfig& cfg, const RunOptions& opts) {
    detail::Emitter em;
    em.enabled = opts.emit_series;
    std::filesystem::path dir =
        !opts.out_dir.empty() ? opts.out_dir : (!cfg.out_dir.empty() ? cfg.out_dir : ".");
    if (em.enabled && dir != ".") {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw ConfigError("scenario.out", "cannot create output directory '" +
                                                  dir.string() + "': " + ec.message());
    }
    em.dir = dir;

    std::vector<CheckReport> reports;
    if (cfg.kind == "kernels") detail::scenario_kernels(cfg, em, reports);
    else if (cfg.kind == "coupling") detail::scenario_coupling(cfg, em, reports);
    else if (cfg.kind == "commutator") detail::scenario_commutator(cfg, em, reports);
    else if (cfg.kind == "energy" || cfg.kind == "example2")
        detail::scenario_energy(cfg, em, reports);
    else if (cfg.kind == "kk") detail::scenario_kk(cfg, em, reports);
    else if (cfg.kind == "example1") detail::scenario_example1(cfg, em, reports);
    else if (cfg.kind == "example3") detail::scenario_example3(cfg, em, reports);
    else if (cfg.kind == "example4") detail::scenario_example4(cfg, em, reports);
    else throw ConfigError("scenario.kind", "unknown kind '" + cfg.kind + "'");

    if (reports.empty()) throw Error("run: scenario executed zero checks");

    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());
    em.json(arr, "report.json");

    RunResult res;
    res.reports = std::move(reports);
    res.files = std::move(em.files);
    res.pass = true;
    for (const auto& r : res.reports) res.pass = res.pass && r.pass;
    res.exit_code = res.pass ? 0 : 1;
    return res;
}

inline RunResult run(const ScenarioConfig& cfg) { return run(cfg, RunOptions{}); }

} // namespace qedk
