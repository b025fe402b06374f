#include "fpjump/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>

#include "fpjump/diagnostics.hpp"
#include "fpjump/error.hpp"
#include "fpjump/expr.hpp"
#include "fpjump/gap.hpp"
#include "fpjump/montecarlo.hpp"
#include "fpjump/scheme.hpp"
#include "fpjump/stationary.hpp"

namespace fpjump {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Scalar config values may be expressions in pi, e.g. domain.L = 2*pi.
double scalar(const RunConfig& cfg, const std::string& key) {
    try {
        return Expr::parse(cfg.get(key)).eval(0.0);
    } catch (const ParseError& e) {
        throw ConfigError(key + ": " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::size_t default_nodes(const std::string& preset) {
    if (preset == "ou") return 121;
    if (preset == "torus_sin") return 64;
    if (preset == "diffusion") return 41;
    return 101;
}

fs::path output_dir(const RunConfig& cfg) {
    fs::path dir = cfg.get("output.dir");
    if (dir.empty()) dir = ".";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("output.dir: cannot create '" + dir.string() + "': " + ec.message());
    return dir;
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string short_real(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_real(row[c]);
        out << '\n';
    }
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

json describe(const Problem& p, const Grid& g) {
    json d;
    d["drift"] = p.drift.label();
    d["sigma"] = p.sigma.label();
    if (const auto* line = std::get_if<TruncatedLine>(&p.domain)) {
        d["domain"] = {{"type", "line"}, {"xmin", line->x_min}, {"xmax", line->x_max}};
    } else {
        d["domain"] = {{"type", "torus"}, {"L", std::get<Torus>(p.domain).L}};
    }
    d["N"] = g.size();
    d["h"] = g.h();
    return d;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg, const json& resolved) {
    json m;
    m["command"] = command;
    m["timestamp"] = timestamp();
    m["config"] = cfg.values();
    m["resolved"] = resolved;
    write_json(dir / "manifest.json", m);
}

/// Column name suffix for a time: 1 -> "1", 0.5 -> "0.5".
std::string time_label(double t) { return short_real(t); }

}  // namespace

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Problem resolve_problem(const RunConfig& cfg) {
    const std::string& preset = cfg.get("coeff.preset");
    Problem p = [&]() -> Problem {
        if (preset != "custom") {
            if (cfg.is_set("coeff.b") || cfg.is_set("coeff.sigma")) {
                throw ConfigError("coeff.b / coeff.sigma need coeff.preset = custom");
            }
            return make_preset(preset);
        }
        if (!cfg.is_set("coeff.b") || !cfg.is_set("coeff.sigma")) {
            throw ConfigError("coeff.preset = custom needs both coeff.b and coeff.sigma");
        }
        if (!cfg.is_set("domain.type")) throw ConfigError("domain.type is required for coeff.preset = custom");
        Domain d = TruncatedLine{-1.0, 1.0};
        if (cfg.get("domain.type") == "torus") d = Torus{1.0};
        return Problem{Coefficient::from_text(cfg.get("coeff.b")), Coefficient::from_text(cfg.get("coeff.sigma")), d,
                       std::nullopt};
    }();

    if (cfg.is_set("domain.type")) {
        const std::string& type = cfg.get("domain.type");
        if (type == "line") {
            if (is_torus(p.domain)) p.domain = TruncatedLine{-1.0, 1.0};
        } else if (type == "torus") {
            if (!is_torus(p.domain)) p.domain = Torus{1.0};
        } else {
            throw ConfigError("domain.type: expected line or torus, got '" + type + "'");
        }
    }
    if (auto* line = std::get_if<TruncatedLine>(&p.domain)) {
        if (cfg.is_set("domain.xmin")) line->x_min = scalar(cfg, "domain.xmin");
        if (cfg.is_set("domain.xmax")) line->x_max = scalar(cfg, "domain.xmax");
        if (preset == "custom" && (!cfg.is_set("domain.xmin") || !cfg.is_set("domain.xmax"))) {
            throw ConfigError("domain.xmin and domain.xmax are required for a custom line problem");
        }
        if (!(line->x_min < line->x_max)) throw ConfigError("domain.xmin must be below domain.xmax");
    } else {
        auto& torus = std::get<Torus>(p.domain);
        if (cfg.is_set("domain.L")) torus.L = scalar(cfg, "domain.L");
        if (preset == "custom" && !cfg.is_set("domain.L")) throw ConfigError("domain.L is required for a custom torus problem");
        if (!(torus.L > 0.0)) throw ConfigError("domain.L must be positive");
    }
    if (cfg.is_set("coeff.S1") != cfg.is_set("coeff.S2")) throw ConfigError("coeff.S1 and coeff.S2 must be given together");
    if (cfg.is_set("coeff.S1")) p.sigma_bounds = SigmaBounds{scalar(cfg, "coeff.S1"), scalar(cfg, "coeff.S2")};
    return p;
}

Grid resolve_grid(const RunConfig& cfg, const Problem& p) {
    std::size_t n = default_nodes(cfg.get("coeff.preset"));
    if (cfg.is_set("grid.N")) n = cfg.get_u64("grid.N");
    return Grid::for_domain(p.domain, n);
}

EvolveConfig resolve_evolve(const RunConfig& cfg) {
    EvolveConfig e;
    e.T = cfg.get_double("evolve.T");
    if (!(e.T > 0.0)) throw ConfigError("evolve.T must be positive");
    e.safety = cfg.get_double("evolve.safety");
    e.tol = cfg.get_double("evolve.tol");
    const std::string& method = cfg.get("evolve.method");
    if (method == "euler") {
        e.method = Method::Euler;
    } else if (method == "uniform_series") {
        e.method = Method::UniformSeries;
    } else {
        throw ConfigError("evolve.method: expected euler or uniform_series, got '" + method + "'");
    }
    if (cfg.is_set("evolve.dt")) e.dt = cfg.get_double("evolve.dt");
    e.snapshots = cfg.get_list("evolve.snapshots");
    if (e.snapshots.empty()) {
        for (int k = 1; k <= 20; ++k) e.snapshots.push_back(e.T * k / 20.0);
        e.snapshots.back() = e.T;
    }
    return e;
}

std::vector<double> initial_probability(const RunConfig& cfg, const Grid& g, double* mass) {
    const Expr init = [&] {
        try {
            return Expr::parse(cfg.get("evolve.init"));
        } catch (const ParseError& e) {
            throw ConfigError(std::string("evolve.init: ") + e.what());
        }
    }();
    const FieldVec rho0 = restrict_to_grid([&init](double x) { return init.eval(x); }, g);
    double sum = 0.0;
    for (double v : rho0.values) {
        if (v < 0.0) throw ConfigError("evolve.init must be non-negative on the grid");
        sum += v;
    }
    if (!(sum > 0.0)) throw ConfigError("evolve.init has zero mass on the grid");
    if (mass) *mass = g.h() * sum;
    std::vector<double> p(rho0.values);
    for (double& v : p) v /= sum;
    return p;
}

void cmd_stationary(const RunConfig& cfg, std::ostream& log) {
    const Problem p = resolve_problem(cfg);
    const Grid g = resolve_grid(cfg, p);
    const Rates r = build_rates(p, g);
    const StationaryResult s = stationary(r, g);
    const FieldVec ref = reference_stationary(p, g);

    std::vector<std::vector<double>> rows;
    std::vector<double> err(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double approx = s.pi_h[j] / g.h();
        err[j] = std::abs(approx - ref[j]);
        rows.push_back({g.x(j), approx, ref[j], err[j]});
    }
    const fs::path dir = output_dir(cfg);
    write_csv(dir / "stationary.csv", {"x", "pi_h_over_h", "pi_reference", "abs_error"}, rows);

    json summary;
    summary["N"] = g.size();
    summary["h"] = g.h();
    summary["l1_error"] = l1_norm(err, g.h());
    summary["linf_error"] = linf_norm(err);
    summary["flux"] = s.flux;
    summary["flux_spread"] = s.flux_spread;
    summary["db_residual"] = s.db_residual;
    summary["forward_residual"] = s.forward_residual;
    summary["lambda_star"] = uniformization_rate(r);
    write_json(dir / "stationary_summary.json", summary);
    write_manifest(dir, "stationary", cfg, describe(p, g));
    log << "stationary: N = " << g.size() << ", l1 error " << format_real(summary["l1_error"].get<double>())
        << ", linf error " << format_real(summary["linf_error"].get<double>()) << "\n";
}

void cmd_evolve(const RunConfig& cfg, std::ostream& log) {
    const Problem p = resolve_problem(cfg);
    const Grid g = resolve_grid(cfg, p);
    const Rates r = build_rates(p, g);
    const StationaryResult s = stationary(r, g);
    const EvolveConfig ecfg = resolve_evolve(cfg);
    const FieldVec p0{FieldKind::Probability, initial_probability(cfg, g)};
    const Trajectory traj = evolve_forward(r, p0, ecfg);

    const auto factor = static_cast<std::size_t>(cfg.get_u64("evolve.reference_factor"));
    if (factor == 0) throw ConfigError("evolve.reference_factor must be positive");
    const Grid fine = g.refined(factor);
    const Rates rf = build_rates(p, fine);
    EvolveConfig fcfg = ecfg;
    fcfg.method = Method::UniformSeries;
    fcfg.dt.reset();
    const FieldVec pf0{FieldKind::Probability, initial_probability(cfg, fine)};
    const Trajectory ref = evolve_forward(rf, pf0, fcfg);
    if (ref.size() != traj.size()) throw InternalError("reference and coarse trajectories have different snapshots");

    std::vector<std::vector<double>> rows;
    std::vector<std::pair<double, double>> decay;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::vector<double> ref_density(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) ref_density[j] = ref[k].value[j * factor] / fine.h();
        const Metrics m = compute_metrics(r, s.pi_h.values, traj[k].t, traj[k].value.values,
                                          std::span<const double>(ref_density));
        rows.push_back({m.t, m.mass, m.tv_seminorm, m.l1_error, m.F_h, m.relative_entropy});
        decay.emplace_back(m.t, m.F_h);
    }
    const fs::path dir = output_dir(cfg);
    write_csv(dir / "evolve.csv", {"t", "mass", "tv_seminorm", "l1_error_vs_reference", "F_h", "relative_entropy"},
              rows);
    json resolved = describe(p, g);
    resolved["dt"] = ecfg.method == Method::Euler ? euler_step(r, ecfg) : 0.0;
    resolved["lambda_star"] = uniformization_rate(r);
    resolved["reference_N"] = fine.size();
    resolved["fitted_decay_rate"] = fit_decay(decay);
    write_manifest(dir, "evolve", cfg, resolved);
    log << "evolve: " << traj.size() << " snapshots, fitted F_h decay rate " << format_real(fit_decay(decay)) << "\n";
}

void cmd_gap(const RunConfig& cfg, std::ostream& log) {
    const Problem p = resolve_problem(cfg);
    const Grid g = resolve_grid(cfg, p);
    const Rates r = build_rates(p, g);
    const StationaryResult s = stationary(r, g);
    const GapReport rep = gap_report(r, s, g);
    json j;
    j["B"] = rep.B ? json(*rep.B) : json(nullptr);
    j["kappa_lower"] = rep.kappa_lower;
    j["witness_max"] = rep.witness_max ? json(*rep.witness_max) : json(nullptr);
    j["exact_gap"] = rep.exact_gap;
    if (rep.torus_kappa) j["torus_kappa"] = *rep.torus_kappa;
    if (rep.B_hardy) j["B_hardy"] = *rep.B_hardy;
    j["h"] = rep.h;
    j["N"] = rep.N;
    const fs::path dir = output_dir(cfg);
    write_json(dir / "gap.json", j);
    write_manifest(dir, "gap", cfg, describe(p, g));
    log << "gap: exact " << format_real(rep.exact_gap) << ", lower bound " << format_real(rep.kappa_lower) << "\n";
}

void cmd_mc(const RunConfig& cfg, std::ostream& log) {
    const Problem p = resolve_problem(cfg);
    const Grid g = resolve_grid(cfg, p);
    const Rates r = build_rates(p, g);
    MCConfig mc;
    mc.T = cfg.get_double("mc.T");
    mc.M = cfg.get_u64("mc.M");
    mc.lambda_pad = cfg.get_double("mc.lambda_pad");
    mc.seed = cfg.get_u64("mc.seed");
    mc.threads = static_cast<unsigned>(cfg.get_u64("mc.threads"));
    mc.p0 = initial_probability(cfg, g, &mc.initial_mass);
    const MCResult res = run_mc(r, mc);

    EvolveConfig ecfg;
    ecfg.T = mc.T;
    ecfg.method = Method::UniformSeries;
    ecfg.tol = cfg.get_double("evolve.tol");
    const FieldVec det = evolve_forward(r, FieldVec{FieldKind::Probability, mc.p0}, ecfg).back().value;

    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double scale = mc.initial_mass / g.h();
        rows.push_back({g.x(j), res.rho_tilde[j], scale * det[j], scale * res.stderr_band[j]});
    }
    const fs::path dir = output_dir(cfg);
    write_csv(dir / "mc.csv", {"x", "rho_tilde", "rho_deterministic", "stderr_band"}, rows);
    json resolved = describe(p, g);
    resolved["seed"] = res.seed;
    resolved["lambda"] = res.lambda;
    resolved["M"] = res.M;
    resolved["T"] = res.T;
    resolved["tv_half_to_deterministic"] = tv_distance_half(res.p_tilde, det.values);
    write_manifest(dir, "mc", cfg, resolved);
    log << "mc: lambda " << format_real(res.lambda) << ", TV to deterministic law "
        << format_real(tv_distance_half(res.p_tilde, det.values)) << "\n";
}

void cmd_order(const RunConfig& cfg, std::ostream& log) {
    const Problem p = resolve_problem(cfg);
    const bool torus = is_torus(p.domain);
    std::size_t n0 = torus ? 64 : 61;
    if (cfg.is_set("order.N0")) n0 = cfg.get_u64("order.N0");
    const auto levels = static_cast<std::size_t>(cfg.get_u64("order.levels"));
    if (levels < 2) throw ConfigError("order.levels must be at least 2");

    std::vector<std::vector<double>> rows;
    std::vector<std::pair<double, double>> l1_pts, linf_pts;
    Grid g = Grid::for_domain(p.domain, n0);
    for (std::size_t k = 0; k < levels; ++k) {
        if (k > 0) g = g.refined(2);
        const Rates r = build_rates(p, g);
        const StationaryResult s = stationary(r, g);
        const FieldVec ref = reference_stationary(p, g);
        std::vector<double> err(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) err[j] = std::abs(ref[j] - s.pi_h[j] / g.h());
        const double e1 = l1_norm(err, g.h());
        const double einf = linf_norm(err);
        rows.push_back({static_cast<double>(k), static_cast<double>(g.size()), g.h(), e1, einf});
        l1_pts.emplace_back(g.h(), e1);
        linf_pts.emplace_back(g.h(), einf);
    }
    const fs::path dir = output_dir(cfg);
    write_csv(dir / "order.csv", {"level", "N", "h", "l1_error", "linf_error"}, rows);
    json j;
    j["slope_l1"] = fit_order(l1_pts);
    j["slope_linf"] = fit_order(linf_pts);
    write_json(dir / "order.json", j);
    write_manifest(dir, "order", cfg, describe(p, g));
    log << "order: fitted l1 slope " << format_real(j["slope_l1"].get<double>()) << "\n";
}

void cmd_fig1(const RunConfig& cfg, std::ostream& log) {
    const Problem p = make_preset("torus_sin");
    const Grid g = Grid::torus(std::get<Torus>(p.domain).L, cfg.get_u64("fig1.N"));
    const Rates r = build_rates(p, g);
    const StationaryResult s = stationary(r, g);
    const FieldVec pi_exact = reference_stationary(p, g);
    const std::vector<double> times = cfg.get_list("fig1.times");
    if (times.empty()) throw ConfigError("fig1.times must list at least one time");

    MCConfig mc;
    mc.M = cfg.get_u64("fig1.M");
    mc.lambda_pad = cfg.get_double("mc.lambda_pad");
    mc.seed = cfg.get_u64("mc.seed");
    mc.threads = static_cast<unsigned>(cfg.get_u64("mc.threads"));
    mc.p0.assign(g.size(), 1.0 / static_cast<double>(g.size()));
    mc.initial_mass = 1.0;  // rho_0 = 1 / (2 pi) on a torus of length 2 pi
    const auto results = run_mc_times(r, mc, times);

    std::vector<std::string> header{"x", "pi_exact"};
    for (double t : times) header.push_back("rho_t" + time_label(t));
    std::vector<std::vector<double>> rows;
    for (std::size_t j = 0; j < g.size(); ++j) {
        std::vector<double> row{g.x(j), pi_exact[j]};
        for (const auto& res : results) row.push_back(res.rho_tilde[j]);
        rows.push_back(std::move(row));
    }
    const fs::path dir = output_dir(cfg);
    write_csv(dir / "fig1.csv", header, rows);

    EvolveConfig ecfg;
    ecfg.T = times.back();
    ecfg.snapshots = times;
    ecfg.method = Method::UniformSeries;
    const Trajectory det = evolve_forward(r, FieldVec{FieldKind::Probability, mc.p0}, ecfg);
    json resolved = describe(p, g);
    resolved["lambda"] = results.front().lambda;
    resolved["M"] = mc.M;
    resolved["seed"] = mc.seed;
    json per_time = json::array();
    for (std::size_t k = 0; k < times.size(); ++k) {
        const auto& snap = *std::find_if(det.begin(), det.end(), [&](const Snapshot& sn) { return sn.t == times[k]; });
        per_time.push_back({{"t", times[k]},
                            {"tv_half_mc_to_pi_h", tv_distance_half(results[k].p_tilde, s.pi_h.values)},
                            {"tv_half_det_to_pi_h", tv_distance_half(snap.value.values, s.pi_h.values)},
                            {"sampling_band", std::sqrt(static_cast<double>(g.size()) / (4.0 * static_cast<double>(mc.M)))}});
    }
    resolved["times"] = per_time;
    write_manifest(dir, "fig1", cfg, resolved);
    log << "fig1: lambda " << format_real(results.front().lambda) << ", " << g.size() << " rows\n";
}

bool cmd_selftest(const RunConfig&, std::ostream& log) {
    bool all = true;
    auto report = [&](const char* name, bool ok) {
        log << (ok ? "PASS " : "FAIL ") << name << "\n";
        all = all && ok;
    };

    {
        const Problem ou = make_preset("ou");
        const Grid g = Grid::line(-6.0, 6.0, 121);
        const Rates r = build_rates(ou, g);
        const StationaryResult s = stationary(r, g);
        const std::size_t a = g.anchor();
        double worst = 0.0;
        for (std::size_t k = 0; a + k + 1 < g.size(); ++k) {
            const double want = 1.0 / (1.0 + 2.0 * static_cast<double>(k + 1) * g.h() * g.h());
            worst = std::max(worst, std::abs(s.pi_h[a + k + 1] / s.pi_h[a + k] / want - 1.0));
        }
        report("ou stationary ratios match the closed form", worst <= 1e-12);
    }
    {
        const Problem ts = make_preset("torus_sin");
        const Grid g = Grid::torus(2.0 * std::numbers::pi, 64);
        const Rates r = build_rates(ts, g);
        const Generator q(r);
        bool rows_zero = true;
        for (std::size_t i = 0; i < q.size(); ++i) rows_zero = rows_zero && q.row_sum(i) == 0.0;
        report("generator rows sum to zero", rows_zero);
        report("torus_sin lambda* near 281.7", std::abs(uniformization_rate(r) / 281.7 - 1.0) < 0.01);

        EvolveConfig e;
        e.T = 2.0;
        std::vector<double> p0(g.size(), 0.0);
        p0[0] = 1.0;
        const auto traj = evolve_forward(r, FieldVec{FieldKind::Probability, p0}, e);
        double mass = 0.0, low = 1.0;
        for (double v : traj.back().value.values) {
            mass += v;
            low = std::min(low, v);
        }
        report("euler conserves mass and positivity", std::abs(mass - 1.0) <= 2e-12 && low >= 0.0);
    }
    return all;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"stationary", "evolve", "gap", "mc", "order", "fig1", "selftest"};
    return names;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log) {
    if (name == "stationary") {
        cmd_stationary(cfg, log);
    } else if (name == "evolve") {
        cmd_evolve(cfg, log);
    } else if (name == "gap") {
        cmd_gap(cfg, log);
    } else if (name == "mc") {
        cmd_mc(cfg, log);
    } else if (name == "order") {
        cmd_order(cfg, log);
    } else if (name == "fig1") {
        cmd_fig1(cfg, log);
    } else if (name == "selftest") {
        return cmd_selftest(cfg, log) ? 0 : 4;
    } else {
        throw ConfigError("unknown command '" + name + "'");
    }
    return 0;
}

}  // namespace fpjump
