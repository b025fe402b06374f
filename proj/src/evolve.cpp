#include "fpjump/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fpjump/error.hpp"

namespace fpjump {

namespace {

constexpr double kCflSlack = 1e-12;

void check_cfl(const Rates& r, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw NumericalError("time step must be positive and finite");
    const double courant = dt * uniformization_rate(r);
    if (courant > 1.0 + kCflSlack) {
        throw NumericalError("CFL violation: dt * max(alpha + beta) = " + std::to_string(courant) + " > 1");
    }
}

void require_length(const Rates& r, const FieldVec& v) {
    if (v.size() != r.size()) {
        throw NumericalError("vector length " + std::to_string(v.size()) + " does not match " +
                             std::to_string(r.size()) + " nodes");
    }
}

/// (I + dt Q)^T p without the CFL check.
void forward_step_into(const Rates& r, std::span<const double> p, double dt, std::vector<double>& out) {
    const std::size_t n = r.size();
    out.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double stay = std::max(0.0, 1.0 - dt * (r.alpha[j] + r.beta[j]));
        double in = 0.0;
        if (r.periodic() || j > 0) in += r.alpha[r.left(j)] * p[r.left(j)];
        if (r.periodic() || j + 1 < n) in += r.beta[r.right(j)] * p[r.right(j)];
        out[j] = stay * p[j] + dt * in;
    }
}

void backward_step_into(const Rates& r, std::span<const double> u, double dt, std::vector<double>& out) {
    const std::size_t n = r.size();
    out.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double v = 0.0;
        if (r.periodic() || j > 0) v += r.beta[j] * (u[r.left(j)] - u[j]);
        if (r.periodic() || j + 1 < n) v += r.alpha[j] * (u[r.right(j)] - u[j]);
        out[j] = u[j] + dt * v;
    }
}

using StepFn = void (*)(const Rates&, std::span<const double>, double, std::vector<double>&);

Trajectory march_euler(const Rates& r, const FieldVec& v0, const EvolveConfig& cfg, StepFn step) {
    const double dt = euler_step(r, cfg);
    const auto times = snapshot_times(cfg);
    Trajectory traj;
    traj.push_back({0.0, v0});
    std::vector<double> cur = v0.values, next;
    double t = 0.0;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double remaining = times[k] - t;
        const auto full = static_cast<std::size_t>(std::floor(remaining / dt));
        for (std::size_t s = 0; s < full; ++s) {
            step(r, cur, dt, next);
            cur.swap(next);
        }
        const double last = remaining - static_cast<double>(full) * dt;
        if (last > 1e-12 * dt) {
            step(r, cur, last, next);
            cur.swap(next);
        }
        t = times[k];
        traj.push_back({t, FieldVec{v0.kind, cur}});
    }
    return traj;
}

/// Poisson(mu) log-weight of n.
double log_poisson(double mu, std::size_t n) {
    if (mu == 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    const double dn = static_cast<double>(n);
    return -mu + dn * std::log(mu) - std::lgamma(dn + 1.0);
}

/// e^{tQ}-type series for every snapshot at once: v_n = A^n v0 is built once
/// and added to each snapshot with weight Poisson(lambda t)(n).
Trajectory march_series(const Rates& r, const FieldVec& v0, const EvolveConfig& cfg, bool forward) {
    const auto times = snapshot_times(cfg);
    const double lam = uniformization_rate(r);
    Trajectory traj;
    traj.push_back({0.0, v0});
    if (lam == 0.0) {
        for (std::size_t k = 1; k < times.size(); ++k) traj.push_back({times[k], v0});
        return traj;
    }
    const double dt = 1.0 / lam;  // A = I + Q / lambda is one Euler step of length 1/lambda

    const std::size_t m = times.size() - 1;
    std::vector<std::size_t> n_max(m);
    std::size_t n_total = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double mu = lam * times[k + 1];
        n_max[k] = series_terms(mu, cfg.tol);
        if (n_max[k] > cfg.max_series_terms) {
            throw NumericalError("uniformization series needs " + std::to_string(n_max[k]) +
                                 " terms for lambda T = " + std::to_string(mu) + ", limit is " +
                                 std::to_string(cfg.max_series_terms));
        }
        n_total = std::max(n_total, n_max[k]);
    }

    const std::size_t n = r.size();
    std::vector<std::vector<double>> acc(m, std::vector<double>(n, 0.0));
    std::vector<double> mass(m, 0.0);
    std::vector<double> cur = v0.values, next;
    for (std::size_t term = 0; term <= n_total; ++term) {
        for (std::size_t k = 0; k < m; ++k) {
            if (term > n_max[k]) continue;
            const double w = std::exp(log_poisson(lam * times[k + 1], term));
            if (w == 0.0) continue;
            mass[k] += w;
            auto& a = acc[k];
            for (std::size_t j = 0; j < n; ++j) a[j] += w * cur[j];
        }
        if (term == n_total) break;
        if (forward) {
            forward_step_into(r, cur, dt, next);
        } else {
            backward_step_into(r, cur, dt, next);
        }
        cur.swap(next);
    }
    for (std::size_t k = 0; k < m; ++k) {
        for (double& v : acc[k]) v /= mass[k];
        traj.push_back({times[k + 1], FieldVec{v0.kind, std::move(acc[k])}});
    }
    return traj;
}

Trajectory evolve(const Rates& r, const FieldVec& v0, const EvolveConfig& cfg, bool forward) {
    require_length(r, v0);
    if (!(cfg.T >= 0.0) || !std::isfinite(cfg.T)) throw NumericalError("evolve: T must be finite and non-negative");
    if (cfg.method == Method::Euler) {
        return march_euler(r, v0, cfg, forward ? forward_step_into : backward_step_into);
    }
    return march_series(r, v0, cfg, forward);
}

}  // namespace

FieldVec step_forward_euler(const Rates& r, const FieldVec& p, double dt) {
    require_length(r, p);
    check_cfl(r, dt);
    FieldVec out{p.kind, {}};
    forward_step_into(r, p.values, dt, out.values);
    return out;
}

FieldVec step_backward_euler(const Rates& r, const FieldVec& u, double dt) {
    require_length(r, u);
    check_cfl(r, dt);
    FieldVec out{u.kind, {}};
    backward_step_into(r, u.values, dt, out.values);
    return out;
}

std::vector<double> snapshot_times(const EvolveConfig& cfg) {
    std::vector<double> times{0.0};
    for (double t : cfg.snapshots) {
        if (!(t > 0.0) || t > cfg.T) {
            throw ConfigError("evolve.snapshots: time " + std::to_string(t) + " is outside (0, T]");
        }
        times.push_back(t);
    }
    if (cfg.T > 0.0) times.push_back(cfg.T);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    return times;
}

double euler_step(const Rates& r, const EvolveConfig& cfg) {
    if (cfg.dt) {
        check_cfl(r, *cfg.dt);
        return *cfg.dt;
    }
    if (!(cfg.safety > 0.0) || cfg.safety > 1.0) throw ConfigError("evolve.safety must lie in (0, 1]");
    const double lam = uniformization_rate(r);
    if (lam == 0.0) return std::numeric_limits<double>::max();
    return cfg.safety / lam;
}

std::size_t series_terms(double mu, double tol) {
    if (!(tol > 0.0)) throw ConfigError("evolve.tol must be positive");
    if (mu == 0.0) return 0;
    auto n = static_cast<std::size_t>(std::ceil(mu + 10.0 * std::sqrt(mu) + 20.0));
    // Tail after n: sum_{k>n} w_k <= w_{n+1} / (1 - mu / (n + 2)).
    for (;; ++n) {
        const double ratio = mu / (static_cast<double>(n) + 2.0);
        const double tail = std::exp(log_poisson(mu, n + 1)) / (1.0 - ratio);
        if (tail < tol) return n;
    }
}

Trajectory evolve_forward(const Rates& r, const FieldVec& p0, const EvolveConfig& cfg) {
    return evolve(r, p0, cfg, true);
}

Trajectory evolve_backward(const Rates& r, const FieldVec& u0, const EvolveConfig& cfg) {
    auto traj = evolve(r, u0, cfg, false);
    if (u0.size() == 0) return traj;
    const auto [lo_it, hi_it] = std::minmax_element(u0.values.begin(), u0.values.end());
    const double lo = *lo_it, hi = *hi_it;
    const double slack = 1e-10 * std::max({1.0, std::abs(lo), std::abs(hi)});
    for (const auto& snap : traj) {
        for (double v : snap.value.values) {
            if (v < lo - slack || v > hi + slack) {
                throw InternalError("backward evolution violated the maximum principle at t = " + std::to_string(snap.t));
            }
        }
    }
    return traj;
}

FieldVec green_function(const Rates& r, std::size_t i, double T, const EvolveConfig& cfg) {
    if (i >= r.size()) throw ConfigError("green_function: node index out of range");
    FieldVec delta{FieldKind::Probability, std::vector<double>(r.size(), 0.0)};
    delta[i] = 1.0;
    EvolveConfig c = cfg;
    c.T = T;
    c.snapshots.clear();
    return evolve_forward(r, delta, c).back().value;
}

}  // namespace fpjump
