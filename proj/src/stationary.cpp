#include "fpjump/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fpjump/error.hpp"

namespace fpjump {

namespace {

void fill_diagnostics(const Rates& r, StationaryResult& s) {
    const auto& pi = s.pi_h.values;
    const std::size_t n = r.size();
    const std::size_t edges = r.periodic() ? n : n - 1;
    s.db_residual = 0.0;
    for (std::size_t j = 0; j < edges; ++j) {
        const std::size_t k = r.right(j);
        s.db_residual = std::max(s.db_residual, std::abs(r.alpha[j] * pi[j] - r.beta[k] * pi[k]));
    }
    const auto lstar = apply_forward(r, pi);
    s.forward_residual = 0.0;
    for (double v : lstar) s.forward_residual = std::max(s.forward_residual, std::abs(v));

    const auto j_edge = flux(r, pi);
    if (r.periodic()) {
        double mean = 0.0;
        for (double v : j_edge) mean += v;
        mean /= static_cast<double>(j_edge.size());
        double spread = 0.0;
        for (double v : j_edge) spread = std::max(spread, std::abs(v - mean));
        s.flux = mean;
        s.flux_spread = spread;
    } else {
        double spread = 0.0;
        for (double v : j_edge) spread = std::max(spread, std::abs(v));
        s.flux = 0.0;
        s.flux_spread = spread;
    }
}

void require_positive(const std::vector<double>& pi) {
    for (std::size_t j = 0; j < pi.size(); ++j) {
        if (!(pi[j] > 0.0) || !std::isfinite(pi[j])) {
            throw NumericalError("stationary distribution is not strictly positive at node " + std::to_string(j));
        }
    }
}

}  // namespace

StationaryResult stationary_line(const Rates& r, std::size_t anchor) {
    if (r.periodic()) throw InternalError("stationary_line called on a periodic chain");
    const std::size_t n = r.size();
    if (anchor >= n) throw InternalError("stationary_line: anchor out of range");

    std::vector<double> log_pi(n, 0.0);
    for (std::size_t j = anchor; j + 1 < n; ++j) {
        if (!(r.beta[j + 1] > 0.0) || !(r.alpha[j] > 0.0)) {
            throw InternalError("stationary_line: zero interior rate at node " + std::to_string(j));
        }
        log_pi[j + 1] = log_pi[j] + (std::log(r.alpha[j]) - std::log(r.beta[j + 1]));
    }
    for (std::size_t j = anchor; j > 0; --j) {
        if (!(r.beta[j] > 0.0) || !(r.alpha[j - 1] > 0.0)) {
            throw InternalError("stationary_line: zero interior rate at node " + std::to_string(j));
        }
        log_pi[j - 1] = log_pi[j] + (std::log(r.beta[j]) - std::log(r.alpha[j - 1]));
    }

    const double peak = *std::max_element(log_pi.begin(), log_pi.end());
    double sum = 0.0;
    for (double l : log_pi) sum += std::exp(l - peak);
    const double log_z = peak + std::log(sum);

    StationaryResult s;
    s.pi_h.kind = FieldKind::Stationary;
    s.pi_h.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) s.pi_h[j] = std::exp(log_pi[j] - log_z);
    require_positive(s.pi_h.values);
    fill_diagnostics(r, s);
    return s;
}

StationaryResult stationary_torus(const Rates& r) {
    if (!r.periodic()) throw InternalError("stationary_torus called on a reflecting chain");
    const std::size_t n = r.size();
    if (n < 3) throw NumericalError("stationary_torus needs at least 3 nodes");
    const std::size_t m = n - 1;

    // Row i (i < m) of Q^T pi = 0:
    //   alpha_{i-1} pi_{i-1} - (alpha_i + beta_i) pi_i + beta_{i+1} pi_{i+1} = 0.
    std::vector<double> sub(m, 0.0), diag(m), super(m, 0.0), border(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        diag[i] = -(r.alpha[i] + r.beta[i]);
        if (i > 0) sub[i] = r.alpha[i - 1];
        if (i + 1 < m) super[i] = r.beta[i + 1];
    }
    border[0] += r.alpha[n - 1];
    border[m - 1] += r.beta[n - 1];

    // Thomas sweep for T w = border. -T is a column diagonally dominant
    // M-matrix, so no pivoting is needed.
    std::vector<double> c_prime(m), d_prime(m);
    double denom = diag[0];
    if (denom == 0.0) throw NumericalError("stationary_torus: singular system (zero exit rate)");
    c_prime[0] = super[0] / denom;
    d_prime[0] = border[0] / denom;
    for (std::size_t i = 1; i < m; ++i) {
        denom = diag[i] - sub[i] * c_prime[i - 1];
        if (denom == 0.0) throw NumericalError("stationary_torus: singular system beyond the expected kernel");
        c_prime[i] = super[i] / denom;
        d_prime[i] = (border[i] - sub[i] * d_prime[i - 1]) / denom;
    }
    std::vector<double> w(m);
    w[m - 1] = d_prime[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) w[i] = d_prime[i] - c_prime[i] * w[i + 1];

    // pi_{0..m-1} = -z w, z + sum(pi_{0..m-1}) = 1.
    double neg_sum = 0.0;
    for (double v : w) neg_sum -= v;
    const double z = 1.0 / (1.0 + neg_sum);

    StationaryResult s;
    s.pi_h.kind = FieldKind::Stationary;
    s.pi_h.values.resize(n);
    for (std::size_t i = 0; i < m; ++i) s.pi_h[i] = -z * w[i];
    s.pi_h[m] = z;
    require_positive(s.pi_h.values);
    fill_diagnostics(r, s);
    return s;
}

StationaryResult stationary(const Rates& r, const Grid& g) {
    if (r.periodic()) return stationary_torus(r);
    return stationary_line(r, g.anchor());
}

Rates modified_rates(const Rates& r, const StationaryResult& s) {
    const auto& pi = s.pi_h.values;
    const std::size_t n = r.size();
    if (pi.size() != n) throw InternalError("modified_rates: stationary vector has the wrong length");
    Rates out;
    out.alpha.assign(n, 0.0);
    out.beta.assign(n, 0.0);
    out.boundary = r.boundary;
    out.h = r.h;
    for (std::size_t j = 0; j < n; ++j) {
        if (r.periodic() || j + 1 < n) out.alpha[j] = r.beta[r.right(j)] * pi[r.right(j)] / pi[j];
        if (r.periodic() || j > 0) out.beta[j] = r.alpha[r.left(j)] * pi[r.left(j)] / pi[j];
    }
    out.check();
    return out;
}

ComparisonReport comparison_check(const StationaryResult& s, const Grid& g, double R_window) {
    ComparisonReport rep{0.0, std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t j = 0; j < g.size(); ++j) {
        if (!g.periodic() && std::abs(g.x(j)) > R_window) continue;
        rep.max_pi = std::max(rep.max_pi, s.pi_h[j]);
        rep.min_pi = std::min(rep.min_pi, s.pi_h[j]);
    }
    if (!(rep.max_pi > 0.0)) throw NumericalError("comparison_check: no grid nodes inside the window");
    rep.ratio = rep.max_pi / rep.min_pi;
    return rep;
}

}  // namespace fpjump
