#include "fpjump/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fpjump/error.hpp"

namespace fpjump {

namespace {

void require_length(const Rates& r, std::span<const double> v, const char* what) {
    if (v.size() != r.size()) {
        throw NumericalError(std::string(what) + ": vector length " + std::to_string(v.size()) +
                             " does not match " + std::to_string(r.size()) + " nodes");
    }
}

}  // namespace

void Rates::check() const {
    if (alpha.size() != beta.size()) throw InternalError("rates: alpha and beta lengths differ");
    if (alpha.empty()) throw InternalError("rates: empty chain");
    if (periodic() && size() < 3) throw InternalError("rates: a periodic chain needs at least 3 nodes");
    for (std::size_t j = 0; j < size(); ++j) {
        if (!(alpha[j] >= 0.0) || !(beta[j] >= 0.0) || !std::isfinite(alpha[j]) || !std::isfinite(beta[j])) {
            throw InternalError("rates: negative or non-finite rate at node " + std::to_string(j));
        }
    }
    if (!periodic() && (alpha.back() != 0.0 || beta.front() != 0.0)) {
        throw InternalError("rates: reflecting line must have zero outward boundary rates");
    }
}

double Generator::entry(std::size_t i, std::size_t j) const {
    const Rates& r = *rates_;
    const std::size_t n = r.size();
    double q = 0.0;
    if (i == j) q -= r.alpha[i] + r.beta[i];
    const bool right = r.periodic() ? j == (i + 1) % n : j == i + 1;
    const bool left = r.periodic() ? j == (i + n - 1) % n : (i > 0 && j == i - 1);
    if (right) q += r.alpha[i];
    if (left) q += r.beta[i];
    return q;
}

double Generator::row_sum(std::size_t i) const {
    const Rates& r = *rates_;
    const std::size_t n = r.size();
    // Off-diagonal sum first: alpha + beta - (alpha + beta) is exactly zero.
    double off = 0.0;
    if (r.periodic() || i + 1 < n) off += r.alpha[i];
    if (r.periodic() || i > 0) off += r.beta[i];
    return off - (r.alpha[i] + r.beta[i]);
}

Rates build_rates(const Problem& p, const Grid& g, const SplitDrift& sd) {
    const std::size_t n = g.size();
    const double h = g.h();
    const double inv_2h2 = 1.0 / (2.0 * h * h);
    Rates r;
    r.alpha.resize(n);
    r.beta.resize(n);
    r.boundary = g.periodic() ? Boundary::Periodic : Boundary::Reflecting;
    r.h = h;
    for (std::size_t j = 0; j < n; ++j) {
        const double up = p.sigma(g.x(j) + 0.5 * h);
        const double down = p.sigma(g.x(j) - 0.5 * h);
        r.alpha[j] = sd.s_plus[j] / h + up * up * inv_2h2;
        r.beta[j] = sd.s_minus[j] / h + down * down * inv_2h2;
    }
    if (!g.periodic()) {
        r.alpha.back() = 0.0;
        r.beta.front() = 0.0;
    }
    r.check();
    return r;
}

Rates build_rates(const Problem& p, const Grid& g) {
    validate(p, g);
    return build_rates(p, g, split_drift(p, g));
}

Rates make_rates(std::vector<double> alpha, std::vector<double> beta, Boundary boundary, double h) {
    Rates r{std::move(alpha), std::move(beta), boundary, h};
    r.check();
    return r;
}

std::vector<double> apply_forward(const Rates& r, std::span<const double> p) {
    require_length(r, p, "apply_forward");
    const std::size_t n = r.size();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        double v = -(r.alpha[j] + r.beta[j]) * p[j];
        if (r.periodic() || j > 0) v += r.alpha[r.left(j)] * p[r.left(j)];
        if (r.periodic() || j + 1 < n) v += r.beta[r.right(j)] * p[r.right(j)];
        out[j] = v;
    }
    return out;
}

std::vector<double> apply_backward(const Rates& r, std::span<const double> u) {
    require_length(r, u, "apply_backward");
    const std::size_t n = r.size();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        // Differences make constants an exact null vector.
        double v = 0.0;
        if (r.periodic() || j > 0) v += r.beta[j] * (u[r.left(j)] - u[j]);
        if (r.periodic() || j + 1 < n) v += r.alpha[j] * (u[r.right(j)] - u[j]);
        out[j] = v;
    }
    return out;
}

std::vector<double> flux(const Rates& r, std::span<const double> rho) {
    require_length(r, rho, "flux");
    const std::size_t n = r.size();
    const double h = r.h;
    if (r.periodic()) {
        std::vector<double> j_edge(n);
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t k = r.right(j);
            j_edge[j] = h * r.alpha[j] * rho[j] - h * r.beta[k] * rho[k];
        }
        return j_edge;
    }
    std::vector<double> j_edge(n + 1, 0.0);
    j_edge[0] = -h * r.beta[0] * rho[0];
    for (std::size_t k = 1; k < n; ++k) {
        j_edge[k] = h * r.alpha[k - 1] * rho[k - 1] - h * r.beta[k] * rho[k];
    }
    j_edge[n] = h * r.alpha[n - 1] * rho[n - 1];
    return j_edge;
}

double uniformization_rate(const Rates& r) {
    double lam = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) lam = std::max(lam, r.alpha[j] + r.beta[j]);
    return lam;
}

double inner_h(std::span<const double> u, std::span<const double> v, double h) {
    if (u.size() != v.size()) throw NumericalError("inner_h: length mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += u[j] * v[j];
    return h * s;
}

}  // namespace fpjump
