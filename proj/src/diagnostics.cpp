#include "fpjump/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fpjump/error.hpp"

namespace fpjump {

namespace {

void same_length(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) throw NumericalError(std::string(what) + ": length mismatch");
}

}  // namespace

double l1_norm(std::span<const double> v, double h) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return h * s;
}

double l2_norm(std::span<const double> v, double h) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(h * s);
}

double linf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double weighted_lp(std::span<const double> v, std::span<const double> w, double p) {
    same_length(v, w, "weighted_lp");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (w[j] > 0.0) m = std::max(m, std::abs(v[j]));
        }
        return m;
    }
    if (!(p >= 1.0)) throw NumericalError("weighted_lp: p must be >= 1");
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) s += w[j] * std::pow(std::abs(v[j]), p);
    return std::pow(s, 1.0 / p);
}

double tv_distance_sum(std::span<const double> p, std::span<const double> q) {
    same_length(p, q, "tv_distance");
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) s += std::abs(p[j] - q[j]);
    return s;
}

double tv_distance_half(std::span<const double> p, std::span<const double> q) {
    return 0.5 * tv_distance_sum(p, q);
}

double tv_seminorm(std::span<const double> v, bool periodic) {
    const std::size_t n = v.size();
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) s += std::abs(v[j + 1] - v[j]);
    if (periodic && n > 1) s += std::abs(v[0] - v[n - 1]);
    return s;
}

FieldVec ratio(std::span<const double> p, std::span<const double> pi) {
    same_length(p, pi, "ratio");
    FieldVec q{FieldKind::Ratio, std::vector<double>(p.size())};
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (!(pi[j] > 0.0)) throw NumericalError("ratio: stationary weight must be positive");
        q[j] = p[j] / pi[j];
    }
    return q;
}

double chi2_F(std::span<const double> p, std::span<const double> pi) {
    const FieldVec q = ratio(p, pi);
    double mean = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) mean += pi[j] * q[j];
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        const double d = q[j] - mean;
        s += pi[j] * d * d;
    }
    return 0.5 * s;
}

double dissipation_D(const Rates& r, std::span<const double> pi, std::span<const double> p) {
    const FieldVec q = ratio(p, pi);
    const std::size_t n = r.size();
    if (pi.size() != n) throw NumericalError("dissipation_D: length mismatch");
    double s = 0.0;
    if (r.periodic()) {
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t k = r.right(j);
            const double w = 0.5 * (r.beta[k] * pi[k] + r.alpha[j] * pi[j]);
            const double d = q[k] - q[j];
            s += w * d * d;
        }
    } else {
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double d = q[j] - q[j + 1];
            s += r.alpha[j] * pi[j] * d * d;
        }
    }
    return s;
}

double relative_entropy(std::span<const double> p, std::span<const double> pi) {
    same_length(p, pi, "relative_entropy");
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] > 0.0) s += p[j] * std::log(p[j] / pi[j]);
    }
    return std::max(s, 0.0);
}

FieldVec restrict_to_grid(const std::function<double(double)>& f, const Grid& g) {
    FieldVec out{FieldKind::Density, std::vector<double>(g.size())};
    for (std::size_t j = 0; j < g.size(); ++j) {
        out[j] = f(g.x(j));
        if (!std::isfinite(out[j])) throw DomainError("restriction produced a non-finite value");
    }
    return out;
}

double fit_order(const std::vector<std::pair<double, double>>& h_err) {
    if (h_err.size() < 2) throw NumericalError("fit_order needs at least two points");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [h, e] : h_err) {
        if (!(h > 0.0) || !(e > 0.0)) throw NumericalError("fit_order needs positive h and errors");
        const double x = std::log(h), y = std::log(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(h_err.size());
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw NumericalError("fit_order: all step sizes are equal");
    return (n * sxy - sx * sy) / denom;
}

double fit_decay(const std::vector<std::pair<double, double>>& t_F) {
    if (t_F.empty()) return 0.0;
    const double F0 = t_F.front().second;
    if (!(F0 > 0.0)) return 0.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (const auto& [t, F] : t_F) {
        if (!(F >= 1e-12 * F0 && F <= 0.5 * F0)) continue;
        const double y = std::log(F);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++n;
    }
    if (n < 2) return 0.0;
    const double dn = static_cast<double>(n);
    const double denom = dn * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return -(dn * sxy - sx * sy) / denom;
}

Metrics compute_metrics(const Rates& r, std::span<const double> pi, double t, std::span<const double> p,
                        std::optional<std::span<const double>> reference_density) {
    same_length(p, pi, "compute_metrics");
    const double h = r.h;
    Metrics m;
    m.t = t;
    m.positivity_min = std::numeric_limits<double>::infinity();
    std::vector<double> rho(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) {
        m.mass += p[j];
        m.positivity_min = std::min(m.positivity_min, p[j]);
        rho[j] = p[j] / h;
    }
    m.tv_seminorm = tv_seminorm(rho, r.periodic());
    if (reference_density) {
        same_length(p, *reference_density, "compute_metrics reference");
        double s = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) s += std::abs(rho[j] - (*reference_density)[j]);
        m.l1_error = h * s;
    }
    const FieldVec q = ratio(p, pi);
    double l2 = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) l2 += pi[j] * (q[j] - 1.0) * (q[j] - 1.0);
    m.l2_pi_error = std::sqrt(l2);
    m.F_h = chi2_F(p, pi);
    m.D_h = dissipation_D(r, pi, p);
    m.relative_entropy = relative_entropy(p, pi);
    m.tv_to_pi = tv_distance_sum(p, pi);
    return m;
}

}  // namespace fpjump
