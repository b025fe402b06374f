#include "fpjump/gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fpjump/error.hpp"

namespace fpjump {

void HardyInput::check() const {
    if (theta.size() != mu.size()) throw InternalError("hardy input: theta and mu lengths differ");
    if (theta.empty() || origin >= theta.size()) throw InternalError("hardy input: origin outside the window");
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!(theta[i] >= 0.0) || !std::isfinite(theta[i])) throw InternalError("hardy input: theta must be non-negative");
        if (!(mu[i] > 0.0) || !std::isfinite(mu[i])) throw InternalError("hardy input: mu must be positive");
    }
}

namespace {

/// suffix[i] = sum_{k>=i} theta_k, prefix[i] = sum_{k<i} theta_k.
struct Sums {
    std::vector<double> suffix;
    std::vector<double> prefix;
};

Sums tail_sums(std::span<const double> theta) {
    const std::size_t n = theta.size();
    Sums s{std::vector<double>(n + 1, 0.0), std::vector<double>(n + 1, 0.0)};
    for (std::size_t i = n; i-- > 0;) s.suffix[i] = s.suffix[i + 1] + theta[i];
    for (std::size_t i = 0; i < n; ++i) s.prefix[i + 1] = s.prefix[i] + theta[i];
    return s;
}

}  // namespace

double hardy_B(const HardyInput& hi) {
    hi.check();
    const std::size_t n = hi.theta.size();
    const std::size_t o = hi.origin;
    const Sums sums = tail_sums(hi.theta);
    double best = 0.0;
    double gamma = 0.0;
    for (std::size_t i = o; i < n; ++i) {
        gamma += 1.0 / hi.mu[i];
        best = std::max(best, gamma * sums.suffix[i + 1]);
    }
    gamma = 0.0;
    for (std::size_t i = o; i-- > 0;) {
        gamma += 1.0 / hi.mu[i];
        best = std::max(best, gamma * sums.prefix[i]);
    }
    return best;
}

double witness_scan(const HardyInput& hi) {
    hi.check();
    const std::size_t n = hi.theta.size();
    const std::size_t o = hi.origin;
    const Sums sums = tail_sums(hi.theta);
    double best = 0.0;
    double gamma = 0.0;
    for (std::size_t i = o; i < n; ++i) {
        gamma += 1.0 / hi.mu[i];
        best = std::max(best, gamma * sums.suffix[i]);
    }
    gamma = 0.0;
    for (std::size_t i = o; i-- > 0;) {
        gamma += 1.0 / hi.mu[i];
        best = std::max(best, gamma * sums.prefix[i + 1]);
    }
    return best;
}

double hardy_functional(const HardyInput& hi, std::span<const double> f) {
    hi.check();
    const std::size_t n = hi.theta.size();
    if (f.size() != n) throw InternalError("hardy_functional: f has the wrong length");
    const std::size_t o = hi.origin;
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += hi.mu[i] * f[i] * f[i];
    if (!(norm > 0.0)) throw NumericalError("hardy_functional: f has zero weighted norm");
    double right = 0.0, partial = 0.0;
    for (std::size_t i = o; i < n; ++i) {
        partial += f[i];
        right += hi.theta[i] * partial * partial;
    }
    double left = 0.0;
    partial = 0.0;
    for (std::size_t i = o; i-- > 0;) {
        partial += f[i];
        left += hi.theta[i] * partial * partial;
    }
    return std::max(right, left) / norm;
}

HardyInput line_hardy_input(const Rates& r, const StationaryResult& s, std::size_t anchor) {
    if (r.periodic()) throw InternalError("line_hardy_input called on a periodic chain");
    const std::size_t n = r.size();
    if (n < 2 || anchor + 1 >= n) throw NumericalError("line Hardy bound needs the anchor strictly left of the last node");
    const auto& pi = s.pi_h.values;
    HardyInput hi;
    hi.origin = anchor;
    hi.theta.resize(n - 1);
    hi.mu.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        hi.theta[i] = i >= anchor ? pi[i + 1] : pi[i];
        hi.mu[i] = r.alpha[i] * pi[i];
    }
    return hi;
}

LineBound poincare_bound_line(const Rates& r, const StationaryResult& s, std::size_t anchor) {
    const HardyInput hi = line_hardy_input(r, s, anchor);
    const std::size_t n = r.size();
    const auto& pi = s.pi_h.values;

    std::vector<double> suffix(n + 1, 0.0), prefix(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + pi[i];
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + pi[i];

    // Displayed form: sup_{j>=0} (sum_{k=0}^j 1/(alpha_k pi_k)) sum_{k>=j+1} pi_k
    //            and sup_{j<=0} (sum_{k=j}^0 1/(beta_k pi_k)) sum_{k<=j-1} pi_k.
    double B = 0.0;
    double gamma = 0.0;
    for (std::size_t i = anchor; i + 1 < n; ++i) {
        gamma += 1.0 / (r.alpha[i] * pi[i]);
        B = std::max(B, gamma * suffix[i + 1]);
    }
    gamma = 0.0;
    for (std::size_t i = anchor; i > 0; --i) {
        gamma += 1.0 / (r.beta[i] * pi[i]);
        B = std::max(B, gamma * prefix[i]);
    }

    // The Hardy form rewritten with beta_{k+1} pi_{k+1} in place of alpha_k pi_k;
    // equal to B_hardy under detailed balance.
    HardyInput beta_form = hi;
    for (std::size_t i = 0; i + 1 < n; ++i) beta_form.mu[i] = r.beta[i + 1] * pi[i + 1];
    const double B_hardy = hardy_B(hi);
    const double B_beta = hardy_B(beta_form);
    const double mismatch = B_hardy > 0.0 ? std::abs(B_beta - B_hardy) / B_hardy : std::abs(B_beta);

    LineBound out;
    out.B = B;
    out.B_hardy = B_hardy;
    out.kappa_lower = B > 0.0 ? 1.0 / (8.0 * B) : std::numeric_limits<double>::infinity();
    out.witness_max = witness_scan(hi);
    out.db_mismatch = mismatch;
    out.flagged = mismatch > 1e-10;
    return out;
}

SymTridiag symmetrized_line(const Rates& r) {
    if (r.periodic()) throw InternalError("symmetrized_line called on a periodic chain");
    const std::size_t n = r.size();
    SymTridiag m;
    m.diag.resize(n);
    m.off.resize(n > 0 ? n - 1 : 0);
    for (std::size_t j = 0; j < n; ++j) m.diag[j] = r.alpha[j] + r.beta[j];
    for (std::size_t j = 0; j + 1 < n; ++j) m.off[j] = -std::sqrt(r.alpha[j] * r.beta[j + 1]);
    return m;
}

SymTridiag symmetrized_torus(const Rates& r, const StationaryResult& s) {
    if (!r.periodic()) throw InternalError("symmetrized_torus called on a reflecting chain");
    const std::size_t n = r.size();
    const auto& pi = s.pi_h.values;
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = r.right(j);
        w[j] = 0.5 * (r.beta[k] * pi[k] + r.alpha[j] * pi[j]);
    }
    SymTridiag m;
    m.periodic = true;
    m.diag.resize(n);
    m.off.resize(n - 1);
    for (std::size_t j = 0; j < n; ++j) m.diag[j] = (w[j] + w[r.left(j)]) / pi[j];
    for (std::size_t j = 0; j + 1 < n; ++j) m.off[j] = -w[j] / std::sqrt(pi[j] * pi[j + 1]);
    m.corner = -w[n - 1] / std::sqrt(pi[n - 1] * pi[0]);
    return m;
}

namespace {

double gershgorin_upper(const SymTridiag& m) {
    const std::size_t n = m.size();
    double hi = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double radius = 0.0;
        if (j > 0) radius += std::abs(m.off[j - 1]);
        if (j + 1 < n) radius += std::abs(m.off[j]);
        if (m.periodic && (j == 0 || j + 1 == n)) radius += std::abs(m.corner);
        hi = std::max(hi, m.diag[j] + radius);
    }
    return hi;
}

double gershgorin_lower(const SymTridiag& m) {
    const std::size_t n = m.size();
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        double radius = 0.0;
        if (j > 0) radius += std::abs(m.off[j - 1]);
        if (j + 1 < n) radius += std::abs(m.off[j]);
        if (m.periodic && (j == 0 || j + 1 == n)) radius += std::abs(m.corner);
        lo = std::min(lo, m.diag[j] - radius);
    }
    return lo;
}

}  // namespace

std::size_t count_eigenvalues_below(const SymTridiag& m, double x) {
    const std::size_t n = m.size();
    if (n == 0) return 0;
    double scale = 0.0;
    for (double d : m.diag) scale = std::max(scale, std::abs(d));
    for (double e : m.off) scale = std::max(scale, std::abs(e));
    scale = std::max(scale, std::abs(m.corner));
    const double pivmin = std::numeric_limits<double>::epsilon() * std::max(scale, std::numeric_limits<double>::min());
    auto guard = [pivmin](double p) { return std::abs(p) < pivmin ? -pivmin : p; };

    std::size_t count = 0;
    if (!m.periodic || n < 3) {
        double p = guard(m.diag[0] - x);
        if (p < 0.0) ++count;
        for (std::size_t j = 1; j < n; ++j) {
            double off = m.off[j - 1];
            if (m.periodic && n == 2) off += m.corner;
            p = guard(m.diag[j] - x - off * off / p);
            if (p < 0.0) ++count;
        }
        return count;
    }

    // LDL^T of the arrow-structured matrix: rows 0..N-2 are tridiagonal,
    // r_j tracks the current entry in column N-1.
    const std::size_t last = n - 1;
    double p = guard(m.diag[0] - x);
    double r = m.corner + (last - 1 == 0 ? m.off[0] : 0.0);
    double tail = 0.0;
    if (p < 0.0) ++count;
    for (std::size_t j = 0; j + 1 < last; ++j) {
        const double e = m.off[j];
        const double p_next = guard(m.diag[j + 1] - x - e * e / p);
        const double base = (j + 1 == last - 1) ? m.off[last - 1] : 0.0;
        const double r_next = base - e * r / p;
        tail -= r * r / p;
        p = p_next;
        r = r_next;
        if (p < 0.0) ++count;
    }
    tail -= r * r / p;
    const double p_last = guard(m.diag[last] - x + tail);
    if (p_last < 0.0) ++count;
    return count;
}

double eigenvalue(const SymTridiag& m, std::size_t k) {
    if (k >= m.size()) throw InternalError("eigenvalue index out of range");
    double lo = gershgorin_lower(m);
    double hi = gershgorin_upper(m);
    const double width = std::max(std::abs(lo), std::abs(hi));
    lo -= 1e-12 * width + std::numeric_limits<double>::min();
    hi += 1e-12 * width + std::numeric_limits<double>::min();
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (count_eigenvalues_below(m, mid) > k) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double exact_gap(const Rates& r, const StationaryResult& s) {
    if (r.size() < 2) throw NumericalError("exact_gap needs at least two nodes");
    const SymTridiag m = r.periodic() ? symmetrized_torus(r, s) : symmetrized_line(r);
    return eigenvalue(m, 1);
}

double poincare_bound_torus(const Rates& r, const StationaryResult& s) {
    if (!r.periodic()) throw InternalError("poincare_bound_torus called on a reflecting chain");
    const std::size_t n = r.size();
    const auto& pi = s.pi_h.values;
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] + 2.0 * static_cast<double>(j) * pi[j];
    double worst = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double edge = r.beta[k] * pi[k] + r.alpha[k - 1] * pi[k - 1];
        worst = std::max(worst, suffix[k] / edge);
    }
    return 1.0 / worst;
}

GapReport gap_report(const Rates& r, const StationaryResult& s, const Grid& g) {
    GapReport rep;
    rep.h = g.h();
    rep.N = g.size();
    rep.exact_gap = exact_gap(r, s);
    if (r.periodic()) {
        rep.torus_kappa = poincare_bound_torus(r, s);
        rep.kappa_lower = *rep.torus_kappa;
    } else {
        const LineBound lb = poincare_bound_line(r, s, g.anchor());
        rep.B = lb.B;
        rep.B_hardy = lb.B_hardy;
        rep.kappa_lower = lb.kappa_lower;
        rep.witness_max = lb.witness_max;
        rep.flagged = lb.flagged;
    }
    return rep;
}

}  // namespace fpjump
