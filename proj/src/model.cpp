#include "fpjump/model.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "fpjump/error.hpp"

namespace fpjump {

FieldVec FieldVec::probability(std::vector<double> values) {
    double sum = 0.0;
    for (double v : values) {
        if (!(v >= 0.0)) throw NumericalError("probability vector has a negative or NaN entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw NumericalError("probability vector sums to " + std::to_string(sum));
    }
    return FieldVec{FieldKind::Probability, std::move(values)};
}

// --- Coefficient -------------------------------------------------------------

Coefficient Coefficient::from_expr(const Expr& expr) {
    return Coefficient(expr.to_string(), [expr](double x) { return expr.eval(x); }, {});
}

Coefficient Coefficient::from_text(std::string_view source) {
    Expr e = Expr::parse(source);
    return Coefficient(std::string(source), [e](double x) { return e.eval(x); }, {});
}

Coefficient Coefficient::from_function(std::string label, Fn value, Fn derivative) {
    return Coefficient(std::move(label), std::move(value), std::move(derivative));
}

double Coefficient::operator()(double x) const {
    const double v = value_(x);
    if (!std::isfinite(v)) throw DomainError("coefficient '" + label_ + "' is not finite at x = " + std::to_string(x));
    return v;
}

double Coefficient::derivative(double x) const {
    if (derivative_) return derivative_(x);
    const double step = 1e-6 * std::max(1.0, std::abs(x));
    return ((*this)(x + step) - (*this)(x - step)) / (2.0 * step);
}

// --- Presets -----------------------------------------------------------------

Problem make_preset(std::string_view name) {
    if (name == "ou") {
        return Problem{
            Coefficient::from_function("-x", [](double x) { return -x; }, [](double) { return -1.0; }),
            Coefficient::from_function("1", [](double) { return 1.0; }, [](double) { return 0.0; }),
            TruncatedLine{-6.0, 6.0},
            SigmaBounds{1.0, 1.0},
        };
    }
    if (name == "torus_sin") {
        return Problem{
            Coefficient::from_function(
                "cos(x)*exp(sin(x))", [](double x) { return std::cos(x) * std::exp(std::sin(x)); },
                [](double x) {
                    const double c = std::cos(x);
                    return (c * c - std::sin(x)) * std::exp(std::sin(x));
                }),
            Coefficient::from_function(
                "exp(sin(x)/2)", [](double x) { return std::exp(0.5 * std::sin(x)); },
                [](double x) { return 0.5 * std::cos(x) * std::exp(0.5 * std::sin(x)); }),
            Torus{2.0 * std::numbers::pi},
            SigmaBounds{std::exp(-1.0), std::exp(1.0)},
        };
    }
    if (name == "diffusion") {
        return Problem{
            Coefficient::from_function("0", [](double) { return 0.0; }, [](double) { return 0.0; }),
            Coefficient::from_function("sqrt(2)", [](double) { return std::numbers::sqrt2; },
                                       [](double) { return 0.0; }),
            TruncatedLine{-1.0, 1.0},
            SigmaBounds{2.0, 2.0},
        };
    }
    throw ConfigError("coeff.preset: unknown preset '" + std::string(name) + "'");
}

// --- Grid --------------------------------------------------------------------

Grid Grid::line(double x_min, double x_max, std::size_t n) {
    if (!(x_min < x_max)) throw ConfigError("line domain needs x_min < x_max");
    if (n < 2) throw ConfigError("line grid needs at least 2 nodes");
    const double cells = static_cast<double>(n - 1);
    std::vector<double> nodes(n);
    // Written as a weighted average so a symmetric window gives exactly
    // symmetric nodes (x_{N-1-j} == -x_j) with an exact zero in the middle.
    for (std::size_t j = 0; j < n; ++j) {
        const double right = static_cast<double>(j);
        const double left = cells - right;
        nodes[j] = (x_min * left + x_max * right) / cells;
    }
    nodes.front() = x_min;
    nodes.back() = x_max;
    return Grid(std::move(nodes), (x_max - x_min) / cells, false, x_min, x_max);
}

Grid Grid::torus(double L, std::size_t n) {
    if (!(L > 0.0)) throw ConfigError("torus domain needs L > 0");
    if (n < 3) throw ConfigError("torus grid needs at least 3 nodes");
    const double h = L / static_cast<double>(n);
    std::vector<double> nodes(n);
    for (std::size_t j = 0; j < n; ++j) nodes[j] = static_cast<double>(j) * h;
    return Grid(std::move(nodes), h, true, 0.0, L);
}

Grid Grid::for_domain(const Domain& d, std::size_t n) {
    if (const auto* line_domain = std::get_if<TruncatedLine>(&d)) return line(line_domain->x_min, line_domain->x_max, n);
    return torus(std::get<Torus>(d).L, n);
}

Grid Grid::refined(std::size_t factor) const {
    if (factor == 0) throw ConfigError("refinement factor must be positive");
    if (periodic_) return torus(upper_, size() * factor);
    return line(lower_, upper_, (size() - 1) * factor + 1);
}

std::size_t Grid::anchor() const noexcept {
    std::size_t best = 0;
    for (std::size_t j = 1; j < nodes_.size(); ++j) {
        if (std::abs(nodes_[j]) < std::abs(nodes_[best])) best = j;
    }
    return best;
}

// --- Drift splitting ---------------------------------------------------------

void validate(const Problem& p, const Grid& g) {
    if (is_torus(p.domain) != g.periodic()) throw ConfigError("grid and domain disagree on periodicity");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        for (double x : {g.x(j), g.x(j) - 0.5 * g.h(), g.x(j) + 0.5 * g.h()}) {
            const double s = p.sigma(x);
            lo = std::min(lo, s * s);
            hi = std::max(hi, s * s);
        }
    }
    if (!(lo > 0.0)) throw NumericalError("sigma^2 must be bounded below by a positive constant on the grid");
    if (p.sigma_bounds) {
        const double slack = 1e-12 * std::max(1.0, hi);
        if (lo < p.sigma_bounds->S1 - slack || hi > p.sigma_bounds->S2 + slack) {
            throw NumericalError("sigma^2 leaves the claimed bounds [S1, S2] on the grid");
        }
    }
}

SplitDrift split_drift(const Problem& p, const Grid& g) {
    const std::size_t n = g.size();
    SplitDrift sd{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const double x = g.x(j);
        const double s = p.drift(x) - p.sigma(x) * p.sigma.derivative(x);
        if (!std::isfinite(s)) throw DomainError("drift s = b - sigma sigma' is not finite at x = " + std::to_string(x));
        sd.s[j] = s;
        sd.s_plus[j] = std::max(s, 0.0);
        sd.s_minus[j] = std::max(-s, 0.0);
    }
    return sd;
}

// --- Reference stationary density --------------------------------------------

namespace {

constexpr int kSubsteps = 32;

/// RK4 for y' = f(x, y) over [a, b] with kSubsteps steps; f is autonomous in y
/// for the first component, so this is Simpson for G and RK4 for the pair.
template <typename F, typename State>
State rk4(const F& f, double a, double b, State y) {
    const double dx = (b - a) / kSubsteps;
    for (int k = 0; k < kSubsteps; ++k) {
        const double x = a + k * dx;
        const State k1 = f(x, y);
        const State k2 = f(x + 0.5 * dx, y + 0.5 * dx * k1);
        const State k3 = f(x + 0.5 * dx, y + 0.5 * dx * k2);
        const State k4 = f(x + dx, y + dx * k3);
        y = y + (dx / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

struct Pair {
    double g;
    double i;
    friend Pair operator+(Pair a, Pair b) { return {a.g + b.g, a.i + b.i}; }
    friend Pair operator*(double s, Pair a) { return {s * a.g, s * a.i}; }
};

double log_trapezoid_normaliser(std::span<const double> log_pi, double h, bool periodic) {
    const double peak = *std::max_element(log_pi.begin(), log_pi.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < log_pi.size(); ++j) {
        double w = h;
        if (!periodic && (j == 0 || j + 1 == log_pi.size())) w = 0.5 * h;
        sum += w * std::exp(log_pi[j] - peak);
    }
    return peak + std::log(sum);
}

}  // namespace

FieldVec reference_stationary(const Problem& p, const Grid& g) {
    const std::size_t n = g.size();
    // G(x) = integral of 2 b / sigma^2; sigma^2 pi = v satisfies v' = G' v + 2 J.
    auto two_b_over_s2 = [&p](double x) {
        const double s = p.sigma(x);
        return 2.0 * p.drift(x) / (s * s);
    };
    std::vector<double> log_pi(n);

    if (!g.periodic()) {
        const std::size_t a = g.anchor();
        std::vector<double> G(n, 0.0);
        auto rhs = [&](double x, double) { return two_b_over_s2(x); };
        for (std::size_t j = a; j + 1 < n; ++j) G[j + 1] = rk4(rhs, g.x(j), g.x(j + 1), G[j]);
        for (std::size_t j = a; j > 0; --j) G[j - 1] = rk4(rhs, g.x(j), g.x(j - 1), G[j]);
        for (std::size_t j = 0; j < n; ++j) {
            const double s = p.sigma(g.x(j));
            log_pi[j] = G[j] - 2.0 * std::log(s);
        }
    } else {
        // Periodic first integral: v = e^G (v0 + 2 J I), I = integral of e^{-G}.
        // Periodicity fixes J; with v0 = 1,
        //   v_j = e^{G_j} ((1 - I_j / I_L) + e^{-G_L} I_j / I_L),
        // a positive combination, so no cancellation.
        std::vector<Pair> state(n + 1, Pair{0.0, 0.0});
        auto rhs = [&](double x, Pair y) { return Pair{two_b_over_s2(x), std::exp(-y.g)}; };
        for (std::size_t j = 0; j < n; ++j) {
            const double xa = static_cast<double>(j) * g.h();
            const double xb = static_cast<double>(j + 1) * g.h();
            state[j + 1] = rk4(rhs, xa, xb, state[j]);
        }
        const double GL = state[n].g;
        const double IL = state[n].i;
        for (std::size_t j = 0; j < n; ++j) {
            const double frac = state[j].i / IL;
            const double v_scaled = (1.0 - frac) + std::exp(-GL) * frac;
            if (!(v_scaled > 0.0)) throw NumericalError("periodic stationary solve produced a non-positive density");
            const double s = p.sigma(g.x(j));
            log_pi[j] = state[j].g + std::log(v_scaled) - 2.0 * std::log(s);
        }
    }

    const double log_z = log_trapezoid_normaliser(log_pi, g.h(), g.periodic());
    FieldVec out{FieldKind::Density, std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = std::exp(log_pi[j] - log_z);
        if (!(out[j] > 0.0) || !std::isfinite(out[j])) {
            throw NumericalError("reference stationary density is not positive at x = " + std::to_string(g.x(j)));
        }
    }
    return out;
}

}  // namespace fpjump
