#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fpjump/expr.hpp"
#include "fpjump/field.hpp"

namespace fpjump {

/// A scalar coefficient function of x with an optional closed-form derivative.
class Coefficient {
public:
    using Fn = std::function<double(double)>;

    static Coefficient from_expr(const Expr& expr);
    static Coefficient from_text(std::string_view source);
    static Coefficient from_function(std::string label, Fn value, Fn derivative = {});

    double operator()(double x) const;

    /// Closed-form derivative when registered, otherwise a symmetric difference
    /// with step 1e-6 * max(1, |x|).
    double derivative(double x) const;

    bool has_exact_derivative() const noexcept { return static_cast<bool>(derivative_); }
    const std::string& label() const noexcept { return label_; }

private:
    Coefficient(std::string label, Fn value, Fn derivative)
        : label_(std::move(label)), value_(std::move(value)), derivative_(std::move(derivative)) {}

    std::string label_;
    Fn value_;
    Fn derivative_;
};

struct TruncatedLine {
    double x_min;
    double x_max;
};

struct Torus {
    double L;
};

using Domain = std::variant<TruncatedLine, Torus>;

inline bool is_torus(const Domain& d) { return std::holds_alternative<Torus>(d); }

/// Claimed bounds S1 <= sigma(x)^2 <= S2.
struct SigmaBounds {
    double S1;
    double S2;
};

struct Problem {
    Coefficient drift;
    Coefficient sigma;
    Domain domain;
    std::optional<SigmaBounds> sigma_bounds;
};

/// Named problems: "ou" (b = -x, sigma = 1 on [-6, 6]), "torus_sin"
/// (b = cos x e^{sin x}, sigma = e^{sin x / 2} on the 2 pi torus) and
/// "diffusion" (b = 0, sigma = sqrt 2 on [-1, 1]). Throws ConfigError for
/// other names.
Problem make_preset(std::string_view name);

/// Uniform grid. Line: x_j = x_min + j h, j = 0..N-1, h = (x_max - x_min)/(N-1).
/// Torus: x_j = j h, h = L/N.
class Grid {
public:
    static Grid line(double x_min, double x_max, std::size_t n);
    static Grid torus(double L, std::size_t n);
    static Grid for_domain(const Domain& d, std::size_t n);

    /// Same domain with `factor` times as many cells. Nodes of this grid are
    /// every `factor`-th node of the refined one.
    Grid refined(std::size_t factor) const;

    double h() const noexcept { return h_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    bool periodic() const noexcept { return periodic_; }
    double x(std::size_t j) const { return nodes_[j]; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }

    /// Node nearest x = 0 (clamped into the grid).
    std::size_t anchor() const noexcept;

private:
    Grid(std::vector<double> nodes, double h, bool periodic, double lower, double upper)
        : nodes_(std::move(nodes)), h_(h), periodic_(periodic), lower_(lower), upper_(upper) {}

    std::vector<double> nodes_;
    double h_;
    bool periodic_;
    double lower_;
    double upper_;
};

/// s = b - sigma sigma' split into s = s_plus - s_minus with s_plus * s_minus = 0.
struct SplitDrift {
    std::vector<double> s;
    std::vector<double> s_plus;
    std::vector<double> s_minus;
};

/// Checks sigma^2 >= S1 > 0 on nodes and half nodes and the grid/domain
/// compatibility. Throws NumericalError.
void validate(const Problem& p, const Grid& g);

SplitDrift split_drift(const Problem& p, const Grid& g);

/// Continuum stationary density sampled on the grid, normalised so that the
/// trapezoid rule over the grid integrates to one.
FieldVec reference_stationary(const Problem& p, const Grid& g);

}  // namespace fpjump
