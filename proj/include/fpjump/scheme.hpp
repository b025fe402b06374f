#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fpjump/model.hpp"

namespace fpjump {

enum class Boundary {
    Reflecting,  ///< truncated line: no flux through the ends
    Periodic,    ///< torus: indices wrap
};

/// Upwind jump rates. alpha[j] is the rate j -> j+1 and beta[j] the rate
/// j -> j-1. On a reflecting line alpha.back() == beta.front() == 0.
struct Rates {
    std::vector<double> alpha;
    std::vector<double> beta;
    Boundary boundary = Boundary::Reflecting;
    double h = 1.0;

    std::size_t size() const noexcept { return alpha.size(); }
    bool periodic() const noexcept { return boundary == Boundary::Periodic; }

    /// Index of the right / left neighbour; only valid where the matching
    /// rate is non-zero on a reflecting line.
    std::size_t right(std::size_t j) const noexcept { return j + 1 == size() ? 0 : j + 1; }
    std::size_t left(std::size_t j) const noexcept { return j == 0 ? size() - 1 : j - 1; }

    /// Checks sizes, non-negativity and the boundary convention.
    void check() const;
};

/// Tridiagonal (plus corners on the torus) Q-matrix view of Rates:
/// Q(j,j) = -(alpha_j + beta_j), Q(j,j-1) = beta_j, Q(j,j+1) = alpha_j.
class Generator {
public:
    explicit Generator(const Rates& r) : rates_(&r) {}

    std::size_t size() const noexcept { return rates_->size(); }
    double entry(std::size_t i, std::size_t j) const;
    double row_sum(std::size_t i) const;

private:
    const Rates* rates_;
};

/// alpha_j = s+_j / h + sigma(x_j + h/2)^2 / (2h^2),
/// beta_j  = s-_j / h + sigma(x_j - h/2)^2 / (2h^2).
Rates build_rates(const Problem& p, const Grid& g, const SplitDrift& sd);

/// Convenience: validate, split and build.
Rates build_rates(const Problem& p, const Grid& g);

/// Rates given directly (tests, hand-built chains).
Rates make_rates(std::vector<double> alpha, std::vector<double> beta, Boundary boundary, double h = 1.0);

/// Forward operator (L_h^* p)_j = alpha_{j-1} p_{j-1} + beta_{j+1} p_{j+1} - (alpha_j + beta_j) p_j.
std::vector<double> apply_forward(const Rates& r, std::span<const double> p);

/// Backward operator (L_h u)_j = beta_j u_{j-1} - (alpha_j + beta_j) u_j + alpha_j u_{j+1}.
std::vector<double> apply_backward(const Rates& r, std::span<const double> u);

/// Numerical fluxes J_{j+1/2} = h alpha_j rho_j - h beta_{j+1} rho_{j+1}.
///
/// Torus: N entries, entry j is J_{j+1/2} (entry N-1 couples node N-1 to 0).
/// Line: N+1 entries, entry k is J_{k-1/2}; the first and last are the
/// boundary fluxes and vanish. In both cases the forward operator equals
/// -(J_{j+1/2} - J_{j-1/2}) / h.
std::vector<double> flux(const Rates& r, std::span<const double> rho);

/// lambda* = max_j (alpha_j + beta_j).
double uniformization_rate(const Rates& r);

/// <u, v>_h = sum_j h u_j v_j.
double inner_h(std::span<const double> u, std::span<const double> v, double h);

}  // namespace fpjump
