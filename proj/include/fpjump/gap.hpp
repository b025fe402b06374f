#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fpjump/scheme.hpp"
#include "fpjump/stationary.hpp"

namespace fpjump {

/// Sequences on a finite index window; entry i stands for index i - origin.
struct HardyInput {
    std::vector<double> theta;  ///< non-negative
    std::vector<double> mu;     ///< positive
    std::size_t origin = 0;

    void check() const;
};

/// B = max( sup_{j>=0} (sum_{k=0}^j 1/mu_k) sum_{k>j} theta_k,
///          sup_{j<0}  (sum_{k=j}^{-1} 1/mu_k) sum_{k<j} theta_k ), in O(N).
double hardy_B(const HardyInput& hi);

/// Largest test-function lower bound for A: with f = 1_{[0,M]} / mu,
/// (sum_{k=0}^M 1/mu_k) sum_{j>=M} theta_j, and the mirror image with
/// f = 1_{[-M,-1]} / mu on the negative side.
double witness_scan(const HardyInput& hi);

/// Quotient inside the supremum defining A for a given f:
/// max(sum_{j>=0} theta_j (sum_{k=0}^j f_k)^2, sum_{j<=-1} theta_j (sum_{k=j}^{-1} f_k)^2)
/// divided by sum_j mu_j f_j^2.
double hardy_functional(const HardyInput& hi, std::span<const double> f);

/// Hardy data of the line chain: theta_j = pi_{j+1} (j >= 0), theta_j = pi_j
/// (j <= -1), mu_j = alpha_j pi_j, relative to `anchor`. The last node carries
/// theta = 0 and alpha = 0 and is dropped.
HardyInput line_hardy_input(const Rates& r, const StationaryResult& s, std::size_t anchor);

struct LineBound {
    double B;             ///< displayed two-branch constant with (alpha pi) and (beta pi)
    double B_hardy;       ///< hardy_B of line_hardy_input
    double kappa_lower;   ///< 1 / (8 B)
    double witness_max;   ///< witness_scan of line_hardy_input
    double db_mismatch;   ///< relative gap between B_hardy and its beta rewrite
    bool flagged;         ///< db_mismatch above roundoff
};

LineBound poincare_bound_line(const Rates& r, const StationaryResult& s, std::size_t anchor);

/// Symmetric tridiagonal matrix, with one extra corner entry coupling the
/// first and last rows when periodic.
struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;  ///< off[j] couples j and j+1, size N-1
    double corner = 0.0;
    bool periodic = false;

    std::size_t size() const noexcept { return diag.size(); }
};

/// -Q symmetrised with sqrt(pi): diag alpha_j + beta_j, off -sqrt(alpha_j beta_{j+1}).
SymTridiag symmetrized_line(const Rates& r);

/// Pi^{-1/2} L Pi^{-1/2} for the weighted periodic Laplacian with edge weights
/// w_j = (beta_{j+1} pi_{j+1} + alpha_j pi_j) / 2.
SymTridiag symmetrized_torus(const Rates& r, const StationaryResult& s);

/// Number of eigenvalues strictly below x (Sylvester inertia of m - x I).
std::size_t count_eigenvalues_below(const SymTridiag& m, double x);

/// k-th smallest eigenvalue (k = 0, 1, ...) by bisection.
double eigenvalue(const SymTridiag& m, std::size_t k);

/// Smallest non-zero eigenvalue of the symmetrised generator.
double exact_gap(const Rates& r, const StationaryResult& s);

/// kappa_1 = [max_{k=1..N-1} sum_{j=k}^{N-1} 2 j pi_j / (beta_k pi_k + alpha_{k-1} pi_{k-1})]^{-1}.
double poincare_bound_torus(const Rates& r, const StationaryResult& s);

struct GapReport {
    std::optional<double> B;             ///< line only
    std::optional<double> B_hardy;       ///< line only
    double kappa_lower = 0.0;            ///< 1/(8B) on the line, kappa_1 on the torus
    std::optional<double> witness_max;   ///< line only
    double exact_gap = 0.0;
    std::optional<double> torus_kappa;   ///< torus only
    bool flagged = false;
    double h = 0.0;
    std::size_t N = 0;
};

GapReport gap_report(const Rates& r, const StationaryResult& s, const Grid& g);

}  // namespace fpjump
