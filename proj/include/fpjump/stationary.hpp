#pragma once

#include <cstddef>

#include "fpjump/field.hpp"
#include "fpjump/scheme.hpp"

namespace fpjump {

struct StationaryResult {
    FieldVec pi_h;               ///< probability vector, strictly positive
    double flux = 0.0;           ///< mean edge flux J of pi_h (0 on the line)
    double flux_spread = 0.0;    ///< max_j |J_{j+1/2} - J|
    double db_residual = 0.0;    ///< max_j |alpha_j pi_j - beta_{j+1} pi_{j+1}|
    double forward_residual = 0.0;  ///< ||L_h^* pi_h||_inf
};

/// Product recursion pi_{j+1} / pi_j = alpha_j / beta_{j+1}, accumulated in log
/// space outward from `anchor` and normalised with log-sum-exp.
StationaryResult stationary_line(const Rates& r, std::size_t anchor);

/// Solves Q^T pi = 0 with the last equation replaced by sum(pi) = 1. The
/// first N-1 equations restricted to pi_0..pi_{N-2} are tridiagonal; pi_{N-1}
/// enters only through the two wrap-around entries, so the system is solved
/// with one Thomas sweep and a scalar border elimination.
StationaryResult stationary_torus(const Rates& r);

/// Dispatch on the boundary; the line anchor is the grid node nearest 0.
StationaryResult stationary(const Rates& r, const Grid& g);

/// Rates of the time-reversed chain:
/// beta~_j = alpha_{j-1} pi_{j-1} / pi_j, alpha~_j = beta_{j+1} pi_{j+1} / pi_j.
Rates modified_rates(const Rates& r, const StationaryResult& s);

struct ComparisonReport {
    double max_pi;
    double min_pi;
    double ratio;
};

/// max/min of pi_h over nodes with |x| <= R (line) or over all nodes (torus).
ComparisonReport comparison_check(const StationaryResult& s, const Grid& g, double R_window);

}  // namespace fpjump
