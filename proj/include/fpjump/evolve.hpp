#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fpjump/field.hpp"
#include "fpjump/scheme.hpp"

namespace fpjump {

enum class Method { Euler, UniformSeries };

struct EvolveConfig {
    double T = 1.0;
    double safety = 0.9;              ///< Euler step dt = safety / lambda*
    Method method = Method::Euler;
    double tol = 1e-12;               ///< Poisson tail mass left out of the series
    std::vector<double> snapshots;    ///< extra output times in (0, T]
    std::optional<double> dt;         ///< manual Euler step, CFL-checked
    std::size_t max_series_terms = 20'000'000;
};

struct Snapshot {
    double t;
    FieldVec value;
};

/// Snapshots in increasing time, starting with t = 0 and ending with t = T.
using Trajectory = std::vector<Snapshot>;

/// p' = (I + dt Q)^T p, written as stay_j p_j + dt alpha_{j-1} p_{j-1} + dt beta_{j+1} p_{j+1}
/// with stay_j = 1 - dt (alpha_j + beta_j) >= 0, so every term is non-negative.
/// Throws NumericalError if dt lambda* > 1.
FieldVec step_forward_euler(const Rates& r, const FieldVec& p, double dt);

/// u' = (I + dt Q) u in difference form, so constants are reproduced exactly.
FieldVec step_backward_euler(const Rates& r, const FieldVec& u, double dt);

/// The time grid used by both evolvers: 0, the sorted snapshots and T.
std::vector<double> snapshot_times(const EvolveConfig& cfg);

/// Euler step actually used: cfg.dt if given (CFL-checked), else safety / lambda*.
double euler_step(const Rates& r, const EvolveConfig& cfg);

/// Number of Poisson terms kept for mean mu at tail tolerance tol.
std::size_t series_terms(double mu, double tol);

Trajectory evolve_forward(const Rates& r, const FieldVec& p0, const EvolveConfig& cfg);

/// Backward semigroup e^{tL_h} u0. The maximum principle
/// min u0 <= u(t) <= max u0 is checked on every snapshot.
Trajectory evolve_backward(const Rates& r, const FieldVec& u0, const EvolveConfig& cfg);

/// Row i of e^{TQ}: the law at time T of the chain started at node i.
FieldVec green_function(const Rates& r, std::size_t i, double T, const EvolveConfig& cfg);

}  // namespace fpjump
