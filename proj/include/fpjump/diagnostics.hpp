#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fpjump/field.hpp"
#include "fpjump/model.hpp"
#include "fpjump/scheme.hpp"

namespace fpjump {

/// h-weighted grid norms: ||v||_1 = h sum |v_j|, ||v||_2 = (h sum v_j^2)^{1/2}.
double l1_norm(std::span<const double> v, double h);
double l2_norm(std::span<const double> v, double h);
double linf_norm(std::span<const double> v);

/// (sum_j w_j |v_j|^p)^{1/p}, no h factor; p = infinity gives max |v_j| over w_j > 0.
double weighted_lp(std::span<const double> v, std::span<const double> w, double p);

/// sum_j |p_j - q_j| (the convention used in the decay theorems).
double tv_distance_sum(std::span<const double> p, std::span<const double> q);
/// (1/2) sum_j |p_j - q_j| (probabilists' total variation).
double tv_distance_half(std::span<const double> p, std::span<const double> q);

/// sum_j |v_{j+1} - v_j|, including the wrap-around edge when periodic.
double tv_seminorm(std::span<const double> v, bool periodic);

/// q = p / pi.
FieldVec ratio(std::span<const double> p, std::span<const double> pi);

/// F_h = (1/2) sum pi_j (q_j - sum_k pi_k q_k)^2 with q = p / pi.
double chi2_F(std::span<const double> p, std::span<const double> pi);

/// D_h = sum_j alpha_j pi_j (q_j - q_{j+1})^2 on the line; on the torus the
/// symmetrised weights (beta_{j+1} pi_{j+1} + alpha_j pi_j) / 2 over all N edges.
double dissipation_D(const Rates& r, std::span<const double> pi, std::span<const double> p);

/// sum_j p_j log(p_j / pi_j), with 0 log 0 = 0.
double relative_entropy(std::span<const double> p, std::span<const double> pi);

/// Pointwise samples f(x_j) as a density vector.
FieldVec restrict_to_grid(const std::function<double(double)>& f, const Grid& g);

/// Least-squares slope of log e against log h.
double fit_order(const std::vector<std::pair<double, double>>& h_err);

/// -slope of log F against t over samples with 1e-12 F(0) <= F <= 0.5 F(0);
/// zero when fewer than two samples qualify.
double fit_decay(const std::vector<std::pair<double, double>>& t_F);

struct Metrics {
    double t = 0.0;
    double mass = 0.0;              ///< sum_j p_j
    double positivity_min = 0.0;    ///< min_j p_j
    double tv_seminorm = 0.0;       ///< of the density p / h
    double l1_error = 0.0;          ///< h sum |p_j / h - rho_ref_j|, when a reference is given
    double l2_pi_error = 0.0;       ///< ||q - 1||_{l2(pi)}
    double F_h = 0.0;
    double D_h = 0.0;
    double relative_entropy = 0.0;
    double tv_to_pi = 0.0;          ///< sum_j |p_j - pi_j|
};

Metrics compute_metrics(const Rates& r, std::span<const double> pi, double t, std::span<const double> p,
                        std::optional<std::span<const double>> reference_density = std::nullopt);

}  // namespace fpjump
