#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fpjump/field.hpp"
#include "fpjump/scheme.hpp"

namespace fpjump {

struct MCConfig {
    double T = 1.0;
    std::uint64_t M = 1'000'000;
    double lambda_pad = 10.0;            ///< lambda = lambda* + lambda_pad
    std::optional<double> lambda;        ///< explicit lambda, overrides the pad
    std::uint64_t seed = 0;
    std::vector<double> p0;              ///< initial probability vector
    double initial_mass = 1.0;           ///< ||rho_0^h||_l1, scales rho_tilde
    unsigned threads = 0;                ///< 0: hardware concurrency
};

struct MCResult {
    std::vector<std::uint64_t> counts;
    std::vector<double> p_tilde;
    std::vector<double> rho_tilde;       ///< p_tilde * initial_mass / h
    std::vector<double> stderr_band;     ///< sqrt(p(1 - p) / M)
    std::uint64_t M = 0;
    double lambda = 0.0;
    double T = 0.0;
    std::uint64_t seed = 0;
};

struct Transition {
    double left;
    double stay;
    double right;
};

/// Row j of P = I + Q / lambda. Throws NumericalError if lambda < lambda*.
Transition embedded_transition(const Rates& r, double lambda, std::size_t j);

/// Counter-based SplitMix64 stream; sample m of a run uses Substream(seed, m),
/// so results do not depend on scheduling.
class Substream {
public:
    using result_type = std::uint64_t;

    Substream(std::uint64_t seed, std::uint64_t index);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }
    result_type operator()();

    /// Uniform on (0, 1), never 0 or 1.
    double uniform();

private:
    std::uint64_t state_;
};

/// Exact Poisson(mean) draw: inversion below 30, Hormann's PTRS above.
std::uint64_t sample_poisson(double mean, Substream& rng);

/// lambda actually used for a config.
double mc_lambda(const Rates& r, const MCConfig& cfg);

MCResult run_mc(const Rates& r, const MCConfig& cfg);

/// One run recording every sample at each of the (increasing) times. Each
/// sample walks a single path; the jump count between consecutive times is an
/// independent Poisson draw, so every marginal has the exact law.
std::vector<MCResult> run_mc_times(const Rates& r, const MCConfig& cfg, const std::vector<double>& times);

}  // namespace fpjump
