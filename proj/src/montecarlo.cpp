#include "fpjump/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "fpjump/error.hpp"

namespace fpjump {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

Substream::Substream(std::uint64_t seed, std::uint64_t index)
    : state_(mix64(mix64(seed + kGolden) ^ (index * kGolden + 0x632BE59BD9B4E019ULL))) {}

Substream::result_type Substream::operator()() {
    state_ += kGolden;
    return mix64(state_);
}

double Substream::uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t sample_poisson(double mean, Substream& rng) {
    if (!(mean >= 0.0) || !std::isfinite(mean)) throw NumericalError("sample_poisson: mean must be finite and >= 0");
    if (mean == 0.0) return 0;
    if (mean < 30.0) {
        const double u = rng.uniform();
        double p = std::exp(-mean);
        double cdf = p;
        std::uint64_t k = 0;
        while (u > cdf) {
            ++k;
            p *= mean / static_cast<double>(k);
            if (p == 0.0) break;
            cdf += p;
        }
        return k;
    }
    // W. Hormann, "The transformed rejection method for generating Poisson
    // random variables", Insurance: Mathematics and Economics 12 (1993).
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + kf * loglam - std::lgamma(kf + 1.0)) {
            return static_cast<std::uint64_t>(kf);
        }
    }
}

Transition embedded_transition(const Rates& r, double lambda, std::size_t j) {
    const double lam_star = uniformization_rate(r);
    if (!(lambda >= lam_star) || !std::isfinite(lambda) || !(lambda > 0.0)) {
        throw NumericalError("lambda = " + std::to_string(lambda) + " is below max(alpha + beta) = " +
                             std::to_string(lam_star));
    }
    if (j >= r.size()) throw InternalError("embedded_transition: node out of range");
    const double left = r.beta[j] / lambda;
    const double right = r.alpha[j] / lambda;
    return {left, 1.0 - (r.alpha[j] + r.beta[j]) / lambda, right};
}

double mc_lambda(const Rates& r, const MCConfig& cfg) {
    const double lam = cfg.lambda ? *cfg.lambda : uniformization_rate(r) + cfg.lambda_pad;
    if (!(lam >= uniformization_rate(r)) || !(lam > 0.0)) {
        throw NumericalError("mc: lambda = " + std::to_string(lam) + " is below max(alpha + beta) = " +
                             std::to_string(uniformization_rate(r)));
    }
    return lam;
}

namespace {

struct Walker {
    std::vector<double> cdf0;        ///< cumulative p0
    std::vector<double> move_left;   ///< P(j, j-1)
    std::vector<double> move_any;    ///< P(j, j-1) + P(j, j+1)
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;

    std::size_t start(Substream& rng) const {
        const double u = rng.uniform() * cdf0.back();
        const auto it = std::upper_bound(cdf0.begin(), cdf0.end(), u);
        return std::min<std::size_t>(static_cast<std::size_t>(it - cdf0.begin()), cdf0.size() - 1);
    }

    std::size_t walk(std::size_t j, std::uint64_t steps, Substream& rng) const {
        for (std::uint64_t s = 0; s < steps; ++s) {
            const double u = rng.uniform();
            if (u < move_left[j]) {
                j = left[j];
            } else if (u < move_any[j]) {
                j = right[j];
            }
        }
        return j;
    }
};

Walker make_walker(const Rates& r, double lambda, const std::vector<double>& p0) {
    const std::size_t n = r.size();
    if (p0.size() != n) throw ConfigError("mc: initial distribution has the wrong length");
    Walker w;
    w.cdf0.resize(n);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!(p0[j] >= 0.0)) throw NumericalError("mc: initial distribution has a negative entry");
        acc += p0[j];
        w.cdf0[j] = acc;
    }
    if (std::abs(acc - 1.0) > 1e-12) throw NumericalError("mc: initial distribution does not sum to 1");
    w.move_left.resize(n);
    w.move_any.resize(n);
    w.left.resize(n);
    w.right.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Transition t = embedded_transition(r, lambda, j);
        w.move_left[j] = t.left;
        w.move_any[j] = t.left + t.right;
        w.left[j] = r.left(j);
        w.right[j] = r.right(j);
    }
    return w;
}

MCResult finish(const Rates& r, const MCConfig& cfg, double lambda, double T, std::vector<std::uint64_t> counts) {
    MCResult res;
    res.M = cfg.M;
    res.lambda = lambda;
    res.T = T;
    res.seed = cfg.seed;
    const std::size_t n = counts.size();
    res.p_tilde.resize(n);
    res.rho_tilde.resize(n);
    res.stderr_band.resize(n);
    const double m = static_cast<double>(cfg.M);
    for (std::size_t j = 0; j < n; ++j) {
        const double p = static_cast<double>(counts[j]) / m;
        res.p_tilde[j] = p;
        res.rho_tilde[j] = cfg.initial_mass * p / r.h;
        res.stderr_band[j] = std::sqrt(p * (1.0 - p) / m);
    }
    res.counts = std::move(counts);
    return res;
}

}  // namespace

std::vector<MCResult> run_mc_times(const Rates& r, const MCConfig& cfg, const std::vector<double>& times) {
    if (cfg.M == 0) throw ConfigError("mc.M must be positive");
    if (times.empty()) throw ConfigError("mc: no output times");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0) || !std::isfinite(times[k]) || (k > 0 && !(times[k] > times[k - 1]))) {
            throw ConfigError("mc: output times must be finite, non-negative and increasing");
        }
    }
    const double lambda = mc_lambda(r, cfg);
    const Walker walker = make_walker(r, lambda, cfg.p0);
    const std::size_t n = r.size();
    const std::size_t nt = times.size();

    unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, cfg.M));

    std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(nt * n, 0));
    auto work = [&](unsigned w) {
        const std::uint64_t begin = cfg.M * w / workers;
        const std::uint64_t end = cfg.M * (w + 1) / workers;
        auto& hist = partial[w];
        for (std::uint64_t m = begin; m < end; ++m) {
            Substream rng(cfg.seed, m);
            std::size_t j = walker.start(rng);
            double t = 0.0;
            for (std::size_t k = 0; k < nt; ++k) {
                const std::uint64_t jumps = sample_poisson(lambda * (times[k] - t), rng);
                j = walker.walk(j, jumps, rng);
                t = times[k];
                ++hist[k * n + j];
            }
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    std::vector<MCResult> out;
    out.reserve(nt);
    for (std::size_t k = 0; k < nt; ++k) {
        std::vector<std::uint64_t> counts(n, 0);
        for (const auto& hist : partial) {
            for (std::size_t j = 0; j < n; ++j) counts[j] += hist[k * n + j];
        }
        out.push_back(finish(r, cfg, lambda, times[k], std::move(counts)));
    }
    return out;
}

MCResult run_mc(const Rates& r, const MCConfig& cfg) {
    if (!(cfg.T >= 0.0)) throw ConfigError("mc.T must be non-negative");
    return run_mc_times(r, cfg, {cfg.T}).front();
}

}  // namespace fpjump
