#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fpjump/diagnostics.hpp"
#include "fpjump/error.hpp"
#include "fpjump/evolve.hpp"
#include "fpjump/montecarlo.hpp"
#include "fpjump/scheme.hpp"
#include "fpjump/stationary.hpp"

using namespace fpjump;

namespace {

/// 8-node torus with uneven rates, total rate 5 at its busiest node.
Rates small_torus() {
    return make_rates({1.0, 2.0, 0.5, 1.5, 3.0, 1.0, 2.5, 0.7}, {2.0, 0.5, 1.5, 1.0, 2.0, 1.0, 1.2, 2.3},
                      Boundary::Periodic, 0.25);
}

std::vector<double> uniform(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

std::vector<double> series_law(const Rates& r, const std::vector<double>& p0, double T) {
    EvolveConfig cfg;
    cfg.method = Method::UniformSeries;
    cfg.T = T;
    return evolve_forward(r, FieldVec{FieldKind::Probability, p0}, cfg).back().value.values;
}

}  // namespace

TEST_CASE("embedded transition rows") {
    SUBCASE("torus_sin at lambda = 291.7") {
        const Grid g = Grid::torus(2.0 * std::numbers::pi, 64);
        const Rates r = build_rates(make_preset("torus_sin"), g);
        for (std::size_t j = 0; j < 64; ++j) {
            const Transition t = embedded_transition(r, 291.7, j);
            CHECK(std::abs(t.left + t.stay + t.right - 1.0) <= 1e-15);
            CHECK(t.stay >= 0.0);
        }
        std::size_t arg = 0;
        for (std::size_t j = 0; j < 64; ++j) {
            if (r.alpha[j] + r.beta[j] > r.alpha[arg] + r.beta[arg]) arg = j;
        }
        CHECK(embedded_transition(r, uniformization_rate(r), arg).stay == 0.0);
        CHECK_THROWS_AS(embedded_transition(r, 200.0, 0), NumericalError);
    }
    SUBCASE("two states by hand") {
        const Rates r = make_rates({2.0, 0.0}, {0.0, 3.0}, Boundary::Reflecting);
        const Transition t0 = embedded_transition(r, 5.0, 0);
        const Transition t1 = embedded_transition(r, 5.0, 1);
        CHECK(t0.left == 0.0);
        CHECK(t0.stay == doctest::Approx(0.6).epsilon(1e-15));
        CHECK(t0.right == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(t1.left == doctest::Approx(0.6).epsilon(1e-15));
        CHECK(t1.stay == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(t1.right == 0.0);
    }
}

TEST_CASE("Poisson sampler") {
    Substream zero(1, 0);
    for (int i = 0; i < 100; ++i) CHECK(sample_poisson(0.0, zero) == 0);

    const int draws = 1'000'000;
    for (double mean : {291.7, 100.0, 5.0}) {
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            Substream rng(99, static_cast<std::uint64_t>(i));
            const double k = static_cast<double>(sample_poisson(mean, rng));
            s += k;
            s2 += k * k;
        }
        const double m = s / draws;
        const double var = s2 / draws - m * m;
        CAPTURE(mean);
        CHECK(std::abs(m - mean) <= 4.0 * std::sqrt(mean / draws));
        CHECK(var == doctest::Approx(mean).epsilon(0.02));
    }
}

TEST_CASE("Poisson frequencies match the pmf on both sides of the method switch") {
    const int draws = 400'000;
    for (double mean : {3.5, 29.0, 31.0, 80.0}) {
        std::vector<double> freq(400, 0.0);
        Substream rng(7, static_cast<std::uint64_t>(mean * 10));
        for (int i = 0; i < draws; ++i) {
            const auto k = sample_poisson(mean, rng);
            if (k < freq.size()) freq[k] += 1.0;
        }
        for (std::size_t k = 0; k < freq.size(); ++k) {
            const double p = std::exp(-mean + static_cast<double>(k) * std::log(mean) - std::lgamma(static_cast<double>(k) + 1.0));
            if (p < 1e-4) continue;
            const double se = std::sqrt(p * (1.0 - p) / draws);
            CAPTURE(mean);
            CAPTURE(k);
            CHECK(std::abs(freq[k] / draws - p) <= 5.0 * se);
        }
    }
}

TEST_CASE("run_mc bookkeeping and determinism") {
    const Rates r = small_torus();
    MCConfig cfg;
    cfg.T = 1.0;
    cfg.M = 20'000;
    cfg.seed = 12345;
    cfg.p0 = uniform(8);
    cfg.initial_mass = 2.0;
    cfg.threads = 1;
    const MCResult a = run_mc(r, cfg);
    std::uint64_t total = 0;
    for (auto c : a.counts) total += c;
    CHECK(total == cfg.M);
    double mass = 0.0;
    for (double v : a.rho_tilde) {
        CHECK(v >= 0.0);
        mass += r.h * v;
    }
    CHECK(mass == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(a.lambda == doctest::Approx(uniformization_rate(r) + 10.0));
    for (std::size_t j = 0; j < 8; ++j) {
        CHECK(a.stderr_band[j] == doctest::Approx(std::sqrt(a.p_tilde[j] * (1 - a.p_tilde[j]) / 20'000.0)));
    }

    cfg.threads = 3;
    CHECK(run_mc(r, cfg).counts == a.counts);
    cfg.threads = 7;
    CHECK(run_mc(r, cfg).counts == a.counts);
    cfg.seed = 12346;
    CHECK(run_mc(r, cfg).counts != a.counts);

    cfg.p0 = {1.0, 0.0};
    CHECK_THROWS_AS(run_mc(r, cfg), ConfigError);
    cfg.p0 = uniform(8);
    cfg.lambda = 1.0;
    CHECK_THROWS_AS(run_mc(r, cfg), NumericalError);
}

TEST_CASE("T = 0 returns the initial law") {
    const Rates r = small_torus();
    MCConfig cfg;
    cfg.T = 0.0;
    cfg.M = 100'000;
    cfg.p0 = {0.5, 0.0, 0.1, 0.1, 0.0, 0.2, 0.05, 0.05};
    const MCResult res = run_mc(r, cfg);
    CHECK(res.counts[1] == 0);
    CHECK(res.counts[4] == 0);
    CHECK(tv_distance_half(res.p_tilde, cfg.p0) <= 4.0 * std::sqrt(8.0 / 100'000.0));
}

TEST_CASE("the sampled law is the uniformization law") {
    const Rates r = small_torus();
    MCConfig cfg;
    cfg.M = 300'000;
    cfg.seed = 2024;
    cfg.p0 = {1.0, 0, 0, 0, 0, 0, 0, 0};
    cfg.lambda = 5.0;
    cfg.T = 1.0;
    const std::vector<double> exact = series_law(r, cfg.p0, 1.0);
    const MCResult a = run_mc(r, cfg);
    for (std::size_t j = 0; j < 8; ++j) {
        const double se = std::sqrt(exact[j] * (1.0 - exact[j]) / static_cast<double>(cfg.M));
        CHECK(std::abs(a.p_tilde[j] - exact[j]) <= 4.0 * se);
    }

    SUBCASE("lambda does not change the law") {
        cfg.lambda = 2.0 * uniformization_rate(r);
        cfg.seed = 77;
        const MCResult b = run_mc(r, cfg);
        for (std::size_t j = 0; j < 8; ++j) {
            const double se = std::sqrt(2.0 * exact[j] * (1.0 - exact[j]) / static_cast<double>(cfg.M));
            CHECK(std::abs(a.p_tilde[j] - b.p_tilde[j]) <= 4.0 * se);
        }
    }
    SUBCASE("several output times from one path per sample") {
        const std::vector<double> times{0.3, 1.0, 2.5};
        const auto many = run_mc_times(r, cfg, times);
        REQUIRE(many.size() == 3);
        for (std::size_t k = 0; k < 3; ++k) {
            const std::vector<double> law = series_law(r, cfg.p0, times[k]);
            CHECK(many[k].T == times[k]);
            for (std::size_t j = 0; j < 8; ++j) {
                const double se = std::sqrt(law[j] * (1.0 - law[j]) / static_cast<double>(cfg.M));
                CHECK(std::abs(many[k].p_tilde[j] - law[j]) <= 4.0 * se);
            }
        }
        CHECK_THROWS_AS(run_mc_times(r, cfg, {1.0, 0.5}), ConfigError);
    }
}
