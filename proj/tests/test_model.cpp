#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fpjump/error.hpp"
#include "fpjump/model.hpp"

using namespace fpjump;

namespace {

double trapezoid(const FieldVec& v, const Grid& g) {
    double s = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) {
        const bool end = !g.periodic() && (j == 0 || j + 1 == v.size());
        s += (end ? 0.5 : 1.0) * g.h() * v[j];
    }
    return s;
}

/// Random smooth pair (b, sigma) with sigma bounded away from zero.
Problem random_problem(std::mt19937_64& rng, bool torus) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double a1 = u(rng), a2 = u(rng), c1 = 0.5 * u(rng), k = 1.0 + std::floor(2.0 * (u(rng) + 1.0));
    char b[160], s[160];
    if (torus) {
        std::snprintf(b, sizeof b, "%.6f*sin(%g*x) + %.6f*cos(x)", a1, k, a2);
    } else {
        std::snprintf(b, sizeof b, "-x*(1 + %.6f*%.6f) + %.6f*sin(x)", a1, a1, a2);
    }
    std::snprintf(s, sizeof s, "1.2 + %.6f*cos(%g*x)", c1, k);
    const Domain d = torus ? Domain{Torus{2.0 * std::numbers::pi}} : Domain{TruncatedLine{-4.0, 4.0}};
    return Problem{Coefficient::from_text(b), Coefficient::from_text(s), d, std::nullopt};
}

}  // namespace

TEST_CASE("grids") {
    const Grid line = Grid::line(-6.0, 6.0, 121);
    CHECK(line.x(0) == -6.0);
    CHECK(line.x(120) == 6.0);
    CHECK(line.x(60) == 0.0);
    CHECK(line.anchor() == 60);
    for (std::size_t j = 0; j < line.size(); ++j) CHECK(line.x(120 - j) == -line.x(j));

    const Grid torus = Grid::torus(2.0 * std::numbers::pi, 64);
    CHECK(std::abs(64.0 * torus.h() - 2.0 * std::numbers::pi) <= std::nextafter(2.0 * std::numbers::pi, 10.0) - 2.0 * std::numbers::pi);
    CHECK(torus.periodic());
    CHECK(torus.refined(4).size() == 256);
    const Grid fine = line.refined(2);
    CHECK(fine.size() == 241);
    for (std::size_t j = 0; j < line.size(); ++j) CHECK(fine.x(2 * j) == doctest::Approx(line.x(j)).epsilon(1e-15));

    CHECK_THROWS_AS(Grid::line(1.0, -1.0, 10), ConfigError);
    CHECK_THROWS_AS(Grid::torus(-1.0, 10), ConfigError);
}

TEST_CASE("split_drift examples") {
    const Problem ou = make_preset("ou");
    const Grid g = Grid::line(-6.0, 6.0, 13);  // h = 1, node 8 is x = 2
    const SplitDrift sd = split_drift(ou, g);
    CHECK(g.x(8) == 2.0);
    CHECK(sd.s_plus[8] == 0.0);
    CHECK(sd.s_minus[8] == 2.0);

    const Problem diff = make_preset("diffusion");
    const SplitDrift sd0 = split_drift(diff, Grid::line(-1.0, 1.0, 11));
    for (std::size_t j = 0; j < sd0.s.size(); ++j) {
        CHECK(sd0.s_plus[j] == 0.0);
        CHECK(sd0.s_minus[j] == 0.0);
    }

    const Problem ts = make_preset("torus_sin");
    const SplitDrift sd1 = split_drift(ts, Grid::torus(2.0 * std::numbers::pi, 64));
    CHECK(sd1.s[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sd1.s_plus[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sd1.s_minus[0] == 0.0);
}

TEST_CASE("finite-difference derivative matches the closed form") {
    const Problem ts = make_preset("torus_sin");
    const Coefficient parsed = Coefficient::from_text("exp(sin(x)/2)");
    CHECK_FALSE(parsed.has_exact_derivative());
    for (double x : {0.0, 0.3, 1.7, 4.0}) {
        CHECK(parsed.derivative(x) == doctest::Approx(ts.sigma.derivative(x)).epsilon(1e-8));
    }
}

TEST_CASE("split_drift complementarity on presets and random coefficients") {
    std::mt19937_64 rng(3);
    auto check = [](const Problem& p, const Grid& g) {
        const SplitDrift sd = split_drift(p, g);
        for (std::size_t j = 0; j < g.size(); ++j) {
            CHECK(sd.s_plus[j] >= 0.0);
            CHECK(sd.s_minus[j] >= 0.0);
            CHECK(sd.s_plus[j] * sd.s_minus[j] == 0.0);
            CHECK(sd.s_plus[j] - sd.s_minus[j] == sd.s[j]);
        }
    };
    check(make_preset("ou"), Grid::line(-6.0, 6.0, 121));
    check(make_preset("diffusion"), Grid::line(-1.0, 1.0, 41));
    check(make_preset("torus_sin"), Grid::torus(2.0 * std::numbers::pi, 64));
    for (int i = 0; i < 100; ++i) {
        const bool torus = i % 2 == 1;
        const Problem p = random_problem(rng, torus);
        check(p, torus ? Grid::torus(2.0 * std::numbers::pi, 48) : Grid::line(-4.0, 4.0, 81));
    }
}

TEST_CASE("validate enforces sigma bounds and periodicity") {
    Problem p = make_preset("ou");
    CHECK_NOTHROW(validate(p, Grid::line(-6.0, 6.0, 21)));
    CHECK_THROWS_AS(validate(p, Grid::torus(1.0, 8)), ConfigError);
    p.sigma_bounds = SigmaBounds{2.0, 3.0};
    CHECK_THROWS_AS(validate(p, Grid::line(-6.0, 6.0, 21)), NumericalError);
    const Problem degenerate{Coefficient::from_text("0"), Coefficient::from_text("x"), TruncatedLine{-1.0, 1.0},
                             std::nullopt};
    CHECK_THROWS_AS(validate(degenerate, Grid::line(-1.0, 1.0, 11)), NumericalError);
    CHECK_THROWS_AS(make_preset("nope"), ConfigError);
}

TEST_CASE("reference densities") {
    SUBCASE("OU closed form") {
        const Grid g = Grid::line(-6.0, 6.0, 121);
        const FieldVec ref = reference_stationary(make_preset("ou"), g);
        CHECK(trapezoid(ref, g) == doctest::Approx(1.0).epsilon(1e-10));
        // Trapezoid normalisation vs the exact Gaussian: tail and rule error are both below 1e-14 here.
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double exact = std::exp(-g.x(j) * g.x(j)) / std::sqrt(std::numbers::pi);
            CHECK(ref[j] == doctest::Approx(exact).epsilon(1e-10).scale(0));
        }
    }
    SUBCASE("uniform on the torus") {
        const Problem p{Coefficient::from_text("0"), Coefficient::from_text("sqrt(2)"), Torus{3.0}, std::nullopt};
        const Grid g = Grid::torus(3.0, 30);
        const FieldVec ref = reference_stationary(p, g);
        for (double v : ref.values) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    }
    SUBCASE("torus_sin is exp(sin x) / integral") {
        const Grid g = Grid::torus(2.0 * std::numbers::pi, 64);
        const FieldVec ref = reference_stationary(make_preset("torus_sin"), g);
        // integral of exp(sin) over a period = 2 pi I_0(1)
        const double z = 2.0 * std::numbers::pi * std::cyl_bessel_i(0.0, 1.0);
        for (std::size_t j = 0; j < g.size(); ++j) {
            CHECK(std::abs(ref[j] - std::exp(std::sin(g.x(j))) / z) <= 1e-8);
        }
    }
}

TEST_CASE("reference density residual is second order on a fine auxiliary grid") {
    // Stationary residual -(b pi)' + (sigma^2 pi)''/2 by central differences
    // with the density itself obtained on a 10x finer grid.
    const Problem p = make_preset("torus_sin");
    auto residual = [&](std::size_t n) {
        const Grid g = Grid::torus(2.0 * std::numbers::pi, n).refined(10);
        const FieldVec pi = reference_stationary(p, g);
        const std::size_t m = g.size();
        const double h = g.h();
        double worst = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const std::size_t l = (j + m - 1) % m, r = (j + 1) % m;
            auto flux = [&](std::size_t k) { return p.drift(g.x(k)) * pi[k]; };
            auto diff = [&](std::size_t k) { return p.sigma(g.x(k)) * p.sigma(g.x(k)) * pi[k]; };
            const double res = -(flux(r) - flux(l)) / (2.0 * h) + 0.5 * (diff(r) - 2.0 * diff(j) + diff(l)) / (h * h);
            worst = std::max(worst, std::abs(res));
        }
        return worst;
    };
    const double e1 = residual(32), e2 = residual(64);
    CHECK(std::log2(e1 / e2) > 1.8);
}
