#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "fpjump/error.hpp"
#include "fpjump/gap.hpp"
#include "fpjump/scheme.hpp"
#include "fpjump/stationary.hpp"

using namespace fpjump;

namespace {

/// Eq. (5.6) term by term: every j, both inner sums recomputed from scratch.
double brute_B(const HardyInput& hi) {
    const long n = static_cast<long>(hi.theta.size());
    const long o = static_cast<long>(hi.origin);
    double best = 0.0;
    for (long j = o; j < n; ++j) {
        double g = 0.0, t = 0.0;
        for (long k = o; k <= j; ++k) g += 1.0 / hi.mu[static_cast<std::size_t>(k)];
        for (long k = j + 1; k < n; ++k) t += hi.theta[static_cast<std::size_t>(k)];
        best = std::max(best, g * t);
    }
    for (long j = o - 1; j >= 0; --j) {
        double g = 0.0, t = 0.0;
        for (long k = j; k <= o - 1; ++k) g += 1.0 / hi.mu[static_cast<std::size_t>(k)];
        for (long k = 0; k < j; ++k) t += hi.theta[static_cast<std::size_t>(k)];
        best = std::max(best, g * t);
    }
    return best;
}

HardyInput random_hardy(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    HardyInput hi;
    hi.origin = n / 2 + static_cast<std::size_t>(u(rng) * 5.0);
    for (std::size_t i = 0; i < n; ++i) {
        hi.theta.push_back(u(rng) < 0.2 ? 0.0 : std::exp(4.0 * u(rng) - 2.0));
        hi.mu.push_back(std::exp(4.0 * u(rng) - 2.0));
    }
    return hi;
}

Eigen::MatrixXd dense(const SymTridiag& m) {
    const auto n = static_cast<Eigen::Index>(m.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) a(j, j) = m.diag[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j + 1 < n; ++j) a(j, j + 1) = a(j + 1, j) = m.off[static_cast<std::size_t>(j)];
    if (m.periodic) {
        a(0, n - 1) += m.corner;
        a(n - 1, 0) += m.corner;
    }
    return a;
}

Problem random_line_problem(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    char b[128], s[128];
    std::snprintf(b, sizeof b, "-%.4f*x + %.4f*sin(x)", 1.0 + 0.5 * u(rng), 0.5 * u(rng));
    std::snprintf(s, sizeof s, "1 + %.4f*cos(x)", 0.3 * u(rng));
    return Problem{Coefficient::from_text(b), Coefficient::from_text(s), TruncatedLine{-5.0, 5.0}, std::nullopt};
}

}  // namespace

TEST_CASE("hardy_B small cases") {
    HardyInput hi{{0.0, 1.0, 0.0}, {1.0, 1.0, 1.0}, 0};
    CHECK(hardy_B(hi) == 1.0);
    CHECK(witness_scan(hi) == 2.0);
    HardyInput one_sided{{0.0, 0.0, 0.0, 2.0, 1.0}, {1.0, 2.0, 1.0, 1.0, 1.0}, 2};
    // Left branch sees theta_0 = theta_1 = 0 only.
    CHECK(hardy_B(one_sided) == doctest::Approx(std::max({1.0 * 3.0, 2.0 * 1.0})).epsilon(1e-15));
    HardyInput zero{{0.0, 0.0}, {1.0, 1.0}, 1};
    CHECK(hardy_B(zero) == 0.0);
    HardyInput bad{{1.0, -1.0}, {1.0, 1.0}, 0};
    CHECK_THROWS_AS(hardy_B(bad), InternalError);
}

TEST_CASE("hardy_B equals the quadratic-time evaluation") {
    std::mt19937_64 rng(51);
    for (int rep = 0; rep < 50; ++rep) {
        const HardyInput hi = random_hardy(rng, 50);
        CHECK(hardy_B(hi) == doctest::Approx(brute_B(hi)).epsilon(1e-12));
    }
}

TEST_CASE("witness and Rayleigh quotients sit inside [B, 4B]") {
    std::mt19937_64 rng(53);
    std::normal_distribution<double> nrm;
    for (int rep = 0; rep < 20; ++rep) {
        const HardyInput hi = random_hardy(rng, 40);
        const double B = hardy_B(hi);
        const double w = witness_scan(hi);
        CHECK(w >= B * (1.0 - 1e-12));
        CHECK(w <= 4.0 * B);
        for (int k = 0; k < 100; ++k) {
            std::vector<double> f(hi.theta.size());
            for (double& v : f) v = nrm(rng);
            CHECK(hardy_functional(hi, f) <= 4.0 * B * (1.0 + 1e-12));
        }
    }
    // One far mass: the witness at the mass index reproduces the B product up to
    // the single extra 1/mu term.
    HardyInput far{std::vector<double>(10, 0.0), std::vector<double>(10, 1.0), 0};
    far.theta[7] = 3.0;
    CHECK(hardy_B(far) == 3.0 * 7.0);
    CHECK(witness_scan(far) == 3.0 * 8.0);
}

TEST_CASE("line Poincare bound") {
    SUBCASE("OU") {
        double base = 0.0;
        for (double h : {0.2, 0.1, 0.05}) {
            const auto n = static_cast<std::size_t>(std::lround(12.0 / h)) + 1;
            const Grid g = Grid::line(-6.0, 6.0, n);
            const Rates r = build_rates(make_preset("ou"), g);
            const StationaryResult s = stationary(r, g);
            const LineBound lb = poincare_bound_line(r, s, g.anchor());
            CHECK_FALSE(lb.flagged);
            CHECK(lb.witness_max == doctest::Approx(lb.B).epsilon(1e-12));
            CHECK(lb.witness_max >= lb.B_hardy);
            CHECK(lb.witness_max <= 4.0 * lb.B_hardy);
            CHECK(lb.kappa_lower == doctest::Approx(1.0 / (8.0 * lb.B)).epsilon(1e-15));
            CHECK(lb.kappa_lower <= exact_gap(r, s));
            if (base == 0.0) base = lb.kappa_lower;
            CHECK(lb.kappa_lower >= 0.5 * base);
        }
    }
    SUBCASE("random confining coefficients") {
        std::mt19937_64 rng(57);
        for (int rep = 0; rep < 50; ++rep) {
            const Grid g = Grid::line(-5.0, 5.0, 81);
            const Rates r = build_rates(random_line_problem(rng), g);
            const StationaryResult s = stationary(r, g);
            const LineBound lb = poincare_bound_line(r, s, g.anchor());
            CHECK_FALSE(lb.flagged);
            CHECK(lb.kappa_lower <= exact_gap(r, s));
        }
    }
    SUBCASE("reflecting random walk: bound and gap shrink like W^-2") {
        std::vector<double> scaled_bound;
        for (double w : {2.0, 4.0, 8.0}) {
            const Grid g = Grid::line(-w, w, static_cast<std::size_t>(20 * w) + 1);
            const Rates r = build_rates(make_preset("diffusion"), g);
            const StationaryResult s = stationary(r, g);
            const double gap = exact_gap(r, s);
            // Reflecting walk with rate 1/h^2 each way on N nodes: (2/h^2)(1 - cos(pi/N)).
            const double nn = static_cast<double>(g.size());
            CHECK(gap == doctest::Approx(2.0 / (g.h() * g.h()) * (1.0 - std::cos(std::numbers::pi / nn))).epsilon(1e-9));
            const double kl = poincare_bound_line(r, s, g.anchor()).kappa_lower;
            CHECK(kl <= gap);
            scaled_bound.push_back(kl * w * w);
        }
        for (double v : scaled_bound) CHECK(v == doctest::Approx(scaled_bound[0]).epsilon(0.1));
    }
}

TEST_CASE("Sturm counts agree with a dense eigensolver") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (bool periodic : {false, true}) {
        for (std::size_t n : {2, 3, 4, 7, 20}) {
            if (periodic && n < 3) continue;
            SymTridiag m;
            m.periodic = periodic;
            for (std::size_t j = 0; j < n; ++j) m.diag.push_back(u(rng));
            for (std::size_t j = 0; j + 1 < n; ++j) m.off.push_back(u(rng));
            if (periodic) m.corner = u(rng);
            const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(dense(m)).eigenvalues();
            for (std::size_t k = 0; k < n; ++k) {
                CHECK(eigenvalue(m, k) == doctest::Approx(ev(static_cast<Eigen::Index>(k))).epsilon(1e-10).scale(1.0));
            }
            for (int probe = 0; probe < 20; ++probe) {
                const double x = 3.0 * u(rng);
                std::size_t below = 0;
                for (Eigen::Index k = 0; k < ev.size(); ++k) below += ev(k) < x ? 1 : 0;
                CHECK(count_eigenvalues_below(m, x) == below);
            }
        }
    }
}

TEST_CASE("exact gap small cases") {
    const double a = 1.7, b = 0.4;
    const Rates two = make_rates({a, 0.0}, {0.0, b}, Boundary::Reflecting);
    CHECK(exact_gap(two, stationary_line(two, 0)) == doctest::Approx(a + b).epsilon(1e-12));

    const Rates tri = make_rates({1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, Boundary::Periodic);
    const StationaryResult st = stationary_torus(tri);
    CHECK(exact_gap(tri, st) == doctest::Approx(3.0).epsilon(1e-12));
    // kappa_1 by hand: pi = 1/3, edges 2/3, suffix sums 2 (k = 1) and 4/3 (k = 2).
    CHECK(poincare_bound_torus(tri, st) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    // Reversible torus: the symmetrised Dirichlet form is the generator itself.
    std::vector<double> al(12), be(12);
    for (std::size_t j = 0; j < 12; ++j) al[j] = be[j] = 1.0 + 0.1 * static_cast<double>(j % 3);
    const Rates sym = make_rates(al, be, Boundary::Periodic);
    const StationaryResult ss = stationary_torus(sym);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(12, 12);
    const Generator gq(sym);
    for (int i = 0; i < 12; ++i) {
        for (int j = 0; j < 12; ++j) q(i, j) = gq.entry(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
    Eigen::VectorXcd ev = q.eigenvalues();
    std::vector<double> re;
    for (Eigen::Index k = 0; k < ev.size(); ++k) re.push_back(-ev(k).real());
    std::sort(re.begin(), re.end());
    CHECK(exact_gap(sym, ss) == doctest::Approx(re[1]).epsilon(1e-9));
}

TEST_CASE("torus Poincare bound") {
    SUBCASE("uniform chain: kappa_1 = 2c / (N (N - 1))") {
        const double c = 2.5;
        for (std::size_t n : {16, 32, 64}) {
            const Rates r = make_rates(std::vector<double>(n, c), std::vector<double>(n, c), Boundary::Periodic);
            const StationaryResult s = stationary_torus(r);
            const double k1 = poincare_bound_torus(r, s);
            const double nn = static_cast<double>(n);
            CHECK(k1 == doctest::Approx(2.0 * c / (nn * (nn - 1.0))).epsilon(1e-12));
            CHECK(k1 * nn * nn / c >= 2.0);
            CHECK(k1 * nn * nn / c <= 2.2);
            CHECK(k1 <= exact_gap(r, s));
        }
    }
    SUBCASE("torus_sin") {
        const Grid g = Grid::torus(2.0 * std::numbers::pi, 64);
        const Rates r = build_rates(make_preset("torus_sin"), g);
        const StationaryResult s = stationary(r, g);
        const GapReport rep = gap_report(r, s, g);
        REQUIRE(rep.torus_kappa.has_value());
        CHECK_FALSE(rep.B.has_value());
        CHECK(*rep.torus_kappa > 0.0);
        CHECK(*rep.torus_kappa <= rep.exact_gap);
        CHECK(rep.N == 64);
    }
}

TEST_CASE("OU exact gap approaches 1") {
    const Grid g = Grid::line(-6.0, 6.0, 241);
    const Rates r = build_rates(make_preset("ou"), g);
    const GapReport rep = gap_report(r, stationary(r, g), g);
    CHECK(rep.exact_gap == doctest::Approx(1.0).epsilon(0.05));
    REQUIRE(rep.B.has_value());
    CHECK(rep.kappa_lower == doctest::Approx(1.0 / (8.0 * *rep.B)));
}
