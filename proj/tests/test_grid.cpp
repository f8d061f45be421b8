#include <stdexcept>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "doctest.h"
#include "vbl/grid.hpp"

using namespace vbl;
using std::numbers::pi;

namespace {

ScalarField random_field(const Grid& g, unsigned seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = dist(rng);
    return f;
}

}  // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid(3, 8, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Grid(1, 8, -1.0), std::invalid_argument);
    Grid g(2, 8, 2.0);
    CHECK(g.h == doctest::Approx(0.25));
    CHECK(g.cells() == 64);
    CHECK(g.shift(g.index(7, 3), 0, 1) == g.index(0, 3));
    CHECK(g.shift(g.index(0, 0), 1, -1) == g.index(0, 7));
}

TEST_CASE("gradient of constant is zero") {
    Grid g(1, 16, 1.0);
    ScalarField c(g, 3.7);
    const VectorField grad = gradient(c);
    for (std::size_t i = 0; i < g.cells(); ++i) CHECK(grad.at(0, i) == 0.0);
}

TEST_CASE("gradient matches analytic derivative at second order") {
    // f = sin(2 pi x / L): derivative (2 pi / L) cos(2 pi x / L).
    const double L = 2.0;
    double prev_err = 0.0;
    for (int n : {32, 64, 128}) {
        Grid g(1, n, L);
        const ScalarField f =
            ScalarField::from_function(g, [&](double x) { return std::sin(2.0 * pi * x / L); });
        const VectorField grad = gradient(f);
        double err = 0.0;
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const double exact = 2.0 * pi / L * std::cos(2.0 * pi * g.coord(i, 0) / L);
            err = std::max(err, std::fabs(grad.at(0, i) - exact));
        }
        if (prev_err > 0.0) {
            const double order = std::log2(prev_err / err);
            CHECK(order >= 1.9);
        }
        prev_err = err;
    }
}

TEST_CASE("gradient is linear") {
    Grid g(2, 8, 1.0);
    const ScalarField f = random_field(g, 11);
    const ScalarField h = random_field(g, 12);
    const double a = 2.25;
    ScalarField combo(g);
    for (std::size_t i = 0; i < g.cells(); ++i) combo[i] = a * f[i] + h[i];
    const VectorField gc = gradient(combo), gf = gradient(f), gh = gradient(h);
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < g.cells(); ++i)
            CHECK(gc.at(c, i) == doctest::Approx(a * gf.at(c, i) + gh.at(c, i)).epsilon(1e-13));
}

TEST_CASE("divergence of constant field is zero, sin oracle converges") {
    Grid g(1, 64, 2.0);
    VectorField w(g, 1, 0.8);
    const ScalarField d = divergence(w);
    for (std::size_t i = 0; i < g.cells(); ++i) CHECK(d[i] == 0.0);

    double prev_err = 0.0;
    for (int n : {32, 64, 128}) {
        Grid gn(1, n, 2.0);
        VectorField wn(gn, 1);
        for (std::size_t i = 0; i < gn.cells(); ++i)
            wn.at(0, i) = std::sin(2.0 * pi * gn.coord(i, 0) / 2.0);
        const ScalarField dn = divergence(wn);
        double err = 0.0;
        for (std::size_t i = 0; i < gn.cells(); ++i) {
            const double exact = pi * std::cos(pi * gn.coord(i, 0));
            err = std::max(err, std::fabs(dn[i] - exact));
        }
        if (prev_err > 0.0) CHECK(std::log2(prev_err / err) >= 1.9);
        prev_err = err;
    }
}

TEST_CASE("summation by parts: divergence adjoint to -gradient") {
    for (int dim : {1, 2}) {
        Grid g(dim, 12, 1.5);
        const ScalarField f = random_field(g, 21);
        VectorField w(g, dim);
        for (int c = 0; c < dim; ++c) {
            const ScalarField r = random_field(g, 22 + static_cast<unsigned>(c));
            for (std::size_t i = 0; i < g.cells(); ++i) w.at(c, i) = r[i];
        }
        const double lhs = dot(f, divergence(w));
        const VectorField gf = gradient(f);
        double rhs = 0.0;
        for (int c = 0; c < dim; ++c)
            for (std::size_t i = 0; i < g.cells(); ++i) rhs += gf.at(c, i) * w.at(c, i);
        rhs *= g.cell_volume();
        const double scale = std::fabs(lhs) + std::fabs(rhs) + 1.0;
        CHECK(std::fabs(lhs + rhs) / scale <= 1e-12);
    }
}

TEST_CASE("weighted_l2 oracles") {
    Grid g(1, 8, 1.0);
    const ScalarField f = random_field(g, 31);
    SUBCASE("zero density annihilates") {
        ScalarField rho(g, 0.0);
        CHECK(weighted_l2(f, rho) == 0.0);
    }
    SUBCASE("unit f gives total mass") {
        ScalarField rho = random_field(g, 32, 0.0, 2.0);
        ScalarField one(g, 1.0);
        CHECK(weighted_l2(one, rho) == doctest::Approx(integral(rho)).epsilon(1e-14));
    }
    SUBCASE("matches brute-force sum") {
        ScalarField rho = random_field(g, 33, 0.0, 2.0);
        double brute = 0.0;
        for (std::size_t i = 0; i < g.cells(); ++i) brute += rho[i] * f[i] * f[i] * g.h;
        CHECK(weighted_l2(f, rho) == doctest::Approx(brute).epsilon(1e-14));
    }
    SUBCASE("negative density rejected") {
        ScalarField rho(g, -1.0);
        CHECK_THROWS_AS(weighted_l2(f, rho), std::invalid_argument);
    }
}

TEST_CASE("space-time norm basics") {
    Grid g(1, 8, 1.0);  // unit measure domain
    ScalarField one(g, 1.0);

    SUBCASE("constant field over unit time span gives 1") {
        std::vector<double> times;
        std::vector<ScalarField> f, rho;
        for (int i = 0; i <= 10; ++i) {
            times.push_back(i / 10.0);
            f.push_back(one);
            rho.push_back(one);
        }
        NormSpec spec{2.0, 2.0, 0.0};
        CHECK(space_time_norm(times, f, rho, spec, 0.0) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("zero density with positive weight annihilates") {
        std::vector<double> times{0.0, 0.5, 1.0};
        std::vector<ScalarField> f(3, one);
        std::vector<ScalarField> rho(3, ScalarField(g, 0.0));
        NormSpec spec{2.0, 2.0, 1.0};
        CHECK(space_time_norm(times, f, rho, spec, 0.0) == 0.0);
    }
    SUBCASE("rejects p < 1 or q < 1") {
        std::vector<double> times{0.0, 1.0};
        std::vector<ScalarField> f(2, one), rho(2, one);
        CHECK_THROWS_AS(space_time_norm(times, f, rho, NormSpec{0.5, 2.0, 0.0}, 0.0),
                        std::invalid_argument);
        CHECK_THROWS_AS(space_norm(one, one, NormSpec{2.0, 0.5, 0.0}), std::invalid_argument);
    }
    SUBCASE("matches brute-force nested sums on a random 8-cell trajectory") {
        std::vector<double> times{0.0, 0.3, 0.7, 1.2};
        std::vector<ScalarField> f, rho;
        for (unsigned s = 0; s < 4; ++s) {
            f.push_back(random_field(g, 41 + s));
            rho.push_back(random_field(g, 51 + s, 0.0, 2.0));
        }
        const double p = 3.0, q = 2.5, wgt = 0.7;
        double acc = 0.0;
        for (std::size_t s = 1; s < times.size(); ++s) {
            double sp = 0.0;
            for (std::size_t i = 0; i < g.cells(); ++i)
                sp += std::pow(std::fabs(std::pow(rho[s][i], wgt) * f[s][i]), q) * g.h;
            acc += (times[s] - times[s - 1]) * std::pow(std::pow(sp, 1.0 / q), p);
        }
        const double brute = std::pow(acc, 1.0 / p);
        NormSpec spec{p, q, wgt};
        CHECK(space_time_norm(times, f, rho, spec, -1.0) ==
              doctest::Approx(brute).epsilon(1e-14));
    }
    SUBCASE("infinity exponents take maxima") {
        std::vector<double> times{0.0, 0.5, 1.0};
        ScalarField big(g, 1.0);
        big[3] = 5.0;
        std::vector<ScalarField> f{one, big, one};
        std::vector<ScalarField> rho(3, one);
        NormSpec spec{kInf, kInf, 0.0};
        CHECK(space_time_norm(times, f, rho, spec, 0.0) == doctest::Approx(5.0));
    }
}

TEST_CASE("operations are pure: identical inputs give bit-identical outputs") {
    Grid g(2, 10, 1.0);
    const ScalarField f = random_field(g, 61);
    const VectorField g1 = gradient(f);
    const VectorField g2 = gradient(f);
    CHECK(std::memcmp(g1.values().data(), g2.values().data(),
                      g1.values().size() * sizeof(double)) == 0);
}
