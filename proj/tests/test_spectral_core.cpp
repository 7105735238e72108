#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "plab/spectral_core.hpp"

using namespace plab;

TEST_CASE("grid geometry") {
    TorusGrid g = make_grid(2, 16, 4.0);
    CHECK(g.size() == 256);
    CHECK(g.measure() == doctest::Approx(std::pow(2 * kPi * 4, 2)));
    CHECK(g.lowest_frequency() == doctest::Approx(0.25));
    CHECK(g.axis_mode(7) == 7);
    CHECK(g.axis_mode(8) == -8);
    Idx3 k{-3, 5, 0};
    std::int64_t f = g.flat_of_mode(k);
    REQUIRE(f >= 0);
    CHECK(g.mode(static_cast<std::size_t>(f)) == k);
    CHECK(g.xi(static_cast<std::size_t>(f))[0] == doctest::Approx(-0.75));
}

TEST_CASE("transform round trip and mean") {
    TorusGrid g = make_grid(2, 16, 2.0);
    SpectralField f = SpectralField::from_function(g, 1, [](const Vec3& x, double* o) { o[0] = 1.5 + std::sin(x[0] / 2.0); });
    CHECK(f.mean().real() == doctest::Approx(1.5));
    auto s = f.real_samples();
    SpectralField back = SpectralField::from_real_samples(g, {s});
    CHECK((back - f).l2() < 1e-12 * f.l2());
}

TEST_CASE("derivative of a single mode") {
    TorusGrid g = make_grid(1, 32, 1.0);
    SpectralField f = SpectralField::from_function(g, 1, [](const Vec3& x, double* o) { o[0] = std::sin(3 * x[0]); });
    SpectralField d = derivative(f, 0);
    SpectralField ex = SpectralField::from_function(g, 1, [](const Vec3& x, double* o) { o[0] = 3 * std::cos(3 * x[0]); });
    CHECK((d - ex).l2() < 1e-12 * ex.l2());
    SpectralField lap = laplacian(f);
    lap.axpy(9.0, f);
    CHECK(lap.l2() < 1e-12 * f.l2());
}

TEST_CASE("Helmholtz projectors") {
    TorusGrid g = make_grid(2, 16, 1.0);
    SpectralField u = random_field(g, 2, 4);
    auto [P, Q] = helmholtz_project(u);
    CHECK((P + Q - u).l2() < 1e-13);
    CHECK(divergence(P).l2() < 1e-12);
    // curl of Q vanishes
    SpectralField curl = derivative(Q.component(1), 0) - derivative(Q.component(0), 1);
    CHECK(curl.l2() < 1e-12);
}

TEST_CASE("random fields are real, mean free and unit size") {
    TorusGrid g = make_grid(2, 16, 1.0);
    SpectralField u = random_field(g, 2, 11);
    CHECK(u.l2() == doctest::Approx(1.0));
    CHECK(std::abs(u.mean(0)) < 1e-14);
    CHECK(imaginary_residue(u) < 1e-13);
    CHECK((random_field(g, 2, 11) - u).l2() == 0.0);
}

TEST_CASE("dealiased product is exact for band-limited inputs") {
    TorusGrid g = make_grid(1, 32, 1.0);
    SpectralField a = SpectralField::from_function(g, 1, [](const Vec3& x, double* o) { o[0] = std::cos(5 * x[0]); });
    SpectralField b = SpectralField::from_function(g, 1, [](const Vec3& x, double* o) { o[0] = std::sin(7 * x[0]); });
    SpectralField ex = SpectralField::from_function(
        g, 1, [](const Vec3& x, double* o) { o[0] = 0.5 * (std::sin(12 * x[0]) + std::sin(2 * x[0])); });
    CHECK((dealiased_product(a, b) - ex).l2() < 1e-12);
}

TEST_CASE("Lebesgue norms of a constant") {
    TorusGrid g = make_grid(2, 8, 1.0);
    SpectralField c = SpectralField::from_function(g, 1, [](const Vec3&, double* o) { o[0] = 2.0; });
    CHECK(lebesgue_norm(c, 2.0) == doctest::Approx(2.0 * 2 * kPi));
    CHECK(lebesgue_norm(c, std::numeric_limits<double>::infinity()) == doctest::Approx(2.0));
}

TEST_CASE("fractional Laplacian symbol is homogeneous") {
    CHECK(homogeneity_defect(frac_laplacian_symbol(1.5), 2) < 1e-12);
}

namespace {
// e^{i k.x} on the grid as a complex field
SpectralField plane_wave(const TorusGrid& g, const Idx3& k) {
    std::vector<cplx> s(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 x = g.point(i);
        double ph = 0.0;
        for (int a = 0; a < g.dim(); ++a) ph += k[a] * x[a] / g.box_scale();
        s[i] = std::polar(1.0, ph);
    }
    return SpectralField::from_samples(g, {s}, false);
}
}  // namespace

TEST_CASE("grid index set and frequency extremes") {
    TorusGrid g1 = make_grid(1, 8, 1.0);
    std::vector<int> modes;
    for (int i = 0; i < 8; ++i) modes.push_back(g1.axis_mode(i));
    std::sort(modes.begin(), modes.end());
    CHECK(modes == std::vector<int>{-4, -3, -2, -1, 0, 1, 2, 3});
    CHECK(make_grid(2, 16, 1.0).nyquist() == doctest::Approx(8.0));
    CHECK(make_grid(2, 64, 8.0).lowest_frequency() == doctest::Approx(0.125));
}

TEST_CASE("single mode has coefficient 2 pi") {
    TorusGrid g = make_grid(1, 16, 1.0);
    SpectralField f = plane_wave(g, {3, 0, 0});
    std::size_t at = static_cast<std::size_t>(g.flat_of_mode({3, 0, 0}));
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(std::abs(f.coeffs()[i] - (i == at ? cplx(2 * kPi) : cplx(0.0))) < 1e-12);
}

TEST_CASE("round trip and Parseval on a random field") {
    TorusGrid g = make_grid(3, 16, 2.0);
    SpectralField u = random_field(g, 1, 21, RandomFieldOptions{0, 0.0, true, false});
    SpectralField back = SpectralField::from_samples(g, {u.samples()}, true);
    CHECK((back - u).l2() < 1e-12 * u.l2());
    CHECK(lebesgue_norm(u, 2.0) == doctest::Approx(u.l2()).epsilon(1e-10));
}

TEST_CASE("fractional derivatives on single modes") {
    TorusGrid g = make_grid(1, 16, 1.0);
    SpectralField f = plane_wave(g, {3, 0, 0});
    SpectralField d1 = frac_laplacian(f, 1.0);
    d1.axpy(-3.0, f);
    CHECK(d1.l2() < 1e-12 * f.l2());
    TorusGrid g2 = make_grid(2, 16, 1.0);
    SpectralField u = random_field(g2, 1, 5);
    CHECK((frac_laplacian(u, 0.0) - u).l2() < 1e-13 * u.l2());
}

TEST_CASE("gradient of the inverse Laplacian per mode") {
    TorusGrid g = make_grid(2, 16, 2.0);
    Idx3 k{3, -2, 0};
    SpectralField a = plane_wave(g, k);
    SpectralField w = grad_inverse_laplacian(a);
    std::size_t at = static_cast<std::size_t>(g.flat_of_mode(k));
    Vec3 xi = g.xi(at);
    double r2 = xi[0] * xi[0] + xi[1] * xi[1];
    for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(w.coeffs(c)[at] - cplx(0.0, xi[c] / r2) * a.coeffs()[at]) < 1e-12);
        double rest = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (i != at) rest += std::abs(w.coeffs(c)[i]);
        CHECK(rest < 1e-12);
    }
}

TEST_CASE("Helmholtz projection of a gradient and of a curl") {
    TorusGrid g = make_grid(2, 16, 1.0);
    SpectralField grad = SpectralField::from_function(g, 2, [](const Vec3& x, double* o) {
        o[0] = std::cos(x[0]);
        o[1] = 0.0;
    });
    auto [P1, Q1] = helmholtz_project(grad);
    CHECK(P1.l2() < 1e-13);
    CHECK((Q1 - grad).l2() < 1e-13);
    // psi = sin x1 sin x2, u = (-d2 psi, d1 psi)
    SpectralField curl = SpectralField::from_function(g, 2, [](const Vec3& x, double* o) {
        o[0] = -std::sin(x[0]) * std::cos(x[1]);
        o[1] = std::cos(x[0]) * std::sin(x[1]);
    });
    auto [P2, Q2] = helmholtz_project(curl);
    CHECK(Q2.l2() < 1e-13);
    CHECK((P2 - curl).l2() < 1e-13);
}

TEST_CASE("Lebesgue norm of a unimodular wave") {
    for (double M : {1.0, 2.0}) {
        TorusGrid g = make_grid(2, 16, M);
        SpectralField f = plane_wave(g, {3, 1, 0});
        for (double p : {1.0, 2.0, 3.0})
            CHECK(lebesgue_norm(f, p) == doctest::Approx(std::pow(2 * kPi * M, 2.0 / p)).epsilon(1e-12));
        CHECK(lebesgue_norm(f, std::numeric_limits<double>::infinity()) == doctest::Approx(1.0));
    }
}
