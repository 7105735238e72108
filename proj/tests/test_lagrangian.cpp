#include <cmath>

#include "doctest.h"
#include "plab/lagrangian.hpp"

using namespace plab;

namespace {
SpectralField smooth(const TorusGrid& g, int comps, std::uint64_t seed, double amp) {
    RandomFieldOptions o;
    o.band = 2;
    SpectralField f = random_field(g, comps, seed, o);
    f *= amp / std::max(lebesgue_norm(f, kInf), 1e-300);
    return f;
}
}  // namespace

TEST_CASE("adjugate and inverse") {
    MatD m{{{2.0, 0.3, -0.1}, {0.5, 1.5, 0.2}, {0.1, -0.4, 1.2}}};
    for (int d = 2; d <= 3; ++d) {
        JacobianAdjugate ja = jacobian_adjugate(m, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double mi = 0.0, ad = 0.0;
                for (int k = 0; k < d; ++k) {
                    mi += m[i][k] * ja.A[k][j];
                    ad += ja.adj[i][k] * m[k][j];
                }
                CHECK(mi == doctest::Approx(i == j ? 1.0 : 0.0));
                CHECK(ad == doctest::Approx(i == j ? ja.J : 0.0));
            }
    }
    CHECK(jacobian_adjugate(m, 2).J == doctest::Approx(2.85));
    MatD sing{{{1, 2, 0}, {2, 4, 0}, {0, 0, 1}}};
    CHECK_THROWS(jacobian_adjugate(sing, 2));
}

TEST_CASE("identity flow") {
    TorusGrid g = make_grid(2, 16, 1.0);
    FlowMap X = flow_from_displacement(SpectralField(g, 2, true));
    CHECK(X.min_J == doctest::Approx(1.0));
    CHECK(piola_residual(X) < 1e-14);
    SpectralField f = random_field(g, 1, 2);
    CHECK((change_coords(f, X, CoordDirection::to_lagrangian) - f).l2() < 1e-12);
}

TEST_CASE("Piola identity for a smooth flow") {
    for (int d = 2; d <= 3; ++d) {
        TorusGrid g = make_grid(d, 16, 1.0);
        FlowMap X = flow_from_displacement(smooth(g, d, 3 + d, 0.05));
        CHECK(piola_residual(X) < 1e-12);
        CHECK(X.min_J > 0.5);
    }
}

TEST_CASE("change of coordinates round trip") {
    TorusGrid g = make_grid(2, 32, 1.0);
    FlowMap X = flow_from_displacement(smooth(g, 2, 7, 0.05));
    SpectralField f = smooth(g, 1, 8, 1.0);
    SpectralField back = change_coords(change_coords(f, X, CoordDirection::to_eulerian), X, CoordDirection::to_lagrangian);
    CHECK((back - f).l2() < 1e-8 * f.l2());
}

TEST_CASE("translation flow moves samples") {
    TorusGrid g = make_grid(1, 32, 1.0);
    SpectralField d = SpectralField::from_function(g, 1, [](const Vec3&, double* o) { o[0] = 0.3; });
    FlowMap X = flow_from_displacement(d);
    SpectralField f = SpectralField::from_function(g, 1, [](const Vec3& x, double* o) { o[0] = std::sin(2 * x[0]); });
    SpectralField ex = SpectralField::from_function(g, 1, [](const Vec3& x, double* o) { o[0] = std::sin(2 * (x[0] + 0.3)); });
    CHECK((change_coords(f, X, CoordDirection::to_lagrangian) - ex).l2() < 1e-12);
}

TEST_CASE("divergence lemma under a resolved flow") {
    TorusGrid g = make_grid(2, 32, 1.0);
    FlowMap X = flow_from_displacement(smooth(g, 2, 1, 0.05));
    CHECK(lemma_div_residual(smooth(g, 2, 2, 1.0), X) < 1e-9);
    CHECK(lemma_div_residual(smooth(g, 1, 3, 1.0), X) < 1e-9);
}

TEST_CASE("matrix divergence convention") {
    // F_{ij} = delta_{ij} f gives (div F)^j = d_j f
    TorusGrid g = make_grid(2, 16, 1.0);
    SpectralField f = random_field(g, 1, 4);
    SpectralField F(g, 4, true);
    F.coeffs(0) = f.coeffs();
    F.coeffs(3) = f.coeffs();
    CHECK((matrix_divergence(F) - gradient(f)).l2() < 1e-13);
}

TEST_CASE("right-hand side vanishes at rest") {
    TorusGrid g = make_grid(2, 16, 1.0);
    FlowMap X = flow_from_displacement(SpectralField(g, 2, true));
    SpectralField one(g, 1, true);
    one.coeffs()[0] = g.measure();
    LagrangianParams p;
    LagTerms I = lagrangian_rhs_terms(X, SpectralField(g, 2, true), one, p);
    CHECK(I.I1.l2() < 1e-14);
    CHECK(I.I2.l2() < 1e-14);
    CHECK(I.I3.l2() < 1e-14);
    // the pressure term is constant, so the forcing vanishes
    CHECK(lagrangian_forcing(I, one).l2() < 1e-12);
}

TEST_CASE("flow bounds scale with the velocity gradient") {
    TorusGrid g = make_grid(2, 16, 1.0);
    SpectralField v = smooth(g, 2, 5, 1e-3);
    std::vector<double> t{0.0, 0.25, 0.5};
    FlowBoundRatios fb = flow_bound_ratios({v}, t);
    CHECK(fb.Dv_integral > 0.0);
    CHECK(fb.U1 > 0.0);
    CHECK(fb.U1 < 10.0);
    CHECK(fb.J < 10.0);
}

TEST_CASE("flow of a constant velocity") {
    TorusGrid g = make_grid(2, 16, 1.0);
    SpectralField v = SpectralField::from_function(g, 2, [](const Vec3&, double* o) {
        o[0] = 0.3;
        o[1] = -0.2;
    });
    FlowMap X = flow_map({v}, {0.0, 0.5, 1.5});
    CHECK(X.displacement.mean(0).real() == doctest::Approx(0.45));
    CHECK(X.displacement.mean(1).real() == doctest::Approx(-0.3));
    SpectralField id(g, 4, true);
    id.coeffs(0)[0] = id.coeffs(3)[0] = g.measure();
    CHECK((X.DX - id).l2() < 1e-13 * id.l2());
    CHECK(lebesgue_norm(X.J - SpectralField::stack({id.component(0)}), kInf) < 1e-14);
}

TEST_CASE("flow of a localized rotation keeps J = 1") {
    // Lagrangian velocity of x -> c + R(w(r) t)(y - c), an area preserving map
    const double M = 2.0, c = kPi * M;
    TorusGrid g = make_grid(2, 64, M);
    auto w = [](double r) { return std::exp(-std::pow(r / 3.0, 4)); };
    double T = 0.05;
    int n = 100;
    std::vector<double> t;
    std::vector<SpectralField> v;
    for (int k = 0; k <= n; ++k) {
        double tk = T * k / n;
        t.push_back(tk);
        v.push_back(SpectralField::from_function(g, 2, [&](const Vec3& y, double* o) {
            double dx = y[0] - c, dy = y[1] - c, s = w(std::hypot(dx, dy)), th = s * tk;
            o[0] = s * (-std::sin(th) * dx - std::cos(th) * dy);
            o[1] = s * (std::cos(th) * dx - std::sin(th) * dy);
        }));
    }
    FlowMap X = flow_map(v, t);
    CHECK(lebesgue_norm(X.J - SpectralField::from_function(g, 1, [](const Vec3&, double* o) { o[0] = 1.0; }), kInf) <
          1e-8);
    SpectralField ex = SpectralField::from_function(g, 2, [&](const Vec3& y, double* o) {
        double dx = y[0] - c, dy = y[1] - c, th = w(std::hypot(dx, dy)) * T;
        o[0] = std::cos(th) * dx - std::sin(th) * dy - dx;
        o[1] = std::sin(th) * dx + std::cos(th) * dy - dy;
    });
    CHECK(lebesgue_norm(X.displacement - ex, kInf) < 1e-8);
}

TEST_CASE("Jacobian of a shear along one axis") {
    // X1 = y1 + t v1(y1) gives J = 1 + t d1 v1 exactly
    TorusGrid g = make_grid(2, 16, 1.0);
    SpectralField v = SpectralField::from_function(g, 2, [](const Vec3& y, double* o) {
        o[0] = 0.01 * std::sin(y[0]);
        o[1] = 0.0;
    });
    double t = 1e-3;
    FlowMap X = flow_map({v}, {0.0, t});
    SpectralField ex = SpectralField::from_function(g, 1, [t](const Vec3& y, double* o) { o[0] = 1.0 + t * 0.01 * std::cos(y[0]); });
    CHECK(lebesgue_norm(X.J - ex, kInf) < 1e-14);
}

TEST_CASE("adjugate of a 2x2 matrix and of the identity") {
    MatD m{{{1.5, -0.25, 0.0}, {0.75, 2.0, 0.0}, {0.0, 0.0, 0.0}}};
    JacobianAdjugate ja = jacobian_adjugate(m, 2);
    CHECK(ja.adj[0][0] == 2.0);
    CHECK(ja.adj[0][1] == 0.25);
    CHECK(ja.adj[1][0] == -0.75);
    CHECK(ja.adj[1][1] == 1.5);
    for (int d = 2; d <= 3; ++d) {
        MatD id{};
        for (int i = 0; i < d; ++i) id[i][i] = 1.0;
        JacobianAdjugate e = jacobian_adjugate(id, d);
        CHECK(e.J == 1.0);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                CHECK(e.adj[i][j] == id[i][j]);
                CHECK(e.A[i][j] == id[i][j]);
            }
    }
}

TEST_CASE("pressure term at rest and the viscosity term for constant density") {
    TorusGrid g = make_grid(2, 16, 1.0);
    LagrangianParams p;
    SpectralField rho0 = SpectralField::from_function(g, 1, [](const Vec3& y, double* o) { o[0] = 1.0 + 0.1 * std::sin(y[0]); });
    FlowMap rest = flow_from_displacement(SpectralField(g, 2, true));
    LagTerms I = lagrangian_rhs_terms(rest, smooth(g, 2, 40, 0.1), rho0, p);
    SpectralField P = SpectralField::from_function(g, 4, [&](const Vec3& y, double* o) {
        double r = 1.0 + 0.1 * std::sin(y[0]);
        double P = p.base.pressure.P(r);
        o[0] = -P;
        o[1] = o[2] = 0.0;
        o[3] = -P;
    });
    CHECK(lebesgue_norm(I.I4 - P, kInf) < 1e-9);
    CHECK(I.I1.l2() < 1e-14);
    CHECK(I.I2.l2() < 1e-14);
    CHECK(I.I3.l2() < 1e-14);

    SpectralField one = SpectralField::from_function(g, 1, [](const Vec3&, double* o) { o[0] = 1.0; });
    FlowMap moved = flow_from_displacement(smooth(g, 2, 41, 0.05));
    LagTerms J = lagrangian_rhs_terms(moved, smooth(g, 2, 42, 0.1), one, p);
    CHECK(J.I2.l2() == 0.0);
    CHECK(J.I1.l2() > 0.0);
}

TEST_CASE("fixed point from rest") {
    TorusGrid g = make_grid(2, 16, 1.0);
    SpectralField one = SpectralField::from_function(g, 1, [](const Vec3&, double* o) { o[0] = 1.0; });
    LagFixedPointOptions o;
    o.time_points = 11;
    LagSolveResult r = lagrangian_fixed_point_solve(one, SpectralField(g, 2, true), LagrangianParams{}, 0.2, o);
    CHECK(r.report.converged);
    for (const auto& u : r.state.u_bar) CHECK(u.l2() < 1e-14);
    for (const auto& rho : r.state.rho_bar) CHECK(lebesgue_norm(rho - one, kInf) < 1e-14);
}
