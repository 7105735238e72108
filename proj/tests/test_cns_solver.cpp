#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "plab/cns_solver.hpp"

using namespace plab;

namespace {
CnsState small_state(const TorusGrid& g, double amp, std::uint64_t seed) {
    RandomFieldOptions o;
    o.band = 3;
    SpectralField a = random_field(g, 1, seed, o), u = random_field(g, g.dim(), seed + 1, o);
    a *= amp;
    u *= amp;
    return {a, u, 0.0};
}
}  // namespace

TEST_CASE("parameters") {
    CnsParams p;
    CHECK(p.nu() == doctest::Approx(1.0));
    CHECK(p.alpha() == doctest::Approx(1.0));
    CHECK(p.pressure.k(0.0) == 0.0);
    CnsParams bad = p;
    bad.mu = -1.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("zero data is a fixed point") {
    TorusGrid g = make_grid(2, 16, 1.0);
    CnsState s = zero_state(g);
    CnsParams p;
    CnsState n = cns_step(s, p, 0.1);
    CHECK(n.a.l2() == 0.0);
    CHECK(n.u.l2() == 0.0);
}

TEST_CASE("linear propagation matches the mode propagator") {
    TorusGrid g = make_grid(1, 16, 1.0);
    CnsParams p;
    CnsStepper st(g, p);
    CnsState s = small_state(g, 1.0, 3);
    CnsState n = st.linear_propagate(s, 0.4);
    // in 1D v = |D|^{-1} div u = i sign(xi) u
    for (std::size_t i = 1; i < g.size(); ++i) {
        double xi = g.xi(i)[0], rho = std::abs(xi);
        cplx sg(0.0, xi > 0 ? 1.0 : -1.0);
        Mat2 e = propagator(mode_matrix(rho), 0.4);
        cplx A = s.a.coeffs()[i], V = sg * s.u.coeffs()[i];
        CHECK(std::abs(n.a.coeffs()[i] - (e[0][0] * A + e[0][1] * V)) < 1e-13);
        CHECK(std::abs(sg * n.u.coeffs()[i] - (e[1][0] * A + e[1][1] * V)) < 1e-13);
    }
}

TEST_CASE("nonlinear step conserves mass and is second order") {
    TorusGrid g = make_grid(2, 16, 1.0);
    CnsParams p;
    CnsState s = small_state(g, 0.05, 5);
    auto run = [&](double h, int n) {
        CnsState x = s;
        for (int k = 0; k < n; ++k) x = cns_step(x, p, h);
        return x;
    };
    CnsState ref = run(0.2 / 64, 64), c1 = run(0.1, 2), c2 = run(0.05, 4);
    CHECK(std::abs(c1.a.mean() - s.a.mean()) < 1e-15);
    double e1 = std::hypot((c1.a - ref.a).l2(), (c1.u - ref.u).l2());
    double e2 = std::hypot((c2.a - ref.a).l2(), (c2.u - ref.u).l2());
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("nonlinear right-hand side sign convention") {
    // constant density perturbation with a single velocity mode: f = -div((1 + a) u) + div u
    TorusGrid g = make_grid(1, 16, 1.0);
    CnsState s = zero_state(g);
    s.a.coeffs()[0] = 0.1 * g.measure();
    s.u = SpectralField::from_function(g, 1, [](const Vec3& x, double* o) { o[0] = 0.01 * std::sin(x[0]); });
    CnsParams p;
    Forcing f = nonlinear_rhs(s, p);
    SpectralField ex = divergence(s.u);
    ex *= -0.1;
    CHECK((f.f - ex).l2() < 1e-14);
}

TEST_CASE("run bookkeeping") {
    TorusGrid g = make_grid(2, 16, 1.0);
    CnsParams p;
    RunOptions ro;
    ro.dt = 0.05;
    ro.output_every = 0.25;
    RunResult r = cns_run(small_state(g, 0.01, 7), p, 1.0, ro);
    CHECK(r.stop == StopReason::completed);
    CHECK(r.trajectory.size() == 5);
    CHECK(r.trajectory.back().t == doctest::Approx(1.0));
    CHECK(r.mass_drift <= 1e-14);
    CHECK(r.min_density > 0.9);
    CHECK(r.rows.size() == 5);
}

TEST_CASE("density gate stops the run") {
    TorusGrid g = make_grid(1, 16, 1.0);
    CnsState s = zero_state(g);
    s.a = SpectralField::from_function(g, 1, [](const Vec3& x, double* o) { o[0] = 0.6 * std::sin(x[0]); });
    RunResult r = cns_run(s, CnsParams{}, 0.5, RunOptions{});
    CHECK(r.stop == StopReason::density_gate);
    CHECK(!r.diagnostic.empty());
}

TEST_CASE("snapshot round trip") {
    TorusGrid g = make_grid(2, 8, 2.0);
    CnsState s = small_state(g, 0.3, 9);
    s.t = 1.25;
    auto path = (std::filesystem::temp_directory_path() / "plab_snapshot_test").string();
    save_snapshot(path, s, CnsParams{});
    CnsState b = load_snapshot(path);
    CHECK(b.t == 1.25);
    CHECK(b.a.grid() == g);
    CHECK((b.a - s.a).l2() == 0.0);
    CHECK((b.u - s.u).l2() == 0.0);
}

TEST_CASE("incompressible flow stays divergence free") {
    TorusGrid g = make_grid(2, 16, 1.0);
    SpectralField v0 = helmholtz_project(random_field(g, 2, 4)).first;
    v0 *= 0.1;
    IncompressibleResult r = incompressible_run(v0, 0.75, 0.5, 0.01, 0.1);
    CHECK(r.max_divergence < 1e-12);
    CHECK(r.energy_monotone);
}

TEST_CASE("rescaling keeps the critical size") {
    TorusGrid g = make_grid(2, 16, 4.0);
    CnsState s = small_state(g, 0.01, 2);
    auto [r, p] = rescale_state(s, CnsParams{}, 2.0);
    CHECK(r.a.grid().box_scale() == doctest::Approx(2.0));
    CHECK(p.alpha() == doctest::Approx(4.0));
}

TEST_CASE("solutions commute with the scaling") {
    TorusGrid g = make_grid(2, 16, 4.0);
    CnsState s = small_state(g, 0.02, 12);
    CnsParams p;
    RunOptions ro;
    ro.dt = 0.02;
    ro.output_every = 0.4;
    ro.monitors = false;
    CnsState end = cns_run(s, p, 0.4, ro).trajectory.back();
    auto [rs, rp] = rescale_state(s, p, 2.0);
    RunOptions rro = ro;
    rro.dt = 0.005;
    rro.output_every = 0.1;
    CnsState rend = cns_run(rs, rp, 0.1, rro).trajectory.back();
    CnsState expect = rescale_state(end, p, 2.0).first;
    CHECK((rend.a - expect.a).l2() < 1e-12 * expect.a.l2());
    CHECK((rend.u - expect.u).l2() < 1e-12 * expect.u.l2());
}

TEST_CASE("right-hand side with one of the fields at rest") {
    TorusGrid g = make_grid(2, 32, 1.0);
    CnsParams p;
    CnsState s = small_state(g, 0.1, 30);
    CnsState no_a{SpectralField(g, 1, true), s.u, 0.0};
    Forcing fa = nonlinear_rhs(no_a, p);
    SpectralField uu = advect(s.u, s.u);
    CHECK(fa.f.l2() < 1e-15 * uu.l2());
    CHECK((fa.g + uu).l2() < 1e-12 * uu.l2());

    // u = 0: g = -k(a) grad a against samples on a fine grid
    CnsState no_u{SpectralField::from_function(g, 1,
                                               [](const Vec3& x, double* o) {
                                                   o[0] = 0.1 * std::sin(x[0]) + 0.05 * std::cos(2 * x[1]);
                                               }),
                  SpectralField(g, 2, true), 0.0};
    Forcing fu = nonlinear_rhs(no_u, p);
    CHECK(fu.f.l2() < 1e-15 * fu.g.l2());
    TorusGrid fine = make_grid(2, 128, 1.0);
    SpectralField ref = SpectralField::from_function(fine, 2, [&](const Vec3& x, double* o) {
        double a = 0.1 * std::sin(x[0]) + 0.05 * std::cos(2 * x[1]);
        double k = p.pressure.k(a);
        o[0] = -k * 0.1 * std::cos(x[0]);
        o[1] = k * 0.1 * std::sin(2 * x[1]);
    });
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        Idx3 m = g.mode(i);
        if (std::abs(m[0]) == g.n() / 2 || std::abs(m[1]) == g.n() / 2) continue;
        std::size_t j = static_cast<std::size_t>(fine.flat_of_mode(m));
        for (int c = 0; c < 2; ++c) err = std::max(err, std::abs(fu.g.coeffs(c)[i] - ref.coeffs(c)[j]));
    }
    CHECK(err < 1e-9 * fu.g.max_abs_coeff());
}

TEST_CASE("linear pressure law: k(a) = -a/(1+a)") {
    // G(a) = log(1 + a) for P(rho) = rho, so G' by central differences
    PressureLaw law = gamma_law(1.0);
    for (double a : {-0.4, -0.1, 0.0, 0.2, 0.45}) {
        double h = 1e-5;
        double Gp = (std::log1p(a + h) - std::log1p(a - h)) / (2 * h);
        CHECK(std::abs(law.k(a) - (Gp - 1.0)) < 1e-9);
        CHECK(std::abs(law.k(a) + a / (1 + a)) < 1e-14);
    }
}

TEST_CASE("one small step follows the linear path to second order") {
    TorusGrid g = make_grid(2, 16, 1.0);
    CnsParams p;
    CnsState s = small_state(g, 1e-6, 31);
    CnsStepper st(g, p);
    CnsState lin = st.linear_propagate(s, 0.1);
    CnsState nl = s;
    st.step(nl, 0.1);
    CHECK((nl.a - lin.a).l2() + (nl.u - lin.u).l2() < 1e-9);
}

TEST_CASE("zero data run stays at zero") {
    TorusGrid g = make_grid(2, 16, 1.0);
    RunOptions ro;
    ro.dt = 0.05;
    ro.output_every = 0.1;
    RunResult r = cns_run(zero_state(g), CnsParams{}, 0.5, ro);
    for (const auto& s : r.trajectory) CHECK(s.a.l2() + s.u.l2() == 0.0);
}

TEST_CASE("effective velocity per mode") {
    TorusGrid g = make_grid(2, 16, 1.0);
    SpectralField a(g, 1, false);
    Idx3 k{2, -1, 0};
    std::size_t at = static_cast<std::size_t>(g.flat_of_mode(k));
    a.coeffs()[at] = 1.0;
    SpectralField w = effective_velocity({a, SpectralField(g, 2, false), 0.0});
    Vec3 xi = g.xi(at);
    double r2 = xi[0] * xi[0] + xi[1] * xi[1];
    CHECK(std::abs(w.coeffs(0)[at] - cplx(0, xi[0] / r2)) < 1e-15);
    CHECK(std::abs(w.coeffs(1)[at] - cplx(0, xi[1] / r2)) < 1e-15);
    // a = 0: w = i xi (-i xi.u) / |xi|^2 = Qu, which is u itself for a gradient
    SpectralField grad_u = gradient(random_field(g, 1, 32));
    SpectralField wq = effective_velocity({SpectralField(g, 1, true), grad_u, 0.0});
    CHECK((wq - grad_u).l2() < 1e-12 * grad_u.l2());
}

TEST_CASE("mass equation written with the effective velocity") {
    // d/dt a + div(a u) + a = -div w along a run, time derivative by central differences
    TorusGrid g = make_grid(2, 16, 1.0);
    CnsParams p;
    RunOptions ro;
    ro.dt = 0.005;
    ro.output_every = 0.005;
    ro.monitors = false;
    RunResult r = cns_run(small_state(g, 0.02, 33), p, 0.2, ro);
    for (std::size_t k = 1; k + 1 < r.trajectory.size(); k += 8) {
        const CnsState& s = r.trajectory[k];
        SpectralField dt = r.trajectory[k + 1].a - r.trajectory[k - 1].a;
        dt *= 1.0 / (2 * ro.output_every);
        SpectralField res = dt + divergence(dealiased_product(s.a, s.u)) + s.a + divergence(effective_velocity(s));
        CHECK(res.l2() < 1e-3 * dt.l2());
    }
}

TEST_CASE("local scheme without nonlinear terms stops after one iteration") {
    TorusGrid g = make_grid(2, 16, 1.0);
    CnsState s = small_state(g, 0.01, 34);
    LocalSchemeOptions o;
    o.nonlinear = false;
    o.time_points = 11;
    LocalSchemeResult r = local_iteration_scheme(s.a, s.u, CnsParams{}, 0.2, o);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
}

TEST_CASE("incompressible solver: rest and Taylor-Green") {
    TorusGrid g = make_grid(2, 16, 1.0);
    IncompressibleResult rest = incompressible_run(SpectralField(g, 2, true), 0.75, 0.5, 0.05, 0.1);
    for (const auto& v : rest.trajectory) CHECK(v.l2() == 0.0);
    auto tg = [](double decay) {
        return [decay](const Vec3& x, double* o) {
            o[0] = decay * std::sin(x[0]) * std::cos(x[1]);
            o[1] = -decay * std::cos(x[0]) * std::sin(x[1]);
        };
    };
    double mu = 0.75, T = 1.0;
    IncompressibleResult r = incompressible_run(SpectralField::from_function(g, 2, tg(1.0)), mu, T, 0.01, 0.25);
    SpectralField ex = SpectralField::from_function(g, 2, tg(std::exp(-2 * mu * T)));
    CHECK(lebesgue_norm(r.trajectory.back() - ex, kInf) < 1e-8);
    CHECK(r.energy_monotone);
}

TEST_CASE("rescaling by one is the identity") {
    TorusGrid g = make_grid(2, 16, 2.0);
    CnsState s = small_state(g, 0.05, 35);
    auto [r, p] = rescale_state(s, CnsParams{}, 1.0);
    CHECK((r.a - s.a).l2() == 0.0);
    CHECK((r.u - s.u).l2() == 0.0);
    CHECK(p.alpha() == doctest::Approx(1.0));
    CHECK_THROWS(rescale_state(s, CnsParams{}, 3.0));
}

TEST_CASE("rescaled linear flow is the time-rescaled original") {
    // rescale then propagate over t / l^2 equals propagate over t then rescale
    TorusGrid g = make_grid(2, 16, 4.0);
    CnsParams p;
    p.nonlinear = false;
    CnsState s = small_state(g, 0.1, 36);
    for (double ell : {0.5, 2.0}) {
        auto [rs, rp] = rescale_state(s, p, ell);
        CnsState a = CnsStepper(rs.a.grid(), rp).linear_propagate(rs, 0.7 / (ell * ell));
        CnsState b = rescale_state(CnsStepper(g, p).linear_propagate(s, 0.7), p, ell).first;
        CHECK((a.a - b.a).l2() < 1e-13 * b.a.l2());
        CHECK((a.u - b.u).l2() < 1e-13 * b.u.l2());
    }
}

TEST_CASE("decay run refuses a torus without an algebraic window") {
    DecayConfig c;
    c.n = 32;
    c.box = 4.0;  // below the M >= 8 needed for t_gap = M^2 / 4 >= 10
    c.T = 20.0;
    CHECK_THROWS(decay_run(c, CnsParams{}));
}
