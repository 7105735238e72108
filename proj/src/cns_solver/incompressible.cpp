#include <algorithm>
#include <cmath>

#include "plab/cns_solver.hpp"

namespace plab {
namespace {

// -P(v.grad v)
SpectralField advection_term(const SpectralField& v) {
    SpectralField n = helmholtz_project(advect(v, v)).first;
    n *= -1.0;
    return n;
}

// e^{h mu Lap} v + h phi1(h mu Lap) n, mode by mode; the mean mode is inert
SpectralField heat_etd(const SpectralField& v, const SpectralField* n, double mu, double h) {
    const TorusGrid& g = v.grid();
    SpectralField out(g, v.components(), v.is_real());
    const auto& rho = g.xi_norms();
    for (std::size_t i = 0; i < g.size(); ++i) {
        ScalarPhi sp = scalar_phi(mu * rho[i] * rho[i], h);
        for (int c = 0; c < v.components(); ++c) {
            cplx y = sp.E * v.coeffs(c)[i];
            if (n) y += sp.W1 * n->coeffs(c)[i];
            out.coeffs(c)[i] = y;
        }
    }
    return out;
}

}  // namespace

SpectralField incompressible_step(const SpectralField& v, double mu, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
    SpectralField n0 = advection_term(v);
    SpectralField mid = heat_etd(v, &n0, mu, 0.5 * h);
    SpectralField n1 = advection_term(mid);
    SpectralField lin = heat_etd(v, nullptr, mu, h);
    SpectralField out = heat_etd(v, &n1, mu, h);
    double ln = lin.l2(), nn = (out - lin).l2();
    if (ln > 0.0 && nn > 0.5 * ln) throw std::runtime_error("incompressible step rejected, retry with h/2");
    return out;
}

IncompressibleResult incompressible_run(const SpectralField& v0, double mu, double T, double dt,
                                        double output_every) {
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (!(dt > 0.0) || !(output_every > 0.0)) throw std::invalid_argument("dt and output stride must be positive");
    IncompressibleResult res;
    SpectralField v = helmholtz_project(v0).first;
    double t = 0.0, tol = 1e-9 * output_every;
    double e_prev = v.l2();
    auto record = [&]() {
        res.trajectory.push_back(v);
        res.t.push_back(t);
        double vs = std::max(v.l2(), 1e-300);
        res.max_divergence = std::max(res.max_divergence, divergence(v).l2() / vs);
    };
    record();
    double next_out = output_every;
    while (t < T - tol) {
        double h = std::min({dt, next_out - t, T - t});
        v = incompressible_step(v, mu, h);
        t += h;
        if (std::abs(t - next_out) <= tol) t = next_out;
        double e = v.l2();
        if (e > e_prev * (1.0 + 1e-12)) res.energy_monotone = false;
        e_prev = e;
        if (std::abs(t - next_out) <= tol) {
            record();
            next_out += output_every;
        }
    }
    return res;
}

}  // namespace plab
