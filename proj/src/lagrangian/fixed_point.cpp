#include <algorithm>
#include <cmath>

#include "samples.hpp"

namespace plab {

using detail::colon;
using detail::matrix_samples;
using detail::scalar_field;

namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
    return acc;
}

SpectralField map_samples(const SpectralField& f, const std::function<double(double)>& F) {
    auto s = f.real_samples();
    for (double& v : s) v = F(v);
    return scalar_field(f.grid(), s);
}

// rho_bar(t) = rho0 exp(-int_0^t Du:A), the continuity equation along the flow
std::vector<SpectralField> density_along_flow(const std::vector<SpectralField>& u, const std::vector<FlowMap>& X,
                                              const SpectralField& rho0, const std::vector<double>& t) {
    const TorusGrid& g = rho0.grid();
    const int d = g.dim();
    auto r0 = rho0.real_samples();
    std::vector<double> acc(g.size(), 0.0), prev;
    std::vector<SpectralField> out;
    for (std::size_t k = 0; k < t.size(); ++k) {
        auto Du = matrix_samples(jacobian(u[k]), d);
        auto A = matrix_samples(X[k].A, d);
        std::vector<double> dv(g.size());
        for (std::size_t q = 0; q < g.size(); ++q) dv[q] = colon(Du[q], A[q], d);
        if (k > 0)
            for (std::size_t q = 0; q < g.size(); ++q) acc[q] += 0.5 * (t[k] - t[k - 1]) * (dv[q] + prev[q]);
        prev = dv;
        std::vector<double> r(g.size());
        for (std::size_t q = 0; q < g.size(); ++q) r[q] = r0[q] * std::exp(-acc[q]);
        out.push_back(scalar_field(g, r));
    }
    return out;
}

}  // namespace

LagSolveResult lagrangian_fixed_point_solve(const SpectralField& rho0, const SpectralField& u0,
                                            const LagrangianParams& p, double T, const LagFixedPointOptions& opt) {
    const TorusGrid& g = rho0.grid();
    const int d = g.dim();
    if (u0.grid() != g || u0.components() != d) throw std::invalid_argument("u0 must be a d-vector on the grid of rho0");
    if (opt.time_points < 3) throw std::invalid_argument("need at least 3 time points");
    validate(p.base, false);
    auto r0s = rho0.real_samples();
    if (*std::min_element(r0s.begin(), r0s.end()) <= 0.0) throw DensityError("rho0 must be bounded away from 0");

    NormSpec sD{d / opt.p, opt.p, 1.0, std::nullopt, std::nullopt};
    NormSpec sLo{d / opt.p - 1.0, opt.p, 1.0, std::nullopt, std::nullopt};
    NormSpec sHi{d / opt.p + 1.0, opt.p, 1.0, std::nullopt, std::nullopt};
    auto grad_integral = [&](const std::vector<SpectralField>& us, const std::vector<double>& t) {
        std::vector<double> y;
        for (const auto& u : us) y.push_back(besov_norm(jacobian(u), sD));
        return trapezoid(t, y);
    };
    auto Ep = [&](const std::vector<SpectralField>& us, const std::vector<double>& t) {
        double sup = 0.0;
        std::vector<double> y;
        for (const auto& u : us) {
            sup = std::max(sup, besov_norm(u, sLo));
            y.push_back(besov_norm(u, sHi));
        }
        return sup + trapezoid(t, y);
    };

    LameCoefficients L1;
    L1.mu = p.mu(1.0);
    L1.lambda = p.lambda(1.0);
    LagSolveResult res;
    std::vector<double> t;
    std::vector<SpectralField> v;
    for (int attempt = 0;; ++attempt) {
        t.clear();
        for (int k = 0; k < opt.time_points; ++k) t.push_back(T * k / (opt.time_points - 1));
        v = lame_solve(u0, {}, L1, t).series;
        if (grad_integral(v, t) <= opt.gate) break;
        if (attempt > 20) throw std::domain_error("Lagrangian gate cannot be met");
        T *= 0.5;
    }
    res.report.T = T;

    LameCoefficients Lr;
    Lr.mu = L1.mu;
    Lr.lambda = L1.lambda;
    Lr.a = map_samples(rho0, [](double r) { return 1.0 / r; });
    Lr.b = Lr.a;
    Lr.mu_field = map_samples(rho0, [&p](double r) { return p.mu(r); });
    Lr.lambda_field = map_samples(rho0, [&p](double r) { return p.lambda(r); });

    FlowOptions fo;
    fo.gate = opt.gate;
    fo.p = opt.p;
    int growth = 0;
    for (int n = 0; n < opt.n_max; ++n) {
        auto flows = flow_map_series(v, t, fo);
        if (flows.back().gate_exceeded)
            res.report.warnings.push_back("iteration " + std::to_string(n + 1) + ": gate integral " +
                                          std::to_string(flows.back().gate_integral) + " exceeds " +
                                          std::to_string(opt.gate));
        std::vector<SpectralField> forcing;
        for (std::size_t k = 0; k < t.size(); ++k)
            forcing.push_back(lagrangian_forcing(lagrangian_rhs_terms(flows[k], v[k], rho0, p), rho0));
        LameResult lr = lame_solve(u0, forcing, Lr, t, 0, opt.p);
        res.report.lame = lr.diagnostics;
        std::vector<SpectralField> du;
        for (std::size_t k = 0; k < t.size(); ++k) du.push_back(lr.series[k] - v[k]);
        double inc = Ep(du, t);
        double size = Ep(lr.series, t);
        v = std::move(lr.series);
        res.report.increments.push_back(inc);
        res.report.iterations = n + 1;
        std::size_t m = res.report.increments.size();
        if (m >= 2 && res.report.increments[m - 2] > 0.0) {
            res.report.ratios.push_back(inc / res.report.increments[m - 2]);
            growth = res.report.ratios.back() > 1.0 ? growth + 1 : 0;
        }
        if (inc <= opt.tol * size) {
            res.report.converged = true;
            break;
        }
        if (growth >= 2) throw std::runtime_error("Lagrangian fixed point is not contracting");
    }

    res.state.t = t;
    res.state.flow = flow_map_series(v, t, fo);
    res.state.rho_bar = density_along_flow(v, res.state.flow, rho0, t);
    res.state.u_bar = std::move(v);
    double r0max = 0.0;
    for (double r : r0s) r0max = std::max(r0max, std::abs(r));
    for (std::size_t k = 0; k < t.size(); ++k) {
        auto J = res.state.flow[k].J.real_samples();
        auto r = res.state.rho_bar[k].real_samples();
        for (std::size_t q = 0; q < g.size(); ++q)
            res.report.max_J_rho_defect = std::max(res.report.max_J_rho_defect, std::abs(J[q] * r[q] - r0s[q]) / r0max);
    }
    return res;
}

}  // namespace plab
