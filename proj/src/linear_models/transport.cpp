#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plab/linear_models.hpp"

namespace plab {
namespace {

// Linear interpolation of a sampled series; a single sample is frozen in time.
SpectralField sample_at(const std::vector<SpectralField>& s, const std::vector<double>& t_grid, double t) {
    if (s.size() == 1) return s[0];
    auto it = std::upper_bound(t_grid.begin(), t_grid.end(), t);
    std::size_t k = it == t_grid.begin() ? 1 : static_cast<std::size_t>(it - t_grid.begin());
    k = std::min(k, t_grid.size() - 1);
    double w = (t - t_grid[k - 1]) / (t_grid[k] - t_grid[k - 1]);
    SpectralField out = s[k - 1];
    out *= 1.0 - w;
    out.axpy(w, s[k]);
    return out;
}

// Velocity-gradient size ||grad v||_{B^{d/p}_{p,inf}} + ||grad v||_{L^inf}.
double velocity_size(const SpectralField& v, double p) {
    SpectralField Dv = jacobian(v);
    NormSpec spec{v.grid().dim() / p, p, kInf, std::nullopt, std::nullopt};
    return besov_norm(Dv, spec) + lebesgue_norm(Dv, kInf);
}

}  // namespace

TransportResult transport_solve(const std::vector<SpectralField>& v_series, const SpectralField& a0,
                                const std::vector<SpectralField>& f_series, double lambda_damp,
                                const std::vector<double>& t_grid, const TransportOptions& opt) {
    if (t_grid.empty()) throw std::invalid_argument("empty time grid");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("t_grid must be increasing");
    if (v_series.empty()) throw std::invalid_argument("missing velocity");
    if (v_series.size() != 1 && v_series.size() != t_grid.size())
        throw std::invalid_argument("v_series must be frozen or sampled on t_grid");
    if (!f_series.empty() && f_series.size() != t_grid.size())
        throw std::invalid_argument("f_series must be sampled on t_grid");

    const TorusGrid& g = a0.grid();
    Dealiaser de(g);
    auto rhs = [&](double t, const SpectralField& a) {
        SpectralField v = sample_at(v_series, t_grid, t);
        SpectralField out(g, a.components(), a.is_real());
        for (int c = 0; c < a.components(); ++c) {
            std::vector<cplx> acc(de.padded_size());
            for (int ax = 0; ax < g.dim(); ++ax) {
                auto pv = de.to_physical(v.coeffs(ax));
                auto da = de.to_physical(derivative(a.component(c), ax).coeffs());
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] -= pv[i] * da[i];
            }
            out.coeffs(c) = de.to_coeffs(acc);
        }
        out.axpy(-lambda_damp, a);
        if (!f_series.empty()) out += sample_at(f_series, t_grid, t);
        return out;
    };
    auto rk4 = [&](double t, const SpectralField& a, double h) {
        SpectralField k1 = rhs(t, a);
        SpectralField y = a;
        y.axpy(0.5 * h, k1);
        SpectralField k2 = rhs(t + 0.5 * h, y);
        y = a;
        y.axpy(0.5 * h, k2);
        SpectralField k3 = rhs(t + 0.5 * h, y);
        y = a;
        y.axpy(h, k3);
        SpectralField k4 = rhs(t + h, y);
        SpectralField out = a;
        out.axpy(h / 6.0, k1);
        out.axpy(h / 3.0, k2);
        out.axpy(h / 3.0, k3);
        out.axpy(h / 6.0, k4);
        return out;
    };

    TransportResult res;
    res.series.push_back(a0);
    double scale = std::max(a0.l2(), 1e-300);
    double vmax = 0.0;
    for (const auto& v : v_series) vmax = std::max(vmax, lebesgue_norm(v, kInf));
    // initial substep from the advective CFL number of the finest resolved mode
    double h = t_grid.size() > 1 ? t_grid[1] - t_grid[0] : 1.0;
    if (vmax > 0.0) h = std::min(h, 1.0 / (vmax * g.nyquist()));
    if (lambda_damp > 0.0) h = std::min(h, 1.0 / lambda_damp);

    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        double t = t_grid[k - 1], tend = t_grid[k];
        SpectralField a = res.series.back();
        while (t < tend) {
            double step = std::min(h, tend - t);
            // absorb a sliver left by rounding into this step
            if (tend - t - step <= 1e-12 * std::max(1.0, tend)) step = tend - t;
            SpectralField full = rk4(t, a, step);
            SpectralField half = rk4(t, a, 0.5 * step);
            half = rk4(t + 0.5 * step, half, 0.5 * step);
            SpectralField diff = half;
            diff -= full;
            double err = diff.l2() / 15.0 / scale;
            if (++res.total_substeps > opt.max_substeps)
                throw std::runtime_error("transport: substep budget exhausted");
            if (err > opt.tol_per_time * step && err > 1e-14) {
                h = 0.5 * step;
                if (h < 1e-12 * std::max(1.0, tend)) throw std::runtime_error("transport: step size underflow");
                continue;
            }
            // Richardson extrapolation of the doubled step
            a = half;
            a.axpy(1.0 / 15.0, diff);
            t = step == tend - t ? tend : t + step;
            if (err < 0.05 * opt.tol_per_time * step && step == h) h *= 1.5;
        }
        if (!std::isfinite(a.l2())) throw std::runtime_error("transport produced non-finite values");
        res.series.push_back(std::move(a));
    }

    // Gronwall-type report on the output grid (uniform spacing assumed for the tilde norms).
    std::size_t n = t_grid.size();
    if (n >= 2) {
        double dt = (t_grid.back() - t_grid.front()) / static_cast<double>(n - 1);
        std::vector<std::vector<double>> an, fn;
        for (const auto& a : res.series) an.push_back(block_norms(a, opt.p));
        JRange r = resolvable_range(g);
        double lhs = tilde_norm_from_blocks(an, dt, r.jmin, opt.s, kInf, 1.0);
        double fnorm = 0.0;
        if (!f_series.empty()) {
            for (const auto& f : f_series) fn.push_back(block_norms(f, opt.p));
            fnorm = tilde_norm_from_blocks(fn, dt, r.jmin, opt.s, 1.0, 1.0);
        }
        double V = 0.0;
        std::vector<double> vs;
        for (std::size_t k = 0; k < n; ++k)
            vs.push_back(velocity_size(v_series.size() == 1 ? v_series[0] : v_series[k], opt.p));
        for (std::size_t k = 1; k < n; ++k) V += 0.5 * (t_grid[k] - t_grid[k - 1]) * (vs[k] + vs[k - 1]);
        res.velocity_integral = V;
        double a0n = weighted_sum(an[0], r.jmin, opt.s, 1.0);
        double denom = std::exp(V) * (a0n + fnorm);
        res.gronwall_ratio = denom > 0.0 ? lhs / denom : 0.0;
    }
    return res;
}

}  // namespace plab
