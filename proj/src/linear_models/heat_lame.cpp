#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plab/linear_models.hpp"

namespace plab {
namespace {

void check_grid(const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("empty time grid");
    for (std::size_t k = 1; k < t_grid.size(); ++k)
        if (!(t_grid[k] > t_grid[k - 1])) throw std::invalid_argument("t_grid must be increasing");
}

// Trapezoid on a possibly nonuniform grid.
double integrate(const std::vector<double>& t, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
    return acc;
}

SpectralField constant_field(const TorusGrid& g, double v) {
    SpectralField f(g, 1, true);
    f.coeffs()[0] = v * g.measure();
    return f;
}

double min_sample(const SpectralField& f) {
    auto s = f.real_samples();
    return *std::min_element(s.begin(), s.end());
}

}  // namespace

HeatResult heat_solve(const SpectralField& u0, const std::vector<SpectralField>& f_series,
                      const std::vector<double>& t_grid, const HeatOptions& opt) {
    check_grid(t_grid);
    if (!f_series.empty() && f_series.size() != t_grid.size())
        throw std::invalid_argument("f_series must be sampled on t_grid");
    const TorusGrid& g = u0.grid();
    HeatResult res;
    res.series.push_back(u0);
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        double h = t_grid[k] - t_grid[k - 1];
        const SpectralField& prev = res.series.back();
        SpectralField next(g, u0.components(), u0.is_real());
        for (std::size_t i = 0; i < g.size(); ++i) {
            double r = g.xi_norm(i);
            ScalarPhi ph = scalar_phi(opt.diffusivity * r * r, h);
            for (int c = 0; c < u0.components(); ++c) {
                cplx v = ph.E * prev.coeffs(c)[i];
                if (!f_series.empty()) {
                    cplx f0 = f_series[k - 1].coeffs(c)[i], f1 = f_series[k].coeffs(c)[i];
                    v += ph.W1 * f0 + ph.W2 * (f1 - f0);
                }
                next.coeffs(c)[i] = v;
            }
        }
        res.series.push_back(std::move(next));
    }

    NormSpec spec{opt.s, opt.p, 1.0, std::nullopt, std::nullopt};
    double sup_u = 0.0;
    std::vector<double> lap, src;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        sup_u = std::max(sup_u, besov_norm(res.series[k], spec));
        lap.push_back(opt.diffusivity * besov_norm(laplacian(res.series[k]), spec));
        src.push_back(f_series.empty() ? 0.0 : besov_norm(f_series[k], spec));
    }
    double denom = besov_norm(u0, spec) + integrate(t_grid, src);
    res.max_regularity_ratio = denom > 0.0 ? (sup_u + integrate(t_grid, lap)) / denom : 0.0;
    return res;
}

SpectralField lame_operator(const SpectralField& u, double mu, double lambda) {
    SpectralField out = laplacian(u);
    out *= mu;
    out.axpy(lambda + mu, gradient(divergence(u)));
    return out;
}

namespace {

struct LameFields {
    SpectralField a, b, mu, lambda;
};

LameFields lame_fields(const TorusGrid& g, const LameCoefficients& c) {
    auto pick = [&](const std::optional<SpectralField>& f, double v) {
        return f ? *f : constant_field(g, v);
    };
    return {pick(c.a, 1.0), pick(c.b, 1.0), pick(c.mu_field, c.mu), pick(c.lambda_field, c.lambda)};
}

// 2 a div(mu D(u)) + b grad(lambda div u)
SpectralField variable_lame(const SpectralField& u, const LameFields& lf, const Dealiaser& de) {
    const TorusGrid& g = u.grid();
    int d = g.dim();
    SpectralField Du = jacobian(u);
    std::vector<SpectralField> rows;
    for (int i = 0; i < d; ++i) {
        SpectralField acc(g, 1, u.is_real());
        for (int j = 0; j < d; ++j) {
            SpectralField sym = Du.component(i * d + j);
            sym += Du.component(j * d + i);
            sym *= 0.5;
            acc += derivative(de.product(lf.mu, sym), j);
        }
        rows.push_back(de.product(lf.a, acc));
    }
    SpectralField out = SpectralField::stack(rows);
    out *= 2.0;
    SpectralField ldiv = de.product(lf.lambda, divergence(u));
    out += de.product(lf.b, gradient(ldiv));
    out.set_real(u.is_real());
    return out;
}

}  // namespace

LameResult lame_solve(const SpectralField& u0, const std::vector<SpectralField>& f_series,
                      const LameCoefficients& coeffs, const std::vector<double>& t_grid, int cut_index,
                      double p) {
    check_grid(t_grid);
    const TorusGrid& g = u0.grid();
    int d = g.dim();
    if (u0.components() != d) throw std::invalid_argument("Lame data must be a d-vector field");
    if (!f_series.empty() && f_series.size() != t_grid.size())
        throw std::invalid_argument("f_series must be sampled on t_grid");

    LameResult res;
    LameDiagnostics& dg = res.diagnostics;
    dg.m = cut_index;
    bool variable = coeffs.variable() || coeffs.b || coeffs.mu_field || coeffs.lambda_field;
    Dealiaser de(g);
    LameFields lf;
    if (variable) {
        lf = lame_fields(g, coeffs);
        SpectralField amu = de.product(lf.a, lf.mu);
        SpectralField blam = de.product(lf.b, lf.lambda);
        SpectralField second = amu;
        second *= 2.0;
        second += blam;
        dg.ellipticity = std::min(min_sample(amu), min_sample(second));
        SpectralField amu_s = low_cut(amu, cut_index);
        SpectralField sec_s = low_cut(second, cut_index);
        dg.smooth_floor = std::min(min_sample(amu_s), min_sample(sec_s));
        NormSpec crit{d / p - 1.0, p, 1.0, std::nullopt, std::nullopt};
        const SpectralField* pairs[4][2] = {
            {&lf.mu, &lf.a}, {&lf.a, &lf.mu}, {&lf.lambda, &lf.b}, {&lf.b, &lf.lambda}};
        for (auto& pr : pairs) {
            SpectralField prod = de.product(*pr[0], gradient(*pr[1]));
            prod -= low_cut(prod, cut_index);
            dg.rough_part += besov_norm(prod, crit);
        }
        dg.mu0 = amu.mean().real();
        dg.lambda0 = blam.mean().real();
    } else {
        dg.mu0 = coeffs.mu;
        dg.lambda0 = coeffs.lambda;
        dg.ellipticity = dg.smooth_floor = std::min(coeffs.mu, 2.0 * coeffs.mu + coeffs.lambda);
    }
    if (!(dg.ellipticity > 0.0)) throw std::domain_error("Lame coefficients violate ellipticity");
    double mu0 = dg.mu0, nu0 = dg.lambda0 + 2.0 * dg.mu0;
    if (!(mu0 > 0.0 && nu0 > 0.0)) throw std::domain_error("Lame mean coefficients violate ellipticity");

    // P and Q blocks evolve by heat flows with diffusivities mu0 and nu0.
    auto etd = [&](const SpectralField& u, const SpectralField* s0, const SpectralField* ds, double h) {
        SpectralField out(g, d, u.is_real());
        for (std::size_t i = 0; i < g.size(); ++i) {
            double r = g.xi_norm(i);
            ScalarPhi pp = scalar_phi(mu0 * r * r, h), pq = scalar_phi(nu0 * r * r, h);
            Vec3 x = g.xi(i);
            auto split = [&](const SpectralField& f, std::array<cplx, 3>& P, std::array<cplx, 3>& Q) {
                cplx dot = 0.0;
                for (int a = 0; a < d; ++a) dot += x[a] * f.coeffs(a)[i];
                for (int a = 0; a < d; ++a) {
                    Q[a] = i == 0 ? cplx(0.0) : x[a] * dot / (r * r);
                    P[a] = f.coeffs(a)[i] - Q[a];
                }
            };
            std::array<cplx, 3> uP{}, uQ{}, sP{}, sQ{}, dP{}, dQ{};
            split(u, uP, uQ);
            if (s0) split(*s0, sP, sQ);
            if (ds) split(*ds, dP, dQ);
            for (int a = 0; a < d; ++a)
                out.coeffs(a)[i] = pp.E * uP[a] + pq.E * uQ[a] + pp.W1 * sP[a] + pq.W1 * sQ[a] +
                                   pp.W2 * dP[a] + pq.W2 * dQ[a];
        }
        return out;
    };

    res.series.push_back(u0);
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        double h = t_grid[k] - t_grid[k - 1];
        const SpectralField& un = res.series.back();
        std::optional<SpectralField> f0, df, fmid;
        if (!f_series.empty()) {
            f0 = f_series[k - 1];
            df = f_series[k] - f_series[k - 1];
        }
        SpectralField next;
        if (!variable) {
            next = etd(un, f0 ? &*f0 : nullptr, df ? &*df : nullptr, h);
        } else {
            auto deviation = [&](const SpectralField& u) {
                SpectralField dev = variable_lame(u, lf, de);
                dev -= lame_operator(u, mu0, dg.lambda0);
                return dev;
            };
            SpectralField s0 = deviation(un);
            if (f0) s0 += *f0;
            std::optional<SpectralField> dhalf;
            if (df) {
                dhalf = *df;
                *dhalf *= 0.5;
            }
            SpectralField umid = etd(un, &s0, dhalf ? &*dhalf : nullptr, 0.5 * h);
            SpectralField s1 = deviation(umid);
            if (f0) s1 += *f0;
            next = etd(un, &s1, df ? &*df : nullptr, h);
        }
        double before = un.l2(), after = next.l2();
        if (before > 0.0) {
            dg.max_growth = std::max(dg.max_growth, after / before);
            if (after > 10.0 * before && f_series.empty())
                throw std::runtime_error("Lame IMEX step unstable (norm growth above 10x)");
        }
        if (!std::isfinite(after)) throw std::runtime_error("Lame step produced non-finite values");
        res.series.push_back(std::move(next));
    }
    return res;
}

}  // namespace plab
