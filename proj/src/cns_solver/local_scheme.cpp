#include <algorithm>
#include <cmath>

#include "plab/cns_solver.hpp"

namespace plab {
namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) acc += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
    return acc;
}

// -u.grad u - I(a) A u - G'(a) grad a
SpectralField momentum_source(const SpectralField& a, const SpectralField& u, const CnsParams& p) {
    Dealiaser de(a.grid());
    const PressureLaw& law = p.pressure;
    PointFunction I = inertia_function();
    PointFunction Gp{"G' - G'(0)", [&law](double z) { return law.k(z); }, [](double z) { return 1.0 + z > 0.0; }};
    SpectralField Ia = compose(I, a);
    SpectralField Ka = compose(Gp, a);
    SpectralField Au = lame_A(u, p);
    SpectralField ga = gradient(a);
    SpectralField out = advect(u, u);
    out += de.product(Ia, Au);
    out += de.product(Ka, ga);
    out.axpy(law.alpha(), ga);
    out *= -1.0;
    out.set_real(true);
    return out;
}

// -(1 + a) div u
SpectralField mass_source(const SpectralField& a, const SpectralField& u) {
    SpectralField div = divergence(u);
    SpectralField out = div;
    out += dealiased_product(a, div);
    out *= -1.0;
    return out;
}

}  // namespace

LocalSchemeResult local_iteration_scheme(const SpectralField& a0, const SpectralField& u0, const CnsParams& p,
                                         double T, const LocalSchemeOptions& opt) {
    validate(p, false);
    const double d = a0.grid().dim();
    if (opt.time_points < 3) throw std::invalid_argument("local scheme needs at least 3 time points");
    NormSpec crit_a{d / opt.p, opt.p, 1.0, std::nullopt, std::nullopt};
    if (besov_norm(a0, crit_a) > 0.5) throw std::domain_error("initial density perturbation is not small");

    LameCoefficients lc;
    lc.mu = p.mu;
    lc.lambda = p.lambda;
    LocalSchemeResult res;

    auto grad_integral = [&](const std::vector<SpectralField>& us, const std::vector<double>& t) {
        NormSpec s{d / opt.p, opt.p, 1.0, std::nullopt, std::nullopt};
        std::vector<double> y;
        for (const auto& u : us) y.push_back(besov_norm(jacobian(u), s));
        return trapezoid(t, y);
    };

    // shrink T until the free Lame flow satisfies the smallness gate
    std::vector<double> t;
    std::vector<SpectralField> a_n, u_n;
    for (int attempt = 0;; ++attempt) {
        t.clear();
        for (int k = 0; k < opt.time_points; ++k) t.push_back(T * k / (opt.time_points - 1));
        u_n = lame_solve(u0, {}, lc, t).series;
        if (grad_integral(u_n, t) <= opt.gate) break;
        if (attempt > 20) throw std::domain_error("local scheme gate cannot be met");
        T *= 0.5;
    }
    a_n.assign(t.size(), a0);
    res.T = T;
    res.t = t;

    NormSpec sa{d / opt.p - 1.0, opt.p, 1.0, std::nullopt, std::nullopt};
    NormSpec su{d / opt.p - 2.0, opt.p, 1.0, std::nullopt, std::nullopt};
    NormSpec su1{d / opt.p, opt.p, 1.0, std::nullopt, std::nullopt};
    int growth = 0;
    for (int n = 0; n < opt.n_max; ++n) {
        std::vector<SpectralField> a_next, u_next;
        if (opt.nonlinear) {
            std::vector<SpectralField> fa, gu;
            for (std::size_t k = 0; k < t.size(); ++k) {
                fa.push_back(mass_source(a_n[k], u_n[k]));
                gu.push_back(momentum_source(a_n[k], u_n[k], p));
            }
            a_next = transport_solve(u_n, a0, fa, 0.0, t, opt.transport).series;
            u_next = lame_solve(u0, gu, lc, t).series;
        } else {
            a_next.assign(t.size(), a0);
            u_next = lame_solve(u0, {}, lc, t).series;
        }
        if (opt.nonlinear && grad_integral(u_next, t) > 4.0 * opt.gate)
            throw std::runtime_error("local scheme iterate left the smallness gate");

        double sup_a = 0.0, sup_u = 0.0;
        std::vector<double> l1;
        for (std::size_t k = 0; k < t.size(); ++k) {
            SpectralField da = a_next[k] - a_n[k];
            SpectralField du = u_next[k] - u_n[k];
            sup_a = std::max(sup_a, besov_norm(da, sa));
            sup_u = std::max(sup_u, besov_norm(du, su));
            l1.push_back(besov_norm(du, su1));
        }
        double N = sup_a + 4.0 * (sup_u + trapezoid(t, l1));
        res.increments.push_back(N);
        a_n = std::move(a_next);
        u_n = std::move(u_next);
        res.iterations = n + 1;
        std::size_t m = res.increments.size();
        if (m >= 2 && res.increments[m - 2] > 0.0) {
            res.ratios.push_back(N / res.increments[m - 2]);
            growth = res.ratios.back() > 1.0 ? growth + 1 : 0;
        }
        double first = res.increments.front();
        if (N == 0.0 || (first > 0.0 && N <= opt.tol * first)) {
            res.converged = true;
            break;
        }
        if (growth >= 2) throw std::runtime_error("local scheme diverges: increments grew twice in a row");
    }
    // asymptotic ratio over the tail: ratios whose increments stay well above the round-off floor
    double first = res.increments.empty() ? 0.0 : res.increments.front();
    std::vector<double> tail;
    for (std::size_t i = 0; i < res.ratios.size(); ++i)
        if (res.increments[i + 1] > 1e-9 * first) tail.push_back(res.ratios[i]);
    if (tail.size() > 3) tail.erase(tail.begin(), tail.end() - 3);
    for (double r : tail) res.asymptotic_ratio = std::max(res.asymptotic_ratio, r);
    res.a = std::move(a_n);
    res.u = std::move(u_n);
    return res;
}

}  // namespace plab
