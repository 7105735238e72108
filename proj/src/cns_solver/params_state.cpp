#include <algorithm>
#include <cmath>

#include "plab/cns_solver.hpp"

namespace plab {

PressureLaw gamma_law(double gamma, double scale) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    PressureLaw law;
    law.name = "gamma=" + std::to_string(gamma);
    law.P = [gamma, scale](double r) { return scale * std::pow(r, gamma) / gamma; };
    law.dP = [gamma, scale](double r) { return scale * std::pow(r, gamma - 1.0); };
    return law;
}

void validate(const CnsParams& p, bool require_stability) {
    if (!(p.mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (!(p.nu() > 0.0)) throw std::invalid_argument("nu = lambda + 2 mu must be positive");
    if (!(p.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!p.pressure.P || !p.pressure.dP) throw std::invalid_argument("pressure law is incomplete");
    if (require_stability && !(p.alpha() > 0.0)) throw std::invalid_argument("P'(1) must be positive");
}

CnsState zero_state(const TorusGrid& g) { return {SpectralField(g, 1, true), SpectralField(g, g.dim(), true), 0.0}; }

double min_density(const SpectralField& a, double eps) {
    auto s = a.real_samples();
    double m = *std::min_element(s.begin(), s.end());
    return 1.0 + eps * m;
}

SpectralField lame_A(const SpectralField& u, const CnsParams& p) { return lame_operator(u, p.mu, p.lambda); }

Forcing nonlinear_rhs(const CnsState& s, const CnsParams& p) {
    const TorusGrid& g = s.a.grid();
    int d = g.dim();
    Dealiaser de(g);
    double eps = p.eps;
    const PressureLaw& law = p.pressure;

    // every factor on the padded grid, two real fields per transform
    SpectralField Du = jacobian(s.u);
    SpectralField Au = lame_A(s.u, p);
    SpectralField ga = gradient(s.a);
    std::vector<const std::vector<cplx>*> in{&s.a.coeffs()};
    for (int c = 0; c < d; ++c) in.push_back(&s.u.coeffs(c));
    for (int c = 0; c < d * d; ++c) in.push_back(&Du.coeffs(c));
    for (int c = 0; c < d; ++c) in.push_back(&Au.coeffs(c));
    for (int c = 0; c < d; ++c) in.push_back(&ga.coeffs(c));
    std::vector<std::vector<double>> phys(in.size());
    static const std::vector<cplx> none;
    for (std::size_t k = 0; k < in.size(); k += 2) {
        auto pr = de.to_physical_pair(*in[k], k + 1 < in.size() ? *in[k + 1] : none);
        phys[k] = std::move(pr.first);
        if (k + 1 < in.size()) phys[k + 1] = std::move(pr.second);
    }
    const auto& pa = phys[0];
    auto pu = [&](int c) -> const std::vector<double>& { return phys[1 + c]; };
    auto pDu = [&](int c, int ax) -> const std::vector<double>& { return phys[1 + d + c * d + ax]; };
    auto pA = [&](int c) -> const std::vector<double>& { return phys[1 + d + d * d + c]; };
    auto pg = [&](int c) -> const std::vector<double>& { return phys[1 + 2 * d + d * d + c]; };

    // density positivity on the padded samples used for the compositions
    for (double z : pa)
        if (!(1.0 + eps * z > 0.0)) throw DensityError("density positivity lost (1 + a <= 0)");

    // I(eps a) and k(eps a)/eps, truncated to the grid as in compose()
    std::size_t np = de.padded_size();
    std::vector<double> vi(np), vk(np);
    for (std::size_t i = 0; i < np; ++i) {
        vi[i] = eps * pa[i] / (1.0 + eps * pa[i]);
        vk[i] = law.k(eps * pa[i]) / eps;
    }
    auto [ci, ck] = de.to_coeffs_pair(vi, vk);
    auto [pI, pK] = de.to_physical_pair(ci, ck);

    // a u for the mass flux, then u.grad u + I(eps a) A u + k(eps a)/eps grad a
    std::vector<std::vector<double>> outp(2 * d, std::vector<double>(np, 0.0));
    for (int c = 0; c < d; ++c) {
        auto& au = outp[c];
        auto& gc = outp[d + c];
        const auto& uc = pu(c);
        for (std::size_t i = 0; i < np; ++i) au[i] = pa[i] * uc[i];
        for (int ax = 0; ax < d; ++ax) {
            const auto& ua = pu(ax);
            const auto& dd = pDu(c, ax);
            for (std::size_t i = 0; i < np; ++i) gc[i] -= ua[i] * dd[i];
        }
        const auto& A = pA(c);
        const auto& G = pg(c);
        for (std::size_t i = 0; i < np; ++i) gc[i] -= pI[i] * A[i] + pK[i] * G[i];
    }
    SpectralField au(g, d, true);
    Forcing out;
    out.g = SpectralField(g, d, true);
    auto target = [&](int k) -> std::vector<cplx>& { return k < d ? au.coeffs(k) : out.g.coeffs(k - d); };
    for (int k = 0; k < 2 * d; k += 2) {
        auto pr = de.to_coeffs_pair(outp[k], outp[k + 1]);
        target(k) = std::move(pr.first);
        target(k + 1) = std::move(pr.second);
    }
    out.f = divergence(au);
    out.f *= -1.0;
    return out;
}

SpectralField effective_velocity(const CnsState& s) {
    SpectralField rhs = s.a;
    rhs -= divergence(s.u);
    return grad_inverse_laplacian(rhs);
}

std::pair<CnsState, CnsParams> rescale_state(const CnsState& s, const CnsParams& p, double ell) {
    if (!(ell > 0.0)) throw std::invalid_argument("scale must be positive");
    double m = std::log2(ell);
    if (std::abs(m - std::round(m)) > 1e-12) throw std::invalid_argument("scale must be a power of two");
    const TorusGrid& g = s.a.grid();
    TorusGrid ng = make_grid(g.dim(), g.n(), g.box_scale() / ell);
    double cf = std::pow(ell, -g.dim());
    CnsState out{SpectralField(ng, 1, true), SpectralField(ng, g.dim(), true), s.t / (ell * ell)};
    out.a.coeffs() = s.a.coeffs();
    out.a *= cf;
    for (int c = 0; c < g.dim(); ++c) out.u.coeffs(c) = s.u.coeffs(c);
    out.u *= cf * ell;
    CnsParams np = p;
    PressureLaw base = p.pressure;
    double l2 = ell * ell;
    np.pressure.name = base.name + " x" + std::to_string(l2);
    np.pressure.P = [base, l2](double r) { return l2 * base.P(r); };
    np.pressure.dP = [base, l2](double r) { return l2 * base.dP(r); };
    return {out, np};
}

}  // namespace plab
