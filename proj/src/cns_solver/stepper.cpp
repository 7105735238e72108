#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "plab/cns_solver.hpp"

namespace plab {
namespace {

double state_norm(const CnsState& s) { return std::hypot(s.a.l2(), s.u.l2()); }

}  // namespace

CnsStepper::CnsStepper(const TorusGrid& grid, const CnsParams& params) : grid_(grid), params_(params) {
    validate(params_, false);
    std::unordered_map<long long, std::size_t> index;
    shell_.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Idx3 k = grid.mode(i);
        long long kk = 0;
        for (int a = 0; a < grid.dim(); ++a) kk += static_cast<long long>(k[a]) * k[a];
        auto it = index.find(kk);
        if (it == index.end()) {
            it = index.emplace(kk, shell_rho_.size()).first;
            shell_rho_.push_back(std::sqrt(static_cast<double>(kk)) / grid.box_scale());
        }
        shell_[i] = it->second;
    }
}

const CnsStepper::Table& CnsStepper::table(double h) {
    auto it = cache_.find(h);
    if (it != cache_.end()) return it->second;
    if (cache_.size() > 8) cache_.clear();
    Table tb;
    std::size_t ns = shell_rho_.size();
    tb.E.resize(ns);
    tb.W1.resize(ns);
    tb.pE.resize(ns);
    tb.pW1.resize(ns);
    double alpha = params_.alpha(), nu = params_.nu(), eps = params_.eps;
    for (std::size_t s = 0; s < ns; ++s) {
        double rho = shell_rho_[s];
        PhiSet ps = phi_set(mode_matrix(rho, alpha, nu, eps), h);
        tb.E[s] = ps.E;
        tb.W1[s] = ps.W1;
        ScalarPhi sp = scalar_phi(params_.mu * rho * rho, h);
        tb.pE[s] = sp.E;
        tb.pW1[s] = sp.W1;
    }
    return cache_.emplace(h, std::move(tb)).first->second;
}

CnsState CnsStepper::apply_linear(const CnsState& s, const Forcing* N, const Table& tb, double h) const {
    const TorusGrid& g = grid_;
    int d = g.dim();
    CnsState out{SpectralField(g, 1, true), SpectralField(g, d, true), s.t + h};
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::size_t sh = shell_[i];
        if (i == 0) {
            out.a.coeffs()[0] = s.a.coeffs()[0] + (N ? h * N->f.coeffs()[0] : cplx(0));
            for (int c = 0; c < d; ++c)
                out.u.coeffs(c)[0] = s.u.coeffs(c)[0] + (N ? h * N->g.coeffs(c)[0] : cplx(0));
            continue;
        }
        Vec3 x = g.xi(i);
        double rho = shell_rho_[sh];
        Vec3 e{x[0] / rho, x[1] / rho, x[2] / rho};
        auto split = [&](const SpectralField& u, cplx& v, std::array<cplx, 3>& P) {
            cplx dot = 0.0;
            for (int c = 0; c < d; ++c) dot += e[c] * u.coeffs(c)[i];
            v = cplx(0.0, 1.0) * dot;
            for (int c = 0; c < d; ++c) P[c] = u.coeffs(c)[i] - e[c] * dot;
        };
        cplx v;
        std::array<cplx, 3> P{};
        split(s.u, v, P);
        Amp2 y = plab::apply(tb.E[sh], {s.a.coeffs()[i], v});
        std::array<cplx, 3> Pn{};
        for (int c = 0; c < d; ++c) Pn[c] = tb.pE[sh] * P[c];
        if (N) {
            cplx gv;
            std::array<cplx, 3> gP{};
            split(N->g, gv, gP);
            Amp2 w = plab::apply(tb.W1[sh], {N->f.coeffs()[i], gv});
            y[0] += w[0];
            y[1] += w[1];
            for (int c = 0; c < d; ++c) Pn[c] += tb.pW1[sh] * gP[c];
        }
        out.a.coeffs()[i] = y[0];
        // Q u = -i e v
        for (int c = 0; c < d; ++c) out.u.coeffs(c)[i] = Pn[c] - cplx(0.0, 1.0) * e[c] * y[1];
    }
    return out;
}

CnsState CnsStepper::linear_propagate(const CnsState& s, double h) { return apply_linear(s, nullptr, table(h), h); }

CnsStepper::Outcome CnsStepper::step(CnsState& s, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
    Outcome oc;
    const Table& th = table(h);
    CnsState lin = apply_linear(s, nullptr, th, h);
    oc.linear_norm = state_norm(lin);
    if (!params_.nonlinear) {
        s = std::move(lin);
        return oc;
    }
    Forcing n0 = nonlinear_rhs(s, params_);
    CnsState mid = apply_linear(s, &n0, table(0.5 * h), 0.5 * h);
    Forcing n1 = nonlinear_rhs(mid, params_);
    CnsState out = apply_linear(s, &n1, table(h), h);
    CnsState inc{out.a - lin.a, out.u - lin.u, 0.0};
    oc.nonlinear_norm = state_norm(inc);
    if (oc.linear_norm > 0.0 && oc.nonlinear_norm > 0.5 * oc.linear_norm) {
        oc.accepted = false;
        return oc;
    }
    if (!std::isfinite(oc.nonlinear_norm)) throw std::runtime_error("non-finite state in cns_step");
    s = std::move(out);
    return oc;
}

CnsState cns_step(const CnsState& s, const CnsParams& p, double h) {
    CnsStepper st(s.a.grid(), p);
    CnsState out = s;
    auto oc = st.step(out, h);
    if (!oc.accepted) throw std::runtime_error("step rejected: nonlinear increment too large, retry with h/2");
    return out;
}

}  // namespace plab
