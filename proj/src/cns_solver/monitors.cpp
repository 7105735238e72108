#include <algorithm>
#include <cmath>

#include "plab/cns_solver.hpp"

namespace plab {
namespace {

double wsum(const std::vector<double>& bn, int jmin, double s) { return weighted_sum(bn, jmin, s, 1.0); }

struct Split {
    SpectralField a_lo, a_hi, u_lo, u_hi;
};

Split cut(const CnsState& s, int k0) {
    Split sp;
    sp.a_lo = low_cut(s.a, k0 + 1);
    sp.a_hi = s.a - sp.a_lo;
    sp.u_lo = low_cut(s.u, k0 + 1);
    sp.u_hi = s.u - sp.u_lo;
    return sp;
}

void running_max(std::vector<double>& acc, const std::vector<double>& v, double w = 1.0) {
    if (acc.empty()) acc.assign(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] = std::max(acc[i], w * v[i]);
}

double bracket(double t) { return std::sqrt(1.0 + t * t); }

}  // namespace

MonitorAccumulator::MonitorAccumulator(const TorusGrid& g, const MonitorOptions& opt) : grid_(g), opt_(opt) {
    jmin_ = resolvable_range(g).jmin;
    int d = g.dim();
    for (double s = -d / 2.0 + 0.25; s <= 2.0 + 1e-12; s += 0.25) s_grid_.push_back(s);
}

void MonitorAccumulator::update(const CnsState& s) {
    const int d = grid_.dim();
    const double p = opt_.p;
    Split sp = cut(s, opt_.k0);
    auto low = pair_block_norms(sp.a_lo, sp.u_lo, 2.0);
    auto ah = block_norms(sp.a_hi, p);
    auto uh = block_norms(sp.u_hi, p);
    double t = s.t;

    running_max(sup_low_, low);
    running_max(sup_ah_, ah);
    running_max(sup_uh_, uh);
    double l1[3] = {wsum(low, jmin_, d / 2.0 + 1.0), wsum(ah, jmin_, d / p), wsum(uh, jmin_, d / p + 1.0)};
    if (started_) {
        double dt = t - t_prev_;
        for (int k = 0; k < 3; ++k) terms_[2 * k + 1] += 0.5 * dt * (l1[k] + l1_prev_[k]);
    }
    terms_[0] = wsum(sup_low_, jmin_, d / 2.0 - 1.0);
    terms_[2] = wsum(sup_ah_, jmin_, d / p);
    terms_[4] = wsum(sup_uh_, jmin_, d / p - 1.0);
    for (int k = 0; k < 3; ++k) l1_prev_[k] = l1[k];
    if (!started_) xp0_ = terms_[0] + terms_[2] + terms_[4];

    // decay functional pieces (p = 2 framework)
    double alpha = std::min(d / 4.0 + 2.0, d / 2.0 + 0.5 - opt_.decay_eps);
    auto ga_h = block_norms(gradient(sp.a_hi), 2.0);
    auto uh2 = p == 2.0 ? uh : block_norms(sp.u_hi, 2.0);
    std::vector<double> pair_h(ga_h.size());
    for (std::size_t i = 0; i < pair_h.size(); ++i) pair_h[i] = std::hypot(ga_h[i], uh2[i]);
    running_max(sup_alpha_, pair_h, std::pow(bracket(t), alpha));
    auto gu_h = block_norms(jacobian(sp.u_hi), 2.0);
    running_max(sup_tgrad_, gu_h, t);

    row_.t = t;
    row_.besov_s0_low = wsum(low, jmin_, 0.0);
    row_.besov_s1_low = wsum(low, jmin_, 1.0);
    double dlow = 0.0;
    for (double sg : s_grid_) dlow = std::max(dlow, std::pow(bracket(t), d / 4.0 + sg / 2.0) * wsum(low, jmin_, sg));
    row_.D_low = std::max(row_.D_low, dlow);
    row_.D_high_alpha = wsum(sup_alpha_, jmin_, d / 2.0 - 1.0);
    row_.D_tnablau_high = t * wsum(gu_h, jmin_, d / 2.0);
    row_.D_tnablau_tilde = wsum(sup_tgrad_, jmin_, d / 2.0);
    row_.Xp = terms_[0] + terms_[1] + terms_[2] + terms_[3] + terms_[4] + terms_[5];
    row_.l2 = std::hypot(s.a.l2(), s.u.l2());
    auto as = s.a.real_samples();
    double amax = 0.0, amin = 0.0;
    for (double v : as) {
        amax = std::max(amax, std::abs(v));
        amin = std::min(amin, v);
    }
    row_.a_inf = amax;
    row_.min_density = 1.0 + amin;
    row_.mass = s.a.mean().real();
    t_prev_ = t;
    started_ = true;
}

MonitorRow MonitorAccumulator::current() const { return row_; }

double initial_size(const CnsState& s, const MonitorOptions& opt) {
    MonitorAccumulator acc(s.a.grid(), opt);
    acc.update(s);
    return acc.Xp0();
}

double decay_data_size(const CnsState& s, int k0) {
    const TorusGrid& g = s.a.grid();
    JRange r = resolvable_range(g);
    double best = 0.0;
    for (int k = r.jmin; k <= std::min(k0, r.jmax); ++k) {
        const auto& w = block_weights(g, k);
        double ma = 0.0, mu = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (w[i] == 0.0) continue;
            ma = std::max(ma, w[i] * std::abs(s.a.coeffs()[i]));
            double e = 0.0;
            for (int c = 0; c < s.u.components(); ++c) e += std::norm(s.u.coeffs(c)[i]);
            mu = std::max(mu, w[i] * std::sqrt(e));
        }
        best = std::max(best, ma + mu);
    }
    return best;
}

double convolution_constant(double s1, double s2, double t_max) {
    if (!(s1 > 0.0 && s2 >= s1 && s2 > 1.0)) throw std::invalid_argument("need 0 < s1 <= s2 and s2 > 1");
    double best = 0.0;
    for (int it = 0; it <= 400; ++it) {
        double t = t_max * std::pow(it / 400.0, 2.0);
        // composite Simpson with a graded count
        int n = 2 * std::max(50, static_cast<int>(20.0 * t));
        double h = t / n, acc = 0.0;
        for (int i = 0; i <= n && t > 0.0; ++i) {
            double tau = i * h;
            double f = std::pow(bracket(t - tau), -s1) * std::pow(bracket(tau), -s2);
            acc += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
        }
        acc *= h / 3.0;
        best = std::max(best, std::pow(bracket(t), s1) * acc);
    }
    return best;
}

}  // namespace plab
