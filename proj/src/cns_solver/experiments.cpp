#include <algorithm>
#include <cmath>
#include <thread>

#include "plab/cns_solver.hpp"

namespace plab {

RunResult cns_run(const CnsState& s0, const CnsParams& p, double T, const RunOptions& opt) {
    validate(p, false);
    if (!(opt.dt > 0.0) || !(opt.output_every > 0.0)) throw std::invalid_argument("dt and output stride must be positive");
    const TorusGrid& g = s0.a.grid();
    CnsStepper st(g, p);
    MonitorAccumulator mon(g, opt.monitor);
    RunResult res;
    CnsState s = s0;
    double mass0 = s.a.mean().real();
    double tol = 1e-9 * opt.output_every;

    auto record = [&]() {
        if (opt.monitors) res.rows.push_back(mon.current());
        if (opt.keep_trajectory) res.trajectory.push_back(s);
        if (opt.on_output) opt.on_output(s);
        res.max_imag_residue = std::max({res.max_imag_residue, imaginary_residue(s.a), imaginary_residue(s.u)});
    };
    auto observe = [&]() -> bool {
        res.min_density = std::min(res.min_density, min_density(s.a, p.eps));
        res.mass_drift = std::max(res.mass_drift, std::abs(s.a.mean().real() - mass0));
        if (opt.monitors) {
            mon.update(s);
            if (mon.Xp0() > 0.0) res.max_Xp_ratio = std::max(res.max_Xp_ratio, mon.current().Xp / mon.Xp0());
        }
        if (opt.density_gate) {
            auto as = s.a.real_samples();
            double m = 0.0;
            for (double v : as) m = std::max(m, std::abs(p.eps * v));
            if (m > 0.5) {
                res.stop = StopReason::density_gate;
                res.diagnostic = "||a||_inf = " + std::to_string(m) + " exceeds 1/2 at t = " + std::to_string(s.t);
                return false;
            }
        }
        return true;
    };

    bool ok = observe();
    res.Xp0 = opt.monitors ? mon.Xp0() : initial_size(s0, opt.monitor);
    record();
    if (!ok) return res;

    double next_out = s.t + opt.output_every;
    double t_end = s0.t + T;
    double h = opt.dt;
    int halvings = 0;
    while (s.t < t_end - tol) {
        double step = std::min({h, next_out - s.t, t_end - s.t});
        auto oc = st.step(s, step);
        if (!oc.accepted) {
            ++res.rejections;
            if (++halvings > opt.max_halvings)
                throw std::runtime_error("step rejection cascade: more than " + std::to_string(opt.max_halvings) +
                                         " consecutive halvings");
            h = 0.5 * step;
            continue;
        }
        halvings = 0;
        ++res.steps;
        if (h < opt.dt) h = std::min(opt.dt, 2.0 * h);
        if (std::abs(s.t - next_out) <= tol) s.t = next_out;
        if (opt.on_step) opt.on_step(s);
        ok = observe();
        if (std::abs(s.t - next_out) <= tol || !ok) {
            record();
            next_out += opt.output_every;
        }
        if (!ok) break;
    }
    return res;
}

// ---------------------------------------------------------------- low Mach

double low_mach_size(const CnsState& s, double eps, double nu, double p, int j0) {
    const TorusGrid& g = s.a.grid();
    int d = g.dim();
    JRange r = resolvable_range(g);
    double beta = eps * nu;
    auto low = pair_block_norms(s.a, s.u, 2.0);
    auto uh = block_norms(s.u, p);
    auto ah = block_norms(s.a, p);
    double lo = 0.0, hu = 0.0, ha = 0.0;
    for (int j = r.jmin; j <= r.jmax; ++j) {
        std::size_t i = static_cast<std::size_t>(j - r.jmin);
        if (std::ldexp(beta, j) <= std::ldexp(1.0, j0))
            lo += std::pow(2.0, j * (d / 2.0 - 1.0)) * low[i];
        else {
            hu += std::pow(2.0, j * (d / p - 1.0)) * uh[i];
            ha += std::pow(2.0, j * (d / p)) * ah[i];
        }
    }
    return lo + hu + beta * ha;
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

LowMachResult low_mach_experiment(const LowMachConfig& cfg, const CnsParams& base) {
    if (cfg.eps_list.empty()) throw std::invalid_argument("empty eps list");
    TorusGrid g = make_grid(cfg.dim, cfg.n, cfg.box);
    double nu = base.nu();

    RandomFieldOptions ro;
    ro.band = 3;
    ro.decay = 1.0;
    SpectralField v0 = helmholtz_project(random_field(g, cfg.dim, cfg.seed, ro)).first;
    double vmax = lebesgue_norm(v0, kInf);
    if (vmax > 0.0) v0 *= cfg.v_amplitude / vmax;

    IncompressibleResult ref = incompressible_run(v0, base.mu, cfg.T, 0.005, cfg.output_every);

    LowMachResult out;
    out.rows.resize(cfg.eps_list.size());
    out.expected_exponent = 1.0 - cfg.dim / cfg.p;
    std::vector<std::exception_ptr> errors(cfg.eps_list.size());

    auto job = [&](std::size_t idx) {
        try {
            double eps = cfg.eps_list[idx];
            double kf = 1.0 / eps;
            // oscillating data Q[phi(x) sin(x . omega / eps) omega] with omega = e_1
            SpectralField osc = SpectralField::from_function(g, cfg.dim, [&](const Vec3& x, double* o) {
                double M = g.box_scale();
                double v = 1.0;
                for (int a = 0; a < g.dim(); ++a) v *= std::exp(2.0 * (std::cos(x[a] / M) - 1.0));
                for (int a = 0; a < g.dim(); ++a) o[a] = 0.0;
                o[0] = v * std::sin(kf * x[0]);
            });
            osc = helmholtz_project(osc).second;
            osc *= cfg.amplitude;

            CnsState s0 = zero_state(g);
            s0.u = v0;
            if (!cfg.well_prepared) s0.u += osc;
            CnsParams p = base;
            p.eps = eps;
            LowMachRow row;
            row.eps = eps;
            row.C0 = low_mach_size(s0, eps, nu, cfg.p, cfg.j0);
            if (row.C0 > 10.0 * cfg.eta * nu)
                throw std::domain_error("low Mach data violate the smallness gate: C0 = " + std::to_string(row.C0));
            NormSpec ds{cfg.dim / cfg.p - 1.0, cfg.p, 1.0, std::nullopt, std::nullopt};
            row.data_norm = besov_norm(osc, ds);
            row.Pu0_norm = helmholtz_project(s0.u).first.l2();

            RunOptions ro2;
            ro2.dt = std::min(0.01, 0.25 * eps * eps);
            ro2.output_every = cfg.output_every;
            ro2.monitors = false;
            ro2.density_gate = false;
            ro2.keep_trajectory = false;
            std::size_t k = 0;
            ro2.on_output = [&](const CnsState& s) {
                auto [P, Q] = helmholtz_project(s.u);
                if (s.t >= cfg.t_layer - 1e-9) row.sup_Qu_L2 = std::max(row.sup_Qu_L2, Q.l2());
                if (k < ref.trajectory.size()) {
                    P -= ref.trajectory[k];
                    row.err_Pu_vs_v = std::max(row.err_Pu_vs_v, P.l2());
                }
                ++k;
            };
            cns_run(s0, p, cfg.T, ro2);
            out.rows[idx] = row;
        } catch (...) {
            errors[idx] = std::current_exception();
        }
    };
    int nt = std::max(1, cfg.threads);
    for (std::size_t start = 0; start < cfg.eps_list.size(); start += nt) {
        std::vector<std::thread> pool;
        for (std::size_t i = start; i < std::min(cfg.eps_list.size(), start + nt); ++i) pool.emplace_back(job, i);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<double> lx, ly;
    for (const auto& r : out.rows) {
        lx.push_back(std::log(r.eps));
        ly.push_back(std::log(r.data_norm));
    }
    if (lx.size() >= 2) out.fitted_exponent = fit_slope(lx, ly);
    return out;
}

// ---------------------------------------------------------------- decay

CnsState decay_initial_state(const DecayConfig& cfg) {
    TorusGrid g = make_grid(cfg.dim, cfg.n, cfg.box);
    double L = 2.0 * kPi * cfg.box;
    auto gauss = [&](const Vec3& x, const Vec3& c) {
        double r2 = 0.0;
        for (int a = 0; a < cfg.dim; ++a) {
            double dx = std::remainder(x[a] - c[a], L);
            r2 += dx * dx;
        }
        return std::exp(-r2 / (2.0 * cfg.width * cfg.width));
    };
    Vec3 c{0.5 * L, 0.5 * L, 0.5 * L};
    Vec3 c1{0.5 * L + cfg.width, 0.5 * L, 0.5 * L};
    Vec3 c2{0.5 * L, 0.5 * L - cfg.width, 0.5 * L};
    CnsState s = zero_state(g);
    s.a = SpectralField::from_function(g, 1, [&](const Vec3& x, double* o) { o[0] = cfg.amplitude * gauss(x, c); });
    s.u = SpectralField::from_function(g, cfg.dim, [&](const Vec3& x, double* o) {
        for (int a = 0; a < cfg.dim; ++a) o[a] = 0.0;
        o[0] = cfg.amplitude * gauss(x, c1);
        o[1] = -cfg.amplitude * gauss(x, c2);
    });
    s.a.coeffs()[0] = 0.0;
    for (int a = 0; a < cfg.dim; ++a) s.u.coeffs(a)[0] = 0.0;
    return s;
}

DecayTable decay_run(const DecayConfig& cfg, const CnsParams& p) {
    if (cfg.box < 8.0) throw std::invalid_argument("decay runs need a box scale M >= 8");
    DecayTable tab;
    tab.t_gap = cfg.box * cfg.box / 4.0;
    if (tab.t_gap < 10.0) throw std::domain_error("algebraic window is empty; raise M");
    tab.window_lo = 10.0;
    tab.window_hi = std::min(cfg.T, tab.t_gap);
    CnsState s0 = decay_initial_state(cfg);
    tab.D0 = decay_data_size(s0, cfg.monitor.k0);
    CnsParams pp = p;
    pp.nonlinear = cfg.nonlinear;
    RunOptions ro;
    ro.dt = cfg.dt;
    ro.output_every = cfg.output_every;
    ro.keep_trajectory = false;
    ro.monitor = cfg.monitor;
    tab.run = cns_run(s0, pp, cfg.T, ro);
    return tab;
}

}  // namespace plab
