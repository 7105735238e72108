#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>

#include "plab/linear_models.hpp"

namespace plab {

ModeMatrix mode_matrix(double rho) { return mode_matrix(rho, 1.0, 1.0, 1.0); }

ModeMatrix mode_matrix(double rho, double alpha, double nu, double eps) {
    if (rho < 0.0) throw std::invalid_argument("rho must be nonnegative");
    ModeMatrix M;
    M.rho = rho;
    M.alpha = alpha;
    M.nu = nu;
    M.eps = eps;
    M.m = {{{0.0, -rho / eps}, {alpha * rho / eps, -nu * rho * rho}}};
    return M;
}

ModeSpectrum mode_spectrum(double rho) {
    if (rho < 0.0) throw std::invalid_argument("rho must be nonnegative");
    ModeSpectrum sp;
    double h = -0.5 * rho * rho;
    if (rho == 2.0) {
        sp.regime = ModeRegime::defective;
        sp.lambda_plus = sp.lambda_minus = -2.0;
    } else if (rho < 2.0) {
        sp.regime = ModeRegime::oscillatory;
        sp.S = rho > 0.0 ? std::sqrt(4.0 / (rho * rho) - 1.0) : 0.0;
        // rho S = sqrt(4 - rho^2) keeps rho -> 0 finite
        double im = 0.5 * rho * std::sqrt(4.0 - rho * rho);
        sp.lambda_plus = cplx(h, -im);
        sp.lambda_minus = cplx(h, im);
    } else {
        sp.regime = ModeRegime::overdamped;
        sp.R = std::sqrt(1.0 - 4.0 / (rho * rho));
        sp.lambda_plus = h * (1.0 + sp.R);
        sp.lambda_minus = h * (1.0 - sp.R);
    }
    return sp;
}

namespace {

// C(w) = cosh sqrt(w), S(w) = sinh sqrt(w) / sqrt(w) as power series in w.
void cs_series(double w, double& C, double& S) {
    double termC = 1.0, termS = 1.0;
    C = 1.0;
    S = 1.0;
    for (int k = 1; k < 40; ++k) {
        termC *= w / ((2.0 * k - 1.0) * (2.0 * k));
        termS *= w / ((2.0 * k) * (2.0 * k + 1.0));
        C += termC;
        S += termS;
        if (std::abs(termC) < 1e-18 * std::abs(C) && std::abs(termS) < 1e-18 * std::abs(S)) break;
    }
}

}  // namespace

Mat2 propagator(const ModeMatrix& M, double t) {
    double m = 0.5 * M.trace();
    double q = m * m - M.det();
    double w = t * t * q;
    Mat2 N = M.m;
    N[0][0] -= m;
    N[1][1] -= m;
    double c, s;  // e^{tm} C(w) and e^{tm} S(w)
    bool near_double = M.alpha == 1.0 && M.nu == 1.0 && M.eps == 1.0 &&
                       std::abs(M.rho - 2.0) < kDefectiveRadius;
    if (near_double || std::abs(w) <= 1.0) {
        double C, S;
        cs_series(w, C, S);
        double e = std::exp(t * m);
        c = e * C;
        s = e * S;
    } else if (w > 0.0) {
        double r = std::sqrt(w);
        double ep = std::exp(t * m + r), em = std::exp(t * m - r);
        c = 0.5 * (ep + em);
        s = 0.5 * (ep - em) / r;
    } else {
        double r = std::sqrt(-w);
        double e = std::exp(t * m);
        c = e * std::cos(r);
        s = e * std::sin(r) / r;
    }
    Mat2 E;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) E[i][j] = (i == j ? c : 0.0) + t * s * N[i][j];
    return E;
}

PhiSet phi_set(const ModeMatrix& M, double h) {
    Eigen::Matrix<double, 6, 6> Z = Eigen::Matrix<double, 6, 6>::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) Z(i, j) = h * M.m[i][j];
    Z(0, 2) = Z(1, 3) = 1.0;
    Z(2, 4) = Z(3, 5) = 1.0;
    Eigen::Matrix<double, 6, 6> X = Z.exp();
    PhiSet ps;
    ps.E = propagator(M, h);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            ps.W1[i][j] = h * X(i, 2 + j);
            ps.W2[i][j] = h * X(i, 4 + j);
        }
    return ps;
}

ScalarPhi scalar_phi(double lambda, double h) {
    double z = -lambda * h;
    ScalarPhi r;
    r.E = std::exp(z);
    double p1, p2;
    if (std::abs(z) < 0.1) {
        p1 = 0.0;
        p2 = 0.0;
        double term1 = 1.0, term2 = 0.5;  // z^k/(k+1)!, z^k/(k+2)!
        for (int k = 0; k < 30; ++k) {
            p1 += term1;
            p2 += term2;
            term1 *= z / (k + 2.0);
            term2 *= z / (k + 3.0);
        }
    } else {
        double em1 = std::expm1(z);
        p1 = em1 / z;
        p2 = (em1 - z) / (z * z);
    }
    r.W1 = h * p1;
    r.W2 = h * p2;
    return r;
}

Amp2 apply(const Mat2& m, const Amp2& x) {
    return {m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]};
}

std::vector<Amp2> mode_propagate(const ModeMatrix& M, cplx A0, cplx V0,
                                 const std::vector<cplx>& f_series,
                                 const std::vector<cplx>& h_series, const std::vector<double>& t_grid) {
    std::size_t n = t_grid.size();
    if (!f_series.empty() && f_series.size() != n) throw std::invalid_argument("f_series size mismatch");
    if (!h_series.empty() && h_series.size() != n) throw std::invalid_argument("h_series size mismatch");
    auto src = [&](std::size_t k) -> Amp2 {
        return {f_series.empty() ? cplx(0) : f_series[k], h_series.empty() ? cplx(0) : h_series[k]};
    };
    std::vector<Amp2> out;
    out.reserve(n);
    if (n == 0) return out;
    Amp2 x{A0, V0};
    out.push_back(x);
    bool sources = !f_series.empty() || !h_series.empty();
    for (std::size_t k = 1; k < n; ++k) {
        double h = t_grid[k] - t_grid[k - 1];
        if (!(h > 0.0)) throw std::invalid_argument("t_grid must be increasing");
        Amp2 nx;
        if (sources) {
            PhiSet ps = phi_set(M, h);
            Amp2 s0 = src(k - 1), s1 = src(k);
            Amp2 ds{s1[0] - s0[0], s1[1] - s0[1]};
            Amp2 a = plab::apply(ps.E, x), b = plab::apply(ps.W1, s0), c = plab::apply(ps.W2, ds);
            nx = {a[0] + b[0] + c[0], a[1] + b[1] + c[1]};
        } else {
            nx = plab::apply(propagator(M, h), x);
        }
        x = nx;
        out.push_back(x);
    }
    return out;
}

std::vector<Amp2> mode_propagate(cplx A0, cplx V0, double rho, const std::vector<cplx>& f_series,
                                 const std::vector<cplx>& h_series, const std::vector<double>& t_grid) {
    return mode_propagate(mode_matrix(rho), A0, V0, f_series, h_series, t_grid);
}

LyapunovState lyapunov(cplx A, cplx V, double rho) {
    LyapunovState s{A, V, rho, 0.0};
    s.L2 = 2.0 * (std::norm(A) + std::norm(V)) + rho * rho * std::norm(A) -
           2.0 * rho * std::real(A * std::conj(V));
    return s;
}

double lyapunov_rate(cplx A, cplx V, double rho) {
    cplx dA = -rho * V;
    cplx dV = rho * A - rho * rho * V;
    return 4.0 * std::real(dA * std::conj(A) + dV * std::conj(V)) +
           2.0 * rho * rho * std::real(dA * std::conj(A)) -
           2.0 * rho * std::real(dA * std::conj(V) + A * std::conj(dV));
}

LyapunovReport lyapunov_decay_check(cplx A0, cplx V0, double rho, double T, double c, int samples) {
    LyapunovReport rep;
    ModeMatrix M = mode_matrix(rho);
    double L0 = lyapunov(A0, V0, rho).L2;
    if (L0 == 0.0) return rep;
    double rate = c * std::min(1.0, rho * rho);
    for (int k = 0; k <= samples; ++k) {
        double t = T * k / samples;
        Amp2 x = plab::apply(propagator(M, t), {A0, V0});
        double L = lyapunov(x[0], x[1], rho).L2;
        double diss = -2.0 * rho * rho * (std::norm(x[0]) + std::norm(x[1]));
        rep.max_identity_residual =
            std::max(rep.max_identity_residual, std::abs(lyapunov_rate(x[0], x[1], rho) - diss) / L0);
        double dt = 1e-4 * std::min(1.0, 1.0 / std::max(rho * rho, 1e-12));
        if (t > dt) {
            Amp2 xp = plab::apply(propagator(M, t + dt), {A0, V0});
            Amp2 xm = plab::apply(propagator(M, t - dt), {A0, V0});
            double fd = (lyapunov(xp[0], xp[1], rho).L2 - lyapunov(xm[0], xm[1], rho).L2) / (2.0 * dt);
            rep.max_fd_residual = std::max(rep.max_fd_residual, std::abs(fd - diss) / L0);
        }
        rep.max_bound_ratio = std::max(rep.max_bound_ratio, L / (std::exp(-rate * t) * L0));
    }
    return rep;
}

double lyapunov_rate_constant(const std::vector<LyapunovState>& states) {
    double c = std::numeric_limits<double>::infinity();
    for (const auto& s : states) {
        if (s.L2 <= 0.0 || s.rho <= 0.0) continue;
        double num = 2.0 * s.rho * s.rho * (std::norm(s.A) + std::norm(s.V));
        c = std::min(c, num / (std::min(1.0, s.rho * s.rho) * s.L2));
    }
    return c;
}

}  // namespace plab
