#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plab/paracalculus.hpp"

namespace plab {

using Mat2 = std::array<std::array<double, 2>, 2>;
using Amp2 = std::array<cplx, 2>;

/// Fourier symbol of the linearized system at |xi| = rho, acting on
/// (a_hat, v_hat) with v = |D|^{-1} div u:
///   [[0, -rho/eps], [alpha rho/eps, -nu rho^2]].
/// With alpha = nu = eps = 1 this is [[0, -rho], [rho, -rho^2]].
struct ModeMatrix {
    double rho = 0.0;
    double alpha = 1.0;
    double nu = 1.0;
    double eps = 1.0;
    Mat2 m{};
    double trace() const { return m[0][0] + m[1][1]; }
    double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
};

ModeMatrix mode_matrix(double rho);
ModeMatrix mode_matrix(double rho, double alpha, double nu, double eps);

enum class ModeRegime { oscillatory, defective, overdamped };

struct ModeSpectrum {
    cplx lambda_plus;
    cplx lambda_minus;
    ModeRegime regime = ModeRegime::oscillatory;
    double S = 0.0;  // sqrt(4/rho^2 - 1) for rho < 2
    double R = 0.0;  // sqrt(1 - 4/rho^2) for rho > 2
};

ModeSpectrum mode_spectrum(double rho);

// exp(t M). Uses exp(t M) = e^{t tr/2} [C(w) I + t S(w) (M - tr/2 I)] with
// w = t^2 (tr^2/4 - det), C = cosh sqrt(w), S = sinh sqrt(w)/sqrt(w); near the
// double root the entire functions C, S are summed as power series in w.
Mat2 propagator(const ModeMatrix& M, double t);
// Radius (in rho) around the double root where the series branch is used.
inline constexpr double kDefectiveRadius = 1e-4;

/// e^{hM}, h phi1(hM), h phi2(hM) for the exact integration of a source that
/// is linear in time across the step.
struct PhiSet {
    Mat2 E{};
    Mat2 W1{};
    Mat2 W2{};
};
PhiSet phi_set(const ModeMatrix& M, double h);

struct ScalarPhi {
    double E = 1.0;
    double W1 = 0.0;
    double W2 = 0.0;
};
// Scalar version for d/dt y = -lambda y.
ScalarPhi scalar_phi(double lambda, double h);

Amp2 apply(const Mat2& m, const Amp2& x);

// Propagates (A, V) over t_grid with sources f (on A) and h (on V) sampled on
// t_grid; the sources are integrated exactly as piecewise-linear functions.
std::vector<Amp2> mode_propagate(cplx A0, cplx V0, double rho, const std::vector<cplx>& f_series,
                                 const std::vector<cplx>& h_series, const std::vector<double>& t_grid);
std::vector<Amp2> mode_propagate(const ModeMatrix& M, cplx A0, cplx V0,
                                 const std::vector<cplx>& f_series,
                                 const std::vector<cplx>& h_series, const std::vector<double>& t_grid);

struct LyapunovState {
    cplx A;
    cplx V;
    double rho = 0.0;
    double L2 = 0.0;  // 2|(A,V)|^2 + |rho A|^2 - 2 rho Re(A conj V)
};

LyapunovState lyapunov(cplx A, cplx V, double rho);
// d/dt L^2 along the homogeneous flow, from the closed-form derivative.
double lyapunov_rate(cplx A, cplx V, double rho);
// Equivalence constant: L^2 / C <= |(A, rho A, V)|^2 <= C L^2 (Young).
inline constexpr double kLyapunovEquivalence = 3.0;
// Lower bound for 2 rho^2 |(A,V)|^2 / (min(1,rho^2) L^2) obtained from Young.
inline constexpr double kLyapunovRateFloor = 0.5;

struct LyapunovReport {
    double max_identity_residual = 0.0;  // |d/dt L^2 + 2 rho^2 |(A,V)|^2| / L^2
    double max_fd_residual = 0.0;        // same against a central difference of L^2(t)
    double max_bound_ratio = 0.0;        // L^2(t) / (e^{-c min(1,rho^2) t} L^2(0))
};
LyapunovReport lyapunov_decay_check(cplx A0, cplx V0, double rho, double T, double c,
                                    int samples = 200);
// inf over the supplied states of 2 rho^2 |(A,V)|^2 / (min(1,rho^2) L^2).
double lyapunov_rate_constant(const std::vector<LyapunovState>& states);

// ---------------------------------------------------------------- heat

struct HeatOptions {
    double diffusivity = 1.0;
    double s = 0.0;
    double p = 2.0;
};

struct HeatResult {
    std::vector<SpectralField> series;
    // (sup_t ||u||_{B^s_{p,1}} + int ||Lap u||_{B^s_{p,1}}) / (||u0||_{B^s_{p,1}} + int ||f||_{B^s_{p,1}})
    double max_regularity_ratio = 0.0;
};

// f_series may be empty (no source) or sampled on t_grid.
HeatResult heat_solve(const SpectralField& u0, const std::vector<SpectralField>& f_series,
                      const std::vector<double>& t_grid, const HeatOptions& opt = {});

// ---------------------------------------------------------------- transport

struct TransportOptions {
    double s = 0.0;
    double p = 2.0;
    double tol_per_time = 1e-6;
    int max_substeps = 1 << 16;
};

struct TransportResult {
    std::vector<SpectralField> series;
    // ||a||_{L~inf B^s_{p,1}} / (exp(V(t)) (||a0||_{B^s_{p,1}} + ||f||_{L~1 B^s_{p,1}}))
    double gronwall_ratio = 0.0;
    double velocity_integral = 0.0;  // int ||grad v||_{B^{d/p}_{p,inf} cap L^inf}
    int total_substeps = 0;
};

// d/dt a + v.grad a + lambda a = f with v (vector) and f sampled on t_grid and
// interpolated linearly in time. v_series of size 1 means a frozen velocity.
TransportResult transport_solve(const std::vector<SpectralField>& v_series, const SpectralField& a0,
                                const std::vector<SpectralField>& f_series, double lambda_damp,
                                const std::vector<double>& t_grid, const TransportOptions& opt = {});

// ---------------------------------------------------------------- Lame

struct LameCoefficients {
    double mu = 1.0;
    double lambda = 0.0;
    // Variable case: d/dt u - 2 a div(mu D(u)) - b grad(lambda div u) = f.
    std::optional<SpectralField> a, b, mu_field, lambda_field;
    bool variable() const { return a.has_value(); }
};

struct LameDiagnostics {
    double ellipticity = 0.0;  // min(inf a mu, inf 2 a mu + b lambda)
    double smooth_floor = 0.0;  // same with S_m applied to the products
    double rough_part = 0.0;    // ||(Id - S_m)(mu grad a, a grad mu, lambda grad b, b grad lambda)||_{B^{d/p-1}_{p,1}}
    int m = 0;
    double mu0 = 0.0;
    double lambda0 = 0.0;
    double max_growth = 0.0;
};

struct LameResult {
    std::vector<SpectralField> series;
    LameDiagnostics diagnostics;
};

LameResult lame_solve(const SpectralField& u0, const std::vector<SpectralField>& f_series,
                      const LameCoefficients& coeffs, const std::vector<double>& t_grid,
                      int cut_index = 0, double p = 2.0);

// Constant-coefficient Lame operator mu Lap u + (lambda + mu) grad div u.
SpectralField lame_operator(const SpectralField& u, double mu, double lambda);

// ---------------------------------------------------------------- whole-space decay

struct RadialData {
    int dim = 2;
    double rho_max = 1.0;  // support of the data
    std::function<Amp2(double)> amplitude;
};

struct DecayCurves {
    std::vector<double> t;
    std::vector<double> s_list;
    std::vector<std::vector<double>> plain;     // [s][t] low-frequency B^s_{2,1}
    std::vector<std::vector<double>> weighted;  // <t>^{d/4+s/2} * plain
    double refinement_change = 0.0;             // relative change on node doubling
    double d0 = 0.0;                             // sup_k ||F Delta_k U0||_inf over k <= k0
};

DecayCurves linear_decay_profile(const RadialData& data, const std::vector<double>& s_list,
                                 const std::vector<double>& t_grid, int k0 = 0, int kmin = -22,
                                 int nodes_per_octave = 48);

}  // namespace plab
