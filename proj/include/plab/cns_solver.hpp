#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plab/linear_models.hpp"

namespace plab {

/// Barotropic pressure law. G'(a) = P'(1+a)/(1+a), k(a) = G'(a) - G'(0).
struct PressureLaw {
    std::string name;
    std::function<double(double)> P;
    std::function<double(double)> dP;
    double alpha() const { return dP(1.0); }
    double G_prime(double a) const { return dP(1.0 + a) / (1.0 + a); }
    double k(double a) const { return G_prime(a) - G_prime(0.0); }
};

// P(rho) = scale * rho^gamma / gamma, so P'(1) = scale.
PressureLaw gamma_law(double gamma, double scale = 1.0);

struct CnsParams {
    double lambda = -0.5;
    double mu = 0.75;
    PressureLaw pressure = gamma_law(1.4);
    double eps = 1.0;        // Mach parameter; 1 is the perturbation system itself
    bool nonlinear = true;   // false keeps only the linear semigroup
    double nu() const { return lambda + 2.0 * mu; }
    double alpha() const { return pressure.alpha(); }
};

// Rejects mu <= 0, nu <= 0 and (if require_stability) alpha <= 0.
void validate(const CnsParams& p, bool require_stability = true);

struct CnsState {
    SpectralField a;
    SpectralField u;
    double t = 0.0;
};

CnsState zero_state(const TorusGrid& g);

class DensityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Forcing {
    SpectralField f;
    SpectralField g;
};

// f = -div(a u), g = -u.grad u - I(eps a) A u - (k(eps a)/eps) grad a.
Forcing nonlinear_rhs(const CnsState& s, const CnsParams& p);

SpectralField lame_A(const SpectralField& u, const CnsParams& p);

// Minimum of 1 + eps a over the grid samples.
double min_density(const SpectralField& a, double eps = 1.0);

/// Exponential integrator: exact linear semigroup per mode, ETD midpoint for
/// the nonlinear terms. Coefficients are cached per distinct |k|^2 and step.
class CnsStepper {
public:
    CnsStepper(const TorusGrid& grid, const CnsParams& params);

    struct Outcome {
        bool accepted = true;
        double linear_norm = 0.0;
        double nonlinear_norm = 0.0;
    };

    // Advances s by h in place when accepted.
    Outcome step(CnsState& s, double h);
    // Pure linear propagation (no nonlinear terms).
    CnsState linear_propagate(const CnsState& s, double h);

    const CnsParams& params() const { return params_; }
    const TorusGrid& grid() const { return grid_; }

private:
    struct Table {
        std::vector<Mat2> E, W1;
        std::vector<double> pE, pW1;
    };
    const Table& table(double h);
    CnsState apply_linear(const CnsState& s, const Forcing* N, const Table& tb, double h) const;

    TorusGrid grid_;
    CnsParams params_;
    std::vector<std::size_t> shell_;  // grid flat -> shell index
    std::vector<double> shell_rho_;
    std::map<double, Table> cache_;
};

CnsState cns_step(const CnsState& s, const CnsParams& p, double h);

// ---------------------------------------------------------------- monitors

struct MonitorOptions {
    int k0 = 0;
    double p = 2.0;
    double decay_eps = 0.05;  // alpha = min(d/4 + 2, d/2 + 1/2 - decay_eps)
};

struct MonitorRow {
    double t = 0.0;
    double besov_s0_low = 0.0;
    double besov_s1_low = 0.0;
    double D_low = 0.0;            // running sup over s of <t>^{d/4+s/2} ||(a,u)||^l_{B^s}
    double D_high_alpha = 0.0;     // running tilde sup of <t>^alpha ||(grad a, u)||^h_{B^{d/2-1}}
    double D_tnablau_high = 0.0;   // instantaneous t ||grad u||^h_{B^{d/2}_{2,1}}
    double D_tnablau_tilde = 0.0;  // running tilde version
    double Xp = 0.0;
    double l2 = 0.0;
    double a_inf = 0.0;
    double min_density = 0.0;
    double mass = 0.0;
};

/// Incremental X_p and D(t) bookkeeping with the cut split z^l = S_{k0+1} z.
class MonitorAccumulator {
public:
    MonitorAccumulator(const TorusGrid& g, const MonitorOptions& opt = {});
    void update(const CnsState& s);
    MonitorRow current() const;
    double Xp0() const { return xp0_; }
    const std::vector<double>& Xp_terms() const { return terms_; }
    const std::vector<double>& s_grid() const { return s_grid_; }

private:
    TorusGrid grid_;
    MonitorOptions opt_;
    int jmin_ = 0;
    bool started_ = false;
    double t_prev_ = 0.0;
    double xp0_ = 0.0;
    double l1_prev_[3] = {0, 0, 0};  // integrands of the three L^1 terms at t_prev
    std::vector<double> terms_ = std::vector<double>(6, 0.0);
    std::vector<double> sup_low_, sup_ah_, sup_uh_, sup_alpha_, sup_tgrad_;
    std::vector<double> s_grid_;
    MonitorRow row_;
};

// Hybrid initial size X_{p,0} with the cut split.
double initial_size(const CnsState& s, const MonitorOptions& opt = {});
// D_0 = sup_{k <= k0} (||F Delta_k a0||_inf + ||F Delta_k u0||_inf).
double decay_data_size(const CnsState& s, int k0 = 0);

// sup_t <t>^{s1} int_0^t <t - tau>^{-s1} <tau>^{-s2} d tau over t in [0, t_max].
double convolution_constant(double sigma1, double sigma2, double t_max = 200.0);

// w = grad (-Lap)^{-1} (a - div u), mean annihilated.
SpectralField effective_velocity(const CnsState& s);

// ---------------------------------------------------------------- runs

struct RunOptions {
    double dt = 0.01;
    double output_every = 0.1;
    bool keep_trajectory = true;
    bool monitors = true;
    bool density_gate = true;  // stop when ||a||_inf > 1/2
    int max_halvings = 20;
    MonitorOptions monitor;
    std::function<void(const CnsState&)> on_output;
    std::function<void(const CnsState&)> on_step;
};

enum class StopReason { completed, density_gate };

struct RunResult {
    std::vector<CnsState> trajectory;
    std::vector<MonitorRow> rows;
    StopReason stop = StopReason::completed;
    std::string diagnostic;
    double Xp0 = 0.0;
    double max_Xp_ratio = 0.0;
    double min_density = 1.0;
    double mass_drift = 0.0;
    double max_imag_residue = 0.0;
    int steps = 0;
    int rejections = 0;
};

RunResult cns_run(const CnsState& s0, const CnsParams& p, double T, const RunOptions& opt = {});

// ---------------------------------------------------------------- rescaling

// (a, u)(t, x) -> (a(l^2 t, l x), l u(l^2 t, l x)) with P -> l^2 P; l = 2^m.
std::pair<CnsState, CnsParams> rescale_state(const CnsState& s, const CnsParams& p, double ell);

// ---------------------------------------------------------------- local scheme

struct LocalSchemeOptions {
    int n_max = 30;
    int time_points = 41;
    double p = 2.0;
    double gate = 0.1;         // bound on int ||grad u^n||_{B^{d/p}_{p,1}}
    double tol = 1e-12;        // stop when the increment drops below tol * first increment
    bool nonlinear = true;
    TransportOptions transport;
};

struct LocalSchemeResult {
    std::vector<double> t;
    std::vector<SpectralField> a, u;  // last iterate on t
    std::vector<double> increments;   // N_n for n = 1, 2, ...
    std::vector<double> ratios;
    double asymptotic_ratio = 0.0;
    double T = 0.0;
    int iterations = 0;
    bool converged = false;
};

LocalSchemeResult local_iteration_scheme(const SpectralField& a0, const SpectralField& u0, const CnsParams& p,
                                         double T, const LocalSchemeOptions& opt = {});

// ---------------------------------------------------------------- incompressible

struct IncompressibleResult {
    std::vector<SpectralField> trajectory;
    std::vector<double> t;
    double max_divergence = 0.0;
    bool energy_monotone = true;
};

SpectralField incompressible_step(const SpectralField& v, double mu, double h);
IncompressibleResult incompressible_run(const SpectralField& v0, double mu, double T, double dt,
                                        double output_every);

// ---------------------------------------------------------------- experiments

struct LowMachConfig {
    std::vector<double> eps_list{0.2, 0.1, 0.05};
    int dim = 2;
    int n = 64;
    double box = 1.0;
    double T = 1.0;
    double t_layer = 0.5;
    double output_every = 0.05;
    double amplitude = 0.5;   // oscillating part
    double v_amplitude = 0.1; // incompressible reference data
    double p = 4.0;
    int j0 = 0;
    double eta = 1.0;
    bool well_prepared = false;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct LowMachRow {
    double eps = 0.0;
    double sup_Qu_L2 = 0.0;
    double err_Pu_vs_v = 0.0;
    double C0 = 0.0;
    double data_norm = 0.0;  // ||oscillating u0||_{B^{d/p-1}_{p,1}}
    double Pu0_norm = 0.0;
};

struct LowMachResult {
    std::vector<LowMachRow> rows;
    double fitted_exponent = 0.0;
    double expected_exponent = 0.0;
};

// C_0^{eps,nu} with the split at 2^j beta <= 2^{j0}, beta = eps nu.
double low_mach_size(const CnsState& s, double eps, double nu, double p, int j0);

LowMachResult low_mach_experiment(const LowMachConfig& cfg, const CnsParams& base);

struct DecayConfig {
    int dim = 2;
    int n = 256;
    double box = 16.0;
    double T = 200.0;
    double dt = 0.1;
    double output_every = 1.0;
    double amplitude = 3e-3;
    double width = 1.0;
    bool nonlinear = true;
    std::uint64_t seed = 1;
    MonitorOptions monitor;
};

struct DecayTable {
    RunResult run;
    double t_gap = 0.0;
    double window_lo = 10.0;
    double window_hi = 0.0;
    double D0 = 0.0;
};

CnsState decay_initial_state(const DecayConfig& cfg);
DecayTable decay_run(const DecayConfig& cfg, const CnsParams& p);

// ---------------------------------------------------------------- snapshots

void save_snapshot(const std::string& path, const CnsState& s, const CnsParams& p);
CnsState load_snapshot(const std::string& path);

}  // namespace plab
