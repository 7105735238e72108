#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "plab/cns_solver.hpp"

namespace plab {

using MatD = std::array<std::array<double, 3>, 3>;

struct JacobianAdjugate {
    double J = 1.0;
    MatD adj{};
    MatD A{};  // inverse, adj / J
};

// Closed-form cofactors for d in {2, 3}; throws when |J| < 1e-12.
JacobianAdjugate jacobian_adjugate(const MatD& DX, int dim);

/// Flow X(t, y) = y + displacement at one time. Matrix fields are stored as
/// d*d components with index i*d + j, and (DX)_{ij} = d_j X^i.
struct FlowMap {
    double t = 0.0;
    SpectralField displacement;
    SpectralField DX;   // identity included
    SpectralField J;
    SpectralField adj;
    SpectralField A;
    double min_J = 1.0;
    double gate_integral = 0.0;  // int_0^t ||D v||_{B^{d/p}_{p,1}}
    bool gate_exceeded = false;
};

struct FlowOptions {
    double gate = 0.1;
    double p = 2.0;
};

// Builds J, adj and A from a periodic displacement; throws when J <= 0 somewhere.
FlowMap flow_from_displacement(const SpectralField& displacement, double t = 0.0);

// X = id + int v by the trapezoid rule on t_grid, one map per time.
std::vector<FlowMap> flow_map_series(const std::vector<SpectralField>& v_series, const std::vector<double>& t_grid,
                                     const FlowOptions& opt = {});
FlowMap flow_map(const std::vector<SpectralField>& v_series, const std::vector<double>& t_grid,
                 const FlowOptions& opt = {});

// max |div_y adj(DX)| (column divergence) over max |DX|.
double piola_residual(const FlowMap& X);

/// Evaluates a field's Fourier series at arbitrary points.
class PointEvaluator {
public:
    explicit PointEvaluator(const SpectralField& f);
    int components() const { return static_cast<int>(c_.size()); }
    // out has components() entries (real parts).
    void eval(const Vec3& x, double* out) const;

private:
    TorusGrid grid_;
    std::vector<std::vector<cplx>> c_;
};

enum class CoordDirection { to_lagrangian, to_eulerian };

struct CoordOptions {
    double newton_tol = 1e-12;  // on |X(y) - x|, relative to the box side
    int newton_max = 20;
    int threads = 0;  // 0 picks the hardware count
};

// to_lagrangian: f o X sampled on the grid. to_eulerian: f o X^{-1}, the inverse
// found per grid point by Newton on y + displacement(y) = x.
SpectralField change_coords(const SpectralField& f, const FlowMap& X, CoordDirection dir,
                            const CoordOptions& opt = {});

// Identity check for grad (scalar K) or div (vector H) under X, relative to ||f||_{C^1}:
// max |(d_x f) o X - J^{-1} div_y(adj(DX) f o X)|.
double lemma_div_residual(const SpectralField& f, const FlowMap& X);

// ---------------------------------------------------------------- right-hand side

struct LagrangianParams {
    CnsParams base;
    // Density dependent viscosities; empty means the constants of base.
    std::function<double(double)> mu_of;
    std::function<double(double)> lambda_of;
    double mu(double rho) const { return mu_of ? mu_of(rho) : base.mu; }
    double lambda(double rho) const { return lambda_of ? lambda_of(rho) : base.lambda; }
};

struct LagTerms {
    SpectralField I1, I2, I3, I4;  // d*d matrix fields
};

LagTerms lagrangian_rhs_terms(const FlowMap& Xv, const SpectralField& w, const SpectralField& rho0,
                              const LagrangianParams& p);

// (div F)^j = sum_i d_i F_{ij}
SpectralField matrix_divergence(const SpectralField& F);

// rho0^{-1} div(I1 + I2 + I3 + I4)
SpectralField lagrangian_forcing(const LagTerms& I, const SpectralField& rho0);

// ---------------------------------------------------------------- fixed point

struct LagFixedPointOptions {
    int time_points = 41;
    int n_max = 30;
    double tol = 1e-8;   // on the E_p(T) increment relative to the iterate
    double gate = 0.1;
    double p = 2.0;
};

struct LagState {
    std::vector<double> t;
    std::vector<SpectralField> u_bar;
    std::vector<SpectralField> rho_bar;  // from d/dt rho = -rho Du:A along the flow
    std::vector<FlowMap> flow;
};

struct LagReport {
    std::vector<double> increments;
    std::vector<double> ratios;
    int iterations = 0;
    bool converged = false;
    double T = 0.0;
    double max_J_rho_defect = 0.0;  // max_t ||J rho_bar - rho0||_inf / ||rho0||_inf
    LameDiagnostics lame;
    std::vector<std::string> warnings;
};

struct LagSolveResult {
    LagState state;
    LagReport report;
};

LagSolveResult lagrangian_fixed_point_solve(const SpectralField& rho0, const SpectralField& u0,
                                            const LagrangianParams& p, double T,
                                            const LagFixedPointOptions& opt = {});

// ---------------------------------------------------------------- flow bounds

struct FlowBoundRatios {
    double Dv_integral = 0.0;  // int_0^T ||D v||_{B^{d/p}_{p,1}}
    double U1 = 0.0;           // sup_t ||Id - adj||   / int_0^t ||Dv||
    double U2 = 0.0;           // sup_t ||Id - A||     / ...
    double U4 = 0.0;           // sup_t ||adj A^T - Id|| / ...
    double J = 0.0;            // sup_t ||J - 1||      / ...
    double Jinv = 0.0;         // sup_t ||1/J - 1||    / ...
};

FlowBoundRatios flow_bound_ratios(const std::vector<SpectralField>& v_series, const std::vector<double>& t_grid,
                                  double p = 2.0);

// sup_t ||A_{v2} - A_{v1}|| / int ||D(v2 - v1)||, norms in B^{d/p}_{p,1}.
double flow_stability_ratio(const std::vector<SpectralField>& v1, const std::vector<SpectralField>& v2,
                            const std::vector<double>& t_grid, double p = 2.0);

}  // namespace plab
