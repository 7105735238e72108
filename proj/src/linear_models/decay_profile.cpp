#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plab/linear_models.hpp"

namespace plab {
namespace {

double sphere_area(int d) {
    switch (d) {
        case 1: return 2.0;
        case 2: return 2.0 * kPi;
        case 3: return 4.0 * kPi;
    }
    throw std::invalid_argument("dimension must be 1, 2 or 3");
}

// ||Delta_k U(t)||_{L^2}: (2 pi)^{-d} |S^{d-1}| int phi(2^-k rho)^2 |U|^2 rho^{d-1} d rho by
// composite Simpson in log2(rho).
double block_l2(const RadialData& data, int k, double t, int nodes_per_octave) {
    CutoffPair cp;
    double lo = std::log2(0.75) + k;
    double hi = std::min(std::log2(8.0 / 3.0) + k, std::log2(data.rho_max));
    if (!(hi > lo)) return 0.0;
    double span = hi - lo;
    // resolve the acoustic phase rho t across the block
    double rho_hi = std::exp2(hi);
    double cycles = rho_hi * t / (2.0 * kPi);
    int n = static_cast<int>(std::ceil(std::max(nodes_per_octave * span, 16.0 * cycles)));
    n = std::min(std::max(n, 8), 1 << 18);
    if (n % 2) ++n;
    double hx = span / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        double x = lo + i * hx;
        double rho = std::exp2(x);
        double w = cp.phi(std::ldexp(rho, -k));
        if (w == 0.0) continue;
        Amp2 u0 = data.amplitude(rho);
        Amp2 u = t == 0.0 ? u0 : plab::apply(propagator(mode_matrix(rho), t), u0);
        double f = w * w * (std::norm(u[0]) + std::norm(u[1])) * std::pow(rho, data.dim) * std::log(2.0);
        double sw = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += sw * f;
    }
    acc *= hx / 3.0;
    return std::sqrt(std::max(acc, 0.0) * sphere_area(data.dim) / std::pow(2.0 * kPi, data.dim));
}

std::vector<std::vector<double>> plain_curves(const RadialData& data, const std::vector<double>& s_list,
                                              const std::vector<double>& t_grid, int k0, int kmin,
                                              int nodes_per_octave) {
    std::vector<std::vector<double>> out(s_list.size(), std::vector<double>(t_grid.size(), 0.0));
    for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
        for (int k = kmin; k <= k0; ++k) {
            double b = block_l2(data, k, t_grid[ti], nodes_per_octave);
            for (std::size_t si = 0; si < s_list.size(); ++si) out[si][ti] += std::pow(2.0, s_list[si] * k) * b;
        }
    }
    return out;
}

}  // namespace

DecayCurves linear_decay_profile(const RadialData& data, const std::vector<double>& s_list,
                                 const std::vector<double>& t_grid, int k0, int kmin, int nodes_per_octave) {
    if (!data.amplitude) throw std::invalid_argument("radial data without amplitude");
    if (data.rho_max <= 0.0) throw std::invalid_argument("radial data support must be positive");
    DecayCurves dc;
    dc.t = t_grid;
    dc.s_list = s_list;
    dc.plain = plain_curves(data, s_list, t_grid, k0, kmin, nodes_per_octave);
    auto fine = plain_curves(data, s_list, t_grid, k0, kmin, 2 * nodes_per_octave);
    for (std::size_t si = 0; si < s_list.size(); ++si)
        for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
            double a = dc.plain[si][ti], b = fine[si][ti];
            if (b > 0.0) dc.refinement_change = std::max(dc.refinement_change, std::abs(a - b) / b);
        }
    if (dc.refinement_change > 0.02)
        throw std::runtime_error("radial quadrature not converged under node doubling");

    int d = data.dim;
    dc.weighted = dc.plain;
    for (std::size_t si = 0; si < s_list.size(); ++si)
        for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
            double bracket = std::sqrt(1.0 + t_grid[ti] * t_grid[ti]);
            dc.weighted[si][ti] *= std::pow(bracket, d / 4.0 + s_list[si] / 2.0);
        }

    CutoffPair cp;
    double lo = std::ldexp(0.75, kmin);
    double hi = std::min(std::ldexp(8.0 / 3.0, k0), data.rho_max);
    for (int i = 0; i <= 4096; ++i) {
        double rho = lo * std::pow(hi / lo, i / 4096.0);
        Amp2 u = data.amplitude(rho);
        double m = std::hypot(std::abs(u[0]), std::abs(u[1]));
        for (int k = kmin; k <= k0; ++k) dc.d0 = std::max(dc.d0, cp.phi(std::ldexp(rho, -k)) * m);
    }
    return dc;
}

}  // namespace plab
