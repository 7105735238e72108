#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "plab/littlewood_paley.hpp"

namespace plab {
namespace {

double theta(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

double glue(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double a = theta(x), b = theta(1.0 - x);
    return a / (a + b);
}

constexpr double kInner = 0.75;
constexpr double kOuter = 4.0 / 3.0;

}  // namespace

double CutoffPair::chi(double rho) const {
    if (rho <= kInner) return 1.0;
    if (rho >= kOuter) return 0.0;
    return glue((kOuter - rho) / (kOuter - kInner));
}

double CutoffPair::phi(double rho) const { return chi(0.5 * rho) - chi(rho); }

CutoffPair build_cutoffs() { return CutoffPair{}; }

JRange resolvable_range(const TorusGrid& grid) {
    JRange r;
    double lo = grid.lowest_frequency();
    double hi = grid.max_frequency();
    int j = static_cast<int>(std::floor(std::log2(lo * 3.0 / 8.0))) - 2;
    while (8.0 / 3.0 * std::ldexp(1.0, j) < lo) ++j;
    while (8.0 / 3.0 * std::ldexp(1.0, j - 1) >= lo) --j;
    r.jmin = j;
    j = static_cast<int>(std::floor(std::log2(hi * 4.0 / 3.0))) + 2;
    while (0.75 * std::ldexp(1.0, j) > hi) --j;
    r.jmax = j;
    return r;
}

const std::vector<double>& block_weights(const TorusGrid& grid, int j) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, double, int>, std::shared_ptr<std::vector<double>>> cache;
    auto key = std::make_tuple(grid.dim(), grid.n(), grid.box_scale(), j);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    auto w = std::make_shared<std::vector<double>>(grid.size());
    CutoffPair cp;
    double scale = std::ldexp(1.0, -j);
    for (std::size_t i = 1; i < grid.size(); ++i) (*w)[i] = cp.phi(scale * grid.xi_norm(i));
    cache.emplace(key, w);
    return *w;
}

SpectralField dyadic_block(const SpectralField& u, int j) {
    JRange r = resolvable_range(u.grid());
    if (j < r.jmin || j > r.jmax) throw std::out_of_range("dyadic block index outside the resolvable range");
    const auto& w = block_weights(u.grid(), j);
    SpectralField out(u.grid(), u.components(), u.is_real());
    for (int c = 0; c < u.components(); ++c)
        for (std::size_t i = 0; i < w.size(); ++i) out.coeffs(c)[i] = w[i] * u.coeffs(c)[i];
    return out;
}

SpectralField low_cut(const SpectralField& u, int j) {
    CutoffPair cp;
    const TorusGrid& g = u.grid();
    double scale = std::ldexp(1.0, -j);
    SpectralField out(g, u.components(), u.is_real());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double m = cp.chi(scale * g.xi_norm(i));
        if (m == 0.0) continue;
        for (int c = 0; c < u.components(); ++c) out.coeffs(c)[i] = m * u.coeffs(c)[i];
    }
    return out;
}

}  // namespace plab
