#include <algorithm>
#include <cmath>
#include <sstream>

#include "plab/littlewood_paley.hpp"

namespace plab {

std::string banach_warning(const NormSpec& spec, int dim) {
    double crit = dim / spec.p;
    if (spec.s < crit || (spec.s == crit && spec.r == 1.0)) return {};
    std::ostringstream os;
    os << "s=" << spec.s << " exceeds d/p=" << crit
       << ": the homogeneous space is not complete for these indices";
    return os.str();
}

std::vector<double> block_norms(const SpectralField& u, double p) {
    const TorusGrid& g = u.grid();
    JRange r = resolvable_range(g);
    std::vector<double> out;
    out.reserve(r.count());
    for (int j = r.jmin; j <= r.jmax; ++j) {
        const auto& w = block_weights(g, j);
        if (p == 2.0) {
            double acc = 0.0;
            for (int c = 0; c < u.components(); ++c) {
                const auto& co = u.coeffs(c);
                for (std::size_t i = 0; i < w.size(); ++i)
                    if (w[i] != 0.0) acc += w[i] * w[i] * std::norm(co[i]);
            }
            out.push_back(std::sqrt(acc / g.measure()));
        } else {
            std::vector<std::vector<cplx>> s;
            for (int c = 0; c < u.components(); ++c) {
                std::vector<cplx> b(g.size());
                const auto& co = u.coeffs(c);
                for (std::size_t i = 0; i < w.size(); ++i) b[i] = w[i] * co[i];
                s.push_back(transform(g, b, Direction::inverse));
            }
            out.push_back(lebesgue_norm_samples(g, s, p));
        }
    }
    return out;
}

std::vector<double> pair_block_norms(const SpectralField& a, const SpectralField& b, double p) {
    auto na = block_norms(a, p);
    auto nb = block_norms(b, p);
    for (std::size_t i = 0; i < na.size(); ++i) na[i] = std::hypot(na[i], nb[i]);
    return na;
}

double weighted_sum(const std::vector<double>& bn, int jmin, double s, double r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < bn.size(); ++i) {
        double v = std::pow(2.0, s * (jmin + static_cast<int>(i))) * bn[i];
        if (std::isinf(r))
            acc = std::max(acc, v);
        else
            acc += std::pow(v, r);
    }
    return std::isinf(r) ? acc : std::pow(acc, 1.0 / r);
}

double besov_norm(const SpectralField& u, const NormSpec& spec) {
    JRange r = resolvable_range(u.grid());
    if (r.empty()) throw std::domain_error("empty resolvable range");
    return weighted_sum(block_norms(u, spec.p), r.jmin, spec.s, spec.r);
}

SplitNorm hybrid_norm_from_blocks(const std::vector<double>& bn, int jmin, double s, int k0) {
    SplitNorm out;
    for (std::size_t i = 0; i < bn.size(); ++i) {
        int k = jmin + static_cast<int>(i);
        double v = std::pow(2.0, s * k) * bn[i];
        if (k <= k0) out.low += v;
        if (k >= k0) out.high += v;
    }
    return out;
}

SplitNorm hybrid_norm(const SpectralField& u, const NormSpec& spec) {
    JRange r = resolvable_range(u.grid());
    if (r.empty()) throw std::domain_error("empty resolvable range");
    int k0 = spec.k0.value_or(0);
    return hybrid_norm_from_blocks(block_norms(u, spec.p), r.jmin, spec.s, k0);
}

SplitNorm cut_split_norm(const SpectralField& u, const NormSpec& spec) {
    int k0 = spec.k0.value_or(0);
    SpectralField lo = low_cut(u, k0 + 1);
    SpectralField hi = u;
    hi -= lo;
    NormSpec plain{spec.s, spec.p, spec.r, std::nullopt, std::nullopt};
    return {besov_norm(lo, plain), besov_norm(hi, plain)};
}

double tilde_norm_from_blocks(const std::vector<std::vector<double>>& bn, double dt, int jmin,
                              double s, double a, double r) {
    if (bn.empty()) return 0.0;
    if (!std::isinf(a) && bn.size() < 2) throw std::invalid_argument("tilde norm needs two time samples");
    std::size_t nb = bn[0].size();
    std::vector<double> per(nb, 0.0);
    for (std::size_t j = 0; j < nb; ++j) {
        if (std::isinf(a)) {
            for (const auto& row : bn) per[j] = std::max(per[j], row[j]);
        } else {
            double acc = 0.0;
            for (std::size_t t = 0; t < bn.size(); ++t) {
                double w = (t == 0 || t + 1 == bn.size()) ? 0.5 : 1.0;
                acc += w * std::pow(bn[t][j], a);
            }
            per[j] = std::pow(acc * dt, 1.0 / a);
        }
    }
    return weighted_sum(per, jmin, s, r);
}

double tilde_norm(const std::vector<SpectralField>& series, double dt, const NormSpec& spec) {
    if (series.empty()) return 0.0;
    double a = spec.time_exponent.value_or(kInf);
    std::vector<std::vector<double>> bn;
    for (const auto& f : series) bn.push_back(block_norms(f, spec.p));
    return tilde_norm_from_blocks(bn, dt, resolvable_range(series[0].grid()).jmin, spec.s, a, spec.r);
}

}  // namespace plab
