#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plab/spectral_core.hpp"

namespace plab {

/// Smooth radial cutoffs: chi is 1 on [0, 3/4] and 0 from 4/3 on;
/// phi(r) = chi(r/2) - chi(r) lives in (3/4, 8/3) and equals 1 on [4/3, 3/2].
struct CutoffPair {
    double chi(double rho) const;
    double phi(double rho) const;
};

CutoffPair build_cutoffs();

struct JRange {
    int jmin = 0;
    int jmax = -1;
    bool empty() const { return jmax < jmin; }
    int count() const { return empty() ? 0 : jmax - jmin + 1; }
};

// Octaves that meet the nonzero grid frequencies: jmin is the smallest j with
// (8/3) 2^j >= 1/M, jmax the largest j with (3/4) 2^j <= max |xi| on the grid.
JRange resolvable_range(const TorusGrid& grid);

SpectralField dyadic_block(const SpectralField& u, int j);
SpectralField low_cut(const SpectralField& u, int j);
// Multiplier phi(2^-j |xi|) on every grid frequency (cached per grid).
const std::vector<double>& block_weights(const TorusGrid& grid, int j);

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NormSpec {
    double s = 0.0;
    double p = 2.0;
    double r = 1.0;
    std::optional<int> k0;
    std::optional<double> time_exponent;
};

// Returns a non-empty message when (s, p, r) is outside the range where the
// homogeneous space is complete (s < d/p, or s = d/p with r = 1).
std::string banach_warning(const NormSpec& spec, int dim);

// ||Delta_j u||_{L^p} for j in the resolvable range (index 0 is jmin).
std::vector<double> block_norms(const SpectralField& u, double p);
// Euclidean pair version: sqrt(||Delta_j a||^2 + ||Delta_j b||^2) per block.
std::vector<double> pair_block_norms(const SpectralField& a, const SpectralField& b, double p);

double weighted_sum(const std::vector<double>& bn, int jmin, double s, double r);

double besov_norm(const SpectralField& u, const NormSpec& spec);

struct SplitNorm {
    double low = 0.0;
    double high = 0.0;
};

// Shared-index split: low sums k <= k0 and high sums k >= k0.
SplitNorm hybrid_norm(const SpectralField& u, const NormSpec& spec);
SplitNorm hybrid_norm_from_blocks(const std::vector<double>& bn, int jmin, double s, int k0);
// Cut split: low part S_{k0+1} u and high part u - S_{k0+1} u, each measured in the full norm.
SplitNorm cut_split_norm(const SpectralField& u, const NormSpec& spec);

// Tilde norm: per block L^a in time (trapezoid, uniform step dt), weight, then l^r.
double tilde_norm(const std::vector<SpectralField>& series, double dt, const NormSpec& spec);
// Same computation from per-time block norms bn[t][j].
double tilde_norm_from_blocks(const std::vector<std::vector<double>>& bn, double dt, int jmin,
                              double s, double a, double r);

}  // namespace plab
