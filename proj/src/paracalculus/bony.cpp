#include <cmath>

#include "plab/paracalculus.hpp"

namespace plab {
namespace {

void check_pair(const SpectralField& u, const SpectralField& v) {
    if (u.grid() != v.grid()) throw std::invalid_argument("grid mismatch");
    if (u.components() != 1 || v.components() != 1)
        throw std::invalid_argument("paraproducts are defined for scalar fields");
}

std::vector<cplx> weighted(const std::vector<cplx>& c, const std::vector<double>& w) {
    std::vector<cplx> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = w[i] * c[i];
    return out;
}

std::vector<cplx> chi_weighted(const TorusGrid& g, const std::vector<cplx>& c, int j) {
    CutoffPair cp;
    double scale = std::ldexp(1.0, -j);
    std::vector<cplx> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = cp.chi(scale * g.xi_norm(i)) * c[i];
    return out;
}

}  // namespace

// Each summand is a dealiased product; truncation is linear, so the sum is
// accumulated on the padded grid and truncated once.
SpectralField paraproduct(const SpectralField& u, const SpectralField& v) {
    check_pair(u, v);
    const TorusGrid& g = u.grid();
    Dealiaser de(g);
    JRange r = resolvable_range(g);
    std::vector<cplx> acc(de.padded_size());
    for (int j = r.jmin; j <= r.jmax; ++j) {
        auto lo = de.to_physical(chi_weighted(g, u.coeffs(), j - 1));
        auto hi = de.to_physical(weighted(v.coeffs(), block_weights(g, j)));
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += lo[i] * hi[i];
    }
    SpectralField out(g, 1, u.is_real() && v.is_real());
    out.coeffs() = de.to_coeffs(acc);
    return out;
}

SpectralField remainder(const SpectralField& u, const SpectralField& v) {
    check_pair(u, v);
    const TorusGrid& g = u.grid();
    Dealiaser de(g);
    JRange r = resolvable_range(g);
    std::vector<std::vector<cplx>> ub, vb;
    for (int j = r.jmin; j <= r.jmax; ++j) {
        ub.push_back(de.to_physical(weighted(u.coeffs(), block_weights(g, j))));
        vb.push_back(de.to_physical(weighted(v.coeffs(), block_weights(g, j))));
    }
    std::vector<cplx> acc(de.padded_size());
    int nb = r.count();
    for (int a = 0; a < nb; ++a)
        for (int b = std::max(0, a - 1); b <= std::min(nb - 1, a + 1); ++b)
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += ub[a][i] * vb[b][i];
    SpectralField out(g, 1, u.is_real() && v.is_real());
    out.coeffs() = de.to_coeffs(acc);
    return out;
}

BonyTriple bony_decompose(const SpectralField& u, const SpectralField& v) {
    return {paraproduct(u, v), paraproduct(v, u), remainder(u, v)};
}

SpectralField advect(const SpectralField& v, const SpectralField& b) {
    const TorusGrid& g = v.grid();
    int d = g.dim();
    if (v.components() != d) throw std::invalid_argument("advecting field must be a d-vector");
    if (b.grid() != g) throw std::invalid_argument("grid mismatch");
    Dealiaser de(g);
    std::vector<std::vector<cplx>> pv;
    for (int a = 0; a < d; ++a) pv.push_back(de.to_physical(v.coeffs(a)));
    SpectralField out(g, b.components(), v.is_real() && b.is_real());
    for (int c = 0; c < b.components(); ++c) {
        std::vector<cplx> acc(de.padded_size());
        for (int a = 0; a < d; ++a) {
            auto db = de.to_physical(derivative(b.component(c), a).coeffs());
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += pv[a][i] * db[i];
        }
        out.coeffs(c) = de.to_coeffs(acc);
    }
    return out;
}

SpectralField transport_commutator(const SpectralField& v, const SpectralField& b, int j,
                                   CommutatorVariant variant) {
    if (v.grid() != b.grid()) throw std::invalid_argument("grid mismatch");
    SpectralField vb = advect(v, b);
    if (variant == CommutatorVariant::plain) {
        SpectralField out = dyadic_block(vb, j);
        out -= advect(v, dyadic_block(b, j));
        return out;
    }
    int d = v.grid().dim();
    std::vector<SpectralField> parts;
    for (int i = 0; i < d; ++i) {
        SpectralField lhs = derivative(dyadic_block(vb, j), i);
        lhs -= advect(v, derivative(dyadic_block(b, j), i));
        for (int c = 0; c < lhs.components(); ++c) parts.push_back(lhs.component(c));
    }
    return SpectralField::stack(parts);
}

}  // namespace plab
