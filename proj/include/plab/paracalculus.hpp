#pragma once

#include <functional>
#include <string>

#include "plab/littlewood_paley.hpp"

namespace plab {

struct BonyTriple {
    SpectralField t_uv;
    SpectralField t_vu;
    SpectralField r_uv;
};

// T_u v = sum_j S_{j-1}u * Delta_j v. The low cut keeps the mean of u, so
// T_uv + T_vu + R(u,v) equals uv exactly when u and v are mean free.
SpectralField paraproduct(const SpectralField& u, const SpectralField& v);
SpectralField remainder(const SpectralField& u, const SpectralField& v);
BonyTriple bony_decompose(const SpectralField& u, const SpectralField& v);

struct PointFunction {
    std::string name;
    std::function<double(double)> f;
    // true where f may be evaluated
    std::function<bool(double)> domain;
};

PointFunction identity_function();
PointFunction inertia_function();  // I(z) = z / (1 + z), domain 1 + z > 0

// F(u) by evaluation on the 3N/2 padded grid followed by truncation.
SpectralField compose(const PointFunction& F, const SpectralField& u);

// v . grad b with b scalar or vector, dealiased.
SpectralField advect(const SpectralField& v, const SpectralField& b);

enum class CommutatorVariant { plain, tilde };

// plain: Delta_j(v.grad b) - v.grad Delta_j b.
// tilde: d_i Delta_j(v.grad b) - v.grad d_i Delta_j b, stacked over i
// (for a scalar b the result has d components).
SpectralField transport_commutator(const SpectralField& v, const SpectralField& b, int j,
                                   CommutatorVariant variant = CommutatorVariant::plain);

}  // namespace plab
