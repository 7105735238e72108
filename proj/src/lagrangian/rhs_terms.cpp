#include <algorithm>
#include <cmath>

#include "samples.hpp"

namespace plab {

using detail::colon;
using detail::identity;
using detail::matmul;
using detail::matrix_field;
using detail::matrix_samples;
using detail::transpose;

LagTerms lagrangian_rhs_terms(const FlowMap& Xv, const SpectralField& w, const SpectralField& rho0,
                              const LagrangianParams& p) {
    const TorusGrid& g = w.grid();
    const int d = g.dim();
    if (w.components() != d || rho0.components() != 1) throw std::invalid_argument("w must be a d-vector, rho0 a scalar");
    if (!p.base.pressure.P) throw std::invalid_argument("pressure law is incomplete");
    auto adj = matrix_samples(Xv.adj, d);
    auto A = matrix_samples(Xv.A, d);
    auto Dw = matrix_samples(jacobian(w), d);
    auto J = Xv.J.real_samples();
    auto r0 = rho0.real_samples();
    const MatD id = identity(d);
    std::vector<MatD> I1(g.size()), I2(g.size()), I3(g.size()), I4(g.size());
    for (std::size_t q = 0; q < g.size(); ++q) {
        if (!(r0[q] > 0.0)) throw DensityError("reference density must be positive");
        double rho = r0[q] / J[q];
        if (!(rho > 0.0)) throw DensityError("density floor violated along the flow");
        double mu = p.mu(rho), la = p.lambda(rho), mu0 = p.mu(r0[q]), la0 = p.lambda(r0[q]);
        const MatD& Aq = A[q];
        MatD At = transpose(Aq, d), gw = transpose(Dw[q], d);
        // Dw A + A^T grad w with (grad w)_{ij} = d_i w^j
        MatD DwA = matmul(Dw[q], Aq, d), AtG = matmul(At, gw, d);
        MatD AmI{};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) AmI[i][j] = Aq[i][j] - id[i][j];
        MatD Dw_AmI = matmul(Dw[q], AmI, d), AmIt_G = matmul(transpose(AmI, d), gw, d);
        double divA = colon(At, gw, d);
        double divAmI = colon(transpose(AmI, d), gw, d);
        MatD S{}, adjmI{};
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                S[i][j] = mu * (DwA[i][j] + AtG[i][j]) + la * divA * id[i][j];
                adjmI[i][j] = adj[q][i][j] - id[i][j];
            }
        I1[q] = matmul(adjmI, S, d);
        double Pq = p.base.pressure.P(rho);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                I2[q][i][j] = (mu - mu0) * (DwA[i][j] + AtG[i][j]) + (la - la0) * divA * id[i][j];
                I3[q][i][j] = mu0 * (Dw_AmI[i][j] + AmIt_G[i][j]) + la0 * divAmI * id[i][j];
                I4[q][i][j] = -adj[q][i][j] * Pq;
            }
    }
    return {matrix_field(g, I1, d), matrix_field(g, I2, d), matrix_field(g, I3, d), matrix_field(g, I4, d)};
}

SpectralField lagrangian_forcing(const LagTerms& I, const SpectralField& rho0) {
    SpectralField sum = I.I1;
    sum += I.I2;
    sum += I.I3;
    sum += I.I4;
    SpectralField dv = matrix_divergence(sum);
    const TorusGrid& g = dv.grid();
    auto r0 = rho0.real_samples();
    std::vector<std::vector<double>> s(dv.components());
    for (int c = 0; c < dv.components(); ++c) {
        s[c] = dv.real_samples(c);
        for (std::size_t q = 0; q < g.size(); ++q) s[c][q] /= r0[q];
    }
    return SpectralField::from_real_samples(g, s);
}

}  // namespace plab
