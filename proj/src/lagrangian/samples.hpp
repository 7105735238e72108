#pragma once

#include <vector>

#include "plab/lagrangian.hpp"

namespace plab::detail {

inline std::vector<MatD> matrix_samples(const SpectralField& F, int d) {
    std::vector<MatD> out(F.grid().size(), MatD{});
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            auto s = F.real_samples(i * d + j);
            for (std::size_t p = 0; p < s.size(); ++p) out[p][i][j] = s[p];
        }
    return out;
}

inline SpectralField matrix_field(const TorusGrid& g, const std::vector<MatD>& m, int d) {
    std::vector<std::vector<double>> s(d * d, std::vector<double>(g.size()));
    for (std::size_t p = 0; p < g.size(); ++p)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) s[i * d + j][p] = m[p][i][j];
    return SpectralField::from_real_samples(g, s);
}

inline SpectralField scalar_field(const TorusGrid& g, const std::vector<double>& v) {
    return SpectralField::from_real_samples(g, {v});
}

inline MatD matmul(const MatD& a, const MatD& b, int d) {
    MatD c{};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline MatD transpose(const MatD& a, int d) {
    MatD c{};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) c[i][j] = a[j][i];
    return c;
}

inline MatD identity(int d) {
    MatD c{};
    for (int i = 0; i < d; ++i) c[i][i] = 1.0;
    return c;
}

// tr(AB)
inline double colon(const MatD& a, const MatD& b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += a[i][j] * b[j][i];
    return s;
}

}  // namespace plab::detail
