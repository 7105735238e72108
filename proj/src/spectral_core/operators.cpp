#include "plab/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace plab {

FourierSymbol frac_laplacian_symbol(double s) {
    FourierSymbol sym;
    sym.scalar = [s](const Vec3& x) {
        return cplx(std::pow(std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]), s), 0.0);
    };
    sym.degree = s;
    sym.homogeneous = true;
    return sym;
}

FourierSymbol derivative_symbol(int axis) {
    FourierSymbol sym;
    sym.scalar = [axis](const Vec3& x) { return cplx(0.0, x[axis]); };
    sym.degree = 1.0;
    sym.homogeneous = true;
    return sym;
}

SpectralField apply_symbol(const SpectralField& f, const FourierSymbol& sym, cplx zero_value) {
    const TorusGrid& g = f.grid();
    SpectralField out(g, f.components(), f.is_real());
    if (sym.scalar) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            cplx m = i == 0 ? zero_value : sym.scalar(g.xi(i));
            if (i != 0 && !(std::isfinite(m.real()) && std::isfinite(m.imag())))
                throw std::domain_error("symbol is not finite at a nonzero grid frequency");
            for (int c = 0; c < f.components(); ++c) out.coeffs(c)[i] = m * f.coeffs(c)[i];
        }
        return out;
    }
    if (!sym.matrix) throw std::invalid_argument("empty symbol");
    int d = g.dim();
    if (f.components() != d) throw std::invalid_argument("matrix symbol needs a d-vector field");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i == 0) {
            for (int c = 0; c < d; ++c) out.coeffs(c)[0] = zero_value * f.coeffs(c)[0];
            continue;
        }
        Mat3c m = sym.matrix(g.xi(i));
        for (int r = 0; r < d; ++r) {
            cplx acc = 0.0;
            for (int c = 0; c < d; ++c) {
                if (!(std::isfinite(m[r][c].real()) && std::isfinite(m[r][c].imag())))
                    throw std::domain_error("symbol is not finite at a nonzero grid frequency");
                acc += m[r][c] * f.coeffs(c)[i];
            }
            out.coeffs(r)[i] = acc;
        }
    }
    return out;
}

double homogeneity_defect(const FourierSymbol& sym, int dim) {
    const Vec3 rays[] = {{1.0, 0.0, 0.0}, {0.6, 0.8, 0.0}, {0.3, -0.5, 0.81}, {-0.7, 0.2, -0.4}};
    const double ts[] = {0.25, 2.0, 7.5};
    double worst = 0.0;
    for (Vec3 r : rays) {
        for (int a = dim; a < 3; ++a) r[a] = 0.0;
        for (double t : ts) {
            Vec3 tr{t * r[0], t * r[1], t * r[2]};
            if (sym.scalar) {
                cplx lhs = sym.scalar(tr), rhs = std::pow(t, sym.degree) * sym.scalar(r);
                worst = std::max(worst, std::abs(lhs - rhs) / std::max(1e-300, std::abs(rhs)));
            } else {
                Mat3c a = sym.matrix(tr), b = sym.matrix(r);
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j) {
                        cplx rhs = std::pow(t, sym.degree) * b[i][j];
                        double scale = std::max(1e-300, std::abs(rhs));
                        if (std::abs(rhs) == 0.0 && std::abs(a[i][j]) == 0.0) continue;
                        worst = std::max(worst, std::abs(a[i][j] - rhs) / scale);
                    }
            }
        }
    }
    return worst;
}

SpectralField derivative(const SpectralField& f, int axis) {
    const TorusGrid& g = f.grid();
    if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("derivative axis out of range");
    SpectralField out(g, f.components(), f.is_real());
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx m(0.0, g.xi(i)[axis]);
        for (int c = 0; c < f.components(); ++c) out.coeffs(c)[i] = m * f.coeffs(c)[i];
    }
    return out;
}

SpectralField gradient(const SpectralField& s) {
    if (s.components() != 1) throw std::invalid_argument("gradient of a non-scalar field");
    std::vector<SpectralField> parts;
    for (int a = 0; a < s.grid().dim(); ++a) parts.push_back(derivative(s, a));
    auto g = SpectralField::stack(parts);
    g.set_real(s.is_real());
    return g;
}

SpectralField divergence(const SpectralField& v) {
    const TorusGrid& g = v.grid();
    if (v.components() != g.dim()) throw std::invalid_argument("divergence of a non-vector field");
    SpectralField out(g, 1, v.is_real());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 x = g.xi(i);
        cplx acc = 0.0;
        for (int a = 0; a < g.dim(); ++a) acc += cplx(0.0, x[a]) * v.coeffs(a)[i];
        out.coeffs(0)[i] = acc;
    }
    return out;
}

SpectralField jacobian(const SpectralField& v) {
    const TorusGrid& g = v.grid();
    int d = g.dim();
    SpectralField out(g, v.components() * d, v.is_real());
    for (std::size_t i = 0; i < g.size(); ++i) {
        Vec3 x = g.xi(i);
        for (int c = 0; c < v.components(); ++c)
            for (int a = 0; a < d; ++a) out.coeffs(c * d + a)[i] = cplx(0.0, x[a]) * v.coeffs(c)[i];
    }
    return out;
}

SpectralField laplacian(const SpectralField& f) {
    const TorusGrid& g = f.grid();
    SpectralField out(g, f.components(), f.is_real());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double r = g.xi_norm(i);
        for (int c = 0; c < f.components(); ++c) out.coeffs(c)[i] = -r * r * f.coeffs(c)[i];
    }
    return out;
}

SpectralField frac_laplacian(const SpectralField& f, double s) {
    const TorusGrid& g = f.grid();
    SpectralField out(g, f.components(), f.is_real());
    for (std::size_t i = 1; i < g.size(); ++i) {
        double m = std::pow(g.xi_norm(i), s);
        for (int c = 0; c < f.components(); ++c) out.coeffs(c)[i] = m * f.coeffs(c)[i];
    }
    return out;
}

SpectralField grad_inverse_laplacian(const SpectralField& s) {
    const TorusGrid& g = s.grid();
    if (s.components() != 1) throw std::invalid_argument("expected a scalar field");
    SpectralField out(g, g.dim(), s.is_real());
    for (std::size_t i = 1; i < g.size(); ++i) {
        Vec3 x = g.xi(i);
        double r2 = g.xi_norm(i) * g.xi_norm(i);
        for (int a = 0; a < g.dim(); ++a) out.coeffs(a)[i] = cplx(0.0, x[a] / r2) * s.coeffs(0)[i];
    }
    return out;
}

std::pair<SpectralField, SpectralField> helmholtz_project(const SpectralField& u) {
    const TorusGrid& g = u.grid();
    int d = g.dim();
    if (d < 2) throw std::invalid_argument("Helmholtz projection needs d >= 2");
    if (u.components() != d) throw std::invalid_argument("Helmholtz projection of a non-vector field");
    SpectralField q(g, d, u.is_real());
    for (std::size_t i = 1; i < g.size(); ++i) {
        Vec3 x = g.xi(i);
        double r2 = g.xi_norm(i) * g.xi_norm(i);
        cplx dot = 0.0;
        for (int a = 0; a < d; ++a) dot += x[a] * u.coeffs(a)[i];
        for (int a = 0; a < d; ++a) q.coeffs(a)[i] = x[a] * dot / r2;
    }
    SpectralField p = u;
    p -= q;
    return {p, q};
}

double lebesgue_norm_samples(const TorusGrid& grid, const std::vector<std::vector<cplx>>& s, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("Lebesgue exponent must be >= 1");
    std::size_t n = s.empty() ? 0 : s[0].size();
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double a = 0.0;
            for (const auto& comp : s) a += std::norm(comp[i]);
            m = std::max(m, std::sqrt(a));
        }
        return m;
    }
    // scale by the max first so large p does not overflow
    double m = lebesgue_norm_samples(grid, s, std::numeric_limits<double>::infinity());
    if (m == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = 0.0;
        for (const auto& comp : s) a += std::norm(comp[i]);
        acc += std::pow(std::sqrt(a) / m, p);
    }
    double cell = grid.measure() / static_cast<double>(n);
    return m * std::pow(acc * cell, 1.0 / p);
}

double lebesgue_norm(const SpectralField& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("Lebesgue exponent must be >= 1");
    if (p == 2.0) return f.l2();
    std::vector<std::vector<cplx>> s;
    for (int c = 0; c < f.components(); ++c) s.push_back(f.samples(c));
    return lebesgue_norm_samples(f.grid(), s, p);
}

double imaginary_residue(const SpectralField& f) {
    double im = 0.0, mx = 0.0;
    for (int c = 0; c < f.components(); ++c) {
        for (const auto& z : f.samples(c)) {
            im = std::max(im, std::abs(z.imag()));
            mx = std::max(mx, std::abs(z));
        }
    }
    return mx > 0 ? im / mx : 0.0;
}

Dealiaser::Dealiaser(const TorusGrid& grid) : grid_(grid) {
    np_ = 3 * grid.n() / 2;
    npsize_ = 1;
    for (int a = 0; a < grid.dim(); ++a) npsize_ *= static_cast<std::size_t>(np_);
    map_.resize(grid.size());
    neg_.resize(grid.size());
    nyquist_.assign(grid.size(), 0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Idx3 k = grid.mode(i);
        std::size_t f = 0, fn = 0;
        for (int a = 0; a < grid.dim(); ++a) {
            f = f * np_ + static_cast<std::size_t>(k[a] < 0 ? k[a] + np_ : k[a]);
            fn = fn * np_ + static_cast<std::size_t>(k[a] > 0 ? np_ - k[a] : -k[a]);
            if (k[a] == -grid.n() / 2) nyquist_[i] = 1;
        }
        map_[i] = f;
        neg_[i] = fn;
    }
}

std::pair<std::vector<double>, std::vector<double>> Dealiaser::to_physical_pair(const std::vector<cplx>& a,
                                                                               const std::vector<cplx>& b) const {
    std::vector<cplx> pad(npsize_), out(npsize_);
    const cplx I(0.0, 1.0);
    for (std::size_t i = 0; i < map_.size(); ++i) pad[map_[i]] = a[i] + (b.empty() ? cplx(0.0) : I * b[i]);
    fft_nd(grid_.dim(), np_, pad.data(), out.data(), Direction::inverse);
    double s = 1.0 / grid_.measure();
    std::vector<double> f(npsize_), g(npsize_);
    for (std::size_t i = 0; i < npsize_; ++i) {
        f[i] = s * out[i].real();
        g[i] = s * out[i].imag();
    }
    return {f, g};
}

std::pair<std::vector<cplx>, std::vector<cplx>> Dealiaser::to_coeffs_pair(const std::vector<double>& p,
                                                                         const std::vector<double>& q) const {
    std::vector<cplx> z(npsize_), spec(npsize_);
    for (std::size_t i = 0; i < npsize_; ++i) z[i] = cplx(p[i], q.empty() ? 0.0 : q[i]);
    fft_nd(grid_.dim(), np_, z.data(), spec.data(), Direction::forward);
    double s = grid_.measure() / static_cast<double>(npsize_);
    std::vector<cplx> P(map_.size()), Q(map_.size());
    const cplx I(0.0, 1.0);
    for (std::size_t i = 0; i < map_.size(); ++i) {
        if (nyquist_[i]) continue;
        cplx zk = spec[map_[i]], zm = std::conj(spec[neg_[i]]);
        P[i] = 0.5 * s * (zk + zm);
        Q[i] = -0.5 * I * s * (zk - zm);
    }
    return {P, Q};
}

std::vector<cplx> Dealiaser::to_physical(const std::vector<cplx>& coeffs) const {
    std::vector<cplx> pad(npsize_), out(npsize_);
    for (std::size_t i = 0; i < map_.size(); ++i) pad[map_[i]] = coeffs[i];
    fft_nd(grid_.dim(), np_, pad.data(), out.data(), Direction::inverse);
    double s = 1.0 / grid_.measure();
    for (auto& z : out) z *= s;
    return out;
}

std::vector<cplx> Dealiaser::to_coeffs(const std::vector<cplx>& samples) const {
    std::vector<cplx> spec(npsize_);
    fft_nd(grid_.dim(), np_, samples.data(), spec.data(), Direction::forward);
    double s = grid_.measure() / static_cast<double>(npsize_);
    std::vector<cplx> out(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) out[i] = nyquist_[i] ? cplx(0.0) : s * spec[map_[i]];
    return out;
}

Vec3 Dealiaser::padded_point(std::size_t flat) const {
    Vec3 x{0, 0, 0};
    double h = 2.0 * kPi * grid_.box_scale() / np_;
    for (int a = grid_.dim() - 1; a >= 0; --a) {
        x[a] = h * static_cast<double>(flat % np_);
        flat /= np_;
    }
    return x;
}

SpectralField Dealiaser::product(const SpectralField& a, const SpectralField& b) const {
    if (a.grid() != grid_ || b.grid() != grid_) throw std::invalid_argument("grid mismatch in product");
    const SpectralField* s = &a;
    const SpectralField* v = &b;
    if (a.components() != 1 && b.components() == 1) std::swap(s, v);
    if (s->components() != 1)
        throw std::invalid_argument("product needs at least one scalar factor");
    SpectralField out(grid_, v->components(), a.is_real() && b.is_real());
    auto ps = to_physical(s->coeffs(0));
    for (int c = 0; c < v->components(); ++c) {
        auto pv = to_physical(v->coeffs(c));
        for (std::size_t i = 0; i < npsize_; ++i) pv[i] *= ps[i];
        out.coeffs(c) = to_coeffs(pv);
    }
    return out;
}

SpectralField dealiased_product(const SpectralField& a, const SpectralField& b) {
    return Dealiaser(a.grid()).product(a, b);
}

}  // namespace plab
