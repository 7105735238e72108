#include "plab/spectral_core.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace plab {

TorusGrid::TorusGrid(int dim, int n, double box_scale) : dim_(dim), n_(n), m_(box_scale) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
    if (n < 8 || n % 2 != 0) throw std::invalid_argument("grid size N must be even and >= 8");
    if (!(box_scale > 0.0)) throw std::invalid_argument("box scale M must be positive");
    size_ = 1;
    for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(n);
    auto rho = std::make_shared<std::vector<double>>(size_);
    for (std::size_t f = 0; f < size_; ++f) {
        Vec3 x = xi(f);
        (*rho)[f] = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    }
    rho_ = std::move(rho);
}

TorusGrid make_grid(int dim, int n, double box_scale) {
    if (box_scale < 1.0) throw std::invalid_argument("box scale M must be >= 1");
    return TorusGrid(dim, n, box_scale);
}

double TorusGrid::max_frequency() const { return std::sqrt(double(dim_)) * (n_ / 2) / m_; }

double TorusGrid::measure() const { return std::pow(2.0 * kPi * m_, dim_); }

double TorusGrid::cell_volume() const { return std::pow(2.0 * kPi * m_ / n_, dim_); }

Idx3 TorusGrid::mode(std::size_t flat) const {
    Idx3 k{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
        k[a] = axis_mode(static_cast<int>(flat % n_));
        flat /= n_;
    }
    return k;
}

Vec3 TorusGrid::xi(std::size_t flat) const {
    Idx3 k = mode(flat);
    return {k[0] / m_, k[1] / m_, k[2] / m_};
}

Vec3 TorusGrid::point(std::size_t flat) const {
    Vec3 x{0, 0, 0};
    double h = 2.0 * kPi * m_ / n_;
    for (int a = dim_ - 1; a >= 0; --a) {
        x[a] = h * static_cast<double>(flat % n_);
        flat /= n_;
    }
    return x;
}

std::int64_t TorusGrid::flat_of_mode(const Idx3& k) const {
    std::int64_t f = 0;
    for (int a = 0; a < dim_; ++a) {
        if (k[a] < -n_ / 2 || k[a] >= n_ / 2) return -1;
        int i = k[a] < 0 ? k[a] + n_ : k[a];
        f = f * n_ + i;
    }
    for (int a = dim_; a < 3; ++a)
        if (k[a] != 0) return -1;
    return f;
}

SpectralField::SpectralField(const TorusGrid& grid, int components, bool real)
    : grid_(grid), c_(components, std::vector<cplx>(grid.size())), real_(real) {
    if (components < 1) throw std::invalid_argument("field needs at least one component");
}

SpectralField SpectralField::from_samples(const TorusGrid& grid,
                                          const std::vector<std::vector<cplx>>& samples,
                                          bool real) {
    SpectralField f(grid, static_cast<int>(samples.size()), real);
    for (std::size_t c = 0; c < samples.size(); ++c)
        f.c_[c] = transform(grid, samples[c], Direction::forward);
    return f;
}

SpectralField SpectralField::from_real_samples(const TorusGrid& grid,
                                               const std::vector<std::vector<double>>& samples) {
    std::vector<std::vector<cplx>> s(samples.size());
    for (std::size_t c = 0; c < samples.size(); ++c) s[c].assign(samples[c].begin(), samples[c].end());
    return from_samples(grid, s, true);
}

SpectralField SpectralField::from_function(const TorusGrid& grid, int components,
                                           const std::function<void(const Vec3&, double*)>& fn) {
    std::vector<std::vector<double>> s(components, std::vector<double>(grid.size()));
    std::vector<double> val(components);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        fn(grid.point(i), val.data());
        for (int c = 0; c < components; ++c) s[c][i] = val[c];
    }
    return from_real_samples(grid, s);
}

std::vector<cplx> SpectralField::samples(int c) const {
    return transform(grid_, c_.at(c), Direction::inverse);
}

std::vector<double> SpectralField::real_samples(int c) const {
    auto s = samples(c);
    std::vector<double> r(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) r[i] = s[i].real();
    return r;
}

cplx SpectralField::mean(int c) const { return c_.at(c)[0] / grid_.measure(); }

SpectralField SpectralField::component(int c) const {
    SpectralField f(grid_, 1, real_);
    f.c_[0] = c_.at(c);
    return f;
}

SpectralField SpectralField::stack(const std::vector<SpectralField>& comps) {
    if (comps.empty()) throw std::invalid_argument("stack of no fields");
    SpectralField f(comps[0].grid(), static_cast<int>(comps.size()), true);
    for (std::size_t c = 0; c < comps.size(); ++c) {
        if (comps[c].grid() != f.grid_ || comps[c].components() != 1)
            throw std::invalid_argument("stack expects scalar fields on one grid");
        f.c_[c] = comps[c].c_[0];
        f.real_ = f.real_ && comps[c].real_;
    }
    return f;
}

void SpectralField::check_compatible(const SpectralField& o) const {
    if (grid_ != o.grid_) throw std::invalid_argument("grid mismatch");
    if (components() != o.components()) throw std::invalid_argument("component mismatch");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) { return axpy(1.0, o); }

SpectralField& SpectralField::operator-=(const SpectralField& o) { return axpy(-1.0, o); }

SpectralField& SpectralField::axpy(double s, const SpectralField& o) {
    check_compatible(o);
    for (std::size_t c = 0; c < c_.size(); ++c) {
        auto& a = c_[c];
        const auto& b = o.c_[c];
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
    }
    real_ = real_ && o.real_;
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& comp : c_)
        for (auto& z : comp) z *= s;
    return *this;
}

SpectralField& SpectralField::operator*=(cplx s) {
    for (auto& comp : c_)
        for (auto& z : comp) z *= s;
    if (s.imag() != 0.0) real_ = false;
    return *this;
}

double SpectralField::l2() const {
    double acc = 0.0;
    for (const auto& comp : c_)
        for (const auto& z : comp) acc += std::norm(z);
    return std::sqrt(acc / grid_.measure());
}

double SpectralField::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& comp : c_)
        for (const auto& z : comp) m = std::max(m, std::abs(z));
    return m;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

SpectralField random_field(const TorusGrid& grid, int components, std::uint64_t seed,
                           const RandomFieldOptions& opt) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int band = opt.band > 0 ? opt.band : grid.n() / 3;
    band = std::min(band, grid.n() / 2 - 1);
    SpectralField f(grid, components, opt.real);
    for (int c = 0; c < components; ++c) {
        auto& co = f.coeffs(c);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            Idx3 k = grid.mode(i);
            int kmax = std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
            double re = gauss(rng), im = gauss(rng);
            if (kmax > band) continue;
            double kn = std::sqrt(double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
            co[i] = cplx(re, im) * std::pow(1.0 + kn, -opt.decay);
        }
        if (opt.real) {
            std::vector<cplx> sym(co.size());
            for (std::size_t i = 0; i < grid.size(); ++i) {
                Idx3 k = grid.mode(i);
                auto j = grid.flat_of_mode({-k[0], -k[1], -k[2]});
                sym[i] = j >= 0 ? 0.5 * (co[i] + std::conj(co[j])) : 0.0;
            }
            co = std::move(sym);
        }
        if (opt.zero_mean) co[0] = 0.0;
    }
    // unit L2 norm keeps test tolerances scale free
    double n = f.l2();
    if (n > 0) f *= 1.0 / n;
    return f;
}

}  // namespace plab
