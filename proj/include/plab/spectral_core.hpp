#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace plab {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Idx3 = std::array<int, 3>;
using Mat3c = std::array<std::array<cplx, 3>, 3>;

inline constexpr double kPi = 3.14159265358979323846;

/// Periodic box [0, 2*pi*M)^d sampled with N points per axis.
///
/// Flat indices are row-major with the last axis fastest (FFTW order). Axis
/// index i maps to the integer mode i for i < N/2 and i - N otherwise, and the
/// wave vector is mode / M.
class TorusGrid {
public:
    TorusGrid() = default;
    TorusGrid(int dim, int n, double box_scale);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double box_scale() const { return m_; }
    std::size_t size() const { return size_; }

    double nyquist() const { return n_ / (2.0 * m_); }
    double lowest_frequency() const { return 1.0 / m_; }
    double max_frequency() const;
    double measure() const;      // (2 pi M)^d
    double cell_volume() const;  // (2 pi M / N)^d

    int axis_mode(int i) const { return i < n_ / 2 ? i : i - n_; }
    Idx3 mode(std::size_t flat) const;
    Vec3 xi(std::size_t flat) const;
    double xi_norm(std::size_t flat) const { return rho_->at(flat); }
    const std::vector<double>& xi_norms() const { return *rho_; }
    Vec3 point(std::size_t flat) const;
    // Flat index of an integer mode, or -1 if outside the index set.
    std::int64_t flat_of_mode(const Idx3& k) const;

    bool operator==(const TorusGrid& o) const {
        return dim_ == o.dim_ && n_ == o.n_ && m_ == o.m_;
    }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }

private:
    int dim_ = 0;
    int n_ = 0;
    double m_ = 1.0;
    std::size_t size_ = 0;
    std::shared_ptr<const std::vector<double>> rho_;
};

TorusGrid make_grid(int dim, int n, double box_scale);

/// Scalar or d-component vector field held as Fourier coefficients.
///
/// coeff(xi) = (2 pi M)^d / N^d * sum_x f(x) exp(-i xi.x), so coefficients
/// approximate the continuous Fourier transform and are independent of N.
class SpectralField {
public:
    SpectralField() = default;
    SpectralField(const TorusGrid& grid, int components, bool real = true);

    static SpectralField from_samples(const TorusGrid& grid,
                                      const std::vector<std::vector<cplx>>& samples,
                                      bool real);
    static SpectralField from_real_samples(const TorusGrid& grid,
                                           const std::vector<std::vector<double>>& samples);
    static SpectralField from_function(const TorusGrid& grid, int components,
                                       const std::function<void(const Vec3&, double*)>& f);

    const TorusGrid& grid() const { return grid_; }
    int components() const { return static_cast<int>(c_.size()); }
    bool is_real() const { return real_; }
    void set_real(bool r) { real_ = r; }

    std::vector<cplx>& coeffs(int c = 0) { return c_.at(c); }
    const std::vector<cplx>& coeffs(int c = 0) const { return c_.at(c); }

    std::vector<cplx> samples(int c = 0) const;
    std::vector<double> real_samples(int c = 0) const;

    cplx mean(int c = 0) const;  // spatial average
    SpectralField component(int c) const;
    static SpectralField stack(const std::vector<SpectralField>& comps);

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
    SpectralField& operator*=(cplx s);
    // this += s * o
    SpectralField& axpy(double s, const SpectralField& o);

    // Euclidean L2 norm through Parseval, all components.
    double l2() const;
    double max_abs_coeff() const;

private:
    void check_compatible(const SpectralField& o) const;
    TorusGrid grid_;
    std::vector<std::vector<cplx>> c_;
    bool real_ = true;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

enum class Direction { forward, inverse };

// Raw transform of one component with the field normalization.
std::vector<cplx> transform(const TorusGrid& grid, const std::vector<cplx>& data, Direction dir);

// Low level: unnormalized FFTW transform on an n^d box (n need not be even).
void fft_nd(int dim, int n, const cplx* in, cplx* out, Direction dir);

/// Fourier multiplier. Scalar symbols act componentwise; matrix symbols map a
/// d-vector field to a d-vector field.
struct FourierSymbol {
    std::function<cplx(const Vec3&)> scalar;
    std::function<Mat3c(const Vec3&)> matrix;
    double degree = 0.0;
    bool homogeneous = false;
};

FourierSymbol frac_laplacian_symbol(double s);  // |xi|^s
FourierSymbol derivative_symbol(int axis);        // i xi_axis

// Applies the symbol; the xi = 0 coefficient is replaced by zero_value * coeff.
SpectralField apply_symbol(const SpectralField& f, const FourierSymbol& sym, cplx zero_value = 0.0);
// Checks symbol(t xi) = t^m symbol(xi) on a few rays. Returns max relative defect.
double homogeneity_defect(const FourierSymbol& sym, int dim);

SpectralField derivative(const SpectralField& f, int axis);
SpectralField gradient(const SpectralField& scalar);
SpectralField divergence(const SpectralField& vec);
// Vector field D f with (Df)_{ij} = d_j f^i stored as components i*d + j.
SpectralField jacobian(const SpectralField& vec);
SpectralField laplacian(const SpectralField& f);
SpectralField frac_laplacian(const SpectralField& f, double s);
// grad (-Laplacian)^{-1} of a scalar, mean annihilated.
SpectralField grad_inverse_laplacian(const SpectralField& scalar);

std::pair<SpectralField, SpectralField> helmholtz_project(const SpectralField& u);

// (sum_x |f(x)|^p * cell)^{1/p}; |f| is the Euclidean norm over components.
double lebesgue_norm(const SpectralField& f, double p);
double lebesgue_norm_samples(const TorusGrid& grid, const std::vector<std::vector<cplx>>& s, double p);

// Imaginary part of physical samples relative to the max modulus.
double imaginary_residue(const SpectralField& f);

/// Products through zero padding to 3N/2 points per axis. For band-limited
/// inputs the result is the exact product truncated to the grid.
class Dealiaser {
public:
    explicit Dealiaser(const TorusGrid& grid);
    int padded_n() const { return np_; }
    std::size_t padded_size() const { return npsize_; }
    const TorusGrid& grid() const { return grid_; }

    std::vector<cplx> to_physical(const std::vector<cplx>& coeffs) const;
    std::vector<cplx> to_physical(const SpectralField& f, int c) const { return to_physical(f.coeffs(c)); }
    // Truncates to the grid; modes with an axis index at -N/2 (no conjugate partner) are dropped.
    std::vector<cplx> to_coeffs(const std::vector<cplx>& padded_samples) const;
    // Two real fields through one complex transform. The coefficients must be
    // Hermitian (real fields); b or q may be empty.
    std::pair<std::vector<double>, std::vector<double>> to_physical_pair(const std::vector<cplx>& a,
                                                                         const std::vector<cplx>& b) const;
    std::pair<std::vector<cplx>, std::vector<cplx>> to_coeffs_pair(const std::vector<double>& p,
                                                                   const std::vector<double>& q) const;
    Vec3 padded_point(std::size_t flat) const;

    SpectralField product(const SpectralField& a, const SpectralField& b) const;

private:
    TorusGrid grid_;
    int np_ = 0;
    std::size_t npsize_ = 0;
    std::vector<std::size_t> map_;  // grid flat -> padded flat
    std::vector<std::size_t> neg_;  // grid flat -> padded flat of the negated mode
    std::vector<char> nyquist_;
};

SpectralField dealiased_product(const SpectralField& a, const SpectralField& b);

struct RandomFieldOptions {
    int band = 0;           // max |k_i|; 0 means N/3
    double decay = 0.0;     // amplitude ~ (1 + |k|)^(-decay)
    bool real = true;
    bool zero_mean = true;
};
SpectralField random_field(const TorusGrid& grid, int components, std::uint64_t seed,
                           const RandomFieldOptions& opt = {});

}  // namespace plab
