#pragma once

// Periodic grids, Fourier transforms and spectral calculus shared by every
// other module. Coefficients are normalised so that
//   f(x) = sum_k fhat(k) e^{i k.x},   fhat(k) = mean_x f(x) e^{-i k.x},
// which makes Parseval read  mean |f|^2 = sum |fhat|^2.

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace cglb {

using cplx = std::complex<double>;

class Grid {
public:
  Grid() = default;
  // dim in {1,2}; n a power of two, n >= 8; length > 0.
  Grid(int dim, int n, double length);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return dim_ == 1 ? std::size_t(n_) : std::size_t(n_) * n_; }
  double spacing() const noexcept { return length_ / n_; }
  double base_wavenumber() const noexcept;

  // Signed mode number of array index j; the Nyquist index maps to +n/2.
  int signed_index(int j) const noexcept { return j <= n_ / 2 ? j : j - n_; }
  double wavenumber(int j) const noexcept { return base_wavenumber() * signed_index(j); }

  std::array<int, 2> index(std::size_t flat) const noexcept;
  std::array<int, 2> mode(std::size_t flat) const noexcept;
  std::array<double, 2> wavevector(std::size_t flat) const noexcept;
  double wavenumber_norm(std::size_t flat) const noexcept;
  std::array<double, 2> point(std::size_t flat) const noexcept;
  bool on_nyquist(std::size_t flat, int axis) const noexcept;

  // Largest |signed index| kept by the 2/3 rule.
  int dealias_cutoff() const noexcept { return n_ / 3; }
  double max_wavenumber_norm() const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  int dim_ = 1;
  int n_ = 8;
  double length_ = 1.0;
};

enum class Representation { physical, spectral };

class SpectralField {
public:
  SpectralField() = default;
  explicit SpectralField(const Grid& grid, Representation rep = Representation::physical);
  SpectralField(const Grid& grid, std::vector<cplx> values, Representation rep);

  // Samples f at the grid points; f takes (x) in 1D and (x, y) in 2D.
  template <class F>
  static SpectralField sample(const Grid& grid, F&& f) {
    SpectralField out(grid, Representation::physical);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto p = grid.point(i);
      if constexpr (requires { f(p[0], p[1]); }) {
        out.values_[i] = f(p[0], p[1]);
      } else {
        out.values_[i] = f(p[0]);
      }
    }
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  Representation representation() const noexcept { return rep_; }
  bool is_spectral() const noexcept { return rep_ == Representation::spectral; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<cplx> values() noexcept { return values_; }
  std::span<const cplx> values() const noexcept { return values_; }
  cplx& operator[](std::size_t i) noexcept { return values_[i]; }
  const cplx& operator[](std::size_t i) const noexcept { return values_[i]; }

  SpectralField to_spectral() const;
  SpectralField to_physical() const;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(cplx scale) noexcept;

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(SpectralField a, cplx s) { return a *= s; }
  friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

private:
  Grid grid_;
  Representation rep_ = Representation::physical;
  std::vector<cplx> values_;
};

// Raw transforms. forward() divides by the number of points, inverse() does not.
void fft_forward(const Grid& grid, std::span<const cplx> in, std::span<cplx> out);
void fft_inverse(const Grid& grid, std::span<const cplx> in, std::span<cplx> out);

// Multiplies each mode by (i k_axis)^order. Odd orders zero the Nyquist mode.
SpectralField derivative(const SpectralField& f, int axis, int order);

// 2/3 rule: zeroes modes with |signed index| > n/3 along any axis.
SpectralField dealias(const SpectralField& f);
void dealias_in_place(const Grid& grid, std::span<cplx> coefficients);

// Zeroes modes with |k| > k_max (Euclidean norm of the wavevector).
SpectralField radial_cutoff(const SpectralField& f, double k_max);

// (sum_k (1+|k|^2)^s |fhat_k|^2)^{1/2}
double sobolev_norm(const SpectralField& f, double s);

// Equal-weight grid norm (mean |f|^p)^{1/p}; p = infinity gives max |f|.
double lp_norm(const SpectralField& f, double p);

// Pointwise product on the grid (no dealiasing); result is physical.
SpectralField pointwise_product(const SpectralField& a, const SpectralField& b);

// Drops imaginary parts in physical space (used for real-valued fields).
SpectralField real_part(const SpectralField& f);

}  // namespace cglb
