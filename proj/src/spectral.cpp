#include "cglb/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "cglb/errors.hpp"

namespace cglb {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// FFTW planning is not thread-safe, execution with new arrays is. Plans are
// created once per (dim, n) under a lock and reused by every caller.
// FFTW_ESTIMATE keeps the chosen algorithm, and so the rounding, identical
// from run to run.
class PlanCache {
public:
  struct Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
  };

  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  const Plans& get(int dim, int n) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(dim, n);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    const std::size_t size = dim == 1 ? std::size_t(n) : std::size_t(n) * n;
    auto* in = fftw_alloc_complex(size);
    auto* out = fftw_alloc_complex(size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    Plans p;
    if (dim == 1) {
      p.forward = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, flags);
      p.backward = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, flags);
    } else {
      p.forward = fftw_plan_dft_2d(n, n, in, out, FFTW_FORWARD, flags);
      p.backward = fftw_plan_dft_2d(n, n, in, out, FFTW_BACKWARD, flags);
    }
    fftw_free(in);
    fftw_free(out);
    return plans_.emplace(key, p).first->second;
  }

  ~PlanCache() {
    for (auto& [key, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, Plans> plans_;
};

void execute(fftw_plan plan, std::span<const cplx> in, std::span<cplx> out) {
  if (in.data() == out.data()) {
    std::vector<cplx> copy(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(copy.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
  } else {
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
  }
}

void require_same_layout(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid()) || a.representation() != b.representation())
    throw Error("field arithmetic requires matching grid and representation");
}

}  // namespace

Grid::Grid(int dim, int n, double length) : dim_(dim), n_(n), length_(length) {
  if (dim != 1 && dim != 2) throw ConfigError("grid dimension must be 1 or 2");
  if (n < 8 || !power_of_two(n)) throw ConfigError("grid size must be a power of two >= 8");
  if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("grid length must be positive");
}

double Grid::base_wavenumber() const noexcept { return 2.0 * std::numbers::pi / length_; }

std::array<int, 2> Grid::index(std::size_t flat) const noexcept {
  if (dim_ == 1) return {int(flat), 0};
  return {int(flat / n_), int(flat % n_)};
}

std::array<int, 2> Grid::mode(std::size_t flat) const noexcept {
  const auto ij = index(flat);
  return {signed_index(ij[0]), dim_ == 1 ? 0 : signed_index(ij[1])};
}

std::array<double, 2> Grid::wavevector(std::size_t flat) const noexcept {
  const auto m = mode(flat);
  const double k0 = base_wavenumber();
  return {k0 * m[0], k0 * m[1]};
}

double Grid::wavenumber_norm(std::size_t flat) const noexcept {
  const auto k = wavevector(flat);
  return std::hypot(k[0], k[1]);
}

std::array<double, 2> Grid::point(std::size_t flat) const noexcept {
  const auto ij = index(flat);
  return {ij[0] * spacing(), dim_ == 1 ? 0.0 : ij[1] * spacing()};
}

bool Grid::on_nyquist(std::size_t flat, int axis) const noexcept {
  return index(flat)[axis] == n_ / 2;
}

double Grid::max_wavenumber_norm() const noexcept {
  return base_wavenumber() * (n_ / 2) * std::sqrt(double(dim_));
}

SpectralField::SpectralField(const Grid& grid, Representation rep)
    : grid_(grid), rep_(rep), values_(grid.size(), cplx{}) {}

SpectralField::SpectralField(const Grid& grid, std::vector<cplx> values, Representation rep)
    : grid_(grid), rep_(rep), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw Error("field size does not match grid");
}

SpectralField SpectralField::to_spectral() const {
  if (is_spectral()) return *this;
  SpectralField out(grid_, Representation::spectral);
  fft_forward(grid_, values_, out.values_);
  return out;
}

SpectralField SpectralField::to_physical() const {
  if (!is_spectral()) return *this;
  SpectralField out(grid_, Representation::physical);
  fft_inverse(grid_, values_, out.values_);
  return out;
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_layout(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_layout(*this, other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(cplx scale) noexcept {
  for (auto& v : values_) v *= scale;
  return *this;
}

void fft_forward(const Grid& grid, std::span<const cplx> in, std::span<cplx> out) {
  const auto& plans = PlanCache::instance().get(grid.dim(), grid.n());
  execute(plans.forward, in, out);
  const double scale = 1.0 / double(grid.size());
  for (auto& v : out) v *= scale;
}

void fft_inverse(const Grid& grid, std::span<const cplx> in, std::span<cplx> out) {
  const auto& plans = PlanCache::instance().get(grid.dim(), grid.n());
  execute(plans.backward, in, out);
}

SpectralField derivative(const SpectralField& f, int axis, int order) {
  const Grid& g = f.grid();
  if (axis < 0 || axis >= g.dim()) throw OutOfRange("derivative axis out of range");
  SpectralField out = f.to_spectral();
  if (order == 0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (order % 2 == 1 && g.on_nyquist(i, axis)) {
      out[i] = 0.0;
      continue;
    }
    const cplx ik(0.0, g.wavevector(i)[axis]);
    out[i] *= std::pow(ik, order);
  }
  return out;
}

void dealias_in_place(const Grid& grid, std::span<cplx> coefficients) {
  const int cut = grid.dealias_cutoff();
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const auto m = grid.mode(i);
    if (std::abs(m[0]) > cut || std::abs(m[1]) > cut) coefficients[i] = 0.0;
  }
}

SpectralField dealias(const SpectralField& f) {
  SpectralField out = f.to_spectral();
  dealias_in_place(out.grid(), out.values());
  return out;
}

SpectralField radial_cutoff(const SpectralField& f, double k_max) {
  SpectralField out = f.to_spectral();
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out.grid().wavenumber_norm(i) > k_max) out[i] = 0.0;
  return out;
}

double sobolev_norm(const SpectralField& f, double s) {
  const SpectralField c = f.to_spectral();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double k = c.grid().wavenumber_norm(i);
    sum += std::pow(1.0 + k * k, s) * std::norm(c[i]);
  }
  return std::sqrt(sum);
}

double lp_norm(const SpectralField& f, double p) {
  const SpectralField v = f.to_physical();
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& x : v.values()) m = std::max(m, std::abs(x));
    return m;
  }
  double sum = 0.0;
  if (p == 2.0) {
    for (const auto& x : v.values()) sum += std::norm(x);
    return std::sqrt(sum / double(v.size()));
  }
  for (const auto& x : v.values()) sum += std::pow(std::abs(x), p);
  return std::pow(sum / double(v.size()), 1.0 / p);
}

SpectralField pointwise_product(const SpectralField& a, const SpectralField& b) {
  SpectralField pa = a.to_physical();
  const SpectralField pb = b.to_physical();
  if (!(pa.grid() == pb.grid())) throw Error("pointwise product requires matching grids");
  for (std::size_t i = 0; i < pa.size(); ++i) pa[i] *= pb[i];
  return pa;
}

SpectralField real_part(const SpectralField& f) {
  SpectralField out = f.to_physical();
  for (auto& v : out.values()) v = v.real();
  return out;
}

}  // namespace cglb
