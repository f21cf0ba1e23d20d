#pragma once

// PDE coefficients and plane-wave equilibria of the coupled CGL-Burgers system
//
//   P_t + Omega.grad P - (1 + i u) Lap P = xi P - (1 + i v)|P|^2 P - r1 P div Omega
//   Omega_t + Omega.grad Omega - m Lap Omega + kappa grad |P|^2 = 0,   r1 = s1 + i s2.
//
// u, v, kappa, s1, s2 may depend affinely on the local amplitude r = |P|.

#include <optional>
#include <variant>
#include <vector>

namespace cglb {

// c0 + c1 r
struct Affine {
  double c0 = 0.0;
  double c1 = 0.0;

  double operator()(double r) const noexcept { return c0 + c1 * r; }
  double slope() const noexcept { return c1; }
  bool is_constant() const noexcept { return c1 == 0.0; }
  static Affine constant(double value) noexcept { return {value, 0.0}; }

  friend bool operator==(const Affine&, const Affine&) = default;
};

double eval_coeff(const Affine& coeffs, double r) noexcept;

struct SystemParams {
  Affine u;      // linear dispersion
  Affine v;      // nonlinear dispersion
  double xi = 1.0;
  double m = 1.0;  // diffusivity of the monotonic mode; negative in instability studies
  Affine kappa;
  Affine s1;
  Affine s2;

  bool constant_coefficients() const noexcept {
    return u.is_constant() && v.is_constant() && kappa.is_constant() && s1.is_constant() &&
           s2.is_constant();
  }
  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

struct PlaneWave {
  double r0 = 1.0;
  double theta0 = 0.0;
  double w0 = 0.0;
};

// Both constraint residuals: r0^2 + theta0^2 - 1 and u(r0) theta0^2 + v(r0) r0^2.
struct ConstraintResidual {
  double circle = 0.0;
  double dispersion = 0.0;
  double max_abs() const noexcept;
};
ConstraintResidual plane_wave_residual(const SystemParams& params, const PlaneWave& wave) noexcept;

// w0 theta0 + u(r0) theta0^2, which must vanish before the remainder analysis applies.
double compatibility_residual(const SystemParams& params, const PlaneWave& wave) noexcept;

// Phase drift d(theta)/dt of the unperturbed wave under the full system:
// -(w0 theta0 + u(r0) theta0^2 + v(r0) r0^2). Zero means P = r0 e^{i theta0 x} is stationary.
double phase_drift(const SystemParams& params, const PlaneWave& wave) noexcept;

// u = v = 0 identically: every point of r0^2 + theta0^2 = 1 is an equilibrium.
struct PlaneWaveFamily {
  double w0 = 0.0;
  PlaneWave representative() const noexcept { return {1.0, 0.0, w0}; }
  PlaneWave at(double r0, int theta_sign = +1) const;
};

enum class DriftMode {
  free,        // use BranchSelector::w0 as given
  compatible,  // solve w0 theta0 = -u(r0) theta0^2 (w0 stays free when theta0 = 0)
};

struct BranchSelector {
  std::size_t root = 0;  // index into the admissible r0 roots sorted ascending
  int theta_sign = +1;
  double w0 = 0.0;
  DriftMode drift = DriftMode::free;
  std::optional<double> family_r0;  // picks a member when the solution is a family
};

using PlaneWaveSolution = std::variant<PlaneWave, PlaneWaveFamily>;

// All r0 in [0, 1] with u(r0)(1 - r0^2) + v(r0) r0^2 = 0, ascending.
// Empty when there is no real solution; throws nothing.
std::vector<double> plane_wave_amplitudes(const SystemParams& params);

// Throws NoRealSolution when no admissible r0 exists, OutOfRange for a bad root index.
PlaneWaveSolution solve_plane_wave(const SystemParams& params, const BranchSelector& branch = {});

// Convenience: resolves a family to its default representative (or branch.family_r0).
PlaneWave solve_plane_wave_or_default(const SystemParams& params, const BranchSelector& branch = {});

}  // namespace cglb
