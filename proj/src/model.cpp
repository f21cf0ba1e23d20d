#include "cglb/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "cglb/errors.hpp"

namespace cglb {

namespace {

// g(r) = u(r)(1 - r^2) + v(r) r^2 as a cubic: coefficients of 1, r, r^2, r^3.
std::array<double, 4> amplitude_cubic(const SystemParams& p) {
  return {p.u.c0, p.u.c1, p.v.c0 - p.u.c0, p.v.c1 - p.u.c1};
}

double horner(const std::array<double, 4>& c, double r) {
  return ((c[3] * r + c[2]) * r + c[1]) * r + c[0];
}

double bisect(const std::array<double, 4>& c, double lo, double hi) {
  double glo = horner(c, lo);
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = horner(c, mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return std::abs(horner(c, lo)) <= std::abs(horner(c, hi)) ? lo : hi;
}

// Real roots of the derivative 3c3 r^2 + 2c2 r + c1 lying strictly inside (0, 1).
std::vector<double> critical_points(const std::array<double, 4>& c) {
  const double a = 3.0 * c[3], b = 2.0 * c[2], cc = c[1];
  std::vector<double> out;
  if (a == 0.0) {
    if (b != 0.0) out.push_back(-cc / b);
  } else {
    const double disc = b * b - 4.0 * a * cc;
    if (disc >= 0.0) {
      const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q != 0.0) out.push_back(cc / q);
      out.push_back(q / a);
    }
  }
  std::erase_if(out, [](double r) { return !(r > 0.0 && r < 1.0); });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double eval_coeff(const Affine& coeffs, double r) noexcept { return coeffs(r); }

double ConstraintResidual::max_abs() const noexcept {
  return std::max(std::abs(circle), std::abs(dispersion));
}

ConstraintResidual plane_wave_residual(const SystemParams& params, const PlaneWave& w) noexcept {
  const double t2 = w.theta0 * w.theta0, r2 = w.r0 * w.r0;
  return {r2 + t2 - 1.0, params.u(w.r0) * t2 + params.v(w.r0) * r2};
}

double compatibility_residual(const SystemParams& params, const PlaneWave& w) noexcept {
  return w.w0 * w.theta0 + params.u(w.r0) * w.theta0 * w.theta0;
}

double phase_drift(const SystemParams& params, const PlaneWave& w) noexcept {
  return -(compatibility_residual(params, w) + params.v(w.r0) * w.r0 * w.r0);
}

PlaneWave PlaneWaveFamily::at(double r0, int theta_sign) const {
  if (!(r0 >= 0.0 && r0 <= 1.0)) throw OutOfRange("family member needs 0 <= r0 <= 1");
  const double theta = std::sqrt(std::max(0.0, 1.0 - r0 * r0));
  return {r0, theta_sign < 0 ? -theta : theta, w0};
}

std::vector<double> plane_wave_amplitudes(const SystemParams& params) {
  const auto c = amplitude_cubic(params);
  const double scale = std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]) + std::abs(c[3]);
  if (scale == 0.0) return {};

  // Split [0, 1] at the critical points; g is monotone on each piece, so each
  // piece holds at most one simple root and tangent roots sit on the cuts.
  std::vector<double> knots{0.0};
  for (double r : critical_points(c)) knots.push_back(r);
  knots.push_back(1.0);

  const double touch = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  std::vector<double> roots;
  for (double r : knots)
    if (std::abs(horner(c, r)) <= touch) roots.push_back(r);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double ga = horner(c, knots[i]), gb = horner(c, knots[i + 1]);
    if (std::abs(ga) <= touch || std::abs(gb) <= touch) continue;
    if ((ga < 0.0) != (gb < 0.0)) roots.push_back(bisect(c, knots[i], knots[i + 1]));
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-12; }),
              roots.end());
  return roots;
}

PlaneWaveSolution solve_plane_wave(const SystemParams& params, const BranchSelector& branch) {
  const bool family = params.u == Affine{} && params.v == Affine{};
  if (family) {
    PlaneWaveFamily fam{branch.w0};
    if (!branch.family_r0) return fam;
    return fam.at(*branch.family_r0, branch.theta_sign);
  }

  const auto roots = plane_wave_amplitudes(params);
  if (roots.empty())
    throw NoRealSolution("no r0 in [0, 1] satisfies u(r0)(1 - r0^2) + v(r0) r0^2 = 0");
  if (branch.root >= roots.size())
    throw OutOfRange("plane-wave branch index exceeds the number of admissible roots");

  PlaneWave w;
  w.r0 = roots[branch.root];
  const double theta = std::sqrt(std::max(0.0, 1.0 - w.r0 * w.r0));
  w.theta0 = branch.theta_sign < 0 ? -theta : theta;
  w.w0 = branch.w0;
  if (branch.drift == DriftMode::compatible && w.theta0 != 0.0) w.w0 = -params.u(w.r0) * w.theta0;
  return w;
}

PlaneWave solve_plane_wave_or_default(const SystemParams& params, const BranchSelector& branch) {
  auto sol = solve_plane_wave(params, branch);
  if (const auto* w = std::get_if<PlaneWave>(&sol)) return *w;
  return std::get<PlaneWaveFamily>(sol).representative();
}

}  // namespace cglb
