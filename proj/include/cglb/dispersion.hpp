#pragma once

// Linearisation of the polar system about a plane wave, the dispersion cubic
// det(-k^2 A + i k B + C - lambda I) = 0, its closed-form roots and the
// spectral-stability classifier.

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cglb/model.hpp"
#include "cglb/spectral.hpp"

namespace cglb {

enum class CouplingMode {
  kappa_zero,          // third row uncoupled from rho
  paper_remark32,      // -2 r0 kappa(r0) in C(3,1), no i k factor
  rederived_gradient,  // -2 r0 kappa(r0) in B(3,1)
};

struct LinearizationMatrices {
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d B = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  CouplingMode mode = CouplingMode::kappa_zero;

  // -k^2 A + i k B + C
  Eigen::Matrix3cd symbol(double k) const;
};

// (u1 theta0^2 + r0^2 v'(r0) + 2 r0 v(r0)) with u1 the slope of u.
double gamma_coefficient(const SystemParams& params, const PlaneWave& wave) noexcept;

// A, B, C in the literal layout:
//   A = [[1, -r0 U, 0], [c1, 1, 0], [0, 0, m]],   U = c0 + c1 r0
//   B = [[-w0 - 2 theta0 U, -2 theta0 r0, -s1 r0], [0, -2 theta0 U - w0, -s2], [0, 0, -w0]]
//   C = [[-2 r0^2, 0, 0], [-Gamma, 0, -theta0], [0, 0, 0]]
// plus the kappa entry selected by mode.
LinearizationMatrices build_matrices(const SystemParams& params, const PlaneWave& wave,
                                     CouplingMode mode = CouplingMode::kappa_zero);

// Linearisation obtained directly from the polar equations. It differs from
// build_matrices in A(2,1) = U/r0 and B(2,1) = 2 theta0/r0, and carries the
// kappa coupling on the gradient. Needs r0 > 0.
LinearizationMatrices exact_linearization(const SystemParams& params, const PlaneWave& wave);

enum class EigenRoute {
  structured,  // deflate decoupled rows/columns, closed-form 2x2, polished 3x3
  companion,   // eigenvalues of the companion matrix of the cubic
};

struct SpectrumSample {
  double k = 0.0;
  std::array<cplx, 3> lambdas{};  // descending real part, ties by ascending imaginary part
  double residual = 0.0;          // max relative |det(M - lambda I)|
};

// Monic characteristic polynomial lambda^3 + c[2] lambda^2 + c[1] lambda + c[0] of M.
std::array<cplx, 3> characteristic_cubic(const Eigen::Matrix3cd& M);

// |p(lambda)| divided by the sum of the magnitudes of its terms.
double cubic_residual(const std::array<cplx, 3>& c, cplx lambda);

void sort_spectrum(std::array<cplx, 3>& lambdas);

SpectrumSample eigenvalues_at_k(const LinearizationMatrices& M, double k,
                                EigenRoute route = EigenRoute::structured);
SpectrumSample eigenvalues_of(const Eigen::Matrix3cd& symbol, double k,
                              EigenRoute route = EigenRoute::structured);

std::vector<SpectrumSample> sample_spectrum(const LinearizationMatrices& M,
                                            const std::vector<double>& ks,
                                            EigenRoute route = EigenRoute::structured);

// n uniform samples on [-k_max, k_max] plus k = 0, ascending.
std::vector<double> default_k_grid(int n = 1024, double k_max = 16.0);

// ---- closed forms (kappa = 0) ----

enum class Radicand {
  printed,    // a + i b with a = r0^4 - c1 r0 U k^4 + r0 [c0 theta0^2 + r0^2 v' + 2 r0 v] k, b = 2 r0 theta0 c1 k^3
  rederived,  // r0^4 - (k^2 r0 U - 2 i k r0 theta0)(k^2 c1 + Gamma), from the 2x2 block of build_matrices
};

struct ClosedFormRoots {
  std::array<cplx, 3> lambdas{};  // lambda1 = -k^2 m - i k w0, then the + and - branches
  double a = 0.0;                 // real part of the radicand
  double b = 0.0;                 // imaginary part of the radicand
};

ClosedFormRoots closed_form_lambda(const SystemParams& params, const PlaneWave& wave, double k,
                                   Radicand which = Radicand::printed);

// -(r0^2 + k^2) +/- sqrt((sqrt(a^2 + b^2) + a)/2) for the + and - branches.
std::array<double, 2> closed_form_real_parts(double a, double b, double r0, double k);

struct StabilityConditions {
  bool diffusive = false;      // k^2 m > 0
  bool amplitude = false;      // 2 (r0^2 + k^2)^2 >= a
  bool discriminant = false;   // 4 (r0^2 + k^2)^4 - 4 a (r0^2 + k^2)^2 > b^2
  bool all() const noexcept { return diffusive && amplitude && discriminant; }
};

StabilityConditions stability_conditions(double a, double b, double r0, double k, double m);

// ---- special cases with printed closed forms ----

enum class PlaneWaveCase { one, two, three };

// Parameters of the three constant-coefficient special cases.
// one:   r0 = 1, theta0 = v = 0, u = u_const (0 or 1)
// two:   u = v = 0, r0 given, theta0 = sqrt(1 - r0^2)
// three: r0 = u = 0, theta0 = 1
struct SpecialCase {
  SystemParams params;
  PlaneWave wave;
};
SpecialCase special_case(PlaneWaveCase c, double m, double w0, double s1 = 0.0, double s2 = 0.0,
                         double u_const = 0.0, double r0 = 1.0);

// Printed eigenvalue formulas of the three cases (case two with its literal -2 r0 term).
std::array<cplx, 3> special_case_printed(PlaneWaveCase c, double m, double w0, double r0, double k);
// Case two with -2 r0^2, the value that follows from the matrices.
std::array<cplx, 3> special_case_two_corrected(double m, double w0, double r0, double k);

// The kappa-coupled slice r0 = m = 1, theta0 = v = 0, kappa = 1/2, u = 1 (c0 = 1, c1 = 0).
SpecialCase remark32_slice(double s1, double s2, double w0);
// The slice r0 = 1, theta0 = v = 0, kappa = m = 1, s1 = 1/8, u = 0.
SpecialCase remark32_u0_slice(double w0, double s2 = 0.0);

enum class CardanoForm {
  printed,    // the three displayed expressions verbatim, principal branches
  corrected,  // adds the missing D/(3 2^{1/3}) term to the first root, stable sqrt sign
};

// Roots on remark32_slice from the Cardano expressions with
// a = -16 + (27 k^3 s2 - 18 k s1) i, b = 4 + 3 k s1 i, D = (a + sqrt(a^2 - 4 b^3))^{1/3}.
std::array<cplx, 3> remark32_closed_form(double k, double s1, double s2, double w0,
                                         CardanoForm form = CardanoForm::corrected);

// Factored forms on remark32_slice: s1 = s2 = 0, s1 = 1 and s1 = -1 (s2 = 0).
enum class Remark32Case { zero, plus, minus };
std::array<cplx, 3> remark32_factored(Remark32Case c, double k, double w0);

// -(1 + k^2) +/- ((1 + sqrt(1 + k^2))/2)^{1/2}
std::array<double, 2> remark32_real_parts(double k);

// On remark32_u0_slice: lambda1 = -k^2 - i k w0 and
// Re lambda_{2,3} = -(k^2 + 1) +/- (sqrt 2 / 4) sqrt(4 + sqrt(16 + k^2)).
std::array<double, 2> remark32_u0_real_parts(double k);

// ---- classification ----

enum class Verdict { stable, unstable, marginal };
std::string to_string(Verdict v);

struct Classification {
  Verdict verdict = Verdict::stable;
  // Largest C with Re lambda <= -C (Im lambda)^2 on every sample; empty when
  // every eigenvalue is real (the parabola does not constrain anything).
  std::optional<double> C;
  std::optional<double> omega_plus;  // inf of the positive real parts
  std::vector<double> unstable_band;  // sampled k with max Re lambda > tol
  double sup_real_nonzero_k = 0.0;    // sup over k != 0 of max Re lambda
  double k_at_max = 0.0;
};

Classification classify_spectrum(const std::vector<SpectrumSample>& samples, double tol = 1e-10);

// max over resolvable nonzero grid wavenumbers of max Re lambda
double spectral_gap(const LinearizationMatrices& M, const Grid& grid);

}  // namespace cglb
