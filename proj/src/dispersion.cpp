#include "cglb/dispersion.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "cglb/errors.hpp"

namespace cglb {

namespace {

constexpr cplx I{0.0, 1.0};

cplx eval_cubic(const std::array<cplx, 3>& c, cplx x) { return ((x + c[2]) * x + c[1]) * x + c[0]; }

cplx eval_cubic_derivative(const std::array<cplx, 3>& c, cplx x) {
  return (3.0 * x + 2.0 * c[2]) * x + c[1];
}

cplx polish(const std::array<cplx, 3>& c, cplx x) {
  double res = std::abs(eval_cubic(c, x));
  for (int it = 0; it < 4 && res > 0.0; ++it) {
    const cplx d = eval_cubic_derivative(c, x);
    if (d == 0.0) break;
    const cplx y = x - eval_cubic(c, x) / d;
    const double ry = std::abs(eval_cubic(c, y));
    if (!(ry < res)) break;
    x = y;
    res = ry;
  }
  return x;
}

// Roots of the 2x2 block [[a, b], [c, d]]; the smaller root comes from the
// determinant so it does not suffer cancellation.
std::array<cplx, 2> eig2(cplx a, cplx b, cplx c, cplx d) {
  const cplx t = 0.5 * (a + d);
  const cplx h = 0.5 * (a - d);
  cplx s = std::sqrt(h * h + b * c);
  if (std::abs(t + s) < std::abs(t - s)) s = -s;
  const cplx big = t + s;
  const cplx det = a * d - b * c;
  const cplx small = big == 0.0 ? cplx(0.0) : det / big;
  return {big, small};
}

std::array<cplx, 3> structured_roots(const Eigen::Matrix3cd& M) {
  for (int i = 0; i < 3; ++i) {
    bool row = true, col = true;
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      if (M(i, j) != 0.0) row = false;
      if (M(j, i) != 0.0) col = false;
    }
    if (row || col) {
      int p = -1, q = -1;
      for (int j = 0; j < 3; ++j)
        if (j != i) (p < 0 ? p : q) = j;
      const auto r = eig2(M(p, p), M(p, q), M(q, p), M(q, q));
      return {M(i, i), r[0], r[1]};
    }
  }
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(M, false);
  const auto c = characteristic_cubic(M);
  std::array<cplx, 3> out;
  for (int j = 0; j < 3; ++j) out[j] = polish(c, es.eigenvalues()(j));
  return out;
}

std::array<cplx, 3> companion_roots(const std::array<cplx, 3>& c) {
  Eigen::Matrix3cd comp = Eigen::Matrix3cd::Zero();
  comp(1, 0) = 1.0;
  comp(2, 1) = 1.0;
  comp(0, 2) = -c[0];
  comp(1, 2) = -c[1];
  comp(2, 2) = -c[2];
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(comp, false);
  return {es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
}

SystemParams constant_params(double u, double v, double m, double kappa, double s1, double s2) {
  SystemParams p;
  p.u = Affine::constant(u);
  p.v = Affine::constant(v);
  p.xi = 1.0;
  p.m = m;
  p.kappa = Affine::constant(kappa);
  p.s1 = Affine::constant(s1);
  p.s2 = Affine::constant(s2);
  return p;
}

}  // namespace

Eigen::Matrix3cd LinearizationMatrices::symbol(double k) const {
  return (-k * k) * A.cast<cplx>() + (I * k) * B.cast<cplx>() + C.cast<cplx>();
}

double gamma_coefficient(const SystemParams& p, const PlaneWave& w) noexcept {
  return p.u.c1 * w.theta0 * w.theta0 + w.r0 * w.r0 * p.v.c1 + 2.0 * w.r0 * p.v(w.r0);
}

LinearizationMatrices build_matrices(const SystemParams& p, const PlaneWave& w, CouplingMode mode) {
  const double r0 = w.r0, th = w.theta0, w0 = w.w0;
  const double U = p.u(r0);
  LinearizationMatrices M;
  M.mode = mode;
  M.A << 1.0, -r0 * U, 0.0,
         p.u.c1, 1.0, 0.0,
         0.0, 0.0, p.m;
  M.B << -w0 - 2.0 * th * U, -2.0 * th * r0, -p.s1(r0) * r0,
         0.0, -2.0 * th * U - w0, -p.s2(r0),
         0.0, 0.0, -w0;
  M.C << -2.0 * r0 * r0, 0.0, 0.0,
         -gamma_coefficient(p, w), 0.0, -th,
         0.0, 0.0, 0.0;
  const double coupling = -2.0 * r0 * p.kappa(r0);
  if (mode == CouplingMode::paper_remark32) M.C(2, 0) = coupling;
  if (mode == CouplingMode::rederived_gradient) M.B(2, 0) = coupling;
  return M;
}

LinearizationMatrices exact_linearization(const SystemParams& p, const PlaneWave& w) {
  if (!(w.r0 > 0.0)) throw AmplitudeVanishes("the polar linearisation needs r0 > 0");
  LinearizationMatrices M = build_matrices(p, w, CouplingMode::rederived_gradient);
  M.A(1, 0) = p.u(w.r0) / w.r0;
  M.B(1, 0) = 2.0 * w.theta0 / w.r0;
  return M;
}

std::array<cplx, 3> characteristic_cubic(const Eigen::Matrix3cd& M) {
  const cplx tr = M.trace();
  const cplx minors = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0) + M(0, 0) * M(2, 2) -
                      M(0, 2) * M(2, 0) + M(1, 1) * M(2, 2) - M(1, 2) * M(2, 1);
  return {-M.determinant(), minors, -tr};
}

double cubic_residual(const std::array<cplx, 3>& c, cplx x) {
  const double ax = std::abs(x);
  const double scale =
      ax * ax * ax + std::abs(c[2]) * ax * ax + std::abs(c[1]) * ax + std::abs(c[0]);
  return scale == 0.0 ? 0.0 : std::abs(eval_cubic(c, x)) / scale;
}

void sort_spectrum(std::array<cplx, 3>& l) {
  double mag = 0.0;
  for (const auto& z : l) mag = std::max(mag, std::abs(z));
  const double tie = 1e-12 * (1.0 + mag);
  auto before = [tie](cplx a, cplx b) {
    if (std::abs(a.real() - b.real()) > tie) return a.real() > b.real();
    return a.imag() < b.imag();
  };
  for (int i = 1; i < 3; ++i)
    for (int j = i; j > 0 && before(l[j], l[j - 1]); --j) std::swap(l[j], l[j - 1]);
}

SpectrumSample eigenvalues_of(const Eigen::Matrix3cd& S, double k, EigenRoute route) {
  const auto c = characteristic_cubic(S);
  SpectrumSample out;
  out.k = k;
  out.lambdas = route == EigenRoute::structured ? structured_roots(S) : companion_roots(c);
  sort_spectrum(out.lambdas);
  for (const auto& l : out.lambdas) out.residual = std::max(out.residual, cubic_residual(c, l));
  return out;
}

SpectrumSample eigenvalues_at_k(const LinearizationMatrices& M, double k, EigenRoute route) {
  return eigenvalues_of(M.symbol(k), k, route);
}

std::vector<SpectrumSample> sample_spectrum(const LinearizationMatrices& M,
                                            const std::vector<double>& ks, EigenRoute route) {
  std::vector<SpectrumSample> out;
  out.reserve(ks.size());
  for (double k : ks) out.push_back(eigenvalues_at_k(M, k, route));
  return out;
}

std::vector<double> default_k_grid(int n, double k_max) {
  if (n < 2) throw ConfigError("k grid needs at least two points");
  std::vector<double> ks;
  bool has_zero = false;
  for (int i = 0; i < n; ++i) {
    // symmetric construction so that k and -k are exact negatives
    const double k = k_max * double(2 * i - (n - 1)) / double(n - 1);
    ks.push_back(k);
    has_zero = has_zero || k == 0.0;
  }
  if (!has_zero) ks.push_back(0.0);
  std::sort(ks.begin(), ks.end());
  return ks;
}

ClosedFormRoots closed_form_lambda(const SystemParams& p, const PlaneWave& w, double k,
                                   Radicand which) {
  const double r0 = w.r0, th = w.theta0, w0 = w.w0;
  const double U = p.u(r0), c0 = p.u.c0, c1 = p.u.c1;
  const double beta = w0 + 2.0 * th * U;

  ClosedFormRoots out;
  cplx R;
  if (which == Radicand::printed) {
    const double k2 = k * k;
    out.a = std::pow(r0, 4) - c1 * r0 * U * k2 * k2 +
            r0 * (c0 * th * th + r0 * r0 * p.v.c1 + 2.0 * r0 * p.v(r0)) * k;
    out.b = 2.0 * r0 * th * c1 * k2 * k;
    R = cplx(out.a, out.b);
  } else {
    const double G = gamma_coefficient(p, w);
    R = std::pow(r0, 4) - (k * k * r0 * U - 2.0 * I * k * r0 * th) * (k * k * c1 + G);
    out.a = R.real();
    out.b = R.imag();
  }
  const cplx base = -(r0 * r0 + k * k + I * (beta * k));
  const cplx root = std::sqrt(R);
  out.lambdas = {-k * k * p.m - I * (k * w0), base + root, base - root};
  return out;
}

std::array<double, 2> closed_form_real_parts(double a, double b, double r0, double k) {
  const double x = r0 * r0 + k * k;
  const double s = std::sqrt((std::hypot(a, b) + a) / 2.0);
  return {-x + s, -x - s};
}

StabilityConditions stability_conditions(double a, double b, double r0, double k, double m) {
  const double x2 = std::pow(r0 * r0 + k * k, 2);
  StabilityConditions s;
  s.diffusive = k * k * m > 0.0;
  s.amplitude = 2.0 * x2 >= a;
  s.discriminant = 4.0 * x2 * x2 - 4.0 * a * x2 > b * b;
  return s;
}

SpecialCase special_case(PlaneWaveCase c, double m, double w0, double s1, double s2,
                         double u_const, double r0) {
  switch (c) {
    case PlaneWaveCase::one:
      return {constant_params(u_const, 0.0, m, 0.0, s1, s2), {1.0, 0.0, w0}};
    case PlaneWaveCase::two:
      if (!(r0 >= 0.0 && r0 <= 1.0)) throw OutOfRange("case two needs 0 <= r0 <= 1");
      return {constant_params(0.0, 0.0, m, 0.0, s1, s2),
              {r0, std::sqrt(std::max(0.0, 1.0 - r0 * r0)), w0}};
    case PlaneWaveCase::three:
      return {constant_params(0.0, 0.0, m, 0.0, s1, s2), {0.0, 1.0, w0}};
  }
  throw OutOfRange("unknown special case");
}

std::array<cplx, 3> special_case_printed(PlaneWaveCase c, double m, double w0, double r0,
                                         double k) {
  const cplx drift = I * (k * w0);
  const cplx l1 = -k * k * m - drift;
  const cplx l2 = -k * k - drift;
  switch (c) {
    case PlaneWaveCase::one:
      return {l1, l2, -2.0 - k * k - drift};
    case PlaneWaveCase::two:
      return {l1, l2, -(2.0 * r0 + k * k + drift)};
    case PlaneWaveCase::three:
      return {l1, l2, l2};
  }
  throw OutOfRange("unknown special case");
}

std::array<cplx, 3> special_case_two_corrected(double m, double w0, double r0, double k) {
  const cplx drift = I * (k * w0);
  return {-k * k * m - drift, -k * k - drift, -(2.0 * r0 * r0 + k * k + drift)};
}

SpecialCase remark32_slice(double s1, double s2, double w0) {
  return {constant_params(1.0, 0.0, 1.0, 0.5, s1, s2), {1.0, 0.0, w0}};
}

SpecialCase remark32_u0_slice(double w0, double s2) {
  return {constant_params(0.0, 0.0, 1.0, 1.0, 0.125, s2), {1.0, 0.0, w0}};
}

std::array<cplx, 3> remark32_closed_form(double k, double s1, double s2, double w0,
                                         CardanoForm form) {
  const cplx S = -(2.0 + 3.0 * k * k + 3.0 * I * (k * w0)) / 3.0;
  const cplx a(-16.0, 27.0 * k * k * k * s2 - 18.0 * k * s1);
  const cplx b(4.0, 3.0 * k * s1);
  cplx sq = std::sqrt(a * a - 4.0 * b * b * b);
  if (form == CardanoForm::corrected && std::abs(a - sq) > std::abs(a + sq)) sq = -sq;
  const cplx D = std::pow(a + sq, 1.0 / 3.0);
  if (D == 0.0) return {S, S, S};

  const double c13 = std::cbrt(2.0), c23 = c13 * c13;
  const cplx w_plus(1.0, std::sqrt(3.0)), w_minus(1.0, -std::sqrt(3.0));
  cplx l1 = S + c13 * b / (3.0 * D);
  if (form == CardanoForm::corrected) l1 += D / (3.0 * c13);
  const cplx l2 = S - w_plus * b / (3.0 * c23 * D) - w_minus * D / (6.0 * c13);
  const cplx l3 = S - w_minus * b / (3.0 * c23 * D) - w_plus * D / (6.0 * c13);
  return {l1, l2, l3};
}

std::array<cplx, 3> remark32_factored(Remark32Case c, double k, double w0) {
  const cplx drift = I * (k * w0);
  switch (c) {
    case Remark32Case::zero:
      return {-2.0 - k * k - drift, -k * k - drift, -k * k - drift};
    case Remark32Case::plus: {
      const cplx r = std::sqrt(1.0 + I * k);
      return {-k * k - drift, -1.0 - k * k - r - drift, -1.0 - k * k + r - drift};
    }
    case Remark32Case::minus: {
      const cplx r = std::sqrt(1.0 - I * k);
      return {-k * k - drift, -1.0 - k * k - r - drift, -1.0 - k * k + r - drift};
    }
  }
  throw OutOfRange("unknown case");
}

std::array<double, 2> remark32_real_parts(double k) {
  const double s = std::sqrt((1.0 + std::sqrt(1.0 + k * k)) / 2.0);
  return {-(1.0 + k * k) + s, -(1.0 + k * k) - s};
}

std::array<double, 2> remark32_u0_real_parts(double k) {
  const double s = std::sqrt(2.0) / 4.0 * std::sqrt(4.0 + std::sqrt(16.0 + k * k));
  return {-(k * k + 1.0) + s, -(k * k + 1.0) - s};
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::marginal: return "marginal";
  }
  return "unknown";
}

Classification classify_spectrum(const std::vector<SpectrumSample>& samples, double tol) {
  if (samples.empty()) throw EmptySampleSet("classify_spectrum needs at least one sample");
  Classification out;
  double sup_nonzero = -std::numeric_limits<double>::infinity();
  double best = -std::numeric_limits<double>::infinity();
  double C = std::numeric_limits<double>::infinity();
  bool any_positive = false, real_violation = false;

  for (const auto& s : samples) {
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& l : s.lambdas) {
      mx = std::max(mx, l.real());
      if (l.real() > tol) {
        any_positive = true;
        out.omega_plus = std::min(out.omega_plus.value_or(INFINITY), l.real());
      }
      if (std::abs(l.imag()) > tol)
        C = std::min(C, -std::min(l.real(), 0.0) / (l.imag() * l.imag()));
      else if (l.real() > tol)
        real_violation = true;
    }
    if (mx > tol) out.unstable_band.push_back(s.k);
    if (s.k != 0.0) sup_nonzero = std::max(sup_nonzero, mx);
    if (mx > best) {
      best = mx;
      out.k_at_max = s.k;
    }
  }
  out.sup_real_nonzero_k = std::isfinite(sup_nonzero) ? sup_nonzero : best;

  if (any_positive || real_violation) {
    out.verdict = Verdict::unstable;
  } else if (std::abs(out.sup_real_nonzero_k) <= tol) {
    out.verdict = Verdict::marginal;
  } else {
    out.verdict = Verdict::stable;
    if (std::isfinite(C)) out.C = C;
  }
  return out;
}

double spectral_gap(const LinearizationMatrices& M, const Grid& grid) {
  double gap = -std::numeric_limits<double>::infinity();
  for (int j = 1; j <= grid.dealias_cutoff(); ++j) {
    const auto s = eigenvalues_at_k(M, grid.base_wavenumber() * j);
    gap = std::max(gap, s.lambdas[0].real());
  }
  return gap;
}

}  // namespace cglb
