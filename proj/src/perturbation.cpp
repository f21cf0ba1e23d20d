#include "cglb/perturbation.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cglb/errors.hpp"

namespace cglb {

namespace {

constexpr cplx I{0.0, 1.0};
using Vec = std::vector<double>;

void require_1d(const Grid& g) {
  if (g.dim() != 1) throw ConfigError("perturbation dynamics are one-dimensional");
}

Vec real_physical(const SpectralField& spec) {
  const auto p = spec.to_physical();
  Vec out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i].real();
  return out;
}

SpectralField from_real(const Grid& g, const Vec& v, bool dealias) {
  std::vector<cplx> c(v.begin(), v.end());
  SpectralField f(g, std::move(c), Representation::physical);
  return dealias ? cglb::dealias(f) : f.to_spectral();
}

// Physical values and x-derivatives of the three perturbation fields.
struct Jet {
  Vec rho, rho_x, rho_xx, phi, phi_x, phi_xx, h, h_x;
};

Jet make_jet(const PerturbationState& pi) {
  Jet j;
  const auto r = pi.rho.to_spectral(), p = pi.phi.to_spectral(), h = pi.h.to_spectral();
  j.rho = real_physical(r);
  j.rho_x = real_physical(derivative(r, 0, 1));
  j.rho_xx = real_physical(derivative(r, 0, 2));
  j.phi = real_physical(p);
  j.phi_x = real_physical(derivative(p, 0, 1));
  j.phi_xx = real_physical(derivative(p, 0, 2));
  j.h = real_physical(h);
  j.h_x = real_physical(derivative(h, 0, 1));
  return j;
}

// Right-hand side of the polar equations at r = r0 + rho, theta_x = theta0 + phi_x, Omega = w0 + h.
struct PhysicalRhs {
  Vec rho_t, phi_t, h_t;
  double min_r = 0.0;
  double max_abs = 0.0;
};

PhysicalRhs polar_rhs_physical(const Jet& j, const SystemParams& p, const PlaneWave& w) {
  const std::size_t n = j.rho.size();
  PhysicalRhs out{Vec(n), Vec(n), Vec(n), INFINITY, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double r = w.r0 + j.rho[i];
    const double tx = w.theta0 + j.phi_x[i];
    const double om = w.w0 + j.h[i];
    const double u = p.u(r);
    out.rho_t[i] = j.rho_xx[i] - om * j.rho_x[i] - u * (2.0 * j.rho_x[i] * tx + r * j.phi_xx[i]) +
                   r * (1.0 - r * r - tx * tx - p.s1(r) * j.h_x[i]);
    out.phi_t[i] = j.phi_xx[i] - om * tx + 2.0 * j.rho_x[i] * tx / r +
                   u * (j.rho_xx[i] / r - tx * tx) - p.v(r) * r * r - p.s2(r) * j.h_x[i];
    out.h_t[i] = -om * j.h_x[i] - p.kappa(r) * 2.0 * r * j.rho_x[i];
    out.min_r = std::min(out.min_r, r);
    out.max_abs = std::max({out.max_abs, std::abs(j.rho[i]), std::abs(j.phi[i]), std::abs(j.h[i])});
    if (!std::isfinite(r) || !std::isfinite(j.phi[i]) || !std::isfinite(j.h[i]))
      out.max_abs = INFINITY;
  }
  return out;
}

// Linear operator applied spectrally: (L pi)^(k) = symbol(k) pi^(k).
std::array<SpectralField, 3> apply_linear(const LinearizationMatrices& M, const PerturbationState& pi) {
  const Grid& g = pi.grid();
  const auto r = pi.rho.to_spectral(), p = pi.phi.to_spectral(), h = pi.h.to_spectral();
  std::array<SpectralField, 3> out{SpectralField(g, Representation::spectral),
                                   SpectralField(g, Representation::spectral),
                                   SpectralField(g, Representation::spectral)};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const bool nyq = g.on_nyquist(i, 0);
    // odd derivatives vanish on the Nyquist mode, matching derivative()
    const double k = g.wavevector(i)[0];
    const cplx ik = nyq ? cplx(0.0) : I * k;
    const Eigen::Matrix3cd S = (-k * k) * M.A.cast<cplx>() + ik * M.B.cast<cplx>() + M.C.cast<cplx>();
    const Eigen::Vector3cd v(r[i], p[i], h[i]);
    const Eigen::Vector3cd Lv = S * v;
    out[0][i] = Lv(0);
    out[1][i] = Lv(1);
    out[2][i] = Lv(2);
  }
  return out;
}

double fit_slope(const Vec& x, const Vec& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

std::size_t mode_index(const Grid& g, int mode) {
  const int n = g.n();
  return std::size_t(mode >= 0 ? mode : n + mode);
}

struct EigenSystem {
  std::array<cplx, 3> lambdas;  // sorted like eigenvalues_at_k
  Eigen::Matrix3cd right;       // columns in the same order
  Eigen::Matrix3cd left;        // rows: left eigenvectors with left * right = I
};

EigenSystem eigen_system(const LinearizationMatrices& M, double k) {
  const Eigen::Matrix3cd S = M.symbol(k);
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(S, true);
  EigenSystem out;
  const auto sorted = eigenvalues_of(S, k).lambdas;
  std::array<bool, 3> used{false, false, false};
  for (int b = 0; b < 3; ++b) {
    int best = -1;
    for (int j = 0; j < 3; ++j)
      if (!used[j] && (best < 0 || std::abs(es.eigenvalues()(j) - sorted[b]) <
                                       std::abs(es.eigenvalues()(best) - sorted[b])))
        best = j;
    used[best] = true;
    out.lambdas[b] = sorted[b];
    out.right.col(b) = es.eigenvectors().col(best);
  }
  out.left = out.right.inverse();
  return out;
}

}  // namespace

PerturbationState PerturbationState::zeros(const Grid& grid) {
  require_1d(grid);
  return {SpectralField(grid, Representation::spectral), SpectralField(grid, Representation::spectral),
          SpectralField(grid, Representation::spectral), 0.0};
}

PerturbationState PerturbationState::to_spectral() const {
  return {rho.to_spectral(), phi.to_spectral(), h.to_spectral(), t};
}

PerturbationState PerturbationState::to_physical() const {
  return {rho.to_physical(), phi.to_physical(), h.to_physical(), t};
}

PerturbationState polar_decompose(const SpectralField& P, const SpectralField& Omega,
                                  const PlaneWave& w) {
  const Grid& g = P.grid();
  require_1d(g);
  const auto p = P.to_physical();
  const auto om = Omega.to_physical();
  const std::size_t n = g.size();

  double min_mod = INFINITY;
  for (const auto& z : p.values()) min_mod = std::min(min_mod, std::abs(z));
  if (!(min_mod > 0.1 * w.r0))
    throw AmplitudeVanishes("|P| is not bounded away from zero; the polar chart is unusable");

  Vec rho(n), phi(n), h(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.point(i)[0];
    rho[i] = std::abs(p[i]) - w.r0;
    phi[i] = std::arg(p[i] * std::exp(-I * (w.theta0 * x)));
    if (i > 0) {
      // continuous unwrapping along x
      phi[i] += 2.0 * std::numbers::pi * std::round((phi[i - 1] - phi[i]) / (2.0 * std::numbers::pi));
    }
    h[i] = om[i].real() - w.w0;
  }
  double mean = 0.0;
  for (double v : phi) mean += v;
  mean /= double(n);
  const double two_pi = 2.0 * std::numbers::pi;
  const double shift = two_pi * std::floor((mean + std::numbers::pi) / two_pi);
  for (double& v : phi) v -= shift;

  return {from_real(g, rho, false), from_real(g, phi, false), from_real(g, h, false), 0.0};
}

FieldState polar_compose(const PerturbationState& pi, const PlaneWave& w) {
  const Grid& g = pi.grid();
  require_1d(g);
  const Vec rho = real_physical(pi.rho.to_spectral());
  const Vec phi = real_physical(pi.phi.to_spectral());
  const Vec h = real_physical(pi.h.to_spectral());
  std::vector<cplx> P(g.size()), Om(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i)[0];
    P[i] = (w.r0 + rho[i]) * std::exp(I * (w.theta0 * x + phi[i]));
    Om[i] = w.w0 + h[i];
  }
  FieldState s;
  s.P = SpectralField(g, std::move(P), Representation::physical).to_spectral();
  s.Omega.push_back(SpectralField(g, std::move(Om), Representation::physical).to_spectral());
  s.t = pi.t;
  return s;
}

RemainderBundle polar_rhs(const PerturbationState& pi, const SystemParams& params,
                          const PlaneWave& wave) {
  require_1d(pi.grid());
  const Jet j = make_jet(pi);
  auto f = polar_rhs_physical(j, params, wave);
  // m h_xx is linear and handled spectrally
  auto h_t = from_real(pi.grid(), f.h_t, true);
  h_t += params.m * derivative(pi.h.to_spectral(), 0, 2);
  return {from_real(pi.grid(), f.rho_t, true), from_real(pi.grid(), f.phi_t, true), h_t};
}

RemainderBundle remainder(const PerturbationState& pi, const SystemParams& p, const PlaneWave& w,
                          RemainderForm form) {
  const Grid& g = pi.grid();
  require_1d(g);
  if (form == RemainderForm::exact) {
    auto F = polar_rhs(pi, p, w);
    auto L = apply_linear(exact_linearization(p, w), pi);
    for (auto& f : L) dealias_in_place(g, f.values());
    return {(F.psi1 - L[0]).to_physical(), (F.psi2 - L[1]).to_physical(),
            (F.psi3 - L[2]).to_physical()};
  }

  const Jet j = make_jet(pi);
  const std::size_t n = g.size();
  const double r0 = w.r0, th = w.theta0, w0 = w.w0;
  const double c0 = p.u.c0, c1 = p.u.c1, U0 = p.u(r0);
  const double kap = p.kappa(r0);
  Vec psi1(n), psi2(n), psi3(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = j.rho[i], rx = j.rho_x[i], rxx = j.rho_xx[i];
    const double ph = j.phi[i], px = j.phi_x[i], pxx = j.phi_xx[i];
    const double h = j.h[i], hx = j.h_x[i];
    const double r = r0 + rho;

    psi1[i] = -2.0 * th * c1 * rho * rx - 2.0 * (c0 + c1 * r) * ph * rx - U0 * rho * pxx - h * rx -
              r0 * (rho * rho + px * px + (p.s1(r) - p.s1(r0)) * hx) -
              rho * (2.0 * r0 * rho + rho * rho + 2.0 * th * px + px * px + p.s1(r) * hx);

    psi2[i] = -h * px - w0 * th - U0 * (th * th + px * px) + c0 / r * rxx -
              c1 * (2.0 * th * px + px * px) - 2.0 * rx / r * (th + px) - p.v(r) * rho * rho -
              (p.s2(r) - p.s2(r0)) * hx - r0 * r0 * (p.v(r) - p.v.c1 * rho) -
              2.0 * r0 * rho * (p.v(r0) - p.v(r));

    psi3[i] = -h * hx - 2.0 * kap * rho * rx;
  }
  return {from_real(g, psi1, true).to_physical(), from_real(g, psi2, true).to_physical(),
          from_real(g, psi3, true).to_physical()};
}

double bundle_norm(const RemainderBundle& b) {
  return std::sqrt(std::pow(lp_norm(b.psi1, 2.0), 2) + std::pow(lp_norm(b.psi2, 2.0), 2) +
                   std::pow(lp_norm(b.psi3, 2.0), 2));
}

PolarTrajectory evolve_polar(const PerturbationState& pi0, const SystemParams& params,
                             const PlaneWave& wave, const PolarConfig& config,
                             const std::vector<PolarObserver>& observers) {
  const Grid& g = pi0.grid();
  require_1d(g);
  if (params.xi != 1.0) throw ConfigError("the polar equations assume xi = 1");
  if (!(config.dt > 0.0)) throw ConfigError("dt must be positive");
  const auto M = exact_linearization(params, wave);

  const long nsteps = config.t_end > 0.0 ? long(std::ceil(config.t_end / config.dt - 1e-9)) : 0;
  const double h = nsteps > 0 ? config.t_end / double(nsteps) : config.dt;
  const std::size_t n = g.size();

  // Per-mode exp(hS), h phi1(hS), h phi2(hS) from one augmented exponential.
  std::vector<Eigen::Matrix3cd> E(n), P1(n), P2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = g.wavevector(i)[0];
    const bool drop = g.on_nyquist(i, 0) || (config.k_max && std::abs(k) > *config.k_max);
    if (drop) {
      E[i].setZero();
      P1[i].setZero();
      P2[i].setZero();
      continue;
    }
    Eigen::Matrix<cplx, 9, 9> aug = Eigen::Matrix<cplx, 9, 9>::Zero();
    aug.block<3, 3>(0, 0) = h * M.symbol(k);
    aug.block<3, 3>(0, 3).setIdentity();
    aug.block<3, 3>(3, 6).setIdentity();
    const Eigen::Matrix<cplx, 9, 9> ex = aug.exp();
    E[i] = ex.block<3, 3>(0, 0);
    P1[i] = h * ex.block<3, 3>(0, 3);
    P2[i] = h * ex.block<3, 3>(0, 6);
  }

  auto nonlinear = [&](const PerturbationState& s) {
    const Jet j = make_jet(s);
    const auto f = polar_rhs_physical(j, params, wave);
    if (!(f.min_r > config.chart_fraction * wave.r0))
      throw ChartBreakdown("r0 + rho left the polar chart", s.t);
    if (!(f.max_abs <= config.blowup_threshold))
      throw StepUnstable("perturbation exceeded the blow-up threshold", s.t);
    // f.h_t omits m h_xx, so subtract the symbol without its A(3,3) part.
    LinearizationMatrices Mn = M;
    Mn.A(2, 2) = 0.0;
    auto L = apply_linear(Mn, s);
    std::array<SpectralField, 3> out{from_real(g, f.rho_t, config.dealias),
                                     from_real(g, f.phi_t, config.dealias),
                                     from_real(g, f.h_t, config.dealias)};
    for (int c = 0; c < 3; ++c) {
      if (config.dealias) dealias_in_place(g, L[c].values());
      out[c] -= L[c];
    }
    return out;
  };

  auto advance = [&](const PerturbationState& s) {
    const auto n0 = nonlinear(s);
    PerturbationState a = s.to_spectral();
    SpectralField* fa[3] = {&a.rho, &a.phi, &a.h};
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3cd u((*fa[0])[i], (*fa[1])[i], (*fa[2])[i]);
      const Eigen::Vector3cd nv(n0[0][i], n0[1][i], n0[2][i]);
      const Eigen::Vector3cd r = E[i] * u + P1[i] * nv;
      for (int c = 0; c < 3; ++c) (*fa[c])[i] = r(c);
    }
    a.t = s.t + h;
    const auto n1 = nonlinear(a);
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3cd d(n1[0][i] - n0[0][i], n1[1][i] - n0[1][i], n1[2][i] - n0[2][i]);
      const Eigen::Vector3cd r = P2[i] * d;
      for (int c = 0; c < 3; ++c) (*fa[c])[i] += r(c);
    }
    return a;
  };

  PolarTrajectory traj;
  PerturbationState s = pi0.to_spectral();
  const double t0 = s.t;
  auto record = [&](const PerturbationState& st) {
    traj.times.push_back(st.t);
    traj.l2.push_back(std::sqrt(std::pow(lp_norm(st.rho, 2.0), 2) + std::pow(lp_norm(st.phi, 2.0), 2) +
                                std::pow(lp_norm(st.h, 2.0), 2)));
    for (const auto& obs : observers) obs(st);
  };
  record(s);
  const int every = std::max(1, config.record_every);
  for (long k = 1; k <= nsteps; ++k) {
    s = advance(s);
    s.t = t0 + double(k) * h;
    if (k % every == 0 || k == nsteps) record(s);
  }
  traj.final_state = std::move(s);
  return traj;
}

cplx modal_amplitude(const PerturbationState& pi, const LinearizationMatrices& M, int mode,
                     int branch) {
  const Grid& g = pi.grid();
  const double k = g.base_wavenumber() * mode;
  const auto es = eigen_system(M, k);
  const std::size_t i = mode_index(g, mode);
  const auto r = pi.rho.to_spectral(), p = pi.phi.to_spectral(), h = pi.h.to_spectral();
  const Eigen::Vector3cd v(r[i], p[i], h[i]);
  return es.left.row(branch) * v;
}

namespace {

// amp * (v e^{ikx} + c.c.) for eigenvector v of the symbol at grid mode `mode`.
void add_mode(PerturbationState& pi, const Eigen::Vector3cd& v, int mode, cplx amp) {
  const Grid& g = pi.grid();
  const std::size_t ip = mode_index(g, mode), im = mode_index(g, -mode);
  SpectralField* f[3] = {&pi.rho, &pi.phi, &pi.h};
  for (int c = 0; c < 3; ++c) {
    (*f[c])[ip] += amp * v(c);
    (*f[c])[im] += std::conj(amp * v(c));
  }
}

}  // namespace

std::vector<RateComparison> linear_rate_check(const SystemParams& params, const PlaneWave& wave,
                                              const Grid& grid, const std::vector<int>& modes,
                                              double amp, double t_window, double dt,
                                              unsigned seed) {
  const auto M = exact_linearization(params, wave);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  PerturbationState pi0 = PerturbationState::zeros(grid);
  for (int mode : modes) {
    if (mode <= 0 || mode > grid.dealias_cutoff()) throw OutOfRange("seed mode not resolvable");
    const auto es = eigen_system(M, grid.base_wavenumber() * mode);
    for (int b = 0; b < 3; ++b) {
      Eigen::Vector3cd v = es.right.col(b);
      v /= v.cwiseAbs().maxCoeff();
      add_mode(pi0, v, mode, amp * std::exp(I * angle(rng)));
    }
  }

  struct Series {
    Vec t, logc;
  };
  std::vector<Series> series(modes.size() * 3);
  PolarConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_window;
  evolve_polar(pi0, params, wave, cfg, {[&](const PerturbationState& s) {
                 for (std::size_t m = 0; m < modes.size(); ++m)
                   for (int b = 0; b < 3; ++b) {
                     const double c = std::abs(modal_amplitude(s, M, modes[m], b));
                     if (c > 0.0) {
                       series[3 * m + b].t.push_back(s.t);
                       series[3 * m + b].logc.push_back(std::log(c));
                     }
                   }
               }});

  std::vector<RateComparison> out;
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const auto es = eigen_system(M, grid.base_wavenumber() * modes[m]);
    for (int b = 0; b < 3; ++b) {
      RateComparison rc;
      rc.mode = modes[m];
      rc.branch = b;
      rc.k = grid.base_wavenumber() * modes[m];
      rc.predicted = es.lambdas[b].real();
      // Stop after about five e-folds so the quadratic forcing (amp^2) stays negligible.
      const double window =
          rc.predicted == 0.0 ? t_window : std::min(t_window, 5.0 / std::abs(rc.predicted));
      Series& s = series[3 * m + b];
      Vec t, y;
      for (std::size_t i = 0; i < s.t.size(); ++i)
        if (s.t[i] <= window + 1e-12) {
          t.push_back(s.t[i]);
          y.push_back(s.logc[i]);
        }
      rc.measured = t.size() >= 2 ? fit_slope(t, y) : 0.0;
      rc.rel_err = std::abs(rc.measured - rc.predicted) / std::max(std::abs(rc.predicted), 1e-300);
      out.push_back(rc);
    }
  }
  return out;
}

OrderReport quadratic_order_check(const PerturbationState& dir, const SystemParams& params,
                                  const PlaneWave& wave, const std::vector<double>& eps_list,
                                  RemainderForm form) {
  OrderReport rep;
  if (eps_list.empty()) throw EmptySampleSet("quadratic_order_check needs at least one eps");
  const auto base = dir.to_spectral();
  for (double eps : eps_list) {
    PerturbationState pi{base.rho * cplx(eps), base.phi * cplx(eps), base.h * cplx(eps), 0.0};
    OrderRow row;
    row.eps = eps;
    row.norm = bundle_norm(remainder(pi, params, wave, form));
    row.ratio_quadratic = row.norm / (eps * eps);
    row.ratio_linear = row.norm / eps;
    rep.rows.push_back(row);
  }
  double lo = INFINITY, hi = 0.0;
  rep.min_linear_ratio = INFINITY;
  for (const auto& r : rep.rows) {
    lo = std::min(lo, r.ratio_quadratic);
    hi = std::max(hi, r.ratio_quadratic);
    rep.min_linear_ratio = std::min(rep.min_linear_ratio, r.ratio_linear);
  }
  rep.quadratic_spread = hi > 0.0 ? (hi - lo) / hi : 0.0;
  rep.quadratic = rep.quadratic_spread < 0.1;
  return rep;
}

bool quadratic_slice(const SystemParams& p, const PlaneWave& w, double tol) {
  return std::abs(w.theta0) <= tol && std::abs(p.u.c0) <= tol && p.v == Affine{} &&
         std::abs(w.r0 * w.r0 - 1.0) <= tol;
}

PerturbationState project_out_mean(const PerturbationState& pi) {
  auto s = pi.to_spectral();
  s.rho[0] = 0.0;
  s.phi[0] = 0.0;
  s.h[0] = 0.0;
  return s;
}

double perturbation_norm(const PerturbationState& pi, double s) {
  return std::sqrt(std::pow(sobolev_norm(pi.rho, s), 2) + std::pow(sobolev_norm(pi.phi, s), 2) +
                   std::pow(sobolev_norm(pi.h, s), 2));
}

DecayReport decay_experiment(const SystemParams& params, const PlaneWave& wave,
                             const PerturbationState& pi0, double s, const PolarConfig& config) {
  DecayReport rep;
  rep.slice = "r0=" + std::to_string(wave.r0) + " theta0=" + std::to_string(wave.theta0) +
              " w0=" + std::to_string(wave.w0) + " m=" + std::to_string(params.m);
  rep.alpha_reference = -0.5 * (1.5 + s);
  const auto M = exact_linearization(params, wave);
  rep.spectral_gap = spectral_gap(M, pi0.grid());

  const auto start = project_out_mean(pi0);
  const double n0 = perturbation_norm(start, s + 1.0);
  if (n0 == 0.0) {
    rep.degenerate = true;
    rep.times = {pi0.t};
    rep.norms = {0.0};
    return rep;
  }

  evolve_polar(start, params, wave, config, {[&](const PerturbationState& st) {
                 rep.times.push_back(st.t);
                 rep.norms.push_back(perturbation_norm(project_out_mean(st), s + 1.0));
               }});

  Vec t, y, lt;
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    const double ratio = rep.norms[i] / n0;
    if (ratio <= 1e-1 && ratio >= 1e-4) {
      t.push_back(rep.times[i]);
      y.push_back(std::log(rep.norms[i]));
      lt.push_back(std::log1p(rep.times[i]));
    }
  }
  if (t.size() < 2) {
    rep.degenerate = true;
    return rep;
  }
  rep.sigma_fit = fit_slope(t, y);
  rep.alpha_fit = fit_slope(lt, y);
  rep.rel_err = std::abs(rep.sigma_fit - rep.spectral_gap) / std::abs(rep.spectral_gap);
  rep.pass = rep.rel_err < 0.1;
  return rep;
}

GrowthReport instability_experiment(const SystemParams& params, const PlaneWave& wave,
                                    const Grid& grid, int mode, double amp,
                                    const PolarConfig& config, double tolerance) {
  GrowthReport rep;
  rep.slice = "r0=" + std::to_string(wave.r0) + " theta0=" + std::to_string(wave.theta0) +
              " w0=" + std::to_string(wave.w0) + " m=" + std::to_string(params.m);
  const auto M = exact_linearization(params, wave);
  const double k = grid.base_wavenumber() * mode;
  rep.k_seed = k;
  if (mode <= 0 || mode > grid.dealias_cutoff()) throw OutOfRange("seed mode not resolvable");
  if (config.k_max && k > *config.k_max) throw OutOfRange("seed mode lies beyond the cutoff");

  const auto es = eigen_system(M, k);
  rep.reference_rate = es.lambdas[0].real();
  for (int j = 1; j <= grid.dealias_cutoff(); ++j) {
    const double kj = grid.base_wavenumber() * j;
    if (config.k_max && kj > *config.k_max) break;
    for (const auto& l : eigenvalues_at_k(M, kj).lambdas)
      if (l.real() > 0.0) rep.omega_plus = std::min(rep.omega_plus.value_or(INFINITY), l.real());
  }

  PerturbationState pi0 = PerturbationState::zeros(grid);
  Eigen::Vector3cd v = es.right.col(0);
  v /= v.cwiseAbs().maxCoeff();
  add_mode(pi0, v, mode, amp);

  try {
    evolve_polar(pi0, params, wave, config, {[&](const PerturbationState& st) {
                   rep.times.push_back(st.t);
                   rep.amplitudes.push_back(std::abs(modal_amplitude(st, M, mode, 0)));
                 }});
  } catch (const StepUnstable&) {
    rep.stopped_early = true;
  } catch (const ChartBreakdown&) {
    rep.stopped_early = true;
  }

  // linear window: from the seed up to 1e4 times its size, capped at 1e-2
  Vec t, y;
  const double a0 = rep.amplitudes.empty() ? 0.0 : rep.amplitudes.front();
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    const double a = rep.amplitudes[i];
    if (a > 0.0 && a <= std::min(1e-2, 1e4 * a0) && a >= 1e-12 * a0) {
      t.push_back(rep.times[i]);
      y.push_back(std::log(a));
    }
  }
  rep.rate = t.size() >= 2 ? fit_slope(t, y) : 0.0;
  rep.rel_err = std::abs(rep.rate - rep.reference_rate) / std::max(std::abs(rep.reference_rate), 1e-300);
  rep.pass = rep.reference_rate > 0.0 ? rep.rel_err < tolerance : rep.rate < 0.0;
  return rep;
}

LipschitzReport lipschitz_spot_check(const PerturbationState& pi1, const PerturbationState& pi2,
                                     const PerturbationState& R, const SystemParams& params,
                                     const PlaneWave& wave, double delta) {
  auto directional = [&](const PerturbationState& base) {
    const auto b = base.to_spectral(), r = R.to_spectral();
    PerturbationState plus{b.rho + r.rho * cplx(delta), b.phi + r.phi * cplx(delta),
                           b.h + r.h * cplx(delta), 0.0};
    PerturbationState minus{b.rho - r.rho * cplx(delta), b.phi - r.phi * cplx(delta),
                            b.h - r.h * cplx(delta), 0.0};
    const auto fp = remainder(plus, params, wave), fm = remainder(minus, params, wave);
    const cplx scale = 1.0 / (2.0 * delta);
    return RemainderBundle{(fp.psi1 - fm.psi1) * scale, (fp.psi2 - fm.psi2) * scale,
                           (fp.psi3 - fm.psi3) * scale};
  };
  const auto d1 = directional(pi1), d2 = directional(pi2);
  LipschitzReport rep;
  rep.derivative_gap = std::sqrt(std::pow(sobolev_norm(d1.psi1 - d2.psi1, -1.0), 2) +
                                 std::pow(sobolev_norm(d1.psi2 - d2.psi2, -1.0), 2) +
                                 std::pow(sobolev_norm(d1.psi3 - d2.psi3, -1.0), 2));
  const auto a = pi1.to_spectral(), b = pi2.to_spectral();
  rep.distance = perturbation_norm({a.rho - b.rho, a.phi - b.phi, a.h - b.h, 0.0}, 1.0);
  rep.ratio = rep.distance > 0.0 ? rep.derivative_gap / rep.distance : 0.0;
  return rep;
}

}  // namespace cglb
