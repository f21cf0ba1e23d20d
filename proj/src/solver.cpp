#include "cglb/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cglb/errors.hpp"
#include "cglb/etd.hpp"
#include "cglb/littlewood_paley.hpp"

namespace cglb {

namespace {

constexpr cplx I{0.0, 1.0};

struct RhsProbe {
  double max_amplitude = 0.0;  // max over |P| and |Omega_j|
  double max_speed = 0.0;      // max over sum_j |Omega_j|
};

std::vector<cplx> physical(const Grid& g, std::span<const cplx> spec) {
  std::vector<cplx> out(spec.size());
  fft_inverse(g, spec, out);
  return out;
}

std::vector<cplx> spectral_of(const Grid& g, std::span<const cplx> phys, bool dealias) {
  std::vector<cplx> out(phys.size());
  fft_forward(g, phys, out);
  if (dealias) dealias_in_place(g, out);
  return out;
}

std::vector<cplx> derivative_spec(const Grid& g, std::span<const cplx> spec, int axis, int order) {
  std::vector<cplx> out(spec.begin(), spec.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (order % 2 == 1 && g.on_nyquist(i, axis)) {
      out[i] = 0.0;
      continue;
    }
    const double k = g.wavevector(i)[axis];
    out[i] *= order == 1 ? I * k : cplx(-k * k);
  }
  return out;
}

// Core of rhs_nonlinear on raw spectral arrays: u[0] = P, u[1..dim] = Omega.
std::vector<std::vector<cplx>> evaluate_rhs(const Grid& g, const SystemParams& prm,
                                            const std::vector<std::span<const cplx>>& u,
                                            bool dealias, RhsProbe* probe) {
  const int dim = g.dim();
  const std::size_t n = g.size();

  auto filtered = [&](std::span<const cplx> s) {
    std::vector<cplx> v(s.begin(), s.end());
    if (dealias) dealias_in_place(g, v);
    return v;
  };

  const auto Ps = filtered(u[0]);
  const auto P = physical(g, Ps);
  std::vector<std::vector<cplx>> dP(dim), Om(dim), Oms(dim);
  std::vector<std::vector<std::vector<cplx>>> dOm(dim);
  for (int a = 0; a < dim; ++a) {
    dP[a] = physical(g, derivative_spec(g, Ps, a, 1));
    Oms[a] = filtered(u[1 + a]);
    Om[a] = physical(g, Oms[a]);
  }
  for (int j = 0; j < dim; ++j) {
    dOm[j].resize(dim);
    for (int a = 0; a < dim; ++a) dOm[j][a] = physical(g, derivative_spec(g, Oms[j], a, 1));
  }

  // |P|^2 as a dealiased product, reused by the cubic term and the gradient coupling.
  std::vector<cplx> mod2(n);
  for (std::size_t i = 0; i < n; ++i) mod2[i] = std::norm(P[i]);
  const auto mod2_s = spectral_of(g, mod2, dealias);
  mod2 = physical(g, mod2_s);
  std::vector<std::vector<cplx>> grad_mod2(dim);
  for (int a = 0; a < dim; ++a) grad_mod2[a] = physical(g, derivative_spec(g, mod2_s, a, 1));

  std::vector<cplx> lapP;
  if (!prm.u.is_constant()) {
    std::vector<cplx> acc(n, 0.0);
    for (int a = 0; a < dim; ++a) {
      const auto d2 = derivative_spec(g, Ps, a, 2);
      for (std::size_t i = 0; i < n; ++i) acc[i] += d2[i];
    }
    lapP = physical(g, acc);
  }

  std::vector<cplx> outP(n);
  std::vector<std::vector<cplx>> outO(dim, std::vector<cplx>(n));
  double amp = 0.0, speed = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::abs(P[i]);
    double div = 0.0, sp = 0.0;
    cplx adv = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double w = Om[a][i].real();
      adv += w * dP[a][i];
      div += dOm[a][a][i].real();
      sp += std::abs(w);
      amp = std::max(amp, std::abs(w));
    }
    amp = std::max(amp, r);
    if (!std::isfinite(r) || !std::isfinite(sp)) amp = std::numeric_limits<double>::infinity();
    speed = std::max(speed, sp);

    const cplx r1(prm.s1(r), prm.s2(r));
    cplx val = -adv - cplx(1.0, prm.v(r)) * mod2[i].real() * P[i] - r1 * P[i] * div;
    if (!lapP.empty()) val += I * (prm.u(r) - prm.u.c0) * lapP[i];
    outP[i] = val;

    const double kap = prm.kappa(r);
    for (int j = 0; j < dim; ++j) {
      double a = 0.0;
      for (int b = 0; b < dim; ++b) a += Om[b][i].real() * dOm[j][b][i].real();
      outO[j][i] = -a - kap * grad_mod2[j][i].real();
    }
  }
  if (probe) {
    probe->max_amplitude = amp;
    probe->max_speed = speed;
  }

  std::vector<std::vector<cplx>> out;
  out.reserve(1 + dim);
  out.push_back(spectral_of(g, outP, dealias));
  // xi P is linear; it acts on the unfiltered field.
  for (std::size_t i = 0; i < n; ++i) out[0][i] += prm.xi * u[0][i];
  for (int j = 0; j < dim; ++j) out.push_back(spectral_of(g, outO[j], dealias));
  return out;
}

}  // namespace

FieldState FieldState::zeros(const Grid& grid) {
  FieldState s;
  s.P = SpectralField(grid, Representation::spectral);
  for (int a = 0; a < grid.dim(); ++a) s.Omega.emplace_back(grid, Representation::spectral);
  return s;
}

FieldState FieldState::plane_wave(const Grid& grid, const PlaneWave& w) {
  FieldState s;
  s.P = SpectralField::sample(grid, [&](double x, double) {
          return w.r0 * std::exp(I * (w.theta0 * x));
        }).to_spectral();
  s.Omega.push_back(SpectralField::sample(grid, [&](double, double) { return cplx(w.w0); })
                        .to_spectral());
  if (grid.dim() == 2) s.Omega.emplace_back(grid, Representation::spectral);
  return s;
}

FieldState FieldState::to_spectral() const {
  FieldState s{P.to_spectral(), {}, t};
  for (const auto& o : Omega) s.Omega.push_back(o.to_spectral());
  return s;
}

FieldState FieldState::to_physical() const {
  FieldState s{P.to_physical(), {}, t};
  for (const auto& o : Omega) s.Omega.push_back(o.to_physical());
  return s;
}

SpectralField linear_propagator(const SpectralField& f, double mu, double u_disp, double dt) {
  if (!f.is_spectral()) throw Error("linear_propagator expects a spectral field");
  SpectralField out = f;
  if (dt == 0.0) return out;
  const cplx rate = -mu * cplx(1.0, u_disp) * dt;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double k = f.grid().wavenumber_norm(i);
    out[i] *= std::exp(rate * (k * k));
  }
  return out;
}

NonlinearRhs rhs_nonlinear(const FieldState& state, const SystemParams& params, bool dealias) {
  const FieldState s = state.to_spectral();
  const Grid& g = s.grid();
  std::vector<std::span<const cplx>> u{s.P.values()};
  for (const auto& o : s.Omega) u.push_back(o.values());
  auto raw = evaluate_rhs(g, params, u, dealias, nullptr);
  NonlinearRhs out{SpectralField(g, std::move(raw[0]), Representation::spectral), {}};
  for (int a = 0; a < g.dim(); ++a)
    out.dOmega.emplace_back(g, std::move(raw[1 + a]), Representation::spectral);
  return out;
}

Diagnostics diagnose(const FieldState& state, const SolverConfig& config) {
  Diagnostics d;
  d.t = state.t;
  d.L2_P = lp_norm(state.P, 2.0);
  d.Hs_P = sobolev_norm(state.P, config.sobolev_s);
  double l2 = 0.0, hs = 0.0;
  for (const auto& o : state.Omega) {
    l2 += std::pow(lp_norm(o, 2.0), 2);
    hs += std::pow(sobolev_norm(o, config.sobolev_s), 2);
  }
  d.L2_Omega = std::sqrt(l2);
  d.Hs_Omega = std::sqrt(hs);
  d.besov_proxy = smallness_monitor(state, config.besov_p);
  return d;
}

Integrator::Integrator(const Grid& grid, const SystemParams& params, Forcing forcing,
                       SolverConfig config)
    : grid_(grid), params_(params), forcing_(std::move(forcing)), config_(config) {
  if (!(config_.dt > 0.0)) throw ConfigError("dt must be positive");
  const std::size_t n = grid_.size();
  const double h = config_.dt;
  keep_.assign(n, 1.0);
  for (int c = 0; c < 2; ++c) {
    expl_[c].resize(n);
    phi1_[c].resize(n);
    phi2_[c].resize(n);
    bdf_[c].resize(n);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double k = grid_.wavenumber_norm(i);
    if (config_.k_max && k > *config_.k_max) keep_[i] = 0.0;
    const cplx L[2] = {-cplx(1.0, params_.u.c0) * (k * k), cplx(-params_.m * k * k)};
    for (int c = 0; c < 2; ++c) {
      if (keep_[i] == 0.0) {
        expl_[c][i] = phi1_[c][i] = phi2_[c][i] = bdf_[c][i] = 0.0;
        continue;
      }
      const cplx z = L[c] * h;
      expl_[c][i] = std::exp(z);
      phi1_[c][i] = h * etd::phi1(z);
      phi2_[c][i] = h * etd::phi2(z);
      bdf_[c][i] = 1.0 / (3.0 - 2.0 * z);
    }
  }
}

std::vector<SpectralField> Integrator::pack(const FieldState& s) const {
  if (!(s.grid() == grid_)) throw Error("state grid does not match the integrator grid");
  if (int(s.Omega.size()) != grid_.dim()) throw Error("Omega needs one component per axis");
  std::vector<SpectralField> u{s.P.to_spectral()};
  for (const auto& o : s.Omega) u.push_back(o.to_spectral());
  return u;
}

FieldState Integrator::unpack(std::vector<SpectralField> u, double t) const {
  FieldState s;
  s.P = std::move(u[0]);
  for (std::size_t j = 1; j < u.size(); ++j) s.Omega.push_back(std::move(u[j]));
  s.t = t;
  return s;
}

std::vector<SpectralField> Integrator::nonlinear(const std::vector<SpectralField>& u,
                                                 double t) const {
  std::vector<std::span<const cplx>> raw;
  for (const auto& f : u) raw.push_back(f.values());
  RhsProbe probe;
  auto r = evaluate_rhs(grid_, params_, raw, config_.dealias, &probe);

  if (!(probe.max_amplitude <= config_.blowup_threshold))
    throw StepUnstable("max-norm exceeded the blow-up threshold", t);
  if (config_.dt * probe.max_speed / grid_.spacing() > config_.cfl_limit)
    throw StepUnstable("advective CFL limit exceeded", t);

  std::vector<SpectralField> out;
  for (auto& v : r) out.emplace_back(grid_, std::move(v), Representation::spectral);
  if (forcing_.f1) out[0] += forcing_.f1(t).to_spectral();
  if (forcing_.f2) {
    const auto f2 = forcing_.f2(t);
    for (std::size_t j = 0; j < f2.size() && j + 1 < out.size(); ++j)
      out[1 + j] += f2[j].to_spectral();
  }
  return out;
}

void Integrator::finish(std::vector<SpectralField>& u) const {
  if (!config_.k_max) return;
  for (auto& f : u)
    for (std::size_t i = 0; i < f.size(); ++i) f[i] *= keep_[i];
}

FieldState Integrator::etd_step(const FieldState& state, Stage* out) {
  const double h = config_.dt;
  auto u0 = pack(state);
  const auto n0 = nonlinear(u0, state.t);

  auto a = u0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const int k = c == 0 ? 0 : 1;
    for (std::size_t i = 0; i < a[c].size(); ++i)
      a[c][i] = expl_[k][i] * u0[c][i] + phi1_[k][i] * n0[c][i];
  }
  const auto n1 = nonlinear(a, state.t + h);
  for (std::size_t c = 0; c < a.size(); ++c) {
    const int k = c == 0 ? 0 : 1;
    for (std::size_t i = 0; i < a[c].size(); ++i) a[c][i] += phi2_[k][i] * (n1[c][i] - n0[c][i]);
  }
  finish(a);
  if (out) *out = Stage{std::move(u0), n0};
  return unpack(std::move(a), state.t + h);
}

FieldState Integrator::bdf2_step(const FieldState& state) {
  const double h = config_.dt;
  if (!history_) {
    // Second-order start from the exponential scheme.
    Stage st;
    auto next = etd_step(state, &st);
    history_ = std::move(st);
    return next;
  }
  auto u1 = pack(state);
  const auto n1 = nonlinear(u1, state.t);
  auto u2 = u1;
  const auto& u0 = history_->u;
  const auto& n0 = history_->n;
  for (std::size_t c = 0; c < u2.size(); ++c) {
    const int k = c == 0 ? 0 : 1;
    for (std::size_t i = 0; i < u2[c].size(); ++i)
      u2[c][i] = bdf_[k][i] *
                 (4.0 * u1[c][i] - u0[c][i] + 2.0 * h * (2.0 * n1[c][i] - n0[c][i]));
  }
  finish(u2);
  history_ = Stage{std::move(u1), n1};
  return unpack(std::move(u2), state.t + h);
}

FieldState Integrator::step(const FieldState& state) {
  return config_.scheme == Scheme::etd_rk2 ? etd_step(state, nullptr) : bdf2_step(state);
}

FieldState step(const FieldState& state, const SystemParams& params, const Forcing& forcing,
                const SolverConfig& config) {
  Integrator integ(state.grid(), params, forcing, config);
  return integ.step(state);
}

namespace {

double max_norm(const FieldState& s) {
  double m = lp_norm(s.P, INFINITY);
  for (const auto& o : s.Omega) m = std::max(m, lp_norm(o, INFINITY));
  return m;
}

}  // namespace

Trajectory evolve(const FieldState& state0, const SystemParams& params, const Forcing& forcing,
                  const SolverConfig& config, const std::vector<Observer>& observers) {
  Trajectory traj;
  FieldState s = state0.to_spectral();
  const double t0 = s.t;
  auto record = [&](const FieldState& st) {
    traj.records.push_back(diagnose(st, config));
    for (const auto& obs : observers) obs(st, traj.records.back());
  };
  record(s);

  const long nsteps = config.t_end > 0.0 ? long(std::ceil(config.t_end / config.dt - 1e-9)) : 0;
  if (nsteps > 0) {
    SolverConfig cfg = config;
    cfg.dt = config.t_end / double(nsteps);
    Integrator integ(s.grid(), params, forcing, cfg);
    const int every = std::max(1, config.diagnostics_every);
    for (long k = 1; k <= nsteps; ++k) {
      s = integ.step(s);
      s.t = t0 + double(k) * cfg.dt;
      traj.steps = k;
      if (k % every == 0 || k == nsteps) {
        const double mx = max_norm(s);
        if (!(mx <= config.blowup_threshold))
          throw StepUnstable("max-norm exceeded the blow-up threshold", s.t);
        record(s);
      }
    }
  }
  traj.final_state = std::move(s);
  return traj;
}

}  // namespace cglb
