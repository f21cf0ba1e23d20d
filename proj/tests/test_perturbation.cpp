#include <doctest.h>

#include <cmath>
#include <random>

#include "cglb/errors.hpp"
#include "cglb/perturbation.hpp"
#include "cglb/solver.hpp"
#include "oracles.hpp"

using namespace cglb;

namespace {

SpectralField sample_real(const Grid& g, const oracle::TrigPoly& p, int order = 0) {
  return SpectralField::sample(g, [&](double x) { return cplx(p.d(x, order), 0.0); });
}

double max_diff(const SpectralField& a, const SpectralField& b) {
  const auto pa = a.to_physical(), pb = b.to_physical();
  double d = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) d = std::max(d, std::abs(pa[i] - pb[i]));
  return d;
}

double max_diff(const PerturbationState& a, const PerturbationState& b) {
  return std::max({max_diff(a.rho, b.rho), max_diff(a.phi, b.phi), max_diff(a.h, b.h)});
}

// u = v = 0: every point of the unit circle is a stationary wave.
PlaneWave circle_wave() { return {0.8, 0.6, 0.0}; }

// theta0 != 0 with u, v sloped. Stationarity under the constraints forces w0 theta0 = 0.
void sloped_case(SystemParams& p, PlaneWave& w) {
  w.r0 = 0.8;
  w.theta0 = 0.6;
  p.u = {0.3, 0.4};
  p.v.c1 = -0.7;
  p.v.c0 = -p.u(w.r0) * w.theta0 * w.theta0 / (w.r0 * w.r0) - p.v.c1 * w.r0;
  w.w0 = 0.0;
  p.m = 0.7;
  p.s1 = {0.3, 0.2};
  p.s2 = {0.1, -0.4};
  p.kappa = Affine::constant(0.25);
}

PerturbationState random_state(const Grid& g, std::mt19937_64& rng, double amp, int modes = 3) {
  const double k0 = g.base_wavenumber();
  PerturbationState s{sample_real(g, oracle::TrigPoly::random(modes, rng, k0).scaled(amp)),
                      sample_real(g, oracle::TrigPoly::random(modes, rng, k0).scaled(amp)),
                      sample_real(g, oracle::TrigPoly::random(modes, rng, k0).scaled(amp)), 0.0};
  return s;
}

// 2/3 truncation by the naive DFT.
std::vector<double> truncate(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<oracle::cplx> c(v.begin(), v.end());
  auto hat = oracle::naive_dft(c);
  for (std::size_t k = 0; k < n; ++k) {
    const long s = k <= n / 2 ? long(k) : long(k) - long(n);
    if (std::abs(s) > long(n / 3)) hat[k] = 0.0;
  }
  const auto back = oracle::naive_idft(hat);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = back[i].real();
  return out;
}

}  // namespace

TEST_CASE("polar chart round trip") {
  const Grid g(1, 64, 10.0 * oracle::pi);  // theta0 = 0.6 is mode 3
  const PlaneWave w = circle_wave();
  std::mt19937_64 rng(1);
  const double k0 = g.base_wavenumber();
  const auto rho = oracle::TrigPoly::random(4, rng, k0).scaled(0.05);
  const auto phi = oracle::TrigPoly::random(4, rng, k0).scaled(0.3);
  const auto h = oracle::TrigPoly::random(4, rng, k0).scaled(0.2);
  const auto P = SpectralField::sample(g, [&](double x) {
    return std::polar(w.r0 + rho(x), w.theta0 * x + phi(x));
  });
  const auto Om = SpectralField::sample(g, [&](double x) { return cplx(w.w0 + h(x), 0.0); });

  const auto pi = polar_decompose(P, Om, w);
  CHECK(max_diff(pi.rho, sample_real(g, rho)) < 1e-12);
  CHECK(max_diff(pi.phi, sample_real(g, phi)) < 1e-12);
  CHECK(max_diff(pi.h, sample_real(g, h)) < 1e-12);

  const auto back = polar_compose(pi, w);
  CHECK(max_diff(back.P, P) < 1e-10);
  CHECK(max_diff(back.Omega[0], Om) < 1e-10);

  const auto dead = SpectralField::sample(g, [&](double x) {
    return std::polar(w.r0 * (1.0 - 0.95 * std::cos(k0 * x)), w.theta0 * x);
  });
  CHECK_THROWS_AS(polar_decompose(dead, Om, w), AmplitudeVanishes);
}

TEST_CASE("the zero perturbation is an equilibrium") {
  const Grid g(1, 32, 2.0 * oracle::pi);
  SystemParams p;
  PlaneWave w = circle_wave();
  CHECK(bundle_norm(polar_rhs(PerturbationState::zeros(g), p, w)) < 1e-15);
  sloped_case(p, w);
  CHECK(bundle_norm(polar_rhs(PerturbationState::zeros(g), p, w)) < 1e-14);
  CHECK(bundle_norm(remainder(PerturbationState::zeros(g), p, w, RemainderForm::exact)) < 1e-14);
}

TEST_CASE("psi3 example") {
  const Grid g(1, 64, 2.0 * oracle::pi);
  SystemParams p;
  p.kappa = Affine::constant(0.4);
  PerturbationState pi = PerturbationState::zeros(g).to_physical();
  pi.h = SpectralField::sample(g, [](double x) { return cplx(std::sin(x), 0.0); });
  const auto psi = remainder(pi, p, {1.0, 0.0, 0.0});
  const auto want = SpectralField::sample(g, [](double x) { return cplx(-std::sin(x) * std::cos(x), 0.0); });
  CHECK(max_diff(psi.psi3, want) < 1e-13);
}

TEST_CASE("printed remainder against a second transcription") {
  const Grid g(1, 32, 2.0 * oracle::pi);
  std::mt19937_64 rng(2);
  SystemParams p;
  PlaneWave w;
  sloped_case(p, w);
  const double kap = p.kappa.c0;
  const auto R = oracle::TrigPoly::random(3, rng).scaled(0.05);
  const auto F = oracle::TrigPoly::random(3, rng).scaled(0.1);
  const auto H = oracle::TrigPoly::random(3, rng).scaled(0.1);
  PerturbationState pi{sample_real(g, R), sample_real(g, F), sample_real(g, H), 0.0};
  const auto lib = remainder(pi, p, w);

  const int n = g.n();
  std::vector<double> a(n), b(n), c(n);
  const double r0 = w.r0, th = w.theta0, c0 = p.u.c0, c1 = p.u.c1;
  auto s1 = [&](double r) { return p.s1.c0 + p.s1.c1 * r; };
  auto s2 = [&](double r) { return p.s2.c0 + p.s2.c1 * r; };
  auto v = [&](double r) { return p.v.c0 + p.v.c1 * r; };
  for (int i = 0; i < n; ++i) {
    const double x = 2.0 * oracle::pi * i / n;
    const double rho = R(x), rho_x = R.d(x, 1), rho_xx = R.d(x, 2);
    const double phi = F(x), phi_x = F.d(x, 1), phi_xx = F.d(x, 2);
    const double h = H(x), h_x = H.d(x, 1);
    const double r = r0 + rho;
    a[i] = -2 * th * c1 * rho * rho_x - 2 * (c0 + c1 * r) * phi * rho_x - (c0 + c1 * r0) * rho * phi_xx -
           h * rho_x - r0 * (rho * rho + phi_x * phi_x + (s1(r) - s1(r0)) * h_x) -
           rho * (2 * r0 * rho + rho * rho + 2 * th * phi_x + phi_x * phi_x + s1(r) * h_x);
    b[i] = -h * phi_x - w.w0 * th - (c0 + c1 * r0) * (th * th + phi_x * phi_x) + c0 / (r0 + rho) * rho_xx -
           c1 * (2 * th * phi_x + phi_x * phi_x) - 2 * rho_x / (r0 + rho) * (th + phi_x) - v(r) * rho * rho -
           (s2(r) - s2(r0)) * h_x - r0 * r0 * (v(r) - p.v.c1 * rho) - 2 * r0 * rho * (v(r0) - v(r));
    c[i] = -h * h_x - 2 * kap * rho * rho_x;
  }
  const auto ta = truncate(a), tb = truncate(b), tc = truncate(c);
  const auto l1 = lib.psi1.to_physical(), l2 = lib.psi2.to_physical(), l3 = lib.psi3.to_physical();
  double err = 0.0;
  for (int i = 0; i < n; ++i)
    err = std::max({err, std::abs(l1[i] - ta[i]), std::abs(l2[i] - tb[i]), std::abs(l3[i] - tc[i])});
  CHECK(err < 1e-10);
}

TEST_CASE("exact linearization is the Jacobian of the polar system") {
  const Grid g(1, 32, 2.0 * oracle::pi);
  SystemParams p;
  PlaneWave w;
  sloped_case(p, w);
  const auto M = exact_linearization(p, w);
  for (int mode : {1, 2, 5}) {
    for (int comp = 0; comp < 3; ++comp) {
      // delta = cos(mode x) in one component
      PerturbationState d = PerturbationState::zeros(g).to_physical();
      SpectralField* f[3] = {&d.rho, &d.phi, &d.h};
      *f[comp] = SpectralField::sample(g, [&](double x) { return cplx(std::cos(mode * x), 0.0); });
      const double eps = 1e-5;
      auto scaled = [&](double s) {
        return PerturbationState{d.rho * s, d.phi * s, d.h * s, 0.0};
      };
      const auto fp = polar_rhs(scaled(eps), p, w), fm = polar_rhs(scaled(-eps), p, w);
      const SpectralField jac[3] = {((fp.psi1 - fm.psi1) * (0.5 / eps)).to_spectral(),
                                    ((fp.psi2 - fm.psi2) * (0.5 / eps)).to_spectral(),
                                    ((fp.psi3 - fm.psi3) * (0.5 / eps)).to_spectral()};
      // coefficient of e^{i mode x} is 1/2 in component comp
      const auto S = M.symbol(double(mode));
      for (int row = 0; row < 3; ++row) {
        const cplx want = 0.5 * S(row, comp);
        CHECK(std::abs(jac[row][std::size_t(mode)] - want) < 1e-6);
      }
    }
  }
}

TEST_CASE("polar evolution agrees with the full system") {
  const Grid g(1, 128, 10.0 * oracle::pi);
  SystemParams p;
  p.m = 0.8;
  p.s1 = Affine::constant(0.2);
  p.s2 = Affine::constant(-0.1);
  p.kappa = Affine::constant(0.3);
  const PlaneWave w = circle_wave();
  std::mt19937_64 rng(3);
  auto pi0 = random_state(g, rng, 0.01, 4);

  PolarConfig pc;
  pc.dt = 1e-3;
  pc.t_end = 0.5;
  const auto polar = evolve_polar(pi0, p, w, pc);

  SolverConfig sc;
  sc.dt = 1e-3;
  sc.t_end = 0.5;
  const auto full = evolve(polar_compose(pi0, w), p, Forcing{}, sc);
  const auto back = polar_decompose(full.final_state.P, full.final_state.Omega[0], w);
  CHECK(max_diff(back, polar.final_state) < 1e-5);
}

TEST_CASE("linear rates match the spectrum") {
  const Grid g(1, 256, 2.0 * oracle::pi);
  SystemParams p;
  p.m = 0.5;
  p.s1 = Affine::constant(0.2);
  p.s2 = Affine::constant(0.1);
  p.kappa = Affine::constant(0.25);
  const PlaneWave w{1.0, 0.0, 0.3};
  const auto rates = linear_rate_check(p, w, g, {1, 2, 3}, 1e-6, 2.0, 1e-3, 11);
  CHECK(rates.size() == 9);
  for (const auto& r : rates) CHECK(r.rel_err < 1e-4);
}

TEST_CASE("quadratic order of the remainder") {
  const Grid g(1, 64, 2.0 * oracle::pi);
  std::mt19937_64 rng(4);
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};

  SystemParams p;
  p.u = {0.0, 0.5};
  p.s1 = {0.3, 0.2};
  p.s2 = {0.1, -0.4};
  p.kappa = {0.3, 0.1};
  const PlaneWave on{1.0, 0.0, 0.2};
  REQUIRE(quadratic_slice(p, on));
  const auto dir = random_state(g, rng, 1.0);
  const auto rep = quadratic_order_check(dir, p, on, eps);
  CHECK(rep.quadratic);
  CHECK(rep.quadratic_spread < 0.05);

  SystemParams q;
  const PlaneWave off = circle_wave();
  CHECK_FALSE(quadratic_slice(q, off));
  const auto printed = quadratic_order_check(dir, q, off, eps);
  CHECK_FALSE(printed.quadratic);
  CHECK(printed.min_linear_ratio > 1e-3);
  const auto exact = quadratic_order_check(dir, q, off, eps, RemainderForm::exact);
  CHECK(exact.quadratic);

  CHECK_THROWS_AS(quadratic_order_check(dir, p, on, {}), EmptySampleSet);
}

TEST_CASE("decay toward a stable wave") {
  const Grid g(1, 64, 2.0 * oracle::pi);
  SystemParams p;
  p.m = 0.5;
  const PlaneWave w{1.0, 0.0, 0.0};
  PolarConfig cfg;
  cfg.dt = 1e-2;
  cfg.t_end = 25.0;
  std::mt19937_64 rng(5);
  const auto rep = decay_experiment(p, w, random_state(g, rng, 1e-3), 1.0, cfg);
  CHECK_FALSE(rep.degenerate);
  CHECK(rep.spectral_gap == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(rep.pass);

  const auto zero = decay_experiment(p, w, PerturbationState::zeros(g), 1.0, cfg);
  CHECK(zero.degenerate);
  CHECK_FALSE(zero.pass);
}

TEST_CASE("growth away from an unstable wave") {
  const Grid g(1, 64, 2.0 * oracle::pi);
  PolarConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 2.5;
  cfg.k_max = 3.0;

  SystemParams p;
  p.m = -1.0;
  const PlaneWave w{1.0, 0.0, 0.0};
  const auto un = instability_experiment(p, w, g, 2, 1e-6, cfg);
  CHECK(un.reference_rate == doctest::Approx(4.0));
  CHECK(un.rel_err < 1e-3);
  CHECK(un.pass);
  REQUIRE(un.omega_plus.has_value());

  p.m = 1.0;
  const auto st = instability_experiment(p, w, g, 2, 1e-6, cfg);
  CHECK_FALSE(st.omega_plus.has_value());
  CHECK(st.rate < 0.0);

  // sloped u and v: the plane wave r0 = 1 has a growing mode at k = 2
  SystemParams s;
  s.u = {0.0, 1.0};
  s.v = {20.0, -20.0};
  const auto roots = plane_wave_amplitudes(s);
  REQUIRE(roots.size() == 2);
  CHECK(roots[1] == doctest::Approx(1.0));
  const PlaneWave sw{1.0, 0.0, 0.0};
  CHECK(plane_wave_residual(s, sw).max_abs() < 1e-15);
  cfg.k_max = 6.0;
  cfg.t_end = 2.0;
  const auto gr = instability_experiment(s, sw, g, 2, 1e-6, cfg);
  CHECK(gr.reference_rate == doctest::Approx(-5.0 + std::sqrt(65.0)).epsilon(1e-10));
  CHECK(gr.rel_err < 1e-4);
}

TEST_CASE("polar evolution rejects unsupported settings") {
  const Grid g(1, 32, 2.0 * oracle::pi);
  SystemParams p;
  p.xi = 2.0;
  PolarConfig cfg;
  CHECK_THROWS_AS(evolve_polar(PerturbationState::zeros(g), p, {1.0, 0.0, 0.0}, cfg), ConfigError);
  p.xi = 1.0;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(evolve_polar(PerturbationState::zeros(g), p, {1.0, 0.0, 0.0}, cfg), ConfigError);
}

TEST_CASE("mean projection and norms") {
  const Grid g(1, 32, 2.0 * oracle::pi);
  std::mt19937_64 rng(6);
  auto s = random_state(g, rng, 1.0);
  for (auto* f : {&s.rho, &s.phi, &s.h})
    *f = *f + SpectralField::sample(g, [](double) { return cplx(2.0, 0.0); });
  const auto z = project_out_mean(s);
  CHECK(std::abs(z.rho.to_spectral()[0]) < 1e-14);
  CHECK(perturbation_norm(s, 0.0) > perturbation_norm(z, 0.0));
  CHECK(perturbation_norm(z, 1.0) >= perturbation_norm(z, 0.0));
}

TEST_CASE("derivative of the remainder is locally Lipschitz") {
  const Grid g(1, 64, 2.0 * oracle::pi);
  std::mt19937_64 rng(7);
  SystemParams p;
  p.kappa = Affine::constant(0.3);
  const PlaneWave w{1.0, 0.0, 0.0};
  const auto a = random_state(g, rng, 0.02), b = random_state(g, rng, 0.02), R = random_state(g, rng, 1.0);
  const auto rep = lipschitz_spot_check(a, b, R, p, w);
  CHECK(rep.distance > 0.0);
  CHECK(std::isfinite(rep.ratio));
  CHECK(rep.ratio < 10.0);
}
