#include <doctest.h>

#include <cmath>
#include <random>

#include "cglb/errors.hpp"
#include "cglb/littlewood_paley.hpp"
#include "cglb/solver.hpp"
#include "oracles.hpp"

using namespace cglb;

namespace {

SpectralField random_real(const Grid& g, int modes, std::mt19937_64& rng) {
  const auto p = oracle::TrigPoly::random(modes, rng, g.base_wavenumber());
  return SpectralField::sample(g, [&](double x) { return cplx(p(x)); }).to_spectral();
}

SpectralField single_mode(const Grid& g, int j) {
  const double k = g.base_wavenumber() * j;
  return SpectralField::sample(g, [&](double x) { return cplx(std::cos(k * x)); }).to_spectral();
}

}  // namespace

TEST_CASE("profiles have the annulus supports") {
  CHECK(lp_chi(0.0) == 1.0);
  CHECK(lp_chi(0.75) == 1.0);
  CHECK(lp_chi(4.0 / 3.0) == 0.0);
  CHECK(lp_phi(0.74) == 0.0);
  CHECK(lp_phi(8.0 / 3.0) == 0.0);
  CHECK(lp_phi(1.0) > 0.0);
  for (double xi = 0.01; xi < 50.0; xi *= 1.013) {
    double s = lp_chi(xi);
    for (int q = 0; q < 12; ++q) s += lp_phi(std::ldexp(xi, -q));
    CHECK(std::abs(s - 1.0) < 1e-12);
    double s2 = lp_chi(xi) * lp_chi(xi);
    for (int q = 0; q < 12; ++q) s2 += std::pow(lp_phi(std::ldexp(xi, -q)), 2);
    CHECK(s2 >= 1.0 / 3.0 - 1e-12);
    CHECK(s2 <= 1.0 + 1e-12);
  }
}

TEST_CASE("dyadic blocks of a single mode") {
  Grid g(1, 256, 2.0 * oracle::pi);
  const auto f = single_mode(g, 8);  // |k| = 2^3
  CHECK(lp_norm(dyadic_block(f, 3), 2.0) > 0.1);
  CHECK(lp_norm(dyadic_block(f, 1), 2.0) < 1e-14);
  CHECK(lp_norm(dyadic_block(f, 5), 2.0) < 1e-14);
  CHECK_THROWS_AS(dyadic_block(f, 40), OutOfRange);
}

TEST_CASE("homogeneous blocks sum back to a zero-mean field") {
  Grid g(1, 128, 2.0 * oracle::pi);
  std::mt19937_64 rng(1);
  const auto f = random_real(g, 40, rng);
  const auto part = DyadicPartition::for_grid(g, BlockVariant::homogeneous);
  SpectralField sum(g, Representation::spectral);
  for (int q = part.q_min; q <= part.q_max; ++q) sum += dyadic_block(f, q);
  CHECK(lp_norm(sum - f, INFINITY) < 1e-10);

  double sq = 0.0;
  for (int q = part.q_min; q <= part.q_max; ++q) sq += std::pow(lp_norm(dyadic_block(f, q), 2.0), 2);
  const double total = std::pow(lp_norm(f, 2.0), 2);
  CHECK(sq >= total / 3.0);
  CHECK(sq <= total * (1.0 + 1e-12));
}

TEST_CASE("besov norm examples") {
  Grid g(1, 128, 2.0 * oracle::pi);
  CHECK(besov_norm(SpectralField(g, Representation::spectral), {1.0, 2.0, 1.0}) == 0.0);

  std::mt19937_64 rng(2);
  const auto f = random_real(g, 40, rng);
  const double b = besov_norm(f, {0.0, 2.0, 2.0});
  CHECK(b >= lp_norm(f, 2.0) / std::sqrt(3.0));
  CHECK(b <= lp_norm(f, 2.0) * (1.0 + 1e-12));

  // phi = 1 on [4/3, 3/2], so |k| = 11 lives in block 3 alone
  const auto m = single_mode(g, 11);
  const double s = 0.5;
  const double nb = besov_norm(m, {s, 2.0, 1.0});
  CHECK(nb == doctest::Approx(std::pow(2.0, 3 * s) * lp_norm(m, 2.0)).epsilon(1e-12));
}

TEST_CASE("Bony decomposition") {
  Grid g(1, 128, 2.0 * oracle::pi);
  std::mt19937_64 rng(3);
  const auto zero = SpectralField(g, Representation::spectral);
  const auto v = random_real(g, 40, rng);
  const auto z = bony_split(zero, v);
  CHECK(lp_norm(z.t_uv, INFINITY) == 0.0);
  CHECK(lp_norm(z.t_vu, INFINITY) == 0.0);
  CHECK(lp_norm(z.r_uv, INFINITY) == 0.0);

  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_real(g, 40, rng), b = random_real(g, 40, rng);
    const auto s = bony_split(a, b);
    const auto prod = pointwise_product(a, b);
    CHECK(lp_norm(s.t_uv + s.t_vu + s.r_uv - prod, INFINITY) < 1e-10 * lp_norm(prod, INFINITY));
  }

  // low mode against a high mode four octaves up: the paraproduct carries everything
  const auto lo = single_mode(g, 1), hi = single_mode(g, 32);
  const auto s = bony_split(lo, hi);
  const auto prod = pointwise_product(lo, hi);
  CHECK(lp_norm(s.r_uv, INFINITY) < 1e-12);
  CHECK(lp_norm(s.t_vu, INFINITY) < 1e-12);
  CHECK(lp_norm(s.t_uv - prod, INFINITY) < 1e-12);
}

TEST_CASE("semigroup decay of a single mode") {
  Grid g(1, 128, 2.0 * oracle::pi);
  const auto f = single_mode(g, 6);
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(0.01 * i);
  const auto rep = check_semigroup_decay(f, 2, 1.3, 0.0, ts);
  CHECK(rep.fitted_c * 1.3 * 16.0 == doctest::Approx(1.3 * 36.0).epsilon(1e-8));
  CHECK(rep.pass);
  const auto disp = check_semigroup_decay(f, 2, 1.3, 4.0, ts);
  CHECK(disp.fitted_rate == doctest::Approx(rep.fitted_rate).epsilon(1e-10));
}

TEST_CASE("semigroup decay in the max norm stays in the bracket") {
  Grid g(1, 512, 2.0 * oracle::pi);
  std::mt19937_64 rng(4);
  const auto f = random_real(g, 150, rng);
  for (int q = 2; q <= 5; ++q) {
    const auto b = dyadic_block(f, q);
    std::vector<double> ts;
    for (int i = 0; i <= 20; ++i) ts.push_back(0.02 * i / std::ldexp(1.0, 2 * q));
    const auto rep = check_semigroup_decay(b, q, 1.0, 0.0, ts, INFINITY);
    CHECK(rep.fitted_c >= rep.bracket_lo);
    CHECK(rep.fitted_c <= rep.bracket_hi);
  }
}

TEST_CASE("smoothing estimate examples") {
  Grid g(1, 64, 2.0 * oracle::pi);
  SmoothingSetup st;
  st.idx = {0.0, 2.0, 1.0};
  st.rho = st.rho1 = 2.0;
  st.T = 4.0;
  st.time_steps = 2000;

  const auto zero = SpectralField(g, Representation::spectral);
  const auto z = check_smoothing_estimate(zero, nullptr, 1.0, 0.0, st);
  CHECK(z.ratio == 0.0);

  // |k| = 3 lies in block 1 alone; with g = 0
  //   lhs = mu^{1/2} 2^1 |f0| (int_0^T e^{-2 mu k^2 t} dt)^{1/2}
  const auto f0 = single_mode(g, 3);
  const double mu = 0.7;
  const auto rep = check_smoothing_estimate(f0, nullptr, mu, 0.0, st);
  const double k = 3.0, amp = lp_norm(f0, 2.0);
  const double integral = (1.0 - std::exp(-2.0 * mu * k * k * st.T)) / (2.0 * mu * k * k);
  CHECK(rep.lhs == doctest::Approx(std::sqrt(mu) * 2.0 * amp * std::sqrt(integral)).epsilon(1e-3));

  // mu doubling leaves the ratio unchanged when rho1 = rho and the block has decayed
  const auto twice = check_smoothing_estimate(f0, nullptr, 2.0 * mu, 0.0, st);
  CHECK(twice.ratio == doctest::Approx(rep.ratio).epsilon(1e-3));
}

TEST_CASE("smallness monitor") {
  Grid g(1, 64, 2.0 * oracle::pi);
  CHECK(smallness_monitor(FieldState::zeros(g)) == 0.0);
  std::mt19937_64 rng(5);
  FieldState s = FieldState::zeros(g);
  s.P = random_real(g, 10, rng);
  s.Omega[0] = random_real(g, 10, rng);
  FieldState t = s;
  t.P *= cplx(3.0);
  t.Omega[0] *= cplx(3.0);
  CHECK(smallness_monitor(t) == doctest::Approx(3.0 * smallness_monitor(s)).epsilon(1e-13));
}
