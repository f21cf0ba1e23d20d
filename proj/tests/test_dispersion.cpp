#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cglb/dispersion.hpp"
#include "cglb/errors.hpp"
#include "oracles.hpp"

using namespace cglb;

namespace {

// Eigenvalues of -k^2 A + i k B + C through the test-side cubic solver.
std::array<cplx, 3> oracle_roots(const LinearizationMatrices& M, double k) {
  std::array<std::array<cplx, 3>, 3> S;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      S[i][j] = -k * k * M.A(i, j) + cplx(0.0, k) * M.B(i, j) + M.C(i, j);
  return oracle::eig3(S);
}

// Max over a of min over b of |a - b| with the matching removed (3 elements).
double set_distance(std::array<cplx, 3> a, std::array<cplx, 3> b) {
  std::array<int, 3> perm{0, 1, 2};
  double best = INFINITY;
  do {
    double d = 0.0;
    for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(a[i] - b[perm[i]]));
    best = std::min(best, d);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

struct Draw {
  SystemParams p;
  PlaneWave w;
};

// A random kappa = 0 parameter set with a consistent plane wave.
Draw random_draw(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), R(0.2, 1.0);
  Draw d;
  d.w.r0 = R(rng);
  d.w.theta0 = (U(rng) < 0 ? -1.0 : 1.0) * std::sqrt(1.0 - d.w.r0 * d.w.r0);
  d.w.w0 = U(rng);
  d.p.u = {U(rng), U(rng)};
  d.p.v.c1 = U(rng);
  d.p.v.c0 = -d.p.u(d.w.r0) * d.w.theta0 * d.w.theta0 / (d.w.r0 * d.w.r0) - d.p.v.c1 * d.w.r0;
  d.p.m = 0.1 + std::abs(U(rng));
  d.p.s1 = {U(rng), U(rng)};
  d.p.s2 = {U(rng), U(rng)};
  return d;
}

}  // namespace

TEST_CASE("matrix layout for the first special case") {
  const auto sc = special_case(PlaneWaveCase::one, 1.0, 0.4, 0.3, -0.2);
  const auto M = build_matrices(sc.params, sc.wave);
  CHECK(M.A == Eigen::Matrix3d::Identity());
  CHECK(M.B(0, 0) == -0.4);
  CHECK(M.B(1, 1) == -0.4);
  CHECK(M.B(2, 2) == -0.4);
  CHECK(M.B(0, 2) == doctest::Approx(-0.3));
  CHECK(M.B(1, 2) == doctest::Approx(0.2));
  CHECK(M.B(0, 1) == 0.0);
  Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
  C(0, 0) = -2.0;
  CHECK(M.C == C);
}

TEST_CASE("theta0 = 0 clears the theta-dependent B entries") {
  SystemParams p;
  p.u = {0.3, 0.7};
  p.s1 = Affine::constant(0.5);
  const auto M = build_matrices(p, {1.0, 0.0, 0.0});
  CHECK(M.B(0, 0) == 0.0);
  CHECK(M.B(0, 1) == 0.0);
  CHECK(M.B(1, 1) == 0.0);
  CHECK(M.C(1, 2) == 0.0);
}

TEST_CASE("kappa coupling placement") {
  SystemParams p;
  p.kappa = Affine::constant(1.0);
  const PlaneWave w{1.0, 0.0, 0.0};
  CHECK(build_matrices(p, w, CouplingMode::paper_remark32).C(2, 0) == -2.0);
  CHECK(build_matrices(p, w, CouplingMode::paper_remark32).B(2, 0) == 0.0);
  CHECK(build_matrices(p, w, CouplingMode::rederived_gradient).B(2, 0) == -2.0);
  CHECK(build_matrices(p, w, CouplingMode::kappa_zero).B(2, 0) == 0.0);
  CHECK(build_matrices(p, w, CouplingMode::kappa_zero).C(2, 0) == 0.0);
}

TEST_CASE("exact linearization differs only where the derivation says") {
  std::mt19937_64 rng(4);
  const auto d = random_draw(rng);
  auto p = d.p;
  p.kappa = Affine::constant(0.3);
  const auto lit = build_matrices(p, d.w, CouplingMode::rederived_gradient);
  const auto exact = exact_linearization(p, d.w);
  Eigen::Matrix3d dA = exact.A - lit.A, dB = exact.B - lit.B, dC = exact.C - lit.C;
  const double U = p.u(d.w.r0);
  CHECK(dA(1, 0) == doctest::Approx(U / d.w.r0 - p.u.c1));
  CHECK(dB(1, 0) == doctest::Approx(2.0 * d.w.theta0 / d.w.r0));
  dA(1, 0) = 0.0;
  dB(1, 0) = 0.0;
  CHECK(dA.norm() < 1e-15);
  CHECK(dB.norm() < 1e-15);
  CHECK(dC.norm() < 1e-15);
  CHECK_THROWS_AS(exact_linearization(p, {0.0, 1.0, 0.0}), AmplitudeVanishes);
}

TEST_CASE("eigenvalue examples") {
  const auto sc = special_case(PlaneWaveCase::one, 1.0, 0.0);
  const auto M = build_matrices(sc.params, sc.wave);
  const auto s = eigenvalues_at_k(M, 1.0);
  CHECK(std::abs(s.lambdas[0] + 1.0) < 1e-12);
  CHECK(std::abs(s.lambdas[1] + 1.0) < 1e-12);
  CHECK(std::abs(s.lambdas[2] + 3.0) < 1e-12);
  const auto z = eigenvalues_at_k(M, 0.0);
  CHECK(std::abs(z.lambdas[0]) < 1e-14);
  CHECK(std::abs(z.lambdas[1]) < 1e-14);
  CHECK(std::abs(z.lambdas[2] + 2.0) < 1e-14);

  const auto c3 = special_case(PlaneWaveCase::three, 0.6, 0.5);
  const auto M3 = build_matrices(c3.params, c3.wave);
  for (double k : {-3.0, -0.5, 0.25, 2.0}) {
    const auto e = eigenvalues_at_k(M3, k);
    const cplx l1 = -k * k * 0.6 - cplx(0.0, 0.5 * k), l2 = -k * k - cplx(0.0, 0.5 * k);
    CHECK(set_distance(e.lambdas, {l1, l2, l2}) < 1e-10);
  }
}

TEST_CASE("eigenvalues agree with an independent cubic solver") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto d = random_draw(rng);
    auto p = d.p;
    p.kappa = Affine::constant(0.5 * (i % 3));
    const auto M = build_matrices(p, d.w, CouplingMode::rederived_gradient);
    for (double k : {-6.0, -1.3, 0.0, 0.7, 4.0}) {
      const auto s = eigenvalues_at_k(M, k);
      const auto c = eigenvalues_at_k(M, k, EigenRoute::companion);
      const auto o = oracle_roots(M, k);
      const double scale = 1.0 + k * k;
      CHECK(set_distance(s.lambdas, o) < 1e-8 * scale);
      CHECK(set_distance(c.lambdas, o) < 1e-7 * scale);
      CHECK(s.residual <= 1e-9);
      // conjugate symmetry in k
      const auto m = eigenvalues_at_k(M, -k);
      std::array<cplx, 3> conj{std::conj(s.lambdas[0]), std::conj(s.lambdas[1]), std::conj(s.lambdas[2])};
      CHECK(set_distance(m.lambdas, conj) < 1e-9 * scale);
      // ordering
      CHECK(s.lambdas[0].real() >= s.lambdas[1].real() - 1e-12);
      CHECK(s.lambdas[1].real() >= s.lambdas[2].real() - 1e-12);
    }
  }
}

TEST_CASE("rederived radicand reproduces the spectrum") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const auto d = random_draw(rng);
    const auto M = build_matrices(d.p, d.w);
    for (double k = -8.0; k <= 8.0; k += 0.5) {
      const auto cf = closed_form_lambda(d.p, d.w, k, Radicand::rederived);
      CHECK(set_distance(cf.lambdas, oracle_roots(M, k)) < 1e-8 * (1.0 + k * k));
    }
  }
}

TEST_CASE("printed radicand on its own terms") {
  // b = 0 when theta0 = 0; the two branches are symmetric about -(r0^2 + k^2) - i w0 k
  SystemParams p;
  p.u = {0.4, 0.3};
  const PlaneWave w{1.0, 0.0, 0.7};
  for (double k : {-2.0, 0.5, 3.0}) {
    const auto cf = closed_form_lambda(p, w, k);
    CHECK(cf.b == 0.0);
    const cplx mid = (cf.lambdas[1] + cf.lambdas[2]) / 2.0;
    CHECK(mid.imag() == doctest::Approx(-0.7 * k).epsilon(1e-14));
    CHECK(mid.real() == doctest::Approx(-(1.0 + k * k)).epsilon(1e-14));
    const auto re = closed_form_real_parts(cf.a, cf.b, w.r0, k);
    CHECK(re[0] == doctest::Approx(cf.lambdas[1].real()).epsilon(1e-12));
    CHECK(re[1] == doctest::Approx(cf.lambdas[2].real()).epsilon(1e-12));
  }
  // first special case: a = r0^4 and the closed form is exact
  const auto sc = special_case(PlaneWaveCase::one, 2.0, 0.3);
  const auto M = build_matrices(sc.params, sc.wave);
  for (double k : {-4.0, 1.0, 2.5}) {
    const auto cf = closed_form_lambda(sc.params, sc.wave, k);
    CHECK(cf.a == doctest::Approx(1.0));
    CHECK(set_distance(cf.lambdas, oracle_roots(M, k)) < 1e-10);
  }
}

TEST_CASE("special case formulas") {
  for (double k = -8.0; k <= 8.0; k += 0.25) {
    const auto c1 = special_case(PlaneWaveCase::one, 1.5, 0.3);
    CHECK(set_distance(eigenvalues_at_k(build_matrices(c1.params, c1.wave), k).lambdas,
                       special_case_printed(PlaneWaveCase::one, 1.5, 0.3, 1.0, k)) < 1e-9);
    const auto c2 = special_case(PlaneWaveCase::two, 1.5, 0.3, 0.0, 0.0, 0.0, 0.6);
    CHECK(set_distance(eigenvalues_at_k(build_matrices(c2.params, c2.wave), k).lambdas,
                       special_case_two_corrected(1.5, 0.3, 0.6, k)) < 1e-9);
  }
  // the printed third root of case two uses 2 r0 where the matrices give 2 r0^2
  const auto c2 = special_case(PlaneWaveCase::two, 1.5, 0.3, 0.0, 0.0, 0.0, 0.6);
  const auto e = eigenvalues_at_k(build_matrices(c2.params, c2.wave), 1.0);
  CHECK(set_distance(e.lambdas, special_case_printed(PlaneWaveCase::two, 1.5, 0.3, 0.6, 1.0)) ==
        doctest::Approx(2.0 * 0.6 - 2.0 * 0.36));
}

TEST_CASE("kappa-coupled slice: factored cases and real parts") {
  for (double k = -8.0; k <= 8.0; k += 0.25) {
    for (double w0 : {0.0, 0.6}) {
      const auto z = remark32_slice(0.0, 0.0, w0);
      const auto Mz = build_matrices(z.params, z.wave, CouplingMode::paper_remark32);
      CHECK(set_distance(eigenvalues_at_k(Mz, k).lambdas, remark32_factored(Remark32Case::zero, k, w0)) < 1e-8);
      const auto p = remark32_slice(1.0, 0.0, w0);
      const auto Mp = build_matrices(p.params, p.wave, CouplingMode::paper_remark32);
      CHECK(set_distance(eigenvalues_at_k(Mp, k).lambdas, remark32_factored(Remark32Case::plus, k, w0)) < 1e-8);
      const auto m = remark32_slice(-1.0, 0.0, w0);
      const auto Mm = build_matrices(m.params, m.wave, CouplingMode::paper_remark32);
      CHECK(set_distance(eigenvalues_at_k(Mm, k).lambdas, remark32_factored(Remark32Case::minus, k, w0)) < 1e-8);
    }
    const auto re = remark32_real_parts(k);
    const double want_hi = -(1.0 + k * k) + std::sqrt((1.0 + std::sqrt(1.0 + k * k)) / 2.0);
    CHECK(re[0] == doctest::Approx(want_hi).epsilon(1e-14));
    if (k != 0.0) CHECK(re[0] < 0.0);
    CHECK(re[0] <= 0.0);
    CHECK(re[1] < 0.0);
  }
}

TEST_CASE("Cardano roots") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const double s1 = U(rng), s2 = U(rng), w0 = U(rng), k = 4.0 * U(rng);
    const auto sl = remark32_slice(s1, s2, w0);
    const auto M = build_matrices(sl.params, sl.wave, CouplingMode::paper_remark32);
    const auto fixed = remark32_closed_form(k, s1, s2, w0, CardanoForm::corrected);
    CHECK(set_distance(fixed, oracle_roots(M, k)) < 1e-8 * (1.0 + k * k));
  }
}

TEST_CASE("classification examples") {
  const auto grid = default_k_grid();
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(std::count(grid.begin(), grid.end(), 0.0) == 1);

  const double m = 0.5, w0 = 0.8;
  const auto sc = special_case(PlaneWaveCase::one, m, w0);
  const auto cl = classify_spectrum(sample_spectrum(build_matrices(sc.params, sc.wave), grid));
  CHECK(cl.verdict == Verdict::stable);
  REQUIRE(cl.C.has_value());
  CHECK(*cl.C == doctest::Approx(std::min(m, 1.0) / (w0 * w0)).epsilon(1e-9));

  const auto un = special_case(PlaneWaveCase::one, -1.0, 0.0);
  const auto cu = classify_spectrum(sample_spectrum(build_matrices(un.params, un.wave), grid));
  CHECK(cu.verdict == Verdict::unstable);
  CHECK(std::abs(cu.k_at_max) == doctest::Approx(16.0));
  REQUIRE(cu.omega_plus.has_value());
  CHECK(*cu.omega_plus > 0.0);

  const auto st = special_case(PlaneWaveCase::one, 1.0, 0.0);
  const auto cs = classify_spectrum(sample_spectrum(build_matrices(st.params, st.wave), grid));
  CHECK(cs.verdict == Verdict::stable);
  CHECK_FALSE(cs.C.has_value());

  CHECK_THROWS_AS(classify_spectrum({}), EmptySampleSet);

  // grid doubling keeps the verdict
  const auto fine = default_k_grid(2048);
  CHECK(classify_spectrum(sample_spectrum(build_matrices(sc.params, sc.wave), fine)).verdict == Verdict::stable);
}

TEST_CASE("stability condition examples") {
  for (double k : {-3.0, -0.1, 0.4, 5.0}) {
    CHECK(stability_conditions(1.0, 0.0, 1.0, k, 1.0).all());
  }
  CHECK_FALSE(stability_conditions(1.0, 0.0, 1.0, 1.0, -1.0).diffusive);
  // a above 2 (r0^2 + k^2)^2 at k = 0.5
  const double r0 = 1.0, k = 0.5, a = 2.0 * std::pow(r0 * r0 + k * k, 2) + 1.0;
  const auto s = stability_conditions(a, 0.0, r0, k, 1.0);
  CHECK_FALSE(s.all());
  CHECK(closed_form_real_parts(a, 0.0, r0, k)[0] >= 0.0);
}
