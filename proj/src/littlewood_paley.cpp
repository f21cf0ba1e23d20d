#include "cglb/littlewood_paley.hpp"

#include <algorithm>
#include <cmath>

#include "cglb/errors.hpp"
#include "cglb/etd.hpp"
#include "cglb/solver.hpp"

namespace cglb {

namespace {

constexpr double kInner = 3.0 / 4.0;
constexpr double kOuter = 4.0 / 3.0;

double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double time_norm(const std::vector<double>& a, double dt, double rho) {
  if (std::isinf(rho)) return a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
  double sum = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double w = (n == 0 || n + 1 == a.size()) ? 0.5 : 1.0;
    sum += w * std::pow(a[n], rho);
  }
  return std::pow(sum * dt, 1.0 / rho);
}

double lr_sum(const std::vector<double>& terms, double r) {
  if (std::isinf(r)) return terms.empty() ? 0.0 : *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::pow(t, r);
  return std::pow(sum, 1.0 / r);
}

}  // namespace

double lp_chi(double xi) noexcept {
  const double a = std::abs(xi);
  if (a <= kInner) return 1.0;
  if (a >= kOuter) return 0.0;
  const double t = (kOuter - a) / (kOuter - kInner);
  const double up = bump(t), down = bump(1.0 - t);
  return up / (up + down);
}

double lp_phi(double xi) noexcept { return lp_chi(0.5 * xi) - lp_chi(xi); }

DyadicPartition DyadicPartition::for_grid(const Grid& grid, BlockVariant variant) {
  const double kmin = grid.base_wavenumber();
  const double kmax = grid.max_wavenumber_norm();
  DyadicPartition part;
  part.variant = variant;

  // Open support of phi(2^-q .) is (3/4 2^q, 8/3 2^q).
  int hi = int(std::ceil(std::log2(kmax / kInner))) + 1;
  while (std::ldexp(kInner, hi) >= kmax) --hi;
  part.q_max = hi;

  if (variant == BlockVariant::nonhomogeneous) {
    part.q_min = -1;
    part.q_max = std::max(hi, 0);
  } else {
    int lo = int(std::floor(std::log2(kmin * kInner / 2.0))) - 1;
    while (std::ldexp(2.0 * kOuter, lo) <= kmin) ++lo;
    part.q_min = lo;
  }
  return part;
}

double DyadicPartition::multiplier(int q, double xi) const noexcept {
  if (variant == BlockVariant::nonhomogeneous && q == -1) return lp_chi(xi);
  return lp_phi(std::ldexp(xi, -q));
}

SpectralField dyadic_block(const SpectralField& f, int q, BlockVariant variant) {
  const auto part = DyadicPartition::for_grid(f.grid(), variant);
  if (!part.resolvable(q)) throw OutOfRange("dyadic block index outside the resolvable range");
  SpectralField out = f.to_spectral();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= part.multiplier(q, out.grid().wavenumber_norm(i));
  return out;
}

SpectralField low_frequency_cutoff(const SpectralField& f, int q) {
  SpectralField out = f.to_spectral();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] *= q < 0 ? 0.0 : lp_chi(std::ldexp(out.grid().wavenumber_norm(i), -q));
  return out;
}

std::vector<double> block_norms(const SpectralField& f, double p, const DyadicPartition& part) {
  std::vector<double> out;
  for (int q = part.q_min; q <= part.q_max; ++q) {
    SpectralField b = f.to_spectral();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] *= part.multiplier(q, b.grid().wavenumber_norm(i));
    out.push_back(lp_norm(b, p));
  }
  return out;
}

double besov_norm(const SpectralField& f, const BesovIndex& idx) {
  const auto part = DyadicPartition::for_grid(f.grid(), idx.variant);
  const auto norms = block_norms(f, idx.p, part);
  std::vector<double> terms;
  for (std::size_t j = 0; j < norms.size(); ++j)
    terms.push_back(std::pow(2.0, (part.q_min + int(j)) * idx.s) * norms[j]);
  return lr_sum(terms, idx.r);
}

BonySplit bony_split(const SpectralField& u, const SpectralField& v) {
  const Grid& g = u.grid();
  if (!(g == v.grid())) throw Error("bony_split requires fields on one grid");
  const auto part = DyadicPartition::for_grid(g, BlockVariant::nonhomogeneous);
  const int nb = part.q_max - part.q_min + 1;

  std::vector<SpectralField> bu, bv;
  for (int q = part.q_min; q <= part.q_max; ++q) {
    bu.push_back(dyadic_block(u, q, BlockVariant::nonhomogeneous).to_physical());
    bv.push_back(dyadic_block(v, q, BlockVariant::nonhomogeneous).to_physical());
  }

  BonySplit out{SpectralField(g), SpectralField(g), SpectralField(g)};
  SpectralField su(g), sv(g);  // S_{q-1} u and S_{q-1} v, built incrementally
  for (int j = 0; j < nb; ++j) {
    // S_{q-1} = sum of blocks with index <= q-2, i.e. array positions <= j-2.
    if (j >= 2) {
      su += bu[j - 2];
      sv += bv[j - 2];
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      out.t_uv[i] += su[i] * bv[j][i];
      out.t_vu[i] += sv[i] * bu[j][i];
      cplx near = bv[j][i];
      if (j > 0) near += bv[j - 1][i];
      if (j + 1 < nb) near += bv[j + 1][i];
      out.r_uv[i] += bu[j][i] * near;
    }
  }
  return out;
}

SemigroupDecayReport check_semigroup_decay(const SpectralField& f, int q, double mu, double u_disp,
                                  const std::vector<double>& t_grid, double p) {
  if (t_grid.size() < 2) throw EmptySampleSet("decay fit needs at least two times");
  const SpectralField f0 = f.to_spectral();
  const double n0 = lp_norm(f0, p);
  if (n0 == 0.0) throw Error("decay check needs a nonzero block");

  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (double t : t_grid) {
    const double y = std::log(lp_norm(linear_propagator(f0, mu, u_disp, t), p) / n0);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
  }
  const double n = double(t_grid.size());
  const double slope = (n * sty - st * sy) / (n * stt - st * st);

  SemigroupDecayReport rep;
  rep.q = q;
  rep.fitted_rate = -slope;
  rep.fitted_c = rep.fitted_rate / (mu * std::ldexp(1.0, 2 * q));
  rep.pass = rep.fitted_c >= rep.bracket_lo && rep.fitted_c <= rep.bracket_hi;
  return rep;
}

double chemin_lerner_norm(const std::vector<SpectralField>& samples, double dt, double rho,
                          const BesovIndex& idx) {
  if (samples.empty()) return 0.0;
  const auto part = DyadicPartition::for_grid(samples.front().grid(), idx.variant);
  std::vector<std::vector<double>> series;  // [block][time]
  series.resize(part.q_max - part.q_min + 1);
  for (const auto& s : samples) {
    const auto norms = block_norms(s, idx.p, part);
    for (std::size_t j = 0; j < norms.size(); ++j) series[j].push_back(norms[j]);
  }
  std::vector<double> terms;
  for (std::size_t j = 0; j < series.size(); ++j)
    terms.push_back(std::pow(2.0, (part.q_min + int(j)) * idx.s) * time_norm(series[j], dt, rho));
  return lr_sum(terms, idx.r);
}

SmoothingReport check_smoothing_estimate(const SpectralField& f0, const SourceTerm& g, double mu,
                                         double u_disp, const SmoothingSetup& setup) {
  if (!(mu > 0.0)) throw ConfigError("smoothing estimate needs mu > 0");
  if (setup.rho1 < setup.rho) throw ConfigError("smoothing estimate needs rho1 >= rho");
  if (setup.time_steps < 1 || !(setup.T > 0.0)) throw ConfigError("bad smoothing time grid");

  const Grid& grid = f0.grid();
  const int nt = setup.time_steps;
  const double h = setup.T / nt;

  std::vector<SpectralField> gs;
  for (int n = 0; n <= nt; ++n)
    gs.push_back(g ? g(n * h).to_spectral() : SpectralField(grid, Representation::spectral));

  std::vector<cplx> E(grid.size()), W0(grid.size()), W1(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double k = grid.wavenumber_norm(i);
    const cplx z = -mu * cplx(1.0, u_disp) * (k * k) * h;
    const cplx p1 = etd::phi1(z), p2 = etd::phi2(z);
    E[i] = std::exp(z);
    W0[i] = h * (p1 - p2);
    W1[i] = h * p2;
  }

  std::vector<SpectralField> fs{f0.to_spectral()};
  for (int n = 0; n < nt; ++n) {
    SpectralField next = fs.back();
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = E[i] * next[i] + W0[i] * gs[n][i] + W1[i] * gs[n + 1][i];
    fs.push_back(std::move(next));
  }

  const auto& idx = setup.idx;
  auto shifted = [&](double ds) {
    BesovIndex b = idx;
    b.s += ds;
    return b;
  };
  const double two_over = [](double r) { return std::isinf(r) ? 0.0 : 2.0 / r; }(setup.rho1);
  const double two_over_rho = std::isinf(setup.rho) ? 0.0 : 2.0 / setup.rho;
  const double inv_rho = std::isinf(setup.rho) ? 0.0 : 1.0 / setup.rho;

  SmoothingReport rep;
  rep.lhs = std::pow(mu, inv_rho) * chemin_lerner_norm(fs, h, setup.rho1, shifted(two_over));
  rep.rhs = besov_norm(fs.front(), idx) +
            std::pow(mu, inv_rho - 1.0) *
                chemin_lerner_norm(gs, h, setup.rho, shifted(-2.0 + two_over_rho));
  if (rep.rhs == 0.0)
    rep.ratio = rep.lhs == 0.0 ? 0.0 : INFINITY;
  else
    rep.ratio = rep.lhs / rep.rhs;
  rep.ceiling = setup.ceiling;
  rep.pass = setup.ceiling <= 0.0 || rep.ratio <= setup.ceiling;
  return rep;
}

double smallness_monitor(const FieldState& state, std::optional<double> p) {
  const int N = state.grid().dim();
  const double pp = p.value_or(double(N));
  const BesovIndex idx{double(N) / pp - 1.0, pp, 1.0, BlockVariant::homogeneous};
  double sum = besov_norm(state.P, idx);
  for (const auto& o : state.Omega) sum += besov_norm(o, idx);
  return sum;
}

}  // namespace cglb
