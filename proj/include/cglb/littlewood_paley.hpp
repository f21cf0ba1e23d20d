#pragma once

// Discrete Littlewood-Paley theory on the periodic grid: dyadic blocks,
// Besov norms, Bony's paraproduct split and numerical checks of the heat
// semigroup estimates.
//
// Profiles: chi = 1 on |xi| <= 3/4, chi = 0 on |xi| >= 4/3, smooth between;
// phi(xi) = chi(xi/2) - chi(xi) lives in 3/4 <= |xi| <= 8/3. The sums
// chi + sum_{q>=0} phi(2^-q .) and sum_q phi(2^-q .) telescope to one.

#include <functional>
#include <optional>
#include <vector>

#include "cglb/spectral.hpp"

namespace cglb {

struct FieldState;

enum class BlockVariant { homogeneous, nonhomogeneous };

double lp_chi(double xi) noexcept;
double lp_phi(double xi) noexcept;

struct DyadicPartition {
  BlockVariant variant = BlockVariant::homogeneous;
  int q_min = 0;  // -1 is the low-frequency block chi in the nonhomogeneous variant
  int q_max = 0;

  // Every q whose annulus meets a nonzero wavenumber of the grid.
  static DyadicPartition for_grid(const Grid& grid, BlockVariant variant);

  // Multiplier of block q at |xi|.
  double multiplier(int q, double xi) const noexcept;
  bool resolvable(int q) const noexcept { return q >= q_min && q <= q_max; }
};

// Delta_q f. Throws OutOfRange when q is outside the grid's resolvable window.
SpectralField dyadic_block(const SpectralField& f, int q,
                           BlockVariant variant = BlockVariant::homogeneous);

// S_q f = sum_{j <= q-1} Delta_j f (nonhomogeneous), i.e. chi(2^-q D) f; zero for q < 0.
SpectralField low_frequency_cutoff(const SpectralField& f, int q);

struct BesovIndex {
  double s = 0.0;
  double p = 2.0;
  double r = 2.0;
  BlockVariant variant = BlockVariant::homogeneous;
};

// l^r over resolvable q of 2^{qs} |Delta_q f|_{L^p}; the mean mode never
// enters the homogeneous norm.
double besov_norm(const SpectralField& f, const BesovIndex& idx);

// Per-block L^p norms, indexed from q_min.
std::vector<double> block_norms(const SpectralField& f, double p, const DyadicPartition& part);

struct BonySplit {
  SpectralField t_uv;  // sum_q S_{q-1} u Delta_q v
  SpectralField t_vu;
  SpectralField r_uv;  // sum_q Delta_q u (Delta_{q-1} + Delta_q + Delta_{q+1}) v
};

// Nonhomogeneous blocks; products taken pointwise on the grid, results physical.
BonySplit bony_split(const SpectralField& u, const SpectralField& v);

struct SemigroupDecayReport {
  int q = 0;
  double fitted_rate = 0.0;  // c 2^{2q} mu from a log-linear fit
  double fitted_c = 0.0;
  double bracket_lo = 9.0 / 16.0;
  double bracket_hi = 64.0 / 9.0;
  bool pass = false;
};

// Evolves the block f (already supported in the q-th annulus) with
// exp(mu (1 + i u_disp) t Lap) and fits |.|_{L^p} ratios on t_grid.
SemigroupDecayReport check_semigroup_decay(const SpectralField& f, int q, double mu, double u_disp,
                                  const std::vector<double>& t_grid, double p = 2.0);

using SourceTerm = std::function<SpectralField(double)>;

struct SmoothingSetup {
  BesovIndex idx;              // sigma, p, r (homogeneous)
  double rho = 1.0;            // time exponent of the source norm
  double rho1 = 1.0;           // time exponent of the solution norm, rho1 >= rho
  double T = 1.0;
  int time_steps = 200;
  double ceiling = 0.0;        // calibrated bound on lhs/rhs; 0 disables the check
};

struct SmoothingReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // 0 when both sides vanish
  double ceiling = 0.0;
  bool calibrated_ceiling = true;
  bool pass = true;
};

// Solves f_t - mu(1 + i u_disp) Lap f = g by the exact propagator plus a
// Duhamel quadrature that is exact for g linear in time, then evaluates
//   lhs = mu^{1/rho} |f|_{Ltilde^{rho1}_T(Bdot^{sigma + 2/rho1}_{p,r})}
//   rhs = |f0|_{Bdot^sigma_{p,r}} + mu^{1/rho - 1} |g|_{Ltilde^rho_T(Bdot^{sigma - 2 + 2/rho}_{p,r})}
// with trapezoidal time norms (max for an infinite exponent).
SmoothingReport check_smoothing_estimate(const SpectralField& f0, const SourceTerm& g, double mu,
                                         double u_disp, const SmoothingSetup& setup);

// Ltilde^rho_T(Bdot^s_{p,r}) of a sampled trajectory on a uniform time grid.
double chemin_lerner_norm(const std::vector<SpectralField>& samples, double dt, double rho,
                          const BesovIndex& idx);

// Sum over the components of (P, Omega) of the Bdot^{N/p - 1}_{p,1} norm, N the grid dimension.
double smallness_monitor(const FieldState& state, std::optional<double> p = std::nullopt);

}  // namespace cglb
