#pragma once

// Perturbations pi = (rho, phi, h) of a plane wave in the polar chart
//   P = (r0 + rho) e^{i (theta0 x + phi)},   Omega = w0 + h
// on a one-dimensional periodic grid (xi = 1).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cglb/dispersion.hpp"
#include "cglb/model.hpp"
#include "cglb/solver.hpp"
#include "cglb/spectral.hpp"

namespace cglb {

struct PerturbationState {
  SpectralField rho;
  SpectralField phi;
  SpectralField h;
  double t = 0.0;

  const Grid& grid() const noexcept { return rho.grid(); }
  static PerturbationState zeros(const Grid& grid);
  PerturbationState to_spectral() const;
  PerturbationState to_physical() const;
};

struct RemainderBundle {
  SpectralField psi1;
  SpectralField psi2;
  SpectralField psi3;
};

// Throws AmplitudeVanishes unless min |P| > 0.1 r0.
PerturbationState polar_decompose(const SpectralField& P, const SpectralField& Omega,
                                  const PlaneWave& wave);
FieldState polar_compose(const PerturbationState& pi, const PlaneWave& wave);

enum class RemainderForm {
  printed,  // the literal psi expressions, term by term
  exact,    // polar right-hand side minus the exact linear operator
};

// Physical-space remainders. Products are dealiased.
RemainderBundle remainder(const PerturbationState& pi, const SystemParams& params,
                          const PlaneWave& wave, RemainderForm form = RemainderForm::printed);

// Full polar right-hand side (rho_t, phi_t, h_t), spectral and dealiased.
RemainderBundle polar_rhs(const PerturbationState& pi, const SystemParams& params,
                          const PlaneWave& wave);

// L2 norm over the three components (grid-mean normalisation).
double bundle_norm(const RemainderBundle& b);

struct PolarConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  int record_every = 1;
  std::optional<double> k_max;
  double chart_fraction = 0.1;  // ChartBreakdown once min(r0 + rho) <= chart_fraction r0
  double blowup_threshold = 1e6;
  bool dealias = true;
};

using PolarObserver = std::function<void(const PerturbationState&)>;

struct PolarTrajectory {
  std::vector<double> times;
  std::vector<double> l2;  // sqrt of the summed squared L2 norms
  PerturbationState final_state;
};

// Exponential RK2 with the exact linear operator integrated per Fourier mode
// (3x3 matrix exponential) and the exact remainder treated explicitly.
PolarTrajectory evolve_polar(const PerturbationState& pi0, const SystemParams& params,
                             const PlaneWave& wave, const PolarConfig& config,
                             const std::vector<PolarObserver>& observers = {});

// Complex amplitude of pi-hat at grid mode j along the eigenvector of branch
// `branch` (sorted as in eigenvalues_at_k), via the left eigenvectors.
cplx modal_amplitude(const PerturbationState& pi, const LinearizationMatrices& M, int mode,
                     int branch);

struct RateComparison {
  int mode = 0;
  int branch = 0;
  double k = 0.0;
  double measured = 0.0;   // real growth rate
  double predicted = 0.0;  // Re lambda
  double rel_err = 0.0;
};

// Seeds the given grid modes with amplitude amp along every eigenvector and
// measures the per-branch rates over [0, min(t_window, 5 / |Re lambda|)].
std::vector<RateComparison> linear_rate_check(const SystemParams& params, const PlaneWave& wave,
                                              const Grid& grid, const std::vector<int>& modes,
                                              double amp, double t_window, double dt,
                                              unsigned seed);

struct OrderRow {
  double eps = 0.0;
  double norm = 0.0;
  double ratio_quadratic = 0.0;  // |psi(eps pi)| / eps^2
  double ratio_linear = 0.0;     // |psi(eps pi)| / eps
};

struct OrderReport {
  std::vector<OrderRow> rows;
  double quadratic_spread = 0.0;  // (max - min) / max of the quadratic ratios
  double min_linear_ratio = 0.0;
  bool quadratic = false;  // spread < 10 %
};

OrderReport quadratic_order_check(const PerturbationState& direction, const SystemParams& params,
                                  const PlaneWave& wave, const std::vector<double>& eps_list,
                                  RemainderForm form = RemainderForm::printed);

// theta0 = c0 = 0, v = 0 and r0 = 1: the slice on which psi has no linear part.
bool quadratic_slice(const SystemParams& params, const PlaneWave& wave, double tol = 1e-12);

// Removes the k = 0 Fourier mode of each component.
PerturbationState project_out_mean(const PerturbationState& pi);

// sqrt(sum of squared H^s norms of the components)
double perturbation_norm(const PerturbationState& pi, double s);

struct DecayReport {
  std::string slice;
  double sigma_fit = 0.0;       // exponential rate from a log-linear fit
  double spectral_gap = 0.0;    // max over nonzero grid modes of Re lambda
  double rel_err = 0.0;
  double alpha_fit = 0.0;       // exponent of a log-log fit against 1 + t
  double alpha_reference = 0.0; // -(3/2 + s)/2
  bool degenerate = false;
  bool pass = false;
  std::vector<double> times;
  std::vector<double> norms;
};

DecayReport decay_experiment(const SystemParams& params, const PlaneWave& wave,
                             const PerturbationState& pi0, double s, const PolarConfig& config);

struct GrowthReport {
  std::string slice;
  double k_seed = 0.0;
  double rate = 0.0;
  double reference_rate = 0.0;
  double rel_err = 0.0;
  std::optional<double> omega_plus;
  bool stopped_early = false;  // the run ended in StepUnstable or ChartBreakdown
  bool pass = false;
  std::vector<double> times;
  std::vector<double> amplitudes;
};

// Seeds grid mode `mode` (k = 2 pi mode / L) along the most unstable eigenvector.
GrowthReport instability_experiment(const SystemParams& params, const PlaneWave& wave,
                                    const Grid& grid, int mode, double amp,
                                    const PolarConfig& config, double tolerance = 0.05);

struct LipschitzReport {
  double derivative_gap = 0.0;  // |psi'(pi1) R - psi'(pi2) R|_{H^-1}
  double distance = 0.0;        // |pi1 - pi2|_{H^1}
  double ratio = 0.0;
};

// Central differences of psi along R at pi1 and pi2.
LipschitzReport lipschitz_spot_check(const PerturbationState& pi1, const PerturbationState& pi2,
                                     const PerturbationState& R, const SystemParams& params,
                                     const PlaneWave& wave, double delta = 1e-5);

}  // namespace cglb
