#pragma once

// Pseudo-spectral time integration of
//   P_t + Omega.grad P - (1 + i u) Lap P = xi P - (1 + i v)|P|^2 P - r1 P div Omega + f1
//   Omega_t + Omega.grad Omega - m Lap Omega + kappa grad |P|^2 = f2
// on a periodic box. The constant parts of the Laplacian terms are integrated
// exactly; everything else is explicit.

#include <functional>
#include <optional>
#include <vector>

#include "cglb/model.hpp"
#include "cglb/spectral.hpp"

namespace cglb {

struct FieldState {
  SpectralField P;                   // complex amplitude
  std::vector<SpectralField> Omega;  // one real component per axis
  double t = 0.0;

  const Grid& grid() const noexcept { return P.grid(); }

  static FieldState zeros(const Grid& grid);
  // Plane wave r0 e^{i theta0 x}, Omega = (w0, 0).
  static FieldState plane_wave(const Grid& grid, const PlaneWave& wave);

  FieldState to_spectral() const;
  FieldState to_physical() const;
};

struct Forcing {
  std::function<SpectralField(double)> f1;               // may be empty
  std::function<std::vector<SpectralField>(double)> f2;  // may be empty
  bool zero() const noexcept { return !f1 && !f2; }
};

enum class Scheme { etd_rk2, imex_bdf2 };

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::etd_rk2;
  bool dealias = true;
  int diagnostics_every = 1;      // steps between recorded diagnostics
  double blowup_threshold = 1e6;  // max |P| or |Omega|
  std::optional<double> k_max;    // radial cutoff applied after every step
  double cfl_limit = 1.0;         // dt max|Omega| / dx
  double sobolev_s = 1.0;         // order of the Hs diagnostics
  std::optional<double> besov_p;  // exponent of the smallness proxy (default: dimension)
};

// exp(-mu (1 + i u_disp)|k|^2 dt) applied mode by mode; f must be spectral.
SpectralField linear_propagator(const SpectralField& f, double mu, double u_disp, double dt);

struct NonlinearRhs {
  SpectralField dP;
  std::vector<SpectralField> dOmega;
};

// Everything except the constant-coefficient diffusion, in spectral form:
//   dP     = -Omega.grad P + xi P - (1 + i v)|P|^2 P - r1 P div Omega + i (u(|P|) - u(0)) Lap P
//   dOmega = -Omega.grad Omega - kappa grad |P|^2
// Coefficients are evaluated at |P| pointwise. Products are dealiased when requested.
NonlinearRhs rhs_nonlinear(const FieldState& state, const SystemParams& params, bool dealias = true);

struct Diagnostics {
  double t = 0.0;
  double L2_P = 0.0;
  double L2_Omega = 0.0;
  double Hs_P = 0.0;
  double Hs_Omega = 0.0;
  double besov_proxy = 0.0;
};

Diagnostics diagnose(const FieldState& state, const SolverConfig& config);

class Integrator {
public:
  Integrator(const Grid& grid, const SystemParams& params, Forcing forcing, SolverConfig config);

  // One step of size config.dt. Throws StepUnstable on blow-up or CFL violation.
  FieldState step(const FieldState& state);
  void reset() noexcept { history_.reset(); }

  const SolverConfig& config() const noexcept { return config_; }

private:
  struct Stage {
    std::vector<SpectralField> u;  // P then Omega components, spectral
    std::vector<SpectralField> n;  // nonlinear terms at u
  };

  std::vector<SpectralField> pack(const FieldState& s) const;
  FieldState unpack(std::vector<SpectralField> u, double t) const;
  std::vector<SpectralField> nonlinear(const std::vector<SpectralField>& u, double t) const;
  void finish(std::vector<SpectralField>& u) const;
  FieldState etd_step(const FieldState& state, Stage* out);
  FieldState bdf2_step(const FieldState& state);

  Grid grid_;
  SystemParams params_;
  Forcing forcing_;
  SolverConfig config_;
  // per-mode coefficients: index 0 for P, 1 for Omega
  std::vector<cplx> expl_[2], phi1_[2], phi2_[2], bdf_[2];
  std::vector<double> keep_;  // 1 inside the k_max cutoff, 0 outside
  std::optional<Stage> history_;
};

// Single step with a fresh integrator.
FieldState step(const FieldState& state, const SystemParams& params, const Forcing& forcing,
                const SolverConfig& config);

using Observer = std::function<void(const FieldState&, const Diagnostics&)>;

struct Trajectory {
  std::vector<Diagnostics> records;
  FieldState final_state;
  long steps = 0;
};

// Steps to t_end (dt shrinks slightly so an integer number of steps lands on it).
// Records diagnostics at t0, every diagnostics_every steps, and at t_end.
Trajectory evolve(const FieldState& state0, const SystemParams& params, const Forcing& forcing,
                  const SolverConfig& config, const std::vector<Observer>& observers = {});

}  // namespace cglb
