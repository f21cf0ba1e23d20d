#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "cglb/cli.hpp"
#include "cglb/dispersion.hpp"
#include "cglb/errors.hpp"
#include "cglb/littlewood_paley.hpp"
#include "cglb/model.hpp"
#include "cglb/perturbation.hpp"
#include "cglb/solver.hpp"

namespace cglb::cli {

namespace {

using json = nlohmann::json;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct CheckFailed {
  json report;
};

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << j.dump(2) << "\n";
}

json with_schema(json j, const std::string& schema) {
  j["schema"] = schema;
  j["version"] = kSchemaVersion;
  return j;
}

// ---- config sections ----

SystemParams read_model(const Config& c) {
  SystemParams p;
  p.u = {c.get_double("model.u0", 0.0), c.get_double("model.u1", 0.0)};
  p.v = {c.get_double("model.v0", 0.0), c.get_double("model.v1", 0.0)};
  p.xi = c.get_double("model.xi", 1.0);
  p.m = c.get_double("model.m", 1.0);
  p.kappa = {c.get_double("model.kappa0", 0.0), c.get_double("model.kappa1", 0.0)};
  p.s1 = {c.get_double("model.s1_0", 0.0), c.get_double("model.s1_1", 0.0)};
  p.s2 = {c.get_double("model.s2_0", 0.0), c.get_double("model.s2_1", 0.0)};
  return p;
}

// [wave] mode = explicit takes r0/theta0/w0 as given; mode = solve picks a root of the constraints.
struct WaveSpec {
  std::string mode;
  PlaneWave explicit_wave;
  BranchSelector branch;

  PlaneWave resolve(const SystemParams& p) const {
    if (mode == "explicit") return explicit_wave;
    return solve_plane_wave_or_default(p, branch);
  }
};

WaveSpec read_wave(const Config& c) {
  WaveSpec w;
  w.mode = c.get_string("wave.mode", "explicit");
  if (w.mode != "explicit" && w.mode != "solve")
    throw ConfigError("wave.mode must be 'explicit' or 'solve'");
  w.explicit_wave = {c.get_double("wave.r0", 1.0), c.get_double("wave.theta0", 0.0),
                     c.get_double("wave.w0", 0.0)};
  w.branch.root = std::size_t(c.get_int("wave.root", 0));
  w.branch.theta_sign = int(c.get_int("wave.theta_sign", 1));
  w.branch.w0 = w.explicit_wave.w0;
  const std::string drift = c.get_string("wave.drift", "free");
  if (drift == "free")
    w.branch.drift = DriftMode::free;
  else if (drift == "compatible")
    w.branch.drift = DriftMode::compatible;
  else
    throw ConfigError("wave.drift must be 'free' or 'compatible'");
  w.branch.family_r0 = c.get_optional("wave.family_r0");
  return w;
}

Grid read_grid(const Config& c, int dim_default, int n_default, double length_default = kTwoPi) {
  const int dim = int(c.get_int("grid.dim", dim_default));
  const int n = int(c.get_int("grid.n", n_default));
  const double length = c.get_double("grid.length", length_default);
  try {
    return Grid(dim, n, length);
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid grid: ") + e.what());
  }
}

// Real field with standard normal coefficients on modes 1..modes, scaled to max |f| = amp.
SpectralField random_real_field(const Grid& g, int modes, double amp, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField f(g, Representation::spectral);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto md = g.mode(i);
    const int a = std::abs(md[0]), b = g.dim() == 2 ? std::abs(md[1]) : 0;
    if (a > modes || b > modes || (a == 0 && b == 0) || g.on_nyquist(i, 0) ||
        (g.dim() == 2 && g.on_nyquist(i, 1)))
      continue;
    const double re = normal(rng), im = normal(rng);
    f[i] = cplx(re, im);
  }
  auto phys = real_part(f.to_physical());
  const double mx = lp_norm(phys, INFINITY);
  if (mx > 0.0) phys *= cplx(amp / mx);
  return phys.to_spectral();
}

// Unit-modulus coefficients with random phases on modes 1..modes, real in physical space.
// Every block then carries the same spectral weight, so block-to-block comparisons
// see only the multiplier.
SpectralField random_phase_field(const Grid& g, int modes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  SpectralField f(g, Representation::spectral);
  for (int j = 1; j <= modes && j < g.n() / 2; ++j) {
    const cplx c = std::polar(1.0, angle(rng));
    f[std::size_t(j)] = c;
    f[std::size_t(g.n() - j)] = std::conj(c);
  }
  return f;
}

CouplingMode parse_coupling(const std::string& s) {
  if (s == "kappa_zero") return CouplingMode::kappa_zero;
  if (s == "paper_remark32") return CouplingMode::paper_remark32;
  if (s == "rederived_gradient") return CouplingMode::rederived_gradient;
  throw ConfigError("dispersion.coupling must be exact, kappa_zero, paper_remark32 or rederived_gradient");
}

struct DispersionSpec {
  std::string coupling;
  EigenRoute route = EigenRoute::structured;
  std::vector<double> ks;
  double tol = 1e-10;

  LinearizationMatrices matrices(const SystemParams& p, const PlaneWave& w) const {
    if (coupling == "exact") return exact_linearization(p, w);
    return build_matrices(p, w, parse_coupling(coupling));
  }
};

DispersionSpec read_dispersion(const Config& c) {
  DispersionSpec d;
  d.coupling = c.get_string("dispersion.coupling", "rederived_gradient");
  if (d.coupling != "exact") parse_coupling(d.coupling);
  const std::string route = c.get_string("dispersion.route", "structured");
  if (route == "structured")
    d.route = EigenRoute::structured;
  else if (route == "companion")
    d.route = EigenRoute::companion;
  else
    throw ConfigError("dispersion.route must be 'structured' or 'companion'");
  const long samples = c.get_int("dispersion.samples", 1024);
  const double kmax = c.get_double("dispersion.k_max", 16.0);
  const auto listed = c.get_list("dispersion.k", {});
  d.tol = c.get_double("dispersion.tol", 1e-10);
  if (!listed.empty()) {
    d.ks = listed;
  } else {
    if (samples < 2 || !(kmax > 0.0)) throw ConfigError("dispersion needs samples >= 2 and k_max > 0");
    d.ks = default_k_grid(int(samples), kmax);
  }
  return d;
}

PolarConfig read_polar(const Config& c, const std::string& section, double dt, double t_end) {
  PolarConfig pc;
  pc.dt = c.get_double(section + ".dt", dt);
  pc.t_end = c.get_double(section + ".t_end", t_end);
  pc.record_every = int(c.get_int(section + ".record_every", 1));
  pc.k_max = c.get_optional(section + ".k_max");
  if (!(pc.dt > 0.0) || !(pc.t_end >= 0.0) || pc.record_every < 1)
    throw ConfigError(section + ": dt > 0, t_end >= 0 and record_every >= 1 are required");
  return pc;
}

json classification_json(const Classification& cl) {
  return {{"verdict", to_string(cl.verdict)},
          {"C", optional_number(cl.C)},
          {"omega_plus", optional_number(cl.omega_plus)},
          {"sup_real_nonzero_k", number(cl.sup_real_nonzero_k)},
          {"k_at_max", number(cl.k_at_max)},
          {"unstable_band", cl.unstable_band}};
}

// ---- commands ----

int cmd_simulate(const RunOptions& o, const Config& c, std::ostream& out) {
  const auto params = read_model(c);
  const auto wave_spec = read_wave(c);
  const Grid grid = read_grid(c, 1, 128);
  const std::string initial = c.get_string("initial.kind", "zero");
  const double amp = c.get_double("initial.amp", 1e-3);
  const int modes = int(c.get_int("initial.modes", 4));

  SolverConfig sc;
  sc.dt = c.get_double("solver.dt", 1e-3);
  sc.t_end = c.get_double("solver.t_end", 1.0);
  const std::string scheme = c.get_string("solver.scheme", "etd_rk2");
  sc.dealias = c.get_bool("solver.dealias", true);
  sc.diagnostics_every = int(c.get_int("solver.diagnostics_every", 10));
  sc.k_max = c.get_optional("solver.k_max");
  sc.sobolev_s = c.get_double("solver.s", 1.0);
  sc.besov_p = c.get_optional("solver.besov_p");
  sc.blowup_threshold = c.get_double("solver.blowup_threshold", 1e6);
  c.reject_unread();

  if (scheme == "etd_rk2")
    sc.scheme = Scheme::etd_rk2;
  else if (scheme == "imex_bdf2")
    sc.scheme = Scheme::imex_bdf2;
  else
    throw ConfigError("solver.scheme must be etd_rk2 or imex_bdf2");

  std::mt19937_64 rng(o.seed);
  FieldState s0;
  if (initial == "zero") {
    s0 = FieldState::zeros(grid);
  } else if (initial == "plane_wave" || initial == "perturbed") {
    s0 = FieldState::plane_wave(grid, wave_spec.resolve(params));
    if (initial == "perturbed") {
      s0.P += random_real_field(grid, modes, amp, rng);
      for (auto& om : s0.Omega) om += random_real_field(grid, modes, amp, rng);
    }
  } else if (initial == "random") {
    s0 = FieldState::zeros(grid);
    s0.P = random_real_field(grid, modes, amp, rng) +
           cplx(0.0, 1.0) * random_real_field(grid, modes, amp, rng);
    for (auto& om : s0.Omega) om = random_real_field(grid, modes, amp, rng);
  } else {
    throw ConfigError("initial.kind must be zero, plane_wave, perturbed or random");
  }

  const auto traj = evolve(s0, params, Forcing{}, sc);
  CsvTable csv("simulate", {"t", "L2_P", "L2_Omega", "Hs_P", "Hs_Omega", "besov_proxy"});
  for (const auto& d : traj.records)
    csv.add_row(std::vector<double>{d.t, d.L2_P, d.L2_Omega, d.Hs_P, d.Hs_Omega, d.besov_proxy});
  csv.write(o.out_dir / "simulate.csv");
  write_json(o.out_dir / "simulate.json",
             with_schema({{"steps", traj.steps}, {"records", traj.records.size()},
                          {"t_final", number(traj.final_state.t)}, {"seed", o.seed}},
                         "simulate"));
  out << csv.rows() << " diagnostic rows written\n";
  return kExitOk;
}

int cmd_dispersion(const RunOptions& o, const Config& c, std::ostream& out) {
  const auto params = read_model(c);
  const auto wave = read_wave(c).resolve(params);
  const auto spec = read_dispersion(c);
  c.reject_unread();

  const auto M = spec.matrices(params, wave);
  const auto samples = sample_spectrum(M, spec.ks, spec.route);
  CsvTable csv("dispersion", {"k", "re1", "im1", "re2", "im2", "re3", "im3"});
  for (const auto& s : samples)
    csv.add_row(std::vector<double>{s.k, s.lambdas[0].real(), s.lambdas[0].imag(),
                                    s.lambdas[1].real(), s.lambdas[1].imag(), s.lambdas[2].real(),
                                    s.lambdas[2].imag()});
  csv.write(o.out_dir / "dispersion.csv");
  const auto cl = classify_spectrum(samples, spec.tol);
  json j = classification_json(cl);
  j["wave"] = {{"r0", wave.r0}, {"theta0", wave.theta0}, {"w0", wave.w0}};
  j["coupling"] = spec.coupling;
  write_json(o.out_dir / "dispersion.json", with_schema(j, "dispersion"));
  out << "verdict: " << to_string(cl.verdict) << "\n";
  return kExitOk;
}

int cmd_stability_scan(const RunOptions& o, const Config& c, std::ostream& out) {
  const auto base = read_model(c);
  const auto wave_spec = read_wave(c);
  const auto spec = read_dispersion(c);
  const auto ms = c.get_list("scan.m", {base.m});
  const auto u0s = c.get_list("scan.u0", {base.u.c0});
  const auto v0s = c.get_list("scan.v0", {base.v.c0});
  const auto kappas = c.get_list("scan.kappa0", {base.kappa.c0});
  const auto s1s = c.get_list("scan.s1", {base.s1.c0});
  const auto s2s = c.get_list("scan.s2", {base.s2.c0});
  const auto w0s = c.get_list("scan.w0", {wave_spec.explicit_wave.w0});
  c.reject_unread();

  struct Job {
    SystemParams p;
    double w0;
  };
  std::vector<Job> jobs;
  for (double m : ms)
    for (double u0 : u0s)
      for (double v0 : v0s)
        for (double k0 : kappas)
          for (double s1 : s1s)
            for (double s2 : s2s)
              for (double w0 : w0s) {
                SystemParams p = base;
                p.m = m;
                p.u.c0 = u0;
                p.v.c0 = v0;
                p.kappa.c0 = k0;
                p.s1.c0 = s1;
                p.s2.c0 = s2;
                jobs.push_back({p, w0});
              }

  struct Row {
    std::string verdict;
    PlaneWave wave;
    double sup = NAN;
    std::optional<double> C;
  };
  std::vector<Row> rows(jobs.size());
  auto work = [&](std::size_t i) {
    const auto& job = jobs[i];
    WaveSpec ws = wave_spec;
    ws.explicit_wave.w0 = job.w0;
    ws.branch.w0 = job.w0;
    Row r;
    try {
      r.wave = ws.resolve(job.p);
      const auto cl = classify_spectrum(sample_spectrum(spec.matrices(job.p, r.wave), spec.ks, spec.route),
                                        spec.tol);
      r.verdict = to_string(cl.verdict);
      r.sup = cl.sup_real_nonzero_k;
      r.C = cl.C;
    } catch (const NoRealSolution&) {
      r.verdict = "no_plane_wave";
    } catch (const AmplitudeVanishes&) {
      r.verdict = "amplitude_vanishes";
    }
    rows[i] = std::move(r);
  };

  // Jobs write only their own slot, so the result does not depend on the thread count.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) work(i);
  };
  const int nthreads = std::max(1, std::min<int>(o.threads, int(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  CsvTable csv("stability-scan", {"index", "m", "u0", "v0", "kappa0", "s1", "s2", "w0", "r0",
                                  "theta0", "verdict", "sup_re", "C"});
  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& p = jobs[i].p;
    const auto& r = rows[i];
    ++counts[r.verdict];
    csv.add_row(std::vector<std::string>{
        std::to_string(i), format_number(p.m), format_number(p.u.c0), format_number(p.v.c0),
        format_number(p.kappa.c0), format_number(p.s1.c0), format_number(p.s2.c0),
        format_number(jobs[i].w0), format_number(r.wave.r0), format_number(r.wave.theta0), r.verdict,
        format_number(r.sup), r.C ? format_number(*r.C) : "nan"});
  }
  csv.write(o.out_dir / "stability_scan.csv");
  write_json(o.out_dir / "stability_scan.json",
             with_schema({{"jobs", jobs.size()}, {"verdicts", counts}}, "stability-scan"));
  out << jobs.size() << " parameter points scanned\n";
  return kExitOk;
}

PerturbationState random_perturbation(const Grid& g, int modes, double amp, std::mt19937_64& rng) {
  return {random_real_field(g, modes, amp, rng), random_real_field(g, modes, amp, rng),
          random_real_field(g, modes, amp, rng), 0.0};
}

int cmd_decay_fit(const RunOptions& o, const Config& c, std::ostream& out) {
  const auto params = read_model(c);
  const auto wave = read_wave(c).resolve(params);
  const Grid grid = read_grid(c, 1, 64);
  const double s = c.get_double("decay.s", 1.0);
  const double amp = c.get_double("decay.amp", 1e-3);
  const int modes = int(c.get_int("decay.modes", 3));
  const auto pc = read_polar(c, "decay", 1e-2, 25.0);
  c.reject_unread();

  std::mt19937_64 rng(o.seed);
  const auto pi0 = random_perturbation(grid, modes, amp, rng);
  const auto rep = decay_experiment(params, wave, pi0, s, pc);

  CsvTable csv("decay-fit", {"t", "norm"});
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    csv.add_row(std::vector<double>{rep.times[i], rep.norms[i]});
  csv.write(o.out_dir / "decay.csv");
  const json j = {{"slice", rep.slice},
                  {"fit_type", "exponential"},
                  {"rate", number(rep.sigma_fit)},
                  {"reference_rate", number(rep.spectral_gap)},
                  {"rel_err", number(rep.rel_err)},
                  {"pass", rep.pass},
                  {"degenerate", rep.degenerate},
                  {"alpha_fit", number(rep.alpha_fit)},
                  {"alpha_reference", number(rep.alpha_reference)}};
  write_json(o.out_dir / "decay.json", with_schema(j, "decay-fit"));
  out << "decay rate " << format_number(rep.sigma_fit) << " vs gap "
      << format_number(rep.spectral_gap) << "\n";
  if (!rep.pass) throw CheckFailed{j};
  return kExitOk;
}

int cmd_instability(const RunOptions& o, const Config& c, std::ostream& out) {
  const auto params = read_model(c);
  const auto wave = read_wave(c).resolve(params);
  const Grid grid = read_grid(c, 1, 256);
  const int mode = int(c.get_int("instability.mode", 2));
  const double amp = c.get_double("instability.amp", 1e-6);
  const double tol = c.get_double("instability.tolerance", 0.05);
  const auto pc = read_polar(c, "instability", 1e-3, 2.5);
  c.reject_unread();

  const auto rep = instability_experiment(params, wave, grid, mode, amp, pc, tol);
  CsvTable csv("instability", {"t", "amplitude"});
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    csv.add_row(std::vector<double>{rep.times[i], rep.amplitudes[i]});
  csv.write(o.out_dir / "instability.csv");
  const json j = {{"slice", rep.slice},
                  {"fit_type", "exponential"},
                  {"k_seed", number(rep.k_seed)},
                  {"rate", number(rep.rate)},
                  {"reference_rate", number(rep.reference_rate)},
                  {"rel_err", number(rep.rel_err)},
                  {"omega_plus", optional_number(rep.omega_plus)},
                  {"stopped_early", rep.stopped_early},
                  {"pass", rep.pass}};
  write_json(o.out_dir / "instability.json", with_schema(j, "instability"));
  out << "growth rate " << format_number(rep.rate) << " vs " << format_number(rep.reference_rate)
      << "\n";
  if (!rep.pass) throw CheckFailed{j};
  return kExitOk;
}

int cmd_besov_check(const RunOptions& o, const Config& c, std::ostream& out) {
  // a long box puts many modes in every dyadic block
  const Grid grid = read_grid(c, 1, 1024, 8.0 * kTwoPi);
  const int trials = int(c.get_int("besov.trials", 10));
  const double mu = c.get_double("besov.mu", 1.0);
  const double u_disp = c.get_double("besov.u_disp", 0.0);
  const auto qs = c.get_list("besov.q", {1, 2, 3, 4});
  c.reject_unread();

  std::mt19937_64 rng(o.seed);
  const auto part = DyadicPartition::for_grid(grid, BlockVariant::homogeneous);

  double unity_err = 0.0;
  for (int j = 1; j <= 4000; ++j) {
    const double xi = grid.base_wavenumber() * j * 0.01;
    if (xi > grid.max_wavenumber_norm()) break;
    double sum = 0.0;
    for (int q = -60; q <= 60; ++q) sum += lp_phi(std::ldexp(xi, -q));
    unity_err = std::max(unity_err, std::abs(sum - 1.0));
  }

  double bony_err = 0.0, ratio_lo = INFINITY, ratio_hi = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto f = random_real_field(grid, grid.dealias_cutoff(), 1.0, rng);
    const auto g = random_real_field(grid, grid.dealias_cutoff(), 1.0, rng);
    const auto split = bony_split(f, g);
    const auto prod = pointwise_product(f, g);
    const auto recon = split.t_uv + split.t_vu + split.r_uv - prod;
    bony_err = std::max(bony_err, lp_norm(recon, INFINITY) / std::max(lp_norm(prod, INFINITY), 1e-300));

    const auto f0 = f.to_spectral();
    auto fm = f0;
    fm[0] = 0.0;
    double sq = 0.0;
    for (double b : block_norms(fm, 2.0, part)) sq += b * b;
    const double ratio = sq / std::pow(lp_norm(fm, 2.0), 2);
    ratio_lo = std::min(ratio_lo, ratio);
    ratio_hi = std::max(ratio_hi, ratio);
  }

  CsvTable csv("besov-check", {"q", "fitted_rate", "fitted_c", "pass"});
  bool decay_ok = true;
  std::vector<double> cs;
  for (double qd : qs) {
    const int q = int(qd);
    if (!part.resolvable(q)) throw ConfigError("besov.q contains an unresolvable block");
    if (grid.dim() != 1) throw ConfigError("besov-check needs a 1D grid");
    const auto f = random_phase_field(grid, grid.dealias_cutoff(), rng);
    const auto block = dyadic_block(f, q, BlockVariant::homogeneous);
    const double scale = mu * std::ldexp(1.0, 2 * q);
    std::vector<double> t_grid;
    for (int i = 0; i <= 20; ++i) t_grid.push_back(0.05 * i / scale);
    const auto rep = check_semigroup_decay(block, q, mu, u_disp, t_grid, 2.0);
    decay_ok = decay_ok && rep.pass;
    cs.push_back(rep.fitted_c);
    csv.add_row(std::vector<double>{double(q), rep.fitted_rate, rep.fitted_c, rep.pass ? 1.0 : 0.0});
  }
  double scaling_spread = 0.0;
  if (!cs.empty()) {
    const auto [lo, hi] = std::minmax_element(cs.begin(), cs.end());
    scaling_spread = (*hi - *lo) / *hi;
  }
  csv.write(o.out_dir / "besov.csv");

  const bool pass = unity_err <= 1e-12 && bony_err <= 1e-10 && ratio_lo >= 1.0 / 3.0 &&
                    ratio_hi <= 1.0 + 1e-12 && decay_ok && scaling_spread <= 0.05;
  const json j = {{"partition_of_unity_error", number(unity_err)},
                  {"bony_error", number(bony_err)},
                  {"quadratic_ratio_min", number(ratio_lo)},
                  {"quadratic_ratio_max", number(ratio_hi)},
                  {"decay_constants_in_bracket", decay_ok},
                  {"scaling_spread", number(scaling_spread)},
                  {"pass", pass}};
  write_json(o.out_dir / "besov.json", with_schema(j, "besov-check"));
  out << "littlewood-paley suite " << (pass ? "passed" : "failed") << "\n";
  if (!pass) throw CheckFailed{j};
  return kExitOk;
}

int cmd_quadratic_check(const RunOptions& o, const Config& c, std::ostream& out) {
  const auto params = read_model(c);
  const auto wave = read_wave(c).resolve(params);
  const Grid grid = read_grid(c, 1, 64);
  const auto eps = c.get_list("quadratic.eps", {1e-1, 1e-2, 1e-3, 1e-4});
  const int directions = int(c.get_int("quadratic.directions", 5));
  const int modes = int(c.get_int("quadratic.modes", 3));
  const std::string form_s = c.get_string("quadratic.form", "printed");
  const double leak_floor = c.get_double("quadratic.leak_floor", 1e-3);
  c.reject_unread();

  RemainderForm form;
  if (form_s == "printed")
    form = RemainderForm::printed;
  else if (form_s == "exact")
    form = RemainderForm::exact;
  else
    throw ConfigError("quadratic.form must be printed or exact");

  const bool on_slice = quadratic_slice(params, wave);
  std::mt19937_64 rng(o.seed);
  CsvTable csv("quadratic-check", {"direction", "eps", "norm", "ratio_quadratic", "ratio_linear"});
  double worst_spread = 0.0, min_linear = INFINITY;
  for (int d = 0; d < directions; ++d) {
    const auto dir = random_perturbation(grid, modes, 1.0, rng);
    const auto rep = quadratic_order_check(dir, params, wave, eps, form);
    worst_spread = std::max(worst_spread, rep.quadratic_spread);
    min_linear = std::min(min_linear, rep.min_linear_ratio);
    for (const auto& r : rep.rows)
      csv.add_row(std::vector<double>{double(d), r.eps, r.norm, r.ratio_quadratic, r.ratio_linear});
  }
  csv.write(o.out_dir / "quadratic.csv");
  const bool pass = on_slice ? worst_spread < 0.1 : min_linear > leak_floor;
  const json j = {{"on_slice", on_slice},
                  {"expectation", on_slice ? "quadratic" : "linear_leakage"},
                  {"quadratic_spread", number(worst_spread)},
                  {"min_linear_ratio", number(min_linear)},
                  {"pass", pass}};
  write_json(o.out_dir / "quadratic.json", with_schema(j, "quadratic-check"));
  out << "quadratic check " << (pass ? "passed" : "failed") << "\n";
  if (!pass) throw CheckFailed{j};
  return kExitOk;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"simulate",      "dispersion", "stability-scan",
                                              "decay-fit",     "instability", "besov-check",
                                              "quadratic-check"};
  return names;
}

int run(const RunOptions& o, const Config& c, std::ostream& out, std::ostream& err) {
  auto diagnostic = [&](const std::string& status, const json& body) {
    json d = body;
    d["status"] = status;
    d["command"] = o.command;
    err << d.dump() << "\n";
  };
  try {
    std::filesystem::create_directories(o.out_dir);
    if (o.command == "simulate") return cmd_simulate(o, c, out);
    if (o.command == "dispersion") return cmd_dispersion(o, c, out);
    if (o.command == "stability-scan") return cmd_stability_scan(o, c, out);
    if (o.command == "decay-fit") return cmd_decay_fit(o, c, out);
    if (o.command == "instability") return cmd_instability(o, c, out);
    if (o.command == "besov-check") return cmd_besov_check(o, c, out);
    if (o.command == "quadratic-check") return cmd_quadratic_check(o, c, out);
    diagnostic("error", {{"kind", "UsageError"}, {"message", "unknown command " + o.command}});
    return kExitUsage;
  } catch (const CheckFailed& f) {
    diagnostic("check_failed", {{"report", f.report}});
    return kExitCheckFailed;
  } catch (const ConfigError& e) {
    diagnostic("error", {{"kind", e.kind()}, {"message", e.what()}});
    return kExitUsage;
  } catch (const Error& e) {
    diagnostic("error", {{"kind", e.kind()}, {"message", e.what()}});
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    diagnostic("error", {{"kind", "IoError"}, {"message", e.what()}});
    return kExitUsage;
  }
}

}  // namespace cglb::cli
