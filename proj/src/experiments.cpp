#include "mzzb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mzzb/error.hpp"
#include "mzzb/montecarlo.hpp"
#include "mzzb/pe_kernel.hpp"
#include "mzzb/special_math.hpp"

namespace mzzb {

namespace {

constexpr double kTheta = 4.0;
constexpr double kSigmaC2 = 0.016;
constexpr double kExample2Mu = 5.0;
constexpr double kExample2Var = 0.16;
constexpr double kInlierVar = 1.0;
constexpr double kOutlierVar = 625.0;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t pick_K(const Overrides& o, std::size_t fallback) {
  const std::size_t K = o.K.value_or(fallback);
  if (K < 2) throw ConfigError("K", "K must be at least 2");
  return K;
}

double prior_T(const std::optional<double>& T, double gamma_min) {
  if (T) return *T;
  return std::max(100.0 / gamma_min, 2.0 * kTheta);
}

Covariance colored_covariance(std::size_t K) {
  Vec c(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    c[static_cast<Eigen::Index>(k)] = kSigmaC2 * (1.0 + 4.0 * static_cast<double>(k) / static_cast<double>(K - 1));
  }
  return Covariance::diagonal(c);
}

}  // namespace

Example1 build_example1(double sigma2, const Overrides& overrides) {
  if (!(sigma2 >= 0.0)) throw ConfigError("sigma2", "sigma2 must be nonnegative");
  const std::size_t K = pick_K(overrides, 500);
  const SignalMap h = SignalMap::linear_vector(Vec::Ones(static_cast<Eigen::Index>(K)));
  const Vec zero = Vec::Zero(static_cast<Eigen::Index>(K));
  const Covariance sc = colored_covariance(K);
  const bool white = sigma2 > 0.0;
  const Covariance total = white ? Covariance::scaled_identity(K, sigma2).plus(sc) : sc;

  TrueModel truth(h, NoiseLaw::gaussian(zero, total));
  std::optional<AssumedModel> m1;
  std::optional<double> g1;
  if (white) {
    m1.emplace(h, zero, Covariance::scaled_identity(K, sigma2));
    g1 = gamma_from_scenario(*m1, truth, GammaCase::CovarianceMismatch);
  }
  AssumedModel m2(h, zero, sc);
  AssumedModel matched(h, zero, total);
  const double g2 = gamma_from_scenario(m2, truth, GammaCase::CovarianceMismatch);
  const double gm = gamma_from_scenario(matched, truth, GammaCase::Matched);
  const double gmin = std::min({g1.value_or(g2), g2, gm});
  const double T = prior_T(overrides.T, gmin);
  return Example1{sigma2, kTheta, T, Prior::uniform_interval(T), truth, m1, m2, matched, g1, g2, gm};
}

double example1_asymptotic(const AssumedModel& assumed, const TrueModel& truth) {
  const GaussianLaw* g = truth.noise().as_gaussian();
  if (!g || !assumed.signal().is_linear()) throw UnsupportedVariant("asymptotic formula needs a linear Gaussian scenario");
  const Vec h = assumed.signal().linear_matrix().col(0);
  const Vec w = assumed.noise_cov().solve(h);
  const double a = h.dot(w);
  return g->cov.quad(w) / (a * a);
}

Example2 build_example2(double mu_star, const Overrides& overrides) {
  if (!std::isfinite(mu_star)) throw ConfigError("mu_star", "mu_star must be finite");
  const std::size_t K = pick_K(overrides, 500);
  const double T = overrides.T.value_or(100.0);
  const SignalMap h = SignalMap::linear_vector(Vec::Ones(static_cast<Eigen::Index>(K)));
  const Covariance cov = Covariance::scaled_identity(K, kExample2Var);
  TrueModel truth(h, NoiseLaw::gaussian(Vec::Constant(static_cast<Eigen::Index>(K), mu_star), cov));
  AssumedModel assumed(h, Vec::Constant(static_cast<Eigen::Index>(K), kExample2Mu), cov);
  const double gm = 0.5 * std::sqrt(cov.inv_quad(Vec::Ones(static_cast<Eigen::Index>(K)), Vec::Ones(static_cast<Eigen::Index>(K))));
  return Example2{mu_star, kTheta, T, Prior::uniform_interval(T), truth, assumed, gm};
}

BoundResult example2_bound(const Example2& ex) {
  const GaussianLaw& g = *ex.truth.noise().as_gaussian();
  if (ex.assumed.noise_mean() == g.mean) {
    BoundResult r;
    r.value = zzb_closed_form_q_linear(ex.gamma_matched, ex.T);
    r.method = "closed_form";
    return r;
  }
  const PeKernel kernel(ex.assumed, ex.truth);
  return zzb_scalar_symmetric(ex.T, [&](double h) {
    const EqualLinearTerms t = equal_linear_terms(kernel, Vec::Constant(1, h));
    return q_ratio(t.z_plus, t.sigma);
  });
}

Example3 build_example3(double omega1, const Overrides& overrides) {
  if (!(omega1 >= 0.0 && omega1 <= 1.0)) throw ConfigError("omega1", "omega1 must lie in [0, 1]");
  const std::size_t K = pick_K(overrides, 2000);
  const SignalMap h = SignalMap::linear_vector(Vec::Ones(static_cast<Eigen::Index>(K)));
  const std::vector<double> weights{omega1, 1.0 - omega1};
  const std::vector<double> means{0.0, 0.0};
  const std::vector<double> variances{kInlierVar, kOutlierVar};
  TrueModel truth(h, NoiseLaw::sample_mixture(weights, means, variances, K));
  AssumedModel assumed(h, Vec::Zero(static_cast<Eigen::Index>(K)), Covariance::scaled_identity(K, kInlierVar));
  const double gmis = gamma_from_scenario(assumed, truth, GammaCase::MixturePooled);
  const double gmat = gamma_from_scenario(assumed, truth, GammaCase::MatchedLocal);
  const double T = prior_T(overrides.T, std::min(gmis, gmat));
  return Example3{omega1, kTheta, T, Prior::uniform_interval(T), truth, assumed, gmis, gmat,
                  MixtureMle{weights, means, variances}};
}

Example4 build_example4(double snr, const Overrides& overrides, double assumed_width) {
  if (!(snr > 0.0) || !std::isfinite(snr)) throw ConfigError("snr", "SNR must be positive");
  const std::size_t K = pick_K(overrides, 5000);
  const double true_width = 300.0;
  if (true_width > static_cast<double>(K) || assumed_width > static_cast<double>(K)) {
    throw ConfigError("K", "K must be at least the pulse widths");
  }
  const double energy = triangular_pulse(static_cast<double>(K / 2), true_width, K).energy;
  const double N0 = energy / snr;
  const Covariance cov = Covariance::scaled_identity(K, 0.5 * N0);
  const Vec zero = Vec::Zero(static_cast<Eigen::Index>(K));
  TrueModel truth(SignalMap::pulse(true_width, K), NoiseLaw::gaussian(zero, cov));
  AssumedModel mismatched(SignalMap::pulse(assumed_width, K), zero, cov);
  AssumedModel matched(SignalMap::pulse(true_width, K), zero, cov);
  Prior prior({Prior::Lattice{0.0, 1.0, K}, Prior::Continuous{0.5, 1.5}});
  return Example4{snr, N0, true_width, assumed_width, prior, truth, mismatched, matched};
}

BoundResult example4_bound(const Example4& ex, const AssumedModel& assumed, std::size_t axis, std::size_t workers) {
  if (axis > 1) throw DomainError("example 4 has two parameters");
  const PeKernel kernel(assumed, ex.truth);
  VectorBoundSpec spec(Vec::Unit(2, static_cast<Eigen::Index>(axis)), ex.prior);
  spec.pe = [&kernel](const Vec& theta_o, const Vec& delta) { return pe_gaussian(kernel, theta_o, delta); };
  spec.search = DeltaSearch{9, 1, 1e-4};
  // Beyond the summed half-widths of the two pulses Pe no longer depends on the
  // delay offset and f(h) is linear in it, so a coarse stride is exact there.
  spec.dense_steps = static_cast<std::size_t>(std::ceil(0.5 * (ex.true_width + ex.assumed_width))) + 8;
  spec.stride = 32;
  spec.workers = workers;
  return zzb_vector(spec);
}

// --- sweeps --------------------------------------------------------------------

std::string default_sweep_var(int example) {
  switch (example) {
    case 1: return "sigma2";
    case 2: return "mu_star";
    case 3: return "one_minus_omega1";
    case 4: return "snr_db";
  }
  throw ConfigError("example", "example must be 1, 2, 3 or 4");
}

std::vector<double> default_grid(int example) {
  std::vector<double> g;
  switch (example) {
    case 1:
      for (int i = 0; i < 8; ++i) g.push_back(0.01 + (0.3 - 0.01) * i / 7.0);
      return g;
    case 2:
      for (int i = 0; i <= 10; ++i) g.push_back(i);
      return g;
    case 3:
      for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
      return g;
    case 4: return {-10.0, 0.0, 5.0, 10.0, 20.0, 30.0};
  }
  throw ConfigError("example", "example must be 1, 2, 3 or 4");
}

std::size_t default_trials(int example) {
  switch (example) {
    case 1:
    case 2: return 2000;
    case 3: return 1000;
    case 4: return 500;
  }
  throw ConfigError("example", "example must be 1, 2, 3 or 4");
}

namespace {

struct SweepContext {
  const SweepConfig& cfg;
  std::string var;
  std::size_t trials;
  std::vector<SweepRow>* rows;

  void bound(double x, const std::string& q, const BoundResult& b) const {
    rows->push_back(SweepRow{var, x, q, b.method, b.value, 0.0, b.converged ? "ok" : "nonconverged"});
  }
  void closed(double x, const std::string& q, double gamma, double T) const {
    rows->push_back(SweepRow{var, x, q, "closed_form", zzb_closed_form_q_linear(gamma, T), 0.0, "ok"});
  }
  void missing(double x, const std::string& q, const std::string& method) const {
    rows->push_back(SweepRow{var, x, q, method, kNaN, kNaN, "undefined"});
  }
  void mc(double x, const std::string& q, const MseReport& r, std::size_t coordinate = 0) const {
    const auto i = static_cast<Eigen::Index>(coordinate);
    rows->push_back(SweepRow{var, x, q, "monte_carlo", r.mse[i], r.std_error[i], r.valid ? "ok" : "invalid"});
  }

  /// Seed of quantity q at grid point p.
  std::uint64_t seed(std::size_t p, std::uint64_t q) const { return substream_seed(cfg.seed, p * 64 + q); }

  MseReport run(const TrueModel& truth, const Prior& prior, std::optional<Vec> theta, EstimatorSpec est,
                std::uint64_t s) const {
    return run_mse(TrialPlan{truth, prior, std::move(theta), std::move(est), trials, s, cfg.workers});
  }
};

void sweep_example1(const SweepContext& c) {
  double gmin = std::numeric_limits<double>::infinity();
  if (!c.cfg.T) {
    for (double s2 : c.cfg.grid) {
      const Example1 e = build_example1(s2, Overrides{c.cfg.K, 1.0});
      gmin = std::min({gmin, e.gamma_m1.value_or(e.gamma_m2), e.gamma_m2, e.gamma_matched});
    }
  }
  const double T = c.cfg.T.value_or(std::max(100.0 / gmin, 2.0 * kTheta));
  for (std::size_t p = 0; p < c.cfg.grid.size(); ++p) {
    const double x = c.cfg.grid[p];
    const Example1 e = build_example1(x, Overrides{c.cfg.K, T});
    if (e.gamma_m1) {
      c.closed(x, "zzb_m1", *e.gamma_m1, T);
    } else {
      c.missing(x, "zzb_m1", "closed_form");
    }
    c.closed(x, "zzb_m2", e.gamma_m2, T);
    c.closed(x, "zzb_matched", e.gamma_matched, T);
    if (!c.cfg.monte_carlo) continue;
    const Vec theta = Vec::Constant(1, e.theta);
    if (e.m1) {
      c.mc(x, "mse_mle_m1", c.run(e.truth, e.prior, theta, LinearClosedForm{*e.m1}, c.seed(p, 0)));
    } else {
      c.missing(x, "mse_mle_m1", "monte_carlo");
    }
    c.mc(x, "mse_mle_m2", c.run(e.truth, e.prior, theta, LinearClosedForm{e.m2}, c.seed(p, 1)));
    c.mc(x, "mse_mle_matched", c.run(e.truth, e.prior, theta, LinearClosedForm{e.matched}, c.seed(p, 2)));
  }
}

void sweep_example2(const SweepContext& c) {
  for (std::size_t p = 0; p < c.cfg.grid.size(); ++p) {
    const double x = c.cfg.grid[p];
    const Example2 e = build_example2(x, Overrides{c.cfg.K, c.cfg.T});
    c.bound(x, "zzb", example2_bound(e));
    c.closed(x, "zzb_matched", e.gamma_matched, e.T);
    if (!c.cfg.monte_carlo) continue;
    c.mc(x, "mse_mle", c.run(e.truth, e.prior, Vec::Constant(1, e.theta), LinearClosedForm{e.assumed}, c.seed(p, 0)));
  }
}

void sweep_example3(const SweepContext& c) {
  double gmin = std::numeric_limits<double>::infinity();
  if (!c.cfg.T) {
    for (double v : c.cfg.grid) {
      const Example3 e = build_example3(1.0 - v, Overrides{c.cfg.K, 1.0});
      gmin = std::min({gmin, e.gamma_mismatched, e.gamma_matched});
    }
  }
  const double T = c.cfg.T.value_or(std::max(100.0 / gmin, 2.0 * kTheta));
  for (std::size_t p = 0; p < c.cfg.grid.size(); ++p) {
    const double x = c.cfg.grid[p];
    const Example3 e = build_example3(1.0 - x, Overrides{c.cfg.K, T});
    c.closed(x, "zzb_mismatched", e.gamma_mismatched, T);
    c.closed(x, "zzb_matched", e.gamma_matched, T);
    if (!c.cfg.monte_carlo) continue;
    const Vec theta = Vec::Constant(1, e.theta);
    c.mc(x, "mse_qmle", c.run(e.truth, e.prior, theta, LinearClosedForm{e.assumed}, c.seed(p, 0)));
    c.mc(x, "mse_median", c.run(e.truth, e.prior, theta, SampleMedian{e.assumed.signal(), 0.0}, c.seed(p, 1)));
    c.mc(x, "mse_mle_matched", c.run(e.truth, e.prior, theta, e.matched_mle, c.seed(p, 2)));
  }
}

void sweep_example4(const SweepContext& c) {
  for (std::size_t p = 0; p < c.cfg.grid.size(); ++p) {
    const double x = c.cfg.grid[p];
    const Example4 e = build_example4(std::pow(10.0, x / 10.0), Overrides{c.cfg.K, std::nullopt});
    c.bound(x, "zzb_tau_mismatched", example4_bound(e, e.mismatched, 0, c.cfg.workers));
    c.bound(x, "zzb_tau_matched", example4_bound(e, e.matched, 0, c.cfg.workers));
    c.bound(x, "zzb_alpha_mismatched", example4_bound(e, e.mismatched, 1, c.cfg.workers));
    c.bound(x, "zzb_alpha_matched", example4_bound(e, e.matched, 1, c.cfg.workers));
    if (!c.cfg.monte_carlo) continue;
    const MseReport q = c.run(e.truth, e.prior, std::nullopt, QuasiMle{e.mismatched}, c.seed(p, 0));
    const MseReport m = c.run(e.truth, e.prior, std::nullopt, QuasiMle{e.matched}, c.seed(p, 1));
    c.mc(x, "mse_tau_qmle", q, 0);
    c.mc(x, "mse_tau_mle", m, 0);
    c.mc(x, "mse_alpha_qmle", q, 1);
    c.mc(x, "mse_alpha_mle", m, 1);
  }
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  const std::string expected = default_sweep_var(config.example);
  const std::string var = config.sweep_var.empty() ? expected : config.sweep_var;
  if (var != expected) {
    throw ConfigError("sweep_var", "example " + std::to_string(config.example) + " sweeps '" + expected + "'");
  }
  if (config.grid.empty()) throw ConfigError("grid", "sweep grid is empty");
  if (!std::is_sorted(config.grid.begin(), config.grid.end())) throw ConfigError("grid", "sweep grid must be sorted");
  for (double v : config.grid) {
    if (!std::isfinite(v)) throw ConfigError("grid", "sweep grid values must be finite");
  }
  if (config.K && *config.K < 2) throw ConfigError("K", "K must be at least 2");
  if (config.trials && *config.trials == 0) throw ConfigError("trials", "trials must be positive");
  if (config.T && !(*config.T > 0.0)) throw ConfigError("T", "T must be positive");

  std::vector<SweepRow> rows;
  const SweepContext c{config, var, config.trials.value_or(default_trials(config.example)), &rows};
  switch (config.example) {
    case 1: sweep_example1(c); break;
    case 2: sweep_example2(c); break;
    case 3: sweep_example3(c); break;
    case 4: sweep_example4(c); break;
  }
  return rows;
}

}  // namespace mzzb
