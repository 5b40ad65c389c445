#include "mzzb/montecarlo.hpp"

#include <cmath>
#include <vector>

#include "mzzb/error.hpp"
#include "mzzb/parallel.hpp"
#include "mzzb/quadrature.hpp"

namespace mzzb {

MseReport run_mse(const TrialPlan& plan) {
  if (plan.trials == 0) throw DomainError("run_mse needs at least one trial");
  const std::size_t n = plan.truth.signal().param_dim();
  if (plan.prior.dim() != n) throw ModelError("prior and true model differ in parameter dimension");
  if (plan.theta_true && static_cast<std::size_t>(plan.theta_true->size()) != n) {
    throw ModelError("theta_true has the wrong dimension");
  }

  // Per-trial slots: error per coordinate, NaN marks a failed trial.
  std::vector<double> err(plan.trials * n, 0.0);
  std::vector<char> failed(plan.trials, 0);
  parallel_for(plan.trials, plan.workers == 0 ? default_workers() : plan.workers, [&](std::size_t t) {
    Rng rng(substream_seed(plan.seed, t));
    try {
      const Vec theta = plan.theta_true ? *plan.theta_true : plan.prior.sample(rng);
      const Vec x = sample_observation(plan.truth, theta, rng);
      const Vec est = estimate(plan.estimator, x, plan.prior);
      if (static_cast<std::size_t>(est.size()) != n || !est.allFinite()) {
        failed[t] = 1;
        return;
      }
      for (std::size_t i = 0; i < n; ++i) err[t * n + i] = est[static_cast<Eigen::Index>(i)] - theta[static_cast<Eigen::Index>(i)];
    } catch (const std::exception&) {
      failed[t] = 1;
    }
  });

  MseReport r;
  r.mse = Vec::Zero(static_cast<Eigen::Index>(n));
  r.std_error = Vec::Zero(static_cast<Eigen::Index>(n));
  r.bias = Vec::Zero(static_cast<Eigen::Index>(n));
  for (char f : failed) r.failures += f ? 1 : 0;
  r.trials_used = plan.trials - r.failures;
  r.valid = static_cast<double>(r.failures) <= 0.01 * static_cast<double>(plan.trials) && r.trials_used > 0;
  if (r.trials_used == 0) return r;

  const double m = static_cast<double>(r.trials_used);
  std::vector<double> e(r.trials_used);
  std::vector<double> sq(r.trials_used);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = 0;
    for (std::size_t t = 0; t < plan.trials; ++t) {
      if (failed[t]) continue;
      e[j] = err[t * n + i];
      sq[j] = e[j] * e[j];
      ++j;
    }
    const double mse = pairwise_sum(sq) / m;
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = (sq[k] - mse) * (sq[k] - mse);
    const double var = r.trials_used > 1 ? pairwise_sum(sq) / (m - 1.0) : 0.0;
    const auto ii = static_cast<Eigen::Index>(i);
    r.mse[ii] = mse;
    r.std_error[ii] = std::sqrt(var / m);
    r.bias[ii] = pairwise_sum(e) / m;
  }
  return r;
}

PeEstimate empirical_pe(const PeKernel& kernel, const Vec& theta_o, const Vec& delta, std::size_t trials,
                        std::uint64_t seed, std::size_t workers) {
  if (trials == 0) throw DomainError("empirical_pe needs at least one trial");
  const AssumedModel& a = kernel.assumed();
  const Vec theta_1 = theta_o + delta;
  const Vec m0 = a.signal().eval(theta_o) + a.noise_mean();
  const Vec m1 = a.signal().eval(theta_1) + a.noise_mean();
  const Vec w = a.noise_cov().solve(m0 - m1);
  const double offset = 0.5 * (a.noise_cov().inv_quad(m1, m1) - a.noise_cov().inv_quad(m0, m0));

  // Half-unit error counts per trial: 2 strict error, 1 tie.
  std::vector<unsigned char> e0(trials, 0);
  std::vector<unsigned char> e1(trials, 0);
  parallel_for(trials, workers == 0 ? default_workers() : workers, [&](std::size_t t) {
    Rng r0(substream_seed(seed, 2 * t));
    Rng r1(substream_seed(seed, 2 * t + 1));
    const double llr0 = sample_observation(kernel.truth(), theta_o, r0).dot(w) + offset;
    const double llr1 = sample_observation(kernel.truth(), theta_1, r1).dot(w) + offset;
    e0[t] = llr0 < 0.0 ? 2 : (llr0 == 0.0 ? 1 : 0);
    e1[t] = llr1 > 0.0 ? 2 : (llr1 == 0.0 ? 1 : 0);
  });
  std::uint64_t c0 = 0;
  std::uint64_t c1 = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    c0 += e0[t];
    c1 += e1[t];
  }
  const double n = static_cast<double>(trials);
  const double p0 = static_cast<double>(c0) / (2.0 * n);
  const double p1 = static_cast<double>(c1) / (2.0 * n);
  PeEstimate out;
  out.pe = 0.5 * (p0 + p1);
  out.std_error = 0.5 * std::sqrt(p0 * (1.0 - p0) / n + p1 * (1.0 - p1) / n);
  out.trials = trials;
  return out;
}

}  // namespace mzzb
