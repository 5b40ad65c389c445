#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mzzb/models.hpp"

namespace mzzb {

/// Sufficient statistics of the assumed-model LLR for one hypothesis pair
/// (theta_o, theta_o + delta): LLR = S(theta) + n with n = n*^T Sigma^{-1} d.
struct Projection {
  /// Disjoint sample ranges that carry d = h(theta_o) - h(theta_o + delta).
  std::vector<SampleRange> ranges;
  /// Sigma^{-1} d restricted to each range.
  std::vector<Vec> w;
  /// 1/2 (h1^T Sigma^{-1} h1 - h0^T Sigma^{-1} h0) - mu^T Sigma^{-1} d.
  double offset = 0.0;
  double s0 = 0.0;  // S(theta_o, delta)
  double s1 = 0.0;  // S(theta_o + delta, delta)
};

struct ProjectedComponent {
  double mean = 0.0;
  double stddev = 0.0;
  double weight = 1.0;
};

struct ProjectedNoise {
  double mean = 0.0;
  double stddev = 0.0;
  /// One entry per mixture component (a single entry for Gaussian truth).
  std::vector<ProjectedComponent> components;
};

struct PeEstimate {
  double pe = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

/// Assumed/true model pair of a ZZB detection problem. When every
/// covariance involved is diagonal, statistics are accumulated only over
/// the supports of h(theta_o) and h(theta_o + delta).
class PeKernel {
 public:
  PeKernel(AssumedModel assumed, TrueModel truth);

  const AssumedModel& assumed() const noexcept { return assumed_; }
  const TrueModel& truth() const noexcept { return truth_; }
  bool windowed() const noexcept { return windowed_; }

  Projection project(const Vec& theta_o, const Vec& delta) const;
  /// S(theta_eval, delta) for the pair anchored at theta_o.
  double compute_S(const Vec& theta_eval, const Vec& theta_o, const Vec& delta) const;
  double S_from(const Projection& p, const Vec& theta_eval) const;

  /// m^T w over the projection ranges.
  double project_mean(const Projection& p, const Vec& mean) const;
  /// w^T C w over the projection ranges.
  double project_variance(const Projection& p, const Covariance& cov) const;

 private:
  AssumedModel assumed_;
  TrueModel truth_;
  bool windowed_ = false;
};

ProjectedNoise projected_noise_stats(const PeKernel& kernel, const Vec& theta_o, const Vec& delta);

double pe_gaussian(const PeKernel& kernel, const Vec& theta_o, const Vec& delta);
double pe_mixture(const PeKernel& kernel, const Vec& theta_o, const Vec& delta);
/// Gaussian approximation of n with the exact first two moments of the true
/// noise law (exact for Gaussian truth).
double pe_moment_matched(const PeKernel& kernel, const Vec& theta_o, const Vec& delta);
/// Exact analytic path for Gaussian and Mixture truth, moment matching for
/// SampleMixture; Empirical truth throws UnsupportedVariant.
double pe_analytic(const PeKernel& kernel, const Vec& theta_o, const Vec& delta);

/// Draws n* independently under each hypothesis; ties at LLR = 0 count 1/2.
/// Trials run in blocks of 4096 seeded by substream_seed(seed, block).
PeEstimate pe_general_mc(const PeKernel& kernel, const Vec& theta_o, const Vec& delta, std::size_t trials,
                         std::uint64_t seed, std::size_t workers = 0);

/// Z(delta) = 1/2 (H delta)^T Sigma^{-1} H delta + (H delta)^T Sigma^{-1}(mu - mu*),
/// Z(-delta), and sigma_n for equal linear maps under Gaussian truth.
struct EqualLinearTerms {
  double z_plus = 0.0;
  double z_minus = 0.0;
  double sigma = 0.0;
};
EqualLinearTerms equal_linear_terms(const PeKernel& kernel, const Vec& delta);
double pe_equal_linear(const PeKernel& kernel, const Vec& delta);

}  // namespace mzzb
