#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "mzzb/models.hpp"

namespace mzzb {

struct SearchPolicy {
  std::size_t grid_points = 512;  // per dimension, before refinement
  int coordinate_passes = 3;      // vector parameters: sweeps of per-coordinate search
  double tolerance = 1e-10;       // golden-section bracket width relative to the support width
};

/// Maximizer of the assumed-model log-likelihood over the prior support.
/// Pulse maps with diagonal covariance under a (lattice delay, continuous
/// amplitude) prior use the amplitude-profiled likelihood scanned over every
/// lattice delay; ties go to the smallest delay.
struct QuasiMle {
  AssumedModel model;
  SearchPolicy search{};
};

/// (H^T Sigma^{-1} H)^{-1} H^T Sigma^{-1} (x - mu) for linear maps.
struct LinearClosedForm {
  AssumedModel model;
};

/// Median of x - offset; scalar parameter with a unit signal only.
struct SampleMedian {
  std::optional<SignalMap> signal;
  double offset = 0.0;
};

/// Location MLE for a unit signal in i.i.d. scalar Gaussian-mixture noise,
/// by fixed-point (EM) iterations started at the sample median.
struct MixtureMle {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
  int max_iterations = 500;
  double tolerance = 1e-12;
};

using EstimatorSpec = std::variant<QuasiMle, LinearClosedForm, SampleMedian, MixtureMle>;

/// -1/2 (x - h(theta) - mu)^T Sigma^{-1} (x - h(theta) - mu).
double log_likelihood(const AssumedModel& model, const Vec& x, const Vec& theta);

Vec estimate(const EstimatorSpec& spec, const Vec& x, const Prior& prior);

/// Middle order statistic; mean of the two middle ones for even length.
double sample_median(const Vec& x);

}  // namespace mzzb
