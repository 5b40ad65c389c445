#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "mzzb/estimators.hpp"
#include "mzzb/models.hpp"
#include "mzzb/pe_kernel.hpp"

namespace mzzb {

/// Trial t draws from an Rng seeded with substream_seed(seed, t): theta
/// first (when drawn from the prior), then the noise.
struct TrialPlan {
  TrueModel truth;
  /// Support handed to the estimator and, if theta_true is empty, the law theta is drawn from.
  Prior prior;
  std::optional<Vec> theta_true;
  EstimatorSpec estimator;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0: default_workers()
};

struct MseReport {
  Vec mse;
  Vec std_error;
  Vec bias;
  std::size_t trials_used = 0;
  std::size_t failures = 0;
  /// False when more than 1% of the trials failed.
  bool valid = true;
};

MseReport run_mse(const TrialPlan& plan);

/// Simulates x under theta_o and under theta_o + delta and applies the
/// assumed-model LLR; ties count 1/2. Trial t of hypothesis j uses
/// substream_seed(seed, 2t + j).
PeEstimate empirical_pe(const PeKernel& kernel, const Vec& theta_o, const Vec& delta, std::size_t trials,
                        std::uint64_t seed, std::size_t workers = 0);

}  // namespace mzzb
