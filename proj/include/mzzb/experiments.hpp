#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mzzb/estimators.hpp"
#include "mzzb/models.hpp"
#include "mzzb/zzb.hpp"

namespace mzzb {

struct Overrides {
  std::optional<std::size_t> K;
  std::optional<double> T;
};

/// Constant signal h* = 1 (theta is a DC level) in white plus colored noise.
struct Example1 {
  double sigma2 = 0.0;
  double theta = 4.0;
  double T = 0.0;
  Prior prior;
  TrueModel truth;
  std::optional<AssumedModel> m1;  // assumes the white term only; absent at sigma2 = 0
  AssumedModel m2;                 // assumes the colored term only
  AssumedModel matched;
  std::optional<double> gamma_m1;
  double gamma_m2 = 0.0;
  double gamma_matched = 0.0;
};
Example1 build_example1(double sigma2, const Overrides& overrides = {});
/// (h^T S^{-1} h + h^T S^{-1} Sc S^{-1} h) / (h^T S^{-1} h)^2 with S assumed, S + Sc true.
double example1_asymptotic(const AssumedModel& assumed, const TrueModel& truth);

/// Mean mismatch: assumed mu = 5, true mu* = mu_star, equal white covariances.
struct Example2 {
  double mu_star = 0.0;
  double theta = 4.0;
  double T = 0.0;
  Prior prior;
  TrueModel truth;
  AssumedModel assumed;
  double gamma_matched = 0.0;
};
Example2 build_example2(double mu_star, const Overrides& overrides = {});
/// Bound for the mean-mismatch scenario: closed form when mu = mu*, symmetric quadrature otherwise.
BoundResult example2_bound(const Example2& ex);

/// i.i.d. outliers: every sample is N(0, 1) with probability omega1, N(0, 625) otherwise.
struct Example3 {
  double omega1 = 1.0;
  double theta = 4.0;
  double T = 0.0;
  Prior prior;
  TrueModel truth;
  AssumedModel assumed;  // Gaussian with the inlier covariance
  double gamma_mismatched = 0.0;
  double gamma_matched = 0.0;
  MixtureMle matched_mle;
};
Example3 build_example3(double omega1, const Overrides& overrides = {});

/// Time of arrival and amplitude of a triangular pulse; the receiver assumes
/// a narrower pulse than the one transmitted.
struct Example4 {
  double snr = 1.0;
  double N0 = 0.0;
  double true_width = 300.0;
  double assumed_width = 200.0;
  Prior prior;  // delay lattice {0..K-1} x amplitude U[0.5, 1.5]
  TrueModel truth;
  AssumedModel mismatched;
  AssumedModel matched;
};
Example4 build_example4(double snr, const Overrides& overrides = {}, double assumed_width = 200.0);

/// Vector bound for coordinate `axis` (0: delay, 1: amplitude).
BoundResult example4_bound(const Example4& ex, const AssumedModel& assumed, std::size_t axis,
                           std::size_t workers = 0);

struct SweepConfig {
  int example = 1;
  std::string sweep_var;  // defaults per example when empty
  std::vector<double> grid;
  std::optional<std::size_t> K;
  std::optional<std::size_t> trials;
  std::optional<double> T;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  bool monte_carlo = true;
};

struct SweepRow {
  std::string sweep_var;
  double sweep_value = 0.0;
  std::string quantity;
  std::string method;
  double value = 0.0;
  double std_error = 0.0;
  std::string flag;
};

std::string default_sweep_var(int example);
std::vector<double> default_grid(int example);
std::size_t default_trials(int example);

/// Rows ordered by grid point, then by the fixed quantity order of the example.
std::vector<SweepRow> run_sweep(const SweepConfig& config);

}  // namespace mzzb
