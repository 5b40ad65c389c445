#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "mzzb/models.hpp"
#include "mzzb/quadrature.hpp"

namespace mzzb {

struct BoundResult {
  double value = 0.0;
  bool converged = true;
  std::string method;
  std::size_t evaluations = 0;
  /// Set when the integrand vanished everywhere it was sampled.
  bool all_zero = false;
};

/// (1/T) int_0^T h (T - h) Pe(h) dh.
BoundResult zzb_scalar_independent(double T, const std::function<double(double)>& pe, const QuadOptions& opts = {});

/// (1/T) int_0^T h int_0^{T-h} Pe(theta_o, h) dtheta_o dh.
BoundResult zzb_scalar_general(double T, const std::function<double(double, double)>& pe,
                               const QuadOptions& outer = {}, const QuadOptions& inner = {1e-10, 0.0, 4, 18});

/// (1/2T) int_{-T}^{T} |h| (T - |h|) Pe(h) dh, split at h = 0.
BoundResult zzb_scalar_symmetric(double T, const std::function<double(double)>& signed_pe,
                                 const QuadOptions& opts = {});

/// Exact value of (1/T) int_0^T h (T - h) Q(gamma h) dh.
double zzb_closed_form_q_linear(double gamma, double T);

/// Large-T limit 1/(4 gamma^2) of zzb_closed_form_q_linear.
double zzb_asymptotic_q_linear(double gamma);

enum class GammaCase {
  /// Gaussian truth with covariance Sigma* != Sigma, same scalar linear map, mu = mu*.
  CovarianceMismatch,
  /// Assumed model equals the Gaussian truth: gamma = 1/2 sqrt(h^T Sigma*^{-1} h).
  Matched,
  /// Mixture or per-sample mixture truth seen through its pooled covariance.
  MixturePooled,
  /// Matched detector for i.i.d. per-sample mixture noise via the location
  /// Fisher information I_F of the scalar mixture: gamma = 1/2 sqrt(I_F h^T h).
  MatchedLocal,
};

/// Slope gamma of the Q-argument gamma*h for scalar linear scenarios.
double gamma_from_scenario(const AssumedModel& assumed, const TrueModel& truth, GammaCase which);

/// Location Fisher information int p'(x)^2 / p(x) dx of a scalar Gaussian mixture.
double mixture_location_fisher(const std::vector<double>& weights, const std::vector<double>& means,
                               const std::vector<double>& variances);

double prior_overlap(const Prior& prior, const Vec& delta);

struct DeltaSearch {
  std::size_t grid_points = 17;  // per free coordinate, odd so that 0 is on the grid
  int refine_passes = 2;
  double tolerance = 1e-6;  // relative to the free-coordinate box width
};

struct VectorBoundSpec {
  VectorBoundSpec(Vec a, Prior p) : direction(std::move(a)), prior(std::move(p)) {}

  Vec direction;
  Prior prior;
  /// Pe(theta_o, delta); averaged over the overlap of the prior and its shift.
  std::function<double(const Vec&, const Vec&)> pe;
  /// Optional theta_o-independent Pe(delta); takes precedence over pe.
  std::function<double(const Vec&)> pe_independent;
  DeltaSearch search;
  std::size_t continuous_nodes = 8;  // Gauss-Legendre nodes per continuous coordinate
  std::size_t lattice_nodes = 8;     // cell-midpoint theta_o samples per lattice coordinate
  QuadOptions outer{1e-7, 0.0, 6, 16};
  std::size_t dense_steps = 512;  // lattice offsets evaluated one by one
  std::size_t stride = 16;        // spacing of evaluated offsets beyond dense_steps
  std::size_t workers = 0;
};

/// int_0^inf h max_{a^T delta = h} A(delta) Pe_bar(delta) dh. For a lattice
/// coordinate along a unit axis the integral becomes
/// sum_m f(h_m) s (h_m - s/2), h_m = m s.
BoundResult zzb_vector(const VectorBoundSpec& spec);

}  // namespace mzzb
