#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mzzb/covariance.hpp"
#include "mzzb/rng.hpp"

namespace mzzb {

/// Half-open index range [lo, hi) of observation samples.
struct SampleRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool empty() const noexcept { return hi <= lo; }
};

/// Unit-peak triangle s[k] = max(0, 1 - 2|k - center| / width) on k in [0, K).
struct PulseSamples {
  Vec samples;
  double energy = 0.0;
};

PulseSamples triangular_pulse(double center, double width, std::size_t num_samples);

/// Signal functional h(theta): R^{n_theta} -> R^K.
class SignalMap {
 public:
  struct LinearVector {
    Vec hvec;
  };
  struct LinearMatrix {
    Mat H;
  };
  /// h(tau, alpha) = alpha * s(tau) with s a unit-peak triangle of the given width.
  struct Pulse {
    double width;
    std::size_t num_samples;
  };
  struct Parametric {
    std::function<Vec(const Vec&)> f;
    std::size_t num_samples;
    std::size_t num_params;
  };

  static SignalMap linear_vector(Vec hvec);
  static SignalMap linear_matrix(Mat H);
  static SignalMap pulse(double width, std::size_t num_samples);
  static SignalMap parametric(std::function<Vec(const Vec&)> f, std::size_t num_samples,
                              std::size_t num_params);

  std::size_t output_dim() const noexcept { return output_dim_; }
  std::size_t param_dim() const noexcept { return param_dim_; }

  bool is_linear() const noexcept;
  /// K x n_theta matrix of a linear map. Throws UnsupportedVariant otherwise.
  Mat linear_matrix() const;
  /// Exact structural equality of two linear maps.
  bool same_linear_map(const SignalMap& other) const;
  bool is_pulse() const noexcept { return std::holds_alternative<Pulse>(kind_); }
  const Pulse* as_pulse() const noexcept { return std::get_if<Pulse>(&kind_); }

  Vec eval(const Vec& theta) const;
  /// Samples [lo, hi) of h(theta).
  Vec eval_segment(const Vec& theta, std::size_t lo, std::size_t hi) const;
  /// Smallest range outside of which h(theta) is identically zero.
  SampleRange support(const Vec& theta) const;

 private:
  using Kind = std::variant<LinearVector, LinearMatrix, Pulse, Parametric>;
  SignalMap(Kind kind, std::size_t k, std::size_t n) : kind_(std::move(kind)), output_dim_(k), param_dim_(n) {}
  void check_theta(const Vec& theta) const;

  Kind kind_;
  std::size_t output_dim_;
  std::size_t param_dim_;
};

/// eval_signal as a free function.
Vec eval_signal(const SignalMap& map, const Vec& theta);

struct GaussianLaw {
  Vec mean;
  Covariance cov;
};

/// Law of the additive noise vector n*.
///
/// Mixture draws the whole vector from one component. SampleMixture draws
/// every sample independently from a scalar mixture (outlier contamination).
class NoiseLaw {
 public:
  struct Mixture {
    std::vector<double> weights;
    std::vector<GaussianLaw> components;
  };
  struct SampleMixture {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> variances;
    std::size_t num_samples;
  };
  struct Empirical {
    std::function<Vec(Rng&)> sampler;
    std::size_t num_samples;
  };

  static NoiseLaw gaussian(Vec mean, Covariance cov);
  static NoiseLaw mixture(std::vector<double> weights, std::vector<GaussianLaw> components);
  static NoiseLaw sample_mixture(std::vector<double> weights, std::vector<double> means,
                                 std::vector<double> variances, std::size_t num_samples);
  static NoiseLaw empirical(std::function<Vec(Rng&)> sampler, std::size_t num_samples);

  std::size_t dim() const noexcept { return dim_; }
  const GaussianLaw* as_gaussian() const noexcept { return std::get_if<GaussianLaw>(&law_); }
  const Mixture* as_mixture() const noexcept { return std::get_if<Mixture>(&law_); }
  const SampleMixture* as_sample_mixture() const noexcept { return std::get_if<SampleMixture>(&law_); }
  const Empirical* as_empirical() const noexcept { return std::get_if<Empirical>(&law_); }

  /// Mean and covariance of the law; throws UnsupportedVariant for Empirical.
  GaussianLaw moments() const;

  Vec sample(Rng& rng) const;

 private:
  using Law = std::variant<GaussianLaw, Mixture, SampleMixture, Empirical>;
  NoiseLaw(Law law, std::size_t dim) : law_(std::move(law)), dim_(dim) {}
  Law law_;
  std::size_t dim_;
};

/// Practitioner's model x = h(theta) + n, n ~ N(mu, Sigma).
class AssumedModel {
 public:
  AssumedModel(SignalMap signal, Vec noise_mean, Covariance noise_cov);
  const SignalMap& signal() const noexcept { return signal_; }
  const Vec& noise_mean() const noexcept { return mean_; }
  const Covariance& noise_cov() const noexcept { return cov_; }
  std::size_t dim() const noexcept { return signal_.output_dim(); }

 private:
  SignalMap signal_;
  Vec mean_;
  Covariance cov_;
};

/// Data-generating model x = h*(theta) + n*, n* ~ p*.
class TrueModel {
 public:
  TrueModel(SignalMap signal, NoiseLaw noise);
  const SignalMap& signal() const noexcept { return signal_; }
  const NoiseLaw& noise() const noexcept { return noise_; }
  std::size_t dim() const noexcept { return signal_.output_dim(); }

 private:
  SignalMap signal_;
  NoiseLaw noise_;
};

/// h*(theta) + n* with n* drawn from the true noise law.
Vec sample_observation(const TrueModel& model, const Vec& theta, Rng& rng);
Vec sample_observation(const TrueModel& model, const Vec& theta, std::uint64_t seed);

/// Product prior of independent uniform marginals. Each coordinate is either
/// continuous on [lo, hi] or discrete uniform on {start + i*step, i < count}.
class Prior {
 public:
  struct Continuous {
    double lo;
    double hi;
  };
  struct Lattice {
    double start;
    double step;
    std::size_t count;
    double last() const noexcept { return start + step * static_cast<double>(count - 1); }
  };
  using Marginal = std::variant<Continuous, Lattice>;

  explicit Prior(std::vector<Marginal> marginals);
  static Prior uniform_interval(double T);
  static Prior uniform_box(const Vec& lo, const Vec& hi);
  static Prior discrete_uniform(std::vector<Lattice> lattices);

  std::size_t dim() const noexcept { return marginals_.size(); }
  const std::vector<Marginal>& marginals() const noexcept { return marginals_; }
  const Marginal& marginal(std::size_t i) const { return marginals_.at(i); }
  bool is_lattice(std::size_t i) const { return std::holds_alternative<Lattice>(marginals_.at(i)); }

  /// Width of the support of coordinate i (hi - lo, or last - start for lattices).
  double width(std::size_t i) const;
  double lower(std::size_t i) const;
  double upper(std::size_t i) const;
  double variance(std::size_t i) const;

  bool contains(const Vec& theta) const;
  Vec clamp(const Vec& theta) const;
  Vec sample(Rng& rng) const;

  /// A(delta) = integral of min[p(theta), p(theta + delta)].
  double overlap(const Vec& delta) const;

 private:
  std::vector<Marginal> marginals_;
};

}  // namespace mzzb
