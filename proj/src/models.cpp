#include "mzzb/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mzzb/error.hpp"

namespace mzzb {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

SampleRange pulse_range(double center, double width, std::size_t num_samples) {
  const double half = 0.5 * width;
  const double lo = std::ceil(center - half);
  const double hi = std::floor(center + half) + 1.0;
  const double k = static_cast<double>(num_samples);
  SampleRange r;
  r.lo = static_cast<std::size_t>(std::clamp(lo, 0.0, k));
  r.hi = static_cast<std::size_t>(std::clamp(hi, 0.0, k));
  if (r.hi < r.lo) r.hi = r.lo;
  return r;
}

inline double pulse_value(double k, double center, double width) {
  return std::max(0.0, 1.0 - 2.0 * std::fabs(k - center) / width);
}

void check_weights(const std::vector<double>& weights) {
  if (weights.empty()) throw ModelError("mixture needs at least one component");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ModelError("mixture weights must be nonnegative");
    sum += w;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw ModelError("mixture weights must sum to 1, got " + std::to_string(sum));
  }
}

std::size_t pick_component(const std::vector<double>& weights, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // u landed in the rounding slack above the cumulative sum; take the last
  // component that carries weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace

PulseSamples triangular_pulse(double center, double width, std::size_t num_samples) {
  if (!(width >= 1.0)) throw DomainError("triangular_pulse: width must be at least 1 sample");
  if (width > static_cast<double>(num_samples)) {
    throw DomainError("triangular_pulse: width exceeds the observation length");
  }
  if (!(center >= 0.0) || !(center < static_cast<double>(num_samples))) {
    throw DomainError("triangular_pulse: center outside [0, K)");
  }
  PulseSamples p;
  p.samples = Vec::Zero(static_cast<Eigen::Index>(num_samples));
  const SampleRange r = pulse_range(center, width, num_samples);
  for (std::size_t k = r.lo; k < r.hi; ++k) {
    p.samples[static_cast<Eigen::Index>(k)] = pulse_value(static_cast<double>(k), center, width);
  }
  p.energy = p.samples.squaredNorm();
  return p;
}

// --- SignalMap -------------------------------------------------------------

SignalMap SignalMap::linear_vector(Vec hvec) {
  if (hvec.size() == 0) throw ModelError("linear signal vector is empty");
  if (!hvec.allFinite()) throw ModelError("linear signal vector has non-finite entries");
  const auto k = static_cast<std::size_t>(hvec.size());
  return SignalMap(LinearVector{std::move(hvec)}, k, 1);
}

SignalMap SignalMap::linear_matrix(Mat H) {
  if (H.rows() == 0 || H.cols() == 0) throw ModelError("linear signal matrix is empty");
  if (!H.allFinite()) throw ModelError("linear signal matrix has non-finite entries");
  const auto k = static_cast<std::size_t>(H.rows());
  const auto n = static_cast<std::size_t>(H.cols());
  return SignalMap(LinearMatrix{std::move(H)}, k, n);
}

SignalMap SignalMap::pulse(double width, std::size_t num_samples) {
  if (!(width >= 1.0) || width > static_cast<double>(num_samples)) {
    throw ModelError("pulse width must lie in [1, K]");
  }
  return SignalMap(Pulse{width, num_samples}, num_samples, 2);
}

SignalMap SignalMap::parametric(std::function<Vec(const Vec&)> f, std::size_t num_samples,
                                std::size_t num_params) {
  if (!f) throw ModelError("parametric signal map needs a function");
  if (num_samples == 0 || num_params == 0) throw ModelError("parametric signal map dimensions must be positive");
  return SignalMap(Parametric{std::move(f), num_samples, num_params}, num_samples, num_params);
}

bool SignalMap::is_linear() const noexcept {
  return std::holds_alternative<LinearVector>(kind_) || std::holds_alternative<LinearMatrix>(kind_);
}

Mat SignalMap::linear_matrix() const {
  if (const auto* v = std::get_if<LinearVector>(&kind_)) return Mat(v->hvec);
  if (const auto* m = std::get_if<LinearMatrix>(&kind_)) return m->H;
  throw UnsupportedVariant("signal map is not linear");
}

bool SignalMap::same_linear_map(const SignalMap& other) const {
  if (!is_linear() || !other.is_linear()) return false;
  if (output_dim_ != other.output_dim_ || param_dim_ != other.param_dim_) return false;
  return linear_matrix() == other.linear_matrix();
}

void SignalMap::check_theta(const Vec& theta) const {
  if (static_cast<std::size_t>(theta.size()) != param_dim_) {
    throw ModelError("parameter dimension mismatch: expected " + std::to_string(param_dim_) + ", got " +
                     std::to_string(theta.size()));
  }
  if (!theta.allFinite()) throw ModelError("parameter vector has non-finite entries");
}

Vec SignalMap::eval(const Vec& theta) const {
  check_theta(theta);
  return std::visit(
      Overloaded{
          [&](const LinearVector& v) -> Vec { return v.hvec * theta[0]; },
          [&](const LinearMatrix& m) -> Vec { return m.H * theta; },
          [&](const Pulse& p) -> Vec {
            Vec out = Vec::Zero(static_cast<Eigen::Index>(p.num_samples));
            const SampleRange r = pulse_range(theta[0], p.width, p.num_samples);
            for (std::size_t k = r.lo; k < r.hi; ++k) {
              out[static_cast<Eigen::Index>(k)] = theta[1] * pulse_value(static_cast<double>(k), theta[0], p.width);
            }
            return out;
          },
          [&](const Parametric& p) -> Vec {
            Vec out = p.f(theta);
            if (static_cast<std::size_t>(out.size()) != p.num_samples) {
              throw ModelError("parametric signal map returned the wrong length");
            }
            if (!out.allFinite()) throw ModelError("parametric signal map returned non-finite values");
            return out;
          }},
      kind_);
}

Vec SignalMap::eval_segment(const Vec& theta, std::size_t lo, std::size_t hi) const {
  if (hi < lo || hi > output_dim_) throw ModelError("segment outside the observation range");
  const auto n = static_cast<Eigen::Index>(hi - lo);
  if (const auto* p = std::get_if<Pulse>(&kind_)) {
    check_theta(theta);
    Vec out = Vec::Zero(n);
    const SampleRange r = pulse_range(theta[0], p->width, p->num_samples);
    const std::size_t a = std::max(lo, r.lo);
    const std::size_t b = std::min(hi, r.hi);
    for (std::size_t k = a; k < b; ++k) {
      out[static_cast<Eigen::Index>(k - lo)] = theta[1] * pulse_value(static_cast<double>(k), theta[0], p->width);
    }
    return out;
  }
  if (const auto* m = std::get_if<LinearMatrix>(&kind_)) {
    check_theta(theta);
    return m->H.middleRows(static_cast<Eigen::Index>(lo), n) * theta;
  }
  if (const auto* v = std::get_if<LinearVector>(&kind_)) {
    check_theta(theta);
    return v->hvec.segment(static_cast<Eigen::Index>(lo), n) * theta[0];
  }
  return eval(theta).segment(static_cast<Eigen::Index>(lo), n);
}

SampleRange SignalMap::support(const Vec& theta) const {
  if (const auto* p = std::get_if<Pulse>(&kind_)) {
    check_theta(theta);
    return pulse_range(theta[0], p->width, p->num_samples);
  }
  return SampleRange{0, output_dim_};
}

Vec eval_signal(const SignalMap& map, const Vec& theta) { return map.eval(theta); }

// --- NoiseLaw --------------------------------------------------------------

NoiseLaw NoiseLaw::gaussian(Vec mean, Covariance cov) {
  if (static_cast<std::size_t>(mean.size()) != cov.dim()) {
    throw ModelError("Gaussian noise mean and covariance dimensions differ");
  }
  const std::size_t dim = cov.dim();
  return NoiseLaw(GaussianLaw{std::move(mean), std::move(cov)}, dim);
}

NoiseLaw NoiseLaw::mixture(std::vector<double> weights, std::vector<GaussianLaw> components) {
  check_weights(weights);
  if (components.size() != weights.size()) throw ModelError("mixture weights and components differ in count");
  const std::size_t dim = components.front().cov.dim();
  for (const auto& c : components) {
    if (c.cov.dim() != dim || static_cast<std::size_t>(c.mean.size()) != dim) {
      throw ModelError("mixture components have inconsistent dimensions");
    }
  }
  return NoiseLaw(Mixture{std::move(weights), std::move(components)}, dim);
}

NoiseLaw NoiseLaw::sample_mixture(std::vector<double> weights, std::vector<double> means,
                                  std::vector<double> variances, std::size_t num_samples) {
  check_weights(weights);
  if (means.size() != weights.size() || variances.size() != weights.size()) {
    throw ModelError("sample mixture weights, means and variances differ in count");
  }
  for (double v : variances) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ModelError("sample mixture variances must be positive");
  }
  if (num_samples == 0) throw ModelError("sample mixture dimension must be positive");
  return NoiseLaw(SampleMixture{std::move(weights), std::move(means), std::move(variances), num_samples},
                  num_samples);
}

NoiseLaw NoiseLaw::empirical(std::function<Vec(Rng&)> sampler, std::size_t num_samples) {
  if (!sampler) throw ModelError("empirical noise law needs a sampler");
  if (num_samples == 0) throw ModelError("empirical noise dimension must be positive");
  return NoiseLaw(Empirical{std::move(sampler), num_samples}, num_samples);
}

GaussianLaw NoiseLaw::moments() const {
  return std::visit(
      Overloaded{
          [](const GaussianLaw& g) { return g; },
          [this](const Mixture& m) {
            const auto n = static_cast<Eigen::Index>(dim_);
            Vec mean = Vec::Zero(n);
            for (std::size_t i = 0; i < m.weights.size(); ++i) mean += m.weights[i] * m.components[i].mean;
            Mat cov = Mat::Zero(n, n);
            for (std::size_t i = 0; i < m.weights.size(); ++i) {
              const Vec dm = m.components[i].mean - mean;
              cov += m.weights[i] * (m.components[i].cov.to_dense() + dm * dm.transpose());
            }
            return GaussianLaw{mean, Covariance::dense(cov)};
          },
          [](const SampleMixture& m) {
            double mean = 0.0;
            for (std::size_t i = 0; i < m.weights.size(); ++i) mean += m.weights[i] * m.means[i];
            double var = 0.0;
            for (std::size_t i = 0; i < m.weights.size(); ++i) {
              const double dm = m.means[i] - mean;
              var += m.weights[i] * (m.variances[i] + dm * dm);
            }
            return GaussianLaw{Vec::Constant(static_cast<Eigen::Index>(m.num_samples), mean),
                               Covariance::scaled_identity(m.num_samples, var)};
          },
          [](const Empirical&) -> GaussianLaw {
            throw UnsupportedVariant("empirical noise law has no analytic moments");
          }},
      law_);
}

Vec NoiseLaw::sample(Rng& rng) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  auto draw_gaussian = [&](const GaussianLaw& g) {
    Vec z(n);
    for (Eigen::Index k = 0; k < n; ++k) z[k] = rng.normal();
    return Vec(g.mean + g.cov.color(z));
  };
  return std::visit(
      Overloaded{
          [&](const GaussianLaw& g) { return draw_gaussian(g); },
          [&](const Mixture& m) { return draw_gaussian(m.components[pick_component(m.weights, rng)]); },
          [&](const SampleMixture& m) {
            std::vector<double> sd(m.variances.size());
            std::transform(m.variances.begin(), m.variances.end(), sd.begin(),
                           [](double v) { return std::sqrt(v); });
            Vec out(n);
            for (Eigen::Index k = 0; k < n; ++k) {
              const std::size_t c = pick_component(m.weights, rng);
              out[k] = m.means[c] + sd[c] * rng.normal();
            }
            return out;
          },
          [&](const Empirical& e) {
            Vec out = e.sampler(rng);
            if (out.size() != n) throw ModelError("empirical sampler returned the wrong length");
            return out;
          }},
      law_);
}

// --- Models ------------------------------------------------------------------

AssumedModel::AssumedModel(SignalMap signal, Vec noise_mean, Covariance noise_cov)
    : signal_(std::move(signal)), mean_(std::move(noise_mean)), cov_(std::move(noise_cov)) {
  if (static_cast<std::size_t>(mean_.size()) != signal_.output_dim() || cov_.dim() != signal_.output_dim()) {
    throw ModelError("assumed model: signal, mean and covariance dimensions disagree");
  }
}

TrueModel::TrueModel(SignalMap signal, NoiseLaw noise) : signal_(std::move(signal)), noise_(std::move(noise)) {
  if (noise_.dim() != signal_.output_dim()) {
    throw ModelError("true model: signal and noise dimensions disagree");
  }
}

Vec sample_observation(const TrueModel& model, const Vec& theta, Rng& rng) {
  return model.signal().eval(theta) + model.noise().sample(rng);
}

Vec sample_observation(const TrueModel& model, const Vec& theta, std::uint64_t seed) {
  Rng rng(seed);
  return sample_observation(model, theta, rng);
}

// --- Prior -------------------------------------------------------------------

Prior::Prior(std::vector<Marginal> marginals) : marginals_(std::move(marginals)) {
  if (marginals_.empty()) throw ModelError("prior needs at least one coordinate");
  for (const auto& m : marginals_) {
    if (const auto* c = std::get_if<Continuous>(&m)) {
      if (!(c->hi > c->lo) || !std::isfinite(c->lo) || !std::isfinite(c->hi)) {
        throw ModelError("uniform prior needs finite bounds with hi > lo");
      }
    } else {
      const auto& l = std::get<Lattice>(m);
      if (l.count == 0) throw ModelError("discrete prior needs at least one value");
      if (!(l.step > 0.0) || !std::isfinite(l.start)) throw ModelError("discrete prior needs a positive step");
    }
  }
}

Prior Prior::uniform_interval(double T) {
  if (!(T > 0.0)) throw ModelError("uniform interval prior needs T > 0");
  return Prior({Continuous{0.0, T}});
}

Prior Prior::uniform_box(const Vec& lo, const Vec& hi) {
  if (lo.size() != hi.size()) throw ModelError("uniform box bounds differ in dimension");
  std::vector<Marginal> m;
  for (Eigen::Index i = 0; i < lo.size(); ++i) m.emplace_back(Continuous{lo[i], hi[i]});
  return Prior(std::move(m));
}

Prior Prior::discrete_uniform(std::vector<Lattice> lattices) {
  std::vector<Marginal> m(lattices.begin(), lattices.end());
  return Prior(std::move(m));
}

double Prior::lower(std::size_t i) const {
  return std::visit(Overloaded{[](const Continuous& c) { return c.lo; }, [](const Lattice& l) { return l.start; }},
                    marginals_.at(i));
}

double Prior::upper(std::size_t i) const {
  return std::visit(Overloaded{[](const Continuous& c) { return c.hi; }, [](const Lattice& l) { return l.last(); }},
                    marginals_.at(i));
}

double Prior::width(std::size_t i) const { return upper(i) - lower(i); }

double Prior::variance(std::size_t i) const {
  return std::visit(Overloaded{[](const Continuous& c) { return (c.hi - c.lo) * (c.hi - c.lo) / 12.0; },
                               [](const Lattice& l) {
                                 const double n = static_cast<double>(l.count);
                                 return (n * n - 1.0) / 12.0 * l.step * l.step;
                               }},
                    marginals_.at(i));
}

bool Prior::contains(const Vec& theta) const {
  if (static_cast<std::size_t>(theta.size()) != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double t = theta[static_cast<Eigen::Index>(i)];
    if (const auto* l = std::get_if<Lattice>(&marginals_[i])) {
      const double k = (t - l->start) / l->step;
      const double r = std::round(k);
      if (std::fabs(k - r) > 1e-9 || r < 0.0 || r > static_cast<double>(l->count - 1)) return false;
    } else if (t < lower(i) || t > upper(i)) {
      return false;
    }
  }
  return true;
}

Vec Prior::clamp(const Vec& theta) const {
  Vec out = theta;
  for (std::size_t i = 0; i < dim(); ++i) {
    auto& t = out[static_cast<Eigen::Index>(i)];
    t = std::clamp(t, lower(i), upper(i));
    if (const auto* l = std::get_if<Lattice>(&marginals_[i])) {
      t = l->start + l->step * std::round((t - l->start) / l->step);
    }
  }
  return out;
}

Vec Prior::sample(Rng& rng) const {
  Vec out(static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) {
    out[static_cast<Eigen::Index>(i)] = std::visit(
        Overloaded{[&](const Continuous& c) { return rng.uniform(c.lo, c.hi); },
                   [&](const Lattice& l) { return l.start + l.step * static_cast<double>(rng.below(l.count)); }},
        marginals_[i]);
  }
  return out;
}

double Prior::overlap(const Vec& delta) const {
  if (static_cast<std::size_t>(delta.size()) != dim()) throw ModelError("overlap: dimension mismatch");
  double a = 1.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double d = std::fabs(delta[static_cast<Eigen::Index>(i)]);
    if (const auto* l = std::get_if<Lattice>(&marginals_[i])) {
      const double k = d / l->step;
      const double r = std::round(k);
      if (std::fabs(k - r) > 1e-9) return 0.0;
      const double n = static_cast<double>(l->count);
      a *= std::max(0.0, (n - r) / n);
    } else {
      const auto& c = std::get<Continuous>(marginals_[i]);
      a *= std::max(0.0, 1.0 - d / (c.hi - c.lo));
    }
    if (a == 0.0) return 0.0;
  }
  return a;
}

}  // namespace mzzb
