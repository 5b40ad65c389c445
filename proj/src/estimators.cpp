#include "mzzb/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mzzb/error.hpp"

namespace mzzb {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_x(const Vec& x, std::size_t k) {
  if (static_cast<std::size_t>(x.size()) != k) throw ModelError("observation length does not match the model");
  if (!x.allFinite()) throw DomainError("observation has non-finite entries");
}

/// Candidate values of coordinate i: the whole lattice when it fits in the
/// grid budget, otherwise an evenly spaced subset of it.
std::vector<double> coordinate_grid(const Prior& prior, std::size_t i, std::size_t points) {
  std::vector<double> out;
  points = std::max<std::size_t>(points, 2);
  if (const auto* l = std::get_if<Prior::Lattice>(&prior.marginal(i))) {
    if (l->count <= points) {
      for (std::size_t k = 0; k < l->count; ++k) out.push_back(l->start + l->step * static_cast<double>(k));
    } else {
      for (std::size_t j = 0; j < points; ++j) {
        const auto k = static_cast<std::size_t>(std::llround(static_cast<double>(j) * static_cast<double>(l->count - 1) /
                                                             static_cast<double>(points - 1)));
        out.push_back(l->start + l->step * static_cast<double>(k));
      }
    }
  } else {
    const double lo = prior.lower(i);
    const double hi = prior.upper(i);
    for (std::size_t j = 0; j < points; ++j) {
      out.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(points - 1));
    }
  }
  return out;
}

/// Refines coordinate i of theta around its current value; returns the new objective.
template <class F>
double refine_coordinate(const Prior& prior, std::size_t i, Vec& theta, double value, std::size_t points,
                         double tolerance, F&& objective) {
  const auto ii = static_cast<Eigen::Index>(i);
  auto at = [&](double t) {
    Vec trial = theta;
    trial[ii] = t;
    return objective(trial);
  };
  if (const auto* l = std::get_if<Prior::Lattice>(&prior.marginal(i))) {
    for (double dir : {1.0, -1.0}) {
      for (;;) {
        const double t = theta[ii] + dir * l->step;
        if (t < l->start - 1e-9 * l->step || t > l->last() + 1e-9 * l->step) break;
        const double v = at(t);
        if (!(v > value)) break;
        value = v;
        theta[ii] = t;
      }
    }
    return value;
  }
  const double lo_s = prior.lower(i);
  const double hi_s = prior.upper(i);
  const double cell = (hi_s - lo_s) / static_cast<double>(std::max<std::size_t>(points, 2) - 1);
  double lo = std::max(lo_s, theta[ii] - cell);
  double hi = std::min(hi_s, theta[ii] + cell);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = at(x1);
  double f2 = at(x2);
  while (hi - lo > tolerance * (hi_s - lo_s)) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = at(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = at(x1);
    }
  }
  double t = f1 > f2 ? x1 : x2;
  double v = std::max(f1, f2);
  // Comparisons stall at sqrt(eps) resolution; a parabolic vertex step over a
  // wider stencil resolves the maximizer of smooth objectives further.
  const double h = 1e-3 * cell;
  if (t - h >= lo_s && t + h <= hi_s) {
    const double fm = at(t - h);
    const double fp = at(t + h);
    const double curv = fp - 2.0 * v + fm;
    if (curv < 0.0) {
      const double step = -0.5 * h * (fp - fm) / curv;
      if (std::fabs(step) <= h) {
        const double fv = at(t + step);
        if (fv >= v - 1e-12 * (1.0 + std::fabs(v))) {
          t += step;
          v = std::max(v, fv);
        }
      }
    }
  }
  if (v > value) {
    theta[ii] = t;
    value = v;
  }
  return value;
}

bool pulse_profile_applies(const QuasiMle& q, const Prior& prior) {
  return q.model.signal().is_pulse() && q.model.noise_cov().is_diagonal() && prior.dim() == 2 &&
         prior.is_lattice(0) && !prior.is_lattice(1);
}

Vec pulse_profile(const QuasiMle& q, const Vec& x, const Prior& prior) {
  const SignalMap::Pulse& pulse = *q.model.signal().as_pulse();
  const Covariance& cov = q.model.noise_cov();
  const auto& lat = std::get<Prior::Lattice>(prior.marginal(0));
  const double a_lo = prior.lower(1);
  const double a_hi = prior.upper(1);
  const std::size_t K = pulse.num_samples;

  Vec y(x.size());
  Vec inv_var(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    inv_var[k] = 1.0 / cov.variance(static_cast<std::size_t>(k));
    y[k] = (x[k] - q.model.noise_mean()[k]) * inv_var[k];
  }
  const double half = 0.5 * pulse.width;
  double best_score = -std::numeric_limits<double>::infinity();
  Vec best(2);
  for (std::size_t i = 0; i < lat.count; ++i) {
    const double tau = lat.start + lat.step * static_cast<double>(i);
    const double lo = std::clamp(std::ceil(tau - half), 0.0, static_cast<double>(K));
    const double hi = std::clamp(std::floor(tau + half) + 1.0, 0.0, static_cast<double>(K));
    double c = 0.0;
    double e = 0.0;
    for (auto k = static_cast<Eigen::Index>(lo); k < static_cast<Eigen::Index>(hi); ++k) {
      const double s = std::max(0.0, 1.0 - std::fabs(static_cast<double>(k) - tau) / half);
      c += s * y[k];
      e += s * s * inv_var[k];
    }
    if (!(e > 0.0)) continue;
    const double alpha = std::clamp(c / e, a_lo, a_hi);
    const double score = 2.0 * alpha * c - alpha * alpha * e;
    if (score > best_score) {
      best_score = score;
      best[0] = tau;
      best[1] = alpha;
    }
  }
  if (!std::isfinite(best_score)) throw DomainError("pulse scan found no delay inside the observation");
  return best;
}

Vec quasi_mle(const QuasiMle& q, const Vec& x, const Prior& prior) {
  if (prior.dim() != q.model.signal().param_dim()) throw ModelError("prior and model differ in parameter dimension");
  if (pulse_profile_applies(q, prior)) return pulse_profile(q, x, prior);

  auto objective = [&](const Vec& theta) { return log_likelihood(q.model, x, theta); };
  const std::size_t n = prior.dim();
  Vec theta(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) theta[static_cast<Eigen::Index>(i)] = 0.5 * (prior.lower(i) + prior.upper(i));
  theta = prior.clamp(theta);
  double value = objective(theta);

  const int passes = n == 1 ? 1 : std::max(q.search.coordinate_passes, 1);
  for (int pass = 0; pass < passes; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      for (double t : coordinate_grid(prior, i, q.search.grid_points)) {
        Vec trial = theta;
        trial[ii] = t;
        const double v = objective(trial);
        if (v > value) {
          value = v;
          theta = trial;
        }
      }
      value = refine_coordinate(prior, i, theta, value, q.search.grid_points, q.search.tolerance, objective);
    }
  }
  return theta;
}

Vec linear_closed_form(const LinearClosedForm& e, const Vec& x) {
  const AssumedModel& m = e.model;
  if (!m.signal().is_linear()) throw UnsupportedVariant("closed-form estimator needs a linear signal map");
  const Mat H = m.signal().linear_matrix();
  Mat W(H.rows(), H.cols());
  for (Eigen::Index j = 0; j < H.cols(); ++j) W.col(j) = m.noise_cov().solve(H.col(j));
  const Mat A = H.transpose() * W;
  const Vec b = W.transpose() * (x - m.noise_mean());
  if (A.cols() == 1) return Vec::Constant(1, b[0] / A(0, 0));
  return A.ldlt().solve(b);
}

void check_unit_scalar(const std::optional<SignalMap>& signal, const Prior& prior) {
  if (prior.dim() != 1) throw UnsupportedVariant("sample median estimates a scalar parameter only");
  if (!signal) return;
  if (signal->param_dim() != 1 || !signal->is_linear()) {
    throw UnsupportedVariant("sample median needs a scalar linear signal");
  }
  const Mat H = signal->linear_matrix();
  if ((H.array() != 1.0).any()) throw UnsupportedVariant("sample median needs a unit (all-ones) signal");
}

Vec mixture_mle(const MixtureMle& e, const Vec& x) {
  if (e.weights.empty() || e.weights.size() != e.means.size() || e.weights.size() != e.variances.size()) {
    throw ModelError("mixture MLE needs matching weights, means and variances");
  }
  const std::size_t L = e.weights.size();
  std::vector<double> coef(L);
  for (std::size_t i = 0; i < L; ++i) coef[i] = e.weights[i] / std::sqrt(2.0 * std::numbers::pi * e.variances[i]);
  double theta = sample_median(x);
  std::vector<double> log_terms(L);
  for (int it = 0; it < e.max_iterations; ++it) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      // Responsibilities in log space so far-out samples do not underflow.
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < L; ++i) {
        const double r = x[k] - theta - e.means[i];
        log_terms[i] = coef[i] > 0.0 ? std::log(coef[i]) - 0.5 * r * r / e.variances[i]
                                     : -std::numeric_limits<double>::infinity();
        top = std::max(top, log_terms[i]);
      }
      double total = 0.0;
      for (std::size_t i = 0; i < L; ++i) total += std::exp(log_terms[i] - top);
      for (std::size_t i = 0; i < L; ++i) {
        const double resp = std::exp(log_terms[i] - top) / total;
        num += resp * (x[k] - e.means[i]) / e.variances[i];
        den += resp / e.variances[i];
      }
    }
    const double next = num / den;
    const bool done = std::fabs(next - theta) <= e.tolerance * (1.0 + std::fabs(theta));
    theta = next;
    if (done) break;
  }
  return Vec::Constant(1, theta);
}

}  // namespace

double log_likelihood(const AssumedModel& model, const Vec& x, const Vec& theta) {
  check_x(x, model.dim());
  const Vec r = x - model.signal().eval(theta) - model.noise_mean();
  return -0.5 * model.noise_cov().inv_quad(r, r);
}

double sample_median(const Vec& x) {
  if (x.size() == 0) throw DomainError("median of an empty sample");
  std::vector<double> v(x.data(), x.data() + x.size());
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Vec estimate(const EstimatorSpec& spec, const Vec& x, const Prior& prior) {
  if (!x.allFinite()) throw DomainError("observation has non-finite entries");
  return std::visit(Overloaded{[&](const QuasiMle& q) {
                                 check_x(x, q.model.dim());
                                 return quasi_mle(q, x, prior);
                               },
                               [&](const LinearClosedForm& e) {
                                 check_x(x, e.model.dim());
                                 return linear_closed_form(e, x);
                               },
                               [&](const SampleMedian& e) {
                                 check_unit_scalar(e.signal, prior);
                                 if (e.signal) check_x(x, e.signal->output_dim());
                                 return Vec(Vec::Constant(1, sample_median(x.array() - e.offset)));
                               },
                               [&](const MixtureMle& e) {
                                 if (prior.dim() != 1) throw UnsupportedVariant("mixture MLE estimates a scalar location");
                                 return mixture_mle(e, x);
                               }},
                    spec);
}

}  // namespace mzzb
