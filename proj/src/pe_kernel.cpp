#include "mzzb/pe_kernel.hpp"

#include <algorithm>
#include <cmath>

#include "mzzb/error.hpp"
#include "mzzb/parallel.hpp"
#include "mzzb/special_math.hpp"

namespace mzzb {

namespace {

bool law_is_diagonal(const NoiseLaw& law) {
  if (const auto* g = law.as_gaussian()) return g->cov.is_diagonal();
  if (const auto* m = law.as_mixture()) {
    return std::all_of(m->components.begin(), m->components.end(),
                       [](const GaussianLaw& c) { return c.cov.is_diagonal(); });
  }
  return true;
}

std::vector<SampleRange> merge_ranges(SampleRange a, SampleRange b) {
  std::vector<SampleRange> out;
  if (a.lo > b.lo) std::swap(a, b);
  if (a.empty()) {
    if (!b.empty()) out.push_back(b);
    return out;
  }
  if (b.empty()) {
    out.push_back(a);
    return out;
  }
  if (b.lo <= a.hi) {
    out.push_back(SampleRange{a.lo, std::max(a.hi, b.hi)});
  } else {
    out.push_back(a);
    out.push_back(b);
  }
  return out;
}

Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

// Error indicator in half units: 2 for a strict error, 1 for a tie.
inline unsigned half_errors(double llr_signed) {
  if (llr_signed < 0.0) return 2;
  if (llr_signed == 0.0) return 1;
  return 0;
}

}  // namespace

PeKernel::PeKernel(AssumedModel assumed, TrueModel truth) : assumed_(std::move(assumed)), truth_(std::move(truth)) {
  if (assumed_.dim() != truth_.dim()) throw ModelError("assumed and true models differ in observation length");
  if (assumed_.signal().param_dim() != truth_.signal().param_dim()) {
    throw ModelError("assumed and true models differ in parameter dimension");
  }
  windowed_ = assumed_.noise_cov().is_diagonal() && law_is_diagonal(truth_.noise());
}

Projection PeKernel::project(const Vec& theta_o, const Vec& delta) const {
  if (theta_o.size() != delta.size()) throw ModelError("theta_o and delta differ in dimension");
  const SignalMap& h = assumed_.signal();
  const Covariance& cov = assumed_.noise_cov();
  const Vec& mu = assumed_.noise_mean();
  const Vec theta_1 = theta_o + delta;
  Projection p;

  if (windowed_) {
    p.ranges = merge_ranges(h.support(theta_o), h.support(theta_1));
    double half_quad = 0.0;
    double mean_term = 0.0;
    for (const SampleRange& r : p.ranges) {
      const Vec h0 = h.eval_segment(theta_o, r.lo, r.hi);
      const Vec h1 = h.eval_segment(theta_1, r.lo, r.hi);
      Vec w(h0.size());
      for (Eigen::Index j = 0; j < h0.size(); ++j) {
        const double iv = 1.0 / cov.variance(r.lo + static_cast<std::size_t>(j));
        w[j] = (h0[j] - h1[j]) * iv;
        half_quad += 0.5 * (h1[j] * h1[j] - h0[j] * h0[j]) * iv;
        mean_term += mu[idx(r.lo) + j] * w[j];
      }
      p.w.push_back(std::move(w));
    }
    p.offset = half_quad - mean_term;
  } else {
    p.ranges.push_back(SampleRange{0, assumed_.dim()});
    const Vec h0 = h.eval(theta_o);
    const Vec h1 = h.eval(theta_1);
    Vec w = cov.solve(h0 - h1);
    p.offset = 0.5 * (cov.inv_quad(h1, h1) - cov.inv_quad(h0, h0)) - mu.dot(w);
    p.w.push_back(std::move(w));
  }
  p.s0 = S_from(p, theta_o);
  p.s1 = S_from(p, theta_1);
  return p;
}

double PeKernel::S_from(const Projection& p, const Vec& theta_eval) const {
  const SignalMap& hs = truth_.signal();
  double s = p.offset;
  for (std::size_t i = 0; i < p.ranges.size(); ++i) {
    const SampleRange& r = p.ranges[i];
    s += hs.eval_segment(theta_eval, r.lo, r.hi).dot(p.w[i]);
  }
  return s;
}

double PeKernel::compute_S(const Vec& theta_eval, const Vec& theta_o, const Vec& delta) const {
  return S_from(project(theta_o, delta), theta_eval);
}

double PeKernel::project_mean(const Projection& p, const Vec& mean) const {
  double m = 0.0;
  for (std::size_t i = 0; i < p.ranges.size(); ++i) {
    m += mean.segment(idx(p.ranges[i].lo), p.w[i].size()).dot(p.w[i]);
  }
  return m;
}

double PeKernel::project_variance(const Projection& p, const Covariance& cov) const {
  if (p.ranges.size() == 1 && p.ranges[0].lo == 0 && p.ranges[0].hi == cov.dim()) return cov.quad(p.w[0]);
  double v = 0.0;
  if (cov.is_diagonal()) {
    for (std::size_t i = 0; i < p.ranges.size(); ++i) {
      for (Eigen::Index j = 0; j < p.w[i].size(); ++j) {
        v += p.w[i][j] * p.w[i][j] * cov.variance(p.ranges[i].lo + static_cast<std::size_t>(j));
      }
    }
    return v;
  }
  for (std::size_t a = 0; a < p.ranges.size(); ++a) {
    for (std::size_t b = 0; b < p.ranges.size(); ++b) {
      for (Eigen::Index i = 0; i < p.w[a].size(); ++i) {
        for (Eigen::Index j = 0; j < p.w[b].size(); ++j) {
          v += p.w[a][i] * p.w[b][j] *
               cov.entry(p.ranges[a].lo + static_cast<std::size_t>(i), p.ranges[b].lo + static_cast<std::size_t>(j));
        }
      }
    }
  }
  return v;
}

ProjectedNoise projected_noise_stats(const PeKernel& kernel, const Vec& theta_o, const Vec& delta) {
  const NoiseLaw& law = kernel.truth().noise();
  if (law.as_empirical()) throw UnsupportedVariant("projected noise statistics need an analytic noise law");
  const Projection p = kernel.project(theta_o, delta);
  ProjectedNoise out;
  auto component = [&](const GaussianLaw& g, double weight) {
    ProjectedComponent c;
    c.mean = kernel.project_mean(p, g.mean);
    c.stddev = std::sqrt(std::max(0.0, kernel.project_variance(p, g.cov)));
    c.weight = weight;
    return c;
  };
  if (const auto* m = law.as_mixture()) {
    for (std::size_t i = 0; i < m->weights.size(); ++i) out.components.push_back(component(m->components[i], m->weights[i]));
    const GaussianLaw pooled = law.moments();
    out.mean = kernel.project_mean(p, pooled.mean);
    out.stddev = std::sqrt(std::max(0.0, kernel.project_variance(p, pooled.cov)));
    return out;
  }
  const GaussianLaw g = law.as_gaussian() ? *law.as_gaussian() : law.moments();
  out.components.push_back(component(g, 1.0));
  out.mean = out.components[0].mean;
  out.stddev = out.components[0].stddev;
  return out;
}

namespace {

double pe_from_component(const Projection& p, double mean, double stddev) {
  return 0.5 * q_ratio(p.s0 + mean, stddev) + 0.5 * q_ratio(-p.s1 - mean, stddev);
}

double pe_with_law(const PeKernel& kernel, const Projection& p, const GaussianLaw& g) {
  const double mean = kernel.project_mean(p, g.mean);
  const double stddev = std::sqrt(std::max(0.0, kernel.project_variance(p, g.cov)));
  return pe_from_component(p, mean, stddev);
}

}  // namespace

double pe_gaussian(const PeKernel& kernel, const Vec& theta_o, const Vec& delta) {
  const GaussianLaw* g = kernel.truth().noise().as_gaussian();
  if (!g) throw UnsupportedVariant("pe_gaussian needs Gaussian true noise");
  return pe_with_law(kernel, kernel.project(theta_o, delta), *g);
}

double pe_mixture(const PeKernel& kernel, const Vec& theta_o, const Vec& delta) {
  const NoiseLaw::Mixture* m = kernel.truth().noise().as_mixture();
  if (!m) throw UnsupportedVariant("pe_mixture needs mixture true noise");
  const Projection p = kernel.project(theta_o, delta);
  double pe = 0.0;
  for (std::size_t i = 0; i < m->weights.size(); ++i) {
    if (m->weights[i] == 0.0) continue;
    pe += m->weights[i] * pe_with_law(kernel, p, m->components[i]);
  }
  return pe;
}

double pe_moment_matched(const PeKernel& kernel, const Vec& theta_o, const Vec& delta) {
  return pe_with_law(kernel, kernel.project(theta_o, delta), kernel.truth().noise().moments());
}

double pe_analytic(const PeKernel& kernel, const Vec& theta_o, const Vec& delta) {
  const NoiseLaw& law = kernel.truth().noise();
  if (law.as_gaussian()) return pe_gaussian(kernel, theta_o, delta);
  if (law.as_mixture()) return pe_mixture(kernel, theta_o, delta);
  if (law.as_sample_mixture()) return pe_moment_matched(kernel, theta_o, delta);
  throw UnsupportedVariant("no analytic error probability for an empirical noise law");
}

PeEstimate pe_general_mc(const PeKernel& kernel, const Vec& theta_o, const Vec& delta, std::size_t trials,
                         std::uint64_t seed, std::size_t workers) {
  if (trials == 0) throw DomainError("pe_general_mc needs at least one trial");
  const Projection p = kernel.project(theta_o, delta);
  const NoiseLaw& law = kernel.truth().noise();
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (trials + kBlock - 1) / kBlock;
  std::vector<std::uint64_t> err0(blocks, 0);
  std::vector<std::uint64_t> err1(blocks, 0);

  auto project_draw = [&](const Vec& n_star) {
    double n = 0.0;
    for (std::size_t i = 0; i < p.ranges.size(); ++i) {
      n += n_star.segment(idx(p.ranges[i].lo), p.w[i].size()).dot(p.w[i]);
    }
    return n;
  };

  parallel_for(blocks, workers == 0 ? default_workers() : workers, [&](std::size_t b) {
    Rng rng(substream_seed(seed, b));
    const std::size_t end = std::min(trials, (b + 1) * kBlock);
    std::uint64_t e0 = 0;
    std::uint64_t e1 = 0;
    for (std::size_t t = b * kBlock; t < end; ++t) {
      const double n0 = project_draw(law.sample(rng));
      const double n1 = project_draw(law.sample(rng));
      e0 += half_errors(p.s0 + n0);
      e1 += half_errors(-(p.s1 + n1));
    }
    err0[b] = e0;
    err1[b] = e1;
  });

  std::uint64_t total0 = 0;
  std::uint64_t total1 = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    total0 += err0[b];
    total1 += err1[b];
  }
  const double n = static_cast<double>(trials);
  const double p0 = static_cast<double>(total0) / (2.0 * n);
  const double p1 = static_cast<double>(total1) / (2.0 * n);
  PeEstimate out;
  out.pe = 0.5 * (p0 + p1);
  out.std_error = 0.5 * std::sqrt(p0 * (1.0 - p0) / n + p1 * (1.0 - p1) / n);
  out.trials = trials;
  return out;
}

EqualLinearTerms equal_linear_terms(const PeKernel& kernel, const Vec& delta) {
  const AssumedModel& a = kernel.assumed();
  const GaussianLaw* g = kernel.truth().noise().as_gaussian();
  if (!a.signal().same_linear_map(kernel.truth().signal())) {
    throw UnsupportedVariant("pe_equal_linear needs identical linear signal maps");
  }
  if (!g) throw UnsupportedVariant("pe_equal_linear needs Gaussian true noise");
  const Vec v = a.signal().linear_matrix() * delta;
  const Covariance& cov = a.noise_cov();
  const double quad = cov.inv_quad(v, v);
  const double bias = cov.inv_quad(v, a.noise_mean() - g->mean);
  EqualLinearTerms t;
  t.z_plus = 0.5 * quad + bias;
  t.z_minus = 0.5 * quad - bias;
  t.sigma = std::sqrt(std::max(0.0, g->cov.quad(cov.solve(v))));
  return t;
}

double pe_equal_linear(const PeKernel& kernel, const Vec& delta) {
  const EqualLinearTerms t = equal_linear_terms(kernel, delta);
  return 0.5 * (q_ratio(t.z_plus, t.sigma) + q_ratio(t.z_minus, t.sigma));
}

}  // namespace mzzb
