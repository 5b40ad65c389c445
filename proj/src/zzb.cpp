#include "mzzb/zzb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

#include "mzzb/error.hpp"
#include "mzzb/parallel.hpp"
#include "mzzb/special_math.hpp"

namespace mzzb {

namespace {

void check_T(double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("prior interval T must be positive and finite");
}

BoundResult from_quad(const QuadResult& q, double scale, std::string method) {
  BoundResult r;
  r.value = std::max(0.0, q.value * scale);
  r.converged = q.converged;
  r.evaluations = q.evaluations;
  r.method = std::move(method);
  r.all_zero = q.value == 0.0;
  return r;
}

}  // namespace

BoundResult zzb_scalar_independent(double T, const std::function<double(double)>& pe, const QuadOptions& opts) {
  check_T(T);
  const auto q = simpson([&](double h) { return h * (T - h) * pe(h); }, 0.0, T, opts);
  return from_quad(q, 1.0 / T, "quadrature_independent");
}

BoundResult zzb_scalar_general(double T, const std::function<double(double, double)>& pe, const QuadOptions& outer,
                               const QuadOptions& inner) {
  check_T(T);
  bool inner_ok = true;
  std::size_t evaluations = 0;
  auto outer_integrand = [&](double h) {
    if (h == 0.0 || h >= T) return 0.0;
    const auto q = simpson([&](double t) { return pe(t, h); }, 0.0, T - h, inner);
    inner_ok = inner_ok && q.converged;
    evaluations += q.evaluations;
    return h * q.value;
  };
  const auto q = simpson(outer_integrand, 0.0, T, outer);
  BoundResult r = from_quad(q, 1.0 / T, "quadrature_general");
  r.converged = q.converged && inner_ok;
  r.evaluations = evaluations;
  return r;
}

BoundResult zzb_scalar_symmetric(double T, const std::function<double(double)>& signed_pe, const QuadOptions& opts) {
  check_T(T);
  const auto q = simpson([&](double h) { return h * (T - h) * (signed_pe(h) + signed_pe(-h)); }, 0.0, T, opts);
  return from_quad(q, 0.5 / T, "quadrature_symmetric");
}

double zzb_closed_form_q_linear(double gamma, double T) {
  if (!(gamma > 0.0) || !(T > 0.0)) throw DomainError("closed-form bound needs gamma > 0 and T > 0");
  const double tg = T * gamma;
  const double x = 0.5 * tg * tg;
  return T * T / 6.0 * q_function(tg) + inc_gamma_reg(1.5, x) / (4.0 * gamma * gamma) -
         2.0 / (3.0 * T * std::sqrt(2.0 * std::numbers::pi) * gamma * gamma * gamma) * inc_gamma_reg(2.0, x);
}

double zzb_asymptotic_q_linear(double gamma) {
  if (!(gamma > 0.0)) throw DomainError("asymptotic bound needs gamma > 0");
  return 1.0 / (4.0 * gamma * gamma);
}

double mixture_location_fisher(const std::vector<double>& weights, const std::vector<double>& means,
                               const std::vector<double>& variances) {
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) active.push_back(i);
  }
  if (active.empty()) throw ModelError("mixture has no component with positive weight");
  if (active.size() == 1) return 1.0 / variances[active[0]];

  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (std::size_t i : active) {
    const double sd = std::sqrt(variances[i]);
    lo = first ? means[i] - 40.0 * sd : std::min(lo, means[i] - 40.0 * sd);
    hi = first ? means[i] + 40.0 * sd : std::max(hi, means[i] + 40.0 * sd);
    first = false;
  }
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto integrand = [&](double x) {
    double p = 0.0;
    double dp = 0.0;
    for (std::size_t i : active) {
      const double z = (x - means[i]) / std::sqrt(variances[i]);
      const double pdf = weights[i] * norm * std::exp(-0.5 * z * z) / std::sqrt(variances[i]);
      p += pdf;
      dp -= pdf * (x - means[i]) / variances[i];
    }
    return p > 0.0 ? dp * dp / p : 0.0;
  };
  const auto q = simpson(integrand, lo, hi, QuadOptions{1e-12, 0.0, 12, 26});
  if (!q.converged) throw DomainError("mixture Fisher information quadrature did not converge");
  return q.value;
}

double gamma_from_scenario(const AssumedModel& assumed, const TrueModel& truth, GammaCase which) {
  if (assumed.signal().param_dim() != 1 || !assumed.signal().same_linear_map(truth.signal())) {
    throw UnsupportedVariant("gamma needs identical scalar linear signal maps");
  }
  const Vec h = assumed.signal().linear_matrix().col(0);
  const Covariance& sigma = assumed.noise_cov();
  const NoiseLaw& law = truth.noise();

  auto mismatch = [&](const GaussianLaw& g) {
    if (assumed.noise_mean() != g.mean) {
      throw UnsupportedVariant("gamma needs equal assumed and true noise means");
    }
    const double a = sigma.inv_quad(h, h);
    if (sigma.same_as(g.cov)) return 0.5 * std::sqrt(a);
    return a / (2.0 * std::sqrt(g.cov.quad(sigma.solve(h))));
  };

  switch (which) {
    case GammaCase::CovarianceMismatch: {
      const GaussianLaw* g = law.as_gaussian();
      if (!g) throw UnsupportedVariant("covariance-mismatch gamma needs Gaussian true noise");
      return mismatch(*g);
    }
    case GammaCase::Matched: {
      const GaussianLaw* g = law.as_gaussian();
      if (!g) throw UnsupportedVariant("matched gamma needs Gaussian true noise");
      return 0.5 * std::sqrt(g->cov.inv_quad(h, h));
    }
    case GammaCase::MixturePooled: {
      if (!law.as_mixture() && !law.as_sample_mixture()) {
        throw UnsupportedVariant("pooled gamma needs mixture true noise");
      }
      return mismatch(law.moments());
    }
    case GammaCase::MatchedLocal: {
      const auto* m = law.as_sample_mixture();
      if (!m) throw UnsupportedVariant("local matched gamma needs per-sample mixture noise");
      return 0.5 * std::sqrt(mixture_location_fisher(m->weights, m->means, m->variances) * h.squaredNorm());
    }
  }
  throw UnsupportedVariant("unknown gamma case");
}

double prior_overlap(const Prior& prior, const Vec& delta) { return prior.overlap(delta); }

// --- vector bound ------------------------------------------------------------

namespace {

struct Node {
  double value;
  double weight;
};

class VectorProblem {
 public:
  explicit VectorProblem(const VectorBoundSpec& spec) : spec_(spec), gl_(gauss_legendre(spec.continuous_nodes)) {
    const Prior& prior = spec.prior;
    if (static_cast<std::size_t>(spec.direction.size()) != prior.dim()) {
      throw ModelError("direction and prior differ in dimension");
    }
    if (!(spec.direction.norm() > 0.0)) throw DomainError("direction must be nonzero");
    if (!spec.pe && !spec.pe_independent) throw ModelError("vector bound needs an error probability");
    spec.direction.cwiseAbs().maxCoeff(&dep_index_);
    dep_ = static_cast<std::size_t>(dep_index_);
    for (std::size_t i = 0; i < prior.dim(); ++i) {
      if (i != dep_) free_.push_back(i);
    }
  }

  std::size_t dep() const { return dep_; }
  const std::vector<std::size_t>& free() const { return free_; }
  std::size_t evaluations() const { return evaluations_.load(); }

  Vec make_delta(double h, const std::vector<double>& free_values) const {
    const Vec& a = spec_.direction;
    Vec delta(a.size());
    double rest = h;
    for (std::size_t j = 0; j < free_.size(); ++j) {
      delta[static_cast<Eigen::Index>(free_[j])] = free_values[j];
      rest -= a[static_cast<Eigen::Index>(free_[j])] * free_values[j];
    }
    delta[dep_index_] = rest / a[dep_index_];
    return delta;
  }

  /// A(delta) times the mean of Pe over the overlap region.
  double objective(const Vec& delta) const {
    const double overlap = spec_.prior.overlap(delta);
    if (overlap <= 0.0) return 0.0;
    if (spec_.pe_independent) {
      ++evaluations_;
      return overlap * spec_.pe_independent(delta);
    }
    std::vector<std::vector<Node>> nodes(delta.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = coordinate_nodes(i, delta[static_cast<Eigen::Index>(i)]);
    double num = 0.0;
    double den = 0.0;
    std::vector<std::size_t> pos(nodes.size(), 0);
    Vec theta(delta.size());
    for (;;) {
      double w = 1.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        theta[static_cast<Eigen::Index>(i)] = nodes[i][pos[i]].value;
        w *= nodes[i][pos[i]].weight;
      }
      ++evaluations_;
      num += w * spec_.pe(theta, delta);
      den += w;
      std::size_t i = 0;
      while (i < nodes.size() && ++pos[i] == nodes[i].size()) pos[i++] = 0;
      if (i == nodes.size()) break;
    }
    return overlap * num / den;
  }

  /// max over the free coordinates of objective(make_delta(h, .)).
  double maximize(double h) const {
    if (free_.empty()) return objective(make_delta(h, {}));
    std::vector<std::vector<double>> grids;
    for (std::size_t i : free_) grids.push_back(free_grid(i));

    std::vector<double> best(free_.size());
    double best_value = -1.0;
    std::vector<std::size_t> pos(free_.size(), 0);
    std::vector<double> cur(free_.size());
    for (;;) {
      for (std::size_t j = 0; j < free_.size(); ++j) cur[j] = grids[j][pos[j]];
      const double v = objective(make_delta(h, cur));
      if (v > best_value) {
        best_value = v;
        best = cur;
      }
      std::size_t j = 0;
      while (j < free_.size() && ++pos[j] == grids[j].size()) pos[j++] = 0;
      if (j == free_.size()) break;
    }

    for (int pass = 0; pass < spec_.search.refine_passes; ++pass) {
      for (std::size_t j = 0; j < free_.size(); ++j) {
        const std::size_t i = free_[j];
        auto at = [&](double x) {
          std::vector<double> trial = best;
          trial[j] = x;
          return objective(make_delta(h, trial));
        };
        if (spec_.prior.is_lattice(i)) {
          const double step = std::get<Prior::Lattice>(spec_.prior.marginal(i)).step;
          const double limit = spec_.prior.width(i);
          for (double dir : {1.0, -1.0}) {
            for (;;) {
              const double x = best[j] + dir * step;
              if (std::fabs(x) > limit) break;
              const double v = at(x);
              if (v <= best_value) break;
              best_value = v;
              best[j] = x;
            }
          }
        } else {
          const double width = spec_.prior.width(i);
          const double cell = 2.0 * width / static_cast<double>(std::max<std::size_t>(grids[j].size() - 1, 1));
          double lo = std::max(-width, best[j] - cell);
          double hi = std::min(width, best[j] + cell);
          const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
          double x1 = hi - ratio * (hi - lo);
          double x2 = lo + ratio * (hi - lo);
          double f1 = at(x1);
          double f2 = at(x2);
          while (hi - lo > spec_.search.tolerance * width) {
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
          const double x = f1 > f2 ? x1 : x2;
          const double v = std::max(f1, f2);
          if (v > best_value) {
            best_value = v;
            best[j] = x;
          }
        }
      }
    }
    return std::max(0.0, best_value);
  }

 private:
  std::vector<double> free_grid(std::size_t i) const {
    const std::size_t g = std::max<std::size_t>(spec_.search.grid_points, 1);
    std::vector<double> out;
    if (spec_.prior.is_lattice(i)) {
      const auto& l = std::get<Prior::Lattice>(spec_.prior.marginal(i));
      const auto span = static_cast<long long>(l.count) - 1;
      for (std::size_t k = 0; k < g; ++k) {
        const double frac = g == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(g - 1);
        const long long m = std::llround(-static_cast<double>(span) + 2.0 * static_cast<double>(span) * frac);
        const double v = static_cast<double>(m) * l.step;
        if (out.empty() || out.back() != v) out.push_back(v);
      }
    } else {
      const double w = spec_.prior.width(i);
      for (std::size_t k = 0; k < g; ++k) {
        out.push_back(g == 1 ? 0.0 : -w + 2.0 * w * static_cast<double>(k) / static_cast<double>(g - 1));
      }
    }
    return out;
  }

  std::vector<Node> coordinate_nodes(std::size_t i, double d) const {
    std::vector<Node> out;
    const Prior::Marginal& m = spec_.prior.marginal(i);
    if (const auto* l = std::get_if<Prior::Lattice>(&m)) {
      const long long shift = std::llround(d / l->step);
      const long long n = static_cast<long long>(l->count);
      const long long kmin = std::max(0LL, -shift);
      const long long kmax = std::min(n - 1, n - 1 - shift);
      const long long count = kmax - kmin + 1;
      const long long take = std::min<long long>(count, static_cast<long long>(std::max<std::size_t>(spec_.lattice_nodes, 1)));
      for (long long j = 0; j < take; ++j) {
        // Midpoint of the j-th of `take` equal cells; every point when take == count.
        const long long k = kmin + ((2 * j + 1) * count) / (2 * take);
        out.push_back(Node{l->start + l->step * static_cast<double>(k), 1.0});
      }
    } else {
      const auto& c = std::get<Prior::Continuous>(m);
      const double lo = std::max(c.lo, c.lo - d);
      const double hi = std::min(c.hi, c.hi - d);
      const double mid = 0.5 * (lo + hi);
      const double half = 0.5 * (hi - lo);
      for (std::size_t j = 0; j < gl_.nodes.size(); ++j) out.push_back(Node{mid + half * gl_.nodes[j], gl_.weights[j]});
    }
    return out;
  }

  const VectorBoundSpec& spec_;
  GaussLegendre gl_;
  Eigen::Index dep_index_ = 0;
  std::size_t dep_ = 0;
  std::vector<std::size_t> free_;
  mutable std::atomic<std::size_t> evaluations_{0};
};

}  // namespace

BoundResult zzb_vector(const VectorBoundSpec& spec) {
  VectorProblem problem(spec);
  const Prior& prior = spec.prior;
  const Vec& a = spec.direction;
  const std::size_t dep = problem.dep();
  BoundResult r;
  r.method = spec.pe_independent ? "vector_theta_independent" : "vector_theta_dependent";

  if (prior.is_lattice(dep)) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const bool expected = static_cast<std::size_t>(i) == dep ? std::fabs(a[i]) == 1.0 : a[i] == 0.0;
      if (!expected) throw UnsupportedVariant("a lattice coordinate can only be bounded along its unit axis");
    }
    r.method += "_lattice";
    const auto& l = std::get<Prior::Lattice>(prior.marginal(dep));
    const std::size_t n = l.count;
    if (n < 2) {
      r.all_zero = true;
      return r;
    }
    // Offsets m = 1..n-1: every one up to dense_steps, then every stride-th and the last.
    std::vector<std::size_t> eval_m;
    const std::size_t stride = std::max<std::size_t>(spec.stride, 1);
    for (std::size_t m = 1; m < n; ++m) {
      if (m <= spec.dense_steps || (m - spec.dense_steps) % stride == 0 || m == n - 1) eval_m.push_back(m);
    }
    std::vector<double> f(eval_m.size());
    parallel_for(eval_m.size(), spec.workers == 0 ? default_workers() : spec.workers, [&](std::size_t j) {
      f[j] = problem.maximize(a[static_cast<Eigen::Index>(dep)] * static_cast<double>(eval_m[j]) * l.step);
    });
    std::vector<double> terms(n - 1);
    std::size_t j = 0;
    for (std::size_t m = 1; m < n; ++m) {
      while (eval_m[j] < m) ++j;
      double fm;
      if (eval_m[j] == m) {
        fm = f[j];
      } else {
        const double t = static_cast<double>(m - eval_m[j - 1]) / static_cast<double>(eval_m[j] - eval_m[j - 1]);
        fm = (1.0 - t) * f[j - 1] + t * f[j];
      }
      const double hm = static_cast<double>(m) * l.step;
      terms[m - 1] = fm * l.step * (hm - 0.5 * l.step);
    }
    r.value = pairwise_sum(terms);
    r.all_zero = r.value == 0.0;
    r.evaluations = problem.evaluations();
    return r;
  }

  double h_max = 0.0;
  for (std::size_t i = 0; i < prior.dim(); ++i) h_max += std::fabs(a[static_cast<Eigen::Index>(i)]) * prior.width(i);
  auto integrand = [&](double h) { return h == 0.0 ? 0.0 : h * problem.maximize(h); };

  constexpr std::size_t kProbe = 64;
  std::vector<double> probe(kProbe + 1);
  for (std::size_t k = 0; k <= kProbe; ++k) probe[k] = integrand(h_max * static_cast<double>(k) / kProbe);
  const double peak = *std::max_element(probe.begin(), probe.end());
  if (!(peak > 0.0)) {
    r.all_zero = true;
    r.evaluations = problem.evaluations();
    return r;
  }
  std::size_t last = 0;
  for (std::size_t k = 0; k <= kProbe; ++k) {
    if (probe[k] > 1e-12 * peak) last = k;
  }
  const double upper = h_max * static_cast<double>(std::min(last + 1, kProbe)) / kProbe;
  const auto q = simpson(integrand, 0.0, upper, spec.outer);
  r.value = std::max(0.0, q.value);
  r.converged = q.converged;
  r.evaluations = problem.evaluations();
  return r;
}

}  // namespace mzzb
