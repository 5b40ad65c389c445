#include "mzzb/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "mzzb/error.hpp"

namespace mzzb {

QuadResult simpson(const std::function<double(double)>& f, double a, double b, const QuadOptions& opts) {
  QuadResult out;
  if (!(b > a)) {
    out.converged = true;
    return out;
  }
  auto eval = [&](double x) {
    ++out.evaluations;
    const double v = f(x);
    if (!std::isfinite(v)) throw DomainError("quadrature integrand is not finite");
    return v;
  };

  // Running sums of f at panel ends, at even interior nodes and at odd
  // (newest) nodes; doubling turns the old odd nodes into even ones.
  const double ends = eval(a) + eval(b);
  double even = 0.0;
  double odd = eval(0.5 * (a + b));
  std::size_t panels = 2;
  auto estimate = [&] { return (b - a) / static_cast<double>(panels) / 3.0 * (ends + 2.0 * even + 4.0 * odd); };

  double previous = estimate();
  int agreements = 0;
  for (int level = 2; level <= opts.max_level; ++level) {
    even += odd;
    panels *= 2;
    const double h = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t i = 1; i < panels; i += 2) sum += eval(a + h * static_cast<double>(i));
    odd = sum;
    const double current = estimate();
    if (level >= opts.min_level) {
      const double diff = std::fabs(current - previous);
      if (diff <= opts.rel_tol * std::fabs(current) + opts.abs_tol) {
        if (++agreements >= 2) {
          out.value = current;
          out.converged = true;
          return out;
        }
      } else {
        agreements = 0;
      }
    }
    previous = current;
  }
  out.value = previous;
  out.converged = false;
  return out;
}

GaussLegendre gauss_legendre(std::size_t n) {
  if (n == 0) throw DomainError("gauss_legendre needs at least one node");
  GaussLegendre g;
  g.nodes.resize(n);
  g.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.weights[i] = w;
    g.weights[n - 1 - i] = w;
  }
  return g;
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t mid = n / 2;
  return pairwise_sum(values.first(mid)) + pairwise_sum(values.subspan(mid));
}

}  // namespace mzzb
