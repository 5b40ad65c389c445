#include "mzzb/special_math.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mzzb/error.hpp"

namespace mzzb {

namespace {

constexpr int kMaxIterations = 1000;
constexpr double kEps = 1e-16;

double gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a, x) by modified Lentz.
double gamma_continued_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double q_function(double x) {
  // erfc loses the tail for large negative arguments; reflect instead.
  if (x < 0.0) return 1.0 - 0.5 * std::erfc(-x / std::sqrt(2.0));
  return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double inc_gamma_reg(double a, double x) {
  if (!(a > 0.0)) throw DomainError("inc_gamma_reg: shape must be positive, got " + std::to_string(a));
  if (!(x >= 0.0)) throw DomainError("inc_gamma_reg: argument must be nonnegative, got " + std::to_string(x));
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::min(1.0, gamma_series(a, x));
  return std::max(0.0, 1.0 - gamma_continued_fraction(a, x));
}

double q_limit(double z) {
  if (z < 0.0) return 1.0;
  if (z > 0.0) return 0.0;
  return 0.5;
}

double q_ratio(double z, double sigma) {
  if (sigma == 0.0) return q_limit(z);
  return q_function(z / sigma);
}

}  // namespace mzzb
