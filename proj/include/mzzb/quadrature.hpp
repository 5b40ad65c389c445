#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mzzb {

struct QuadOptions {
  double rel_tol = 1e-9;
  double abs_tol = 0.0;
  int min_level = 8;  // first convergence check uses 2^min_level panels
  int max_level = 22;
};

struct QuadResult {
  double value = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
};

/// Composite Simpson on [a, b] with panel doubling. Converged once two
/// successive refinements change the estimate by at most
/// rel_tol*|value| + abs_tol.
QuadResult simpson(const std::function<double(double)>& f, double a, double b, const QuadOptions& opts = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(std::size_t n);

/// Pairwise (cascade) summation in index order; result depends only on the
/// values, not on how they were produced.
double pairwise_sum(std::span<const double> values);

}  // namespace mzzb
