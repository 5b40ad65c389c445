#include <gtest/gtest.h>

#include <Eigen/LU>

#include <cmath>

#include "mzzb/error.hpp"
#include "mzzb/pe_kernel.hpp"
#include "mzzb/special_math.hpp"

using namespace mzzb;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Vec s1(double x) { return Vec::Constant(1, x); }

PeKernel scalar_kernel(const Vec& h, const Covariance& assumed_cov, const Covariance& true_cov, double mu = 0.0,
                       double mu_star = 0.0) {
  const auto K = h.size();
  const SignalMap map = SignalMap::linear_vector(h);
  return PeKernel(AssumedModel(map, Vec::Constant(K, mu), assumed_cov),
                  TrueModel(map, NoiseLaw::gaussian(Vec::Constant(K, mu_star), true_cov)));
}

}  // namespace

TEST(ComputeS, ZeroOffsetIsZero) {
  const PeKernel k = scalar_kernel(vec({1, 2, 3}), Covariance::scaled_identity(3, 2.0), Covariance::scaled_identity(3, 1.0));
  EXPECT_EQ(k.compute_S(s1(0.7), s1(0.7), s1(0.0)), 0.0);
}

TEST(ComputeS, ScalarLinearHalfSquaredDistance) {
  const Vec h = vec({1.0, -2.0, 0.5});
  const Covariance cov = Covariance::diagonal(vec({1.0, 4.0, 0.25}));
  const PeKernel k = scalar_kernel(h, cov, cov);
  const double delta = 1.3;
  EXPECT_NEAR(k.compute_S(s1(2.0), s1(2.0), s1(delta)), 0.5 * delta * delta * cov.inv_quad(h, h), 1e-12);
}

TEST(ComputeS, TwoSampleHandArithmetic) {
  // h(theta) = [theta, 2 theta], Sigma = I, theta_o = delta = theta_eval = 1:
  // 1/2 (4 + 16) - 1/2 (1 + 4) + (1 * (1 - 2) + 2 * (2 - 4)) = 2.5.
  const PeKernel k = scalar_kernel(vec({1, 2}), Covariance::scaled_identity(2, 1.0), Covariance::scaled_identity(2, 1.0));
  EXPECT_NEAR(k.compute_S(s1(1), s1(1), s1(1)), 2.5, 1e-15);
}

TEST(ProjectedNoise, ZeroMeanTruth) {
  const PeKernel k = scalar_kernel(vec({1, 2}), Covariance::scaled_identity(2, 1.0), Covariance::scaled_identity(2, 3.0));
  EXPECT_EQ(projected_noise_stats(k, s1(0.0), s1(0.5)).mean, 0.0);
}

TEST(ProjectedNoise, MatchedVarianceIsMahalanobis) {
  Mat c(3, 3);
  c << 2.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 0.5;
  const Covariance cov = Covariance::dense(c);
  const Vec h = vec({1.0, 0.5, -1.0});
  const PeKernel k = scalar_kernel(h, cov, cov, 0.2, -0.1);
  const double delta = 0.8;
  const Vec d = -delta * h;
  const ProjectedNoise n = projected_noise_stats(k, s1(1.0), s1(delta));
  EXPECT_NEAR(n.stddev * n.stddev, d.dot(c.inverse() * d), 1e-12);
  EXPECT_NEAR(n.mean, Vec::Constant(3, -0.1).dot(c.inverse() * d), 1e-12);
}

TEST(ProjectedNoise, ZeroMeanMixture) {
  const std::size_t K = 4;
  const SignalMap h = SignalMap::linear_vector(Vec::Ones(K));
  const NoiseLaw law = NoiseLaw::mixture(
      {0.6, 0.4}, {GaussianLaw{Vec::Zero(K), Covariance::scaled_identity(K, 1.0)},
                   GaussianLaw{Vec::Zero(K), Covariance::scaled_identity(K, 9.0)}});
  const PeKernel k(AssumedModel(h, Vec::Zero(K), Covariance::scaled_identity(K, 1.0)), TrueModel(h, law));
  const ProjectedNoise n = projected_noise_stats(k, s1(0.0), s1(1.0));
  EXPECT_EQ(n.mean, 0.0);
  ASSERT_EQ(n.components.size(), 2u);
  EXPECT_NEAR(n.components[0].weight + n.components[1].weight, 1.0, 1e-15);
  EXPECT_NEAR(n.components[1].stddev, 3.0 * n.components[0].stddev, 1e-12);
}

TEST(ProjectedNoise, EmpiricalUnsupported) {
  const SignalMap h = SignalMap::linear_vector(Vec::Ones(2));
  const PeKernel k(AssumedModel(h, Vec::Zero(2), Covariance::scaled_identity(2, 1.0)),
                   TrueModel(h, NoiseLaw::empirical([](Rng& r) { return Vec::Constant(2, r.normal()); }, 2)));
  EXPECT_THROW(projected_noise_stats(k, s1(0), s1(1)), UnsupportedVariant);
  EXPECT_THROW(pe_analytic(k, s1(0), s1(1)), UnsupportedVariant);
}

TEST(PeGaussian, FullMatchClassical) {
  Mat hm(3, 2);
  hm << 1.0, 0.5, -0.3, 2.0, 0.7, 0.1;
  Mat c(3, 3);
  c << 1.5, 0.2, 0.1, 0.2, 1.0, 0.0, 0.1, 0.0, 0.8;
  const SignalMap h = SignalMap::linear_matrix(hm);
  const Covariance cov = Covariance::dense(c);
  const Vec mu = vec({0.3, 0.0, -0.2});
  const PeKernel k(AssumedModel(h, mu, cov), TrueModel(h, NoiseLaw::gaussian(mu, cov)));
  const Vec delta = vec({0.4, -0.7});
  const Vec v = hm * delta;
  EXPECT_NEAR(pe_gaussian(k, vec({1.0, 2.0}), delta), q_function(0.5 * std::sqrt(v.dot(c.inverse() * v))), 1e-13);
  EXPECT_EQ(pe_gaussian(k, vec({1.0, 2.0}), vec({0.0, 0.0})), 0.5);
}

TEST(PeGaussian, IidVarianceMismatchInvariance) {
  const Vec h = vec({1.0, 2.0, -1.0, 0.5});
  const double sigma_star = 0.8;
  const double delta = 0.6;
  const double expected = q_function(std::sqrt(delta * delta * h.squaredNorm()) / (2.0 * sigma_star));
  for (double s2 : {0.01, 1.0, 100.0}) {
    const PeKernel k = scalar_kernel(h, Covariance::scaled_identity(4, s2),
                                     Covariance::scaled_identity(4, sigma_star * sigma_star), 1.5, 1.5);
    EXPECT_NEAR(pe_gaussian(k, s1(3.0), s1(delta)), expected, 1e-13) << "sigma2 = " << s2;
  }
}

TEST(PeGaussian, NonlinearDenseOracle) {
  // Frozen from tools/oracle.py.
  const SignalMap h = SignalMap::parametric(
      [](const Vec& t) { return vec({std::sin(t[0]), t[0] * t[0], 1.0 + 0.5 * t[0]}); }, 3, 1);
  Mat c(3, 3), ct(3, 3);
  c << 1.0, 0.2, 0.0, 0.2, 2.0, 0.3, 0.0, 0.3, 1.5;
  ct << 1.3, 0.1, 0.0, 0.1, 1.0, -0.2, 0.0, -0.2, 2.5;
  const PeKernel k(AssumedModel(h, vec({0.1, -0.2, 0.3}), Covariance::dense(c)),
                   TrueModel(h, NoiseLaw::gaussian(vec({0.0, 0.1, -0.1}), Covariance::dense(ct))));
  EXPECT_NEAR(pe_gaussian(k, s1(0.4), s1(0.7)), 0.29932423877347849, 1e-13);
}

TEST(PeGaussian, DegenerateSigmaLimit) {
  // Truth noise along d vanishes: Pe is the indicator limit.
  const SignalMap h = SignalMap::linear_vector(vec({1.0, 0.0}));
  const PeKernel k(AssumedModel(h, Vec::Zero(2), Covariance::scaled_identity(2, 1.0)),
                   TrueModel(h, NoiseLaw::gaussian(Vec::Zero(2), Covariance::diagonal(vec({1e-300, 1.0})))));
  EXPECT_NEAR(pe_gaussian(k, s1(0.0), s1(1.0)), 0.0, 1e-12);
}

TEST(PeGaussian, WindowedMatchesDensePath) {
  const std::size_t K = 400;
  const SignalMap pulse = SignalMap::pulse(60.0, K);
  const SignalMap narrow = SignalMap::pulse(40.0, K);
  const Covariance diag = Covariance::scaled_identity(K, 2.0);
  const Covariance dense = Covariance::dense(2.0 * Mat::Identity(K, K));
  const PeKernel windowed(AssumedModel(narrow, Vec::Zero(K), diag), TrueModel(pulse, NoiseLaw::gaussian(Vec::Zero(K), diag)));
  const PeKernel full(AssumedModel(narrow, Vec::Zero(K), dense), TrueModel(pulse, NoiseLaw::gaussian(Vec::Zero(K), dense)));
  ASSERT_TRUE(windowed.windowed());
  ASSERT_FALSE(full.windowed());
  for (double dt : {0.0, 3.0, 17.0, 45.0, 120.0}) {
    for (double da : {0.0, -0.2, 0.3}) {
      const Vec o = vec({150.0, 1.0});
      const Vec d = vec({dt, da});
      EXPECT_NEAR(pe_gaussian(windowed, o, d), pe_gaussian(full, o, d), 1e-12) << dt << " " << da;
    }
  }
}

TEST(PeGaussian, FullMatchDecreasingInOffset) {
  const Vec h = vec({1.0, 0.5, 2.0});
  const Covariance cov = Covariance::diagonal(vec({1.0, 2.0, 0.5}));
  const PeKernel k = scalar_kernel(h, cov, cov);
  double prev = 0.5;
  for (int i = 1; i <= 50; ++i) {
    const double pe = pe_gaussian(k, s1(0.0), s1(0.05 * i));
    EXPECT_LT(pe, prev);
    EXPECT_LE(pe, 0.5);
    prev = pe;
  }
}

TEST(PeMixture, SingleComponentEqualsGaussian) {
  const std::size_t K = 3;
  const SignalMap h = SignalMap::linear_vector(vec({1, 2, 3}));
  const GaussianLaw g{vec({0.1, 0.0, -0.3}), Covariance::diagonal(vec({1.0, 2.0, 3.0}))};
  const AssumedModel a(h, Vec::Zero(K), Covariance::scaled_identity(K, 1.5));
  const PeKernel km(a, TrueModel(h, NoiseLaw::mixture({1.0}, {g})));
  const PeKernel kg(a, TrueModel(h, NoiseLaw::gaussian(g.mean, g.cov)));
  for (double d : {0.1, 0.5, 2.0}) EXPECT_EQ(pe_mixture(km, s1(1.0), s1(d)), pe_gaussian(kg, s1(1.0), s1(d)));
}

TEST(PeMixture, PerComponentFormula) {
  const std::size_t K = 5;
  const SignalMap h = SignalMap::linear_vector(Vec::Ones(K));
  const double w1 = 0.7, v1 = 1.0, v2 = 25.0;
  const NoiseLaw law = NoiseLaw::mixture({w1, 1.0 - w1}, {GaussianLaw{Vec::Zero(K), Covariance::scaled_identity(K, v1)},
                                                        GaussianLaw{Vec::Zero(K), Covariance::scaled_identity(K, v2)}});
  const PeKernel k(AssumedModel(h, Vec::Zero(K), Covariance::scaled_identity(K, v1)), TrueModel(h, law));
  const double a = K / v1;  // h^T Sigma_1^{-1} h
  for (double d : {0.1, 0.4, 1.0}) {
    const double z = 0.5 * a * d * d;
    const double expected = w1 * q_function(z / std::sqrt(a * d * d)) +
                            (1.0 - w1) * q_function(z / std::sqrt(d * d * K * v2 / (v1 * v1)));
    EXPECT_NEAR(pe_mixture(k, s1(0.0), s1(d)), expected, 1e-14);
  }
}

TEST(PeMixture, PooledGammaForOutlierSetup) {
  // Moment-matched projected noise reproduces Q(gamma h) with the pooled gamma.
  const std::size_t K = 6;
  const SignalMap h = SignalMap::linear_vector(Vec::Ones(K));
  const double w1 = 0.8, v1 = 1.0, v2 = 625.0;
  const NoiseLaw law = NoiseLaw::mixture({w1, 1.0 - w1}, {GaussianLaw{Vec::Zero(K), Covariance::scaled_identity(K, v1)},
                                                        GaussianLaw{Vec::Zero(K), Covariance::scaled_identity(K, v2)}});
  const PeKernel k(AssumedModel(h, Vec::Zero(K), Covariance::scaled_identity(K, v1)), TrueModel(h, law));
  const double a = K / v1;
  const double b = K * v2 / (v1 * v1);
  const double gamma = 0.5 * a / std::sqrt(w1 * a + (1.0 - w1) * b);
  for (double d : {0.05, 0.3, 1.0}) EXPECT_NEAR(pe_moment_matched(k, s1(0.0), s1(d)), q_function(gamma * d), 1e-14);
}

TEST(PeMixture, InlierOnlyEqualsMatched) {
  const std::size_t K = 4;
  const SignalMap h = SignalMap::linear_vector(Vec::Ones(K));
  const Covariance c1 = Covariance::scaled_identity(K, 1.0);
  const NoiseLaw law =
      NoiseLaw::mixture({1.0, 0.0}, {GaussianLaw{Vec::Zero(K), c1}, GaussianLaw{Vec::Zero(K), Covariance::scaled_identity(K, 625.0)}});
  const PeKernel k(AssumedModel(h, Vec::Zero(K), c1), TrueModel(h, law));
  for (double d : {0.1, 0.5}) EXPECT_NEAR(pe_mixture(k, s1(0.0), s1(d)), q_function(0.5 * std::sqrt(K * d * d)), 1e-15);
}

TEST(PeGeneralMc, AgreesWithAnalytic) {
  const Vec h = vec({1.0, -0.5, 0.8});
  const PeKernel kg = scalar_kernel(h, Covariance::scaled_identity(3, 1.0), Covariance::diagonal(vec({2.0, 0.5, 1.0})), 0.2, -0.1);
  const PeEstimate eg = pe_general_mc(kg, s1(0.0), s1(1.1), 100000, 17);
  EXPECT_LT(std::abs(eg.pe - pe_gaussian(kg, s1(0.0), s1(1.1))), 3.0 * eg.std_error);

  const SignalMap map = SignalMap::linear_vector(h);
  const NoiseLaw law = NoiseLaw::mixture({0.5, 0.5}, {GaussianLaw{Vec::Constant(3, -0.4), Covariance::scaled_identity(3, 0.5)},
                                                    GaussianLaw{Vec::Constant(3, 0.4), Covariance::scaled_identity(3, 3.0)}});
  const PeKernel km(AssumedModel(map, Vec::Zero(3), Covariance::scaled_identity(3, 1.0)), TrueModel(map, law));
  const PeEstimate em = pe_general_mc(km, s1(0.0), s1(0.9), 100000, 18);
  EXPECT_LT(std::abs(em.pe - pe_mixture(km, s1(0.0), s1(0.9))), 3.0 * em.std_error);
}

TEST(PeGeneralMc, ZeroOffsetIsExactlyHalf) {
  const PeKernel k = scalar_kernel(vec({1, 2}), Covariance::scaled_identity(2, 1.0), Covariance::scaled_identity(2, 4.0));
  const PeEstimate e = pe_general_mc(k, s1(0.3), s1(0.0), 5000, 1);
  EXPECT_EQ(e.pe, 0.5);
}

TEST(PeGeneralMc, WorkerCountInvariant) {
  const PeKernel k = scalar_kernel(vec({1, 2}), Covariance::scaled_identity(2, 1.0), Covariance::scaled_identity(2, 4.0));
  const PeEstimate a = pe_general_mc(k, s1(0.3), s1(0.5), 20000, 99, 1);
  const PeEstimate b = pe_general_mc(k, s1(0.3), s1(0.5), 20000, 99, 4);
  EXPECT_EQ(a.pe, b.pe);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(PeEqualLinear, MatchedMeanFormula) {
  const Vec h = vec({1.0, 2.0, 0.5});
  const Covariance cov = Covariance::diagonal(vec({1.0, 0.5, 2.0}));
  const Covariance truth = Covariance::diagonal(vec({3.0, 0.2, 1.0}));
  const PeKernel k = scalar_kernel(h, cov, truth, 0.7, 0.7);
  for (double d : {-1.0, 0.3, 0.8}) {
    const Vec v = d * h;
    const Vec w = cov.solve(v);
    const double expected = q_function(v.dot(w) / (2.0 * std::sqrt(truth.quad(w))));
    EXPECT_NEAR(pe_equal_linear(k, s1(d)), expected, 1e-14);
    EXPECT_NEAR(pe_equal_linear(k, s1(d)), pe_equal_linear(k, s1(-d)), 1e-15);
  }
}

TEST(PeEqualLinear, MeanMismatchQArgument) {
  const std::size_t K = 10;
  const Vec h = Vec::Ones(K);
  const Covariance cov = Covariance::scaled_identity(K, 0.16);
  const PeKernel k = scalar_kernel(h, cov, cov, 5.0, 2.0);
  const double a = K / 0.16;
  const double b = K * 3.0 / 0.16;  // h^T Sigma^{-1} (mu - mu*)
  const double sd = std::sqrt(K / 0.16);
  for (double d : {-0.4, -0.05, 0.05, 0.4}) {
    const EqualLinearTerms t = equal_linear_terms(k, s1(d));
    const double expected = (0.5 * a * std::abs(d) + b * (d > 0 ? 1.0 : -1.0)) / sd;
    EXPECT_NEAR(t.z_plus / t.sigma, expected, 1e-10 * std::abs(expected));
  }
}

TEST(PeEqualLinear, UnequalMapsUnsupported) {
  const PeKernel k(AssumedModel(SignalMap::linear_vector(vec({1, 1})), Vec::Zero(2), Covariance::scaled_identity(2, 1.0)),
                   TrueModel(SignalMap::linear_vector(vec({1, 2})), NoiseLaw::gaussian(Vec::Zero(2), Covariance::scaled_identity(2, 1.0))));
  EXPECT_THROW(pe_equal_linear(k, s1(1.0)), UnsupportedVariant);
}

TEST(PeEqualLinear, ConsistentWithGeneralGaussian) {
  const Vec h = vec({0.5, 1.0, -1.5, 2.0});
  const PeKernel k = scalar_kernel(h, Covariance::diagonal(vec({1.0, 2.0, 0.5, 1.0})),
                                   Covariance::diagonal(vec({0.7, 3.0, 0.5, 2.0})), 0.3, -0.2);
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const double o = rng.uniform(-5.0, 5.0);
    const double d = rng.uniform(-2.0, 2.0);
    EXPECT_NEAR(pe_gaussian(k, s1(o), s1(d)), pe_equal_linear(k, s1(d)), 1e-12);
  }
}
