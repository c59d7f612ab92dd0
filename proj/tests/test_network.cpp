#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "fixtures.hpp"
#include "relugd/network.hpp"

using namespace relugd;

namespace {

ShallowReluNet tiny_net() {
  auto net = ShallowReluNet::zeros(1, 1);
  net.hidden_weights = {2.0};
  net.hidden_biases = {-1.0};
  net.output_weights = {3.0};
  net.output_bias = 0.5;
  return net;
}

// Central differences of `risk` with respect to every trainable parameter,
// in the order W (row-major), B, bias_out.
std::vector<double> central_differences(ShallowReluNet net, const std::function<double(const ShallowReluNet&)>& risk,
                                        double h) {
  std::vector<double*> params;
  for (auto& v : net.hidden_weights) params.push_back(&v);
  for (auto& v : net.hidden_biases) params.push_back(&v);
  params.push_back(&net.output_bias);
  std::vector<double> out;
  for (double* p : params) {
    const double saved = *p;
    *p = saved + h;
    const double up = risk(net);
    *p = saved - h;
    const double down = risk(net);
    *p = saved;
    out.push_back((up - down) / (2.0 * h));
  }
  return out;
}

std::vector<double> flat(const RiskGradient& g) {
  std::vector<double> out = g.d_hidden_weights;
  out.insert(out.end(), g.d_hidden_biases.begin(), g.d_hidden_biases.end());
  out.push_back(g.d_output_bias);
  return out;
}

}  // namespace

TEST(Rectifier, SignCasesIncludingBoundary) {
  EXPECT_EQ(rectifier(std::vector<double>{-1, 2, 0}), (std::vector<double>{0, 2, 0}));
}

TEST(Rectifier, AllNegativeAndNonnegative) {
  EXPECT_EQ(rectifier(std::vector<double>{-1, -0.5, -3}), (std::vector<double>{0, 0, 0}));
  const std::vector<double> pos = {0.0, 1.5, 7.0};
  EXPECT_EQ(rectifier(pos), pos);
}

TEST(Rectifier, PositiveHomogeneity) {
  oracle::Draw draw(31);
  for (int rep = 0; rep < 200; ++rep) {
    const auto x = draw.normals(6);
    const double a = draw.uniform(0.0, 5.0);
    std::vector<double> ax(x);
    for (auto& v : ax) v *= a;
    const auto lhs = rectifier(ax);
    const auto rhs = rectifier(x);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(lhs[i], a * rhs[i]);
  }
}

TEST(Softplus, ValueAtZero) { EXPECT_NEAR(softplus(0.0, 1.0), std::log(2.0), 1e-15); }

TEST(Softplus, DerivativeAtZero) {
  for (double t : {0.5, 1.0, 3.0, 100.0, 1e6}) EXPECT_NEAR(softplus_deriv(0.0, t), t / (t + 1.0), 1e-15);
}

TEST(Softplus, ApproachesIdentityAtOne) {
  for (double t = 3.0; t < 1e7; t *= 1.7) EXPECT_LE(std::abs(softplus(1.0, t) - 1.0), 2.0 * std::log(t) / t);
}

TEST(Softplus, NoOverflowAtExtremeArguments) {
  for (double t : {1.0, 1e3, 1e6}) {
    for (double tz : {-1e6, -700.0, -30.0, 30.0, 700.0, 1e6}) {
      const double z = tz / t;
      EXPECT_TRUE(std::isfinite(softplus(z, t))) << z << " " << t;
      EXPECT_TRUE(std::isfinite(softplus_deriv(z, t))) << z << " " << t;
    }
  }
  EXPECT_NEAR(softplus(1e6, 1.0), 1e6, 1e-9);
  EXPECT_EQ(softplus(-1e6, 1.0), 0.0);
}

TEST(Softplus, RejectsNonpositiveT) {
  EXPECT_THROW(softplus(1.0, 0.0), DomainError);
  EXPECT_THROW(softplus_deriv(1.0, -1.0), DomainError);
}

TEST(Softplus, DistanceToRectifierBound) {
  // |phi_t(z) - max{z,0}| <= ln(t)/t + (1/t) |ln(exp(-t z)/t + 1)|
  for (double t : {10.0, 100.0, 1000.0}) {
    for (double z = -3.0; z <= 3.0; z += 0.01) {
      const double bound = std::log(t) / t + std::abs(std::log(std::exp(-t * z) / t + 1.0)) / t;
      EXPECT_LE(std::abs(softplus(z, t) - std::max(z, 0.0)), bound * (1 + 1e-12) + 1e-15) << z << " " << t;
    }
  }
}

TEST(Softplus, DerivativeMatchesFiniteDifference) {
  for (double t : {1.0, 10.0, 1000.0}) {
    for (double z = -2.0; z <= 2.0; z += 0.137) {
      const double h = 1e-6 / t;
      const double fd = (softplus(z + h, t) - softplus(z - h, t)) / (2 * h);
      EXPECT_NEAR(softplus_deriv(z, t), fd, 1e-6);
    }
  }
}

TEST(Realize, HandInstance) { EXPECT_EQ(realize(tiny_net(), std::vector<double>{1.0}), 3.5); }

TEST(Realize, AllPreActivationsNegativeGivesOutputBias) {
  auto net = tiny_net();
  EXPECT_EQ(realize(net, std::vector<double>{-4.0}), 0.5);
}

TEST(Realize, MatchesLoopOracle) {
  oracle::Draw draw(32);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = draw.index(1, 6), w = draw.index(1, 40);
    const auto net = fixture::random_net(draw, d, w);
    const auto x = draw.normals(d);
    const double expected = fixture::realize_loop(net, x);
    EXPECT_NEAR(realize(net, x), expected, 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(Realize, DimensionMismatch) { EXPECT_THROW(realize(tiny_net(), std::vector<double>{1.0, 2.0}), DimensionError); }

TEST(EmpiricalRisk, ZeroWhenTargetsFitted) {
  oracle::Draw draw(33);
  const auto net = fixture::random_net(draw, 3, 10);
  auto data = fixture::random_dataset(draw, 3, 5);
  data.targets = predictions(net, data);
  EXPECT_EQ(empirical_risk(net, data), 0.0);
}

TEST(EmpiricalRisk, ZeroNetworkGivesMeanSquaredTarget) {
  const Dataset data({{1, 0}, {0, 2}, {3, 3}}, {1.0, -2.0, 0.5});
  EXPECT_NEAR(empirical_risk(ShallowReluNet::zeros(2, 7), data), (1.0 + 4.0 + 0.25) / 3.0, 1e-15);
}

TEST(EmpiricalRisk, MatchesLoopOracleAndIsNonnegative) {
  oracle::Draw draw(34);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = draw.index(1, 5), w = draw.index(1, 30), m = draw.index(1, 8);
    const auto net = fixture::random_net(draw, d, w);
    const auto data = fixture::random_dataset(draw, d, m);
    const double r = empirical_risk(net, data);
    EXPECT_GE(r, 0.0);
    EXPECT_NEAR(r, fixture::risk_loop(net, data), 1e-12 * std::max(1.0, r));
  }
}

TEST(RiskGradient, ZeroResidualsGiveZeroGradient) {
  oracle::Draw draw(35);
  const auto net = fixture::random_net(draw, 2, 6);
  auto data = fixture::random_dataset(draw, 2, 4);
  data.targets = predictions(net, data);
  for (double v : flat(risk_gradient(net, data))) EXPECT_EQ(v, 0.0);
}

TEST(RiskGradient, HandInstance) {
  // f = 3 r(2 - 1) + 0.5 = 3.5, y = 1, residual 2.5, m = 1:
  // dW = 2 * 2.5 * 3 * 1 * x = 15, dB = 15, dBias = 2 * 2.5 = 5.
  const Dataset data({{1.0}}, {1.0});
  const auto g = risk_gradient(tiny_net(), data);
  EXPECT_EQ(g.d_hidden_weights[0], 15.0);
  EXPECT_EQ(g.d_hidden_biases[0], 15.0);
  EXPECT_EQ(g.d_output_bias, 5.0);
}

TEST(RiskGradient, KinkIndicatorIncludesZero) {
  // Pre-activation exactly 0 at x = 0.5: the neuron counts as active.
  const Dataset data({{0.5}}, {1.0});
  const auto g = risk_gradient(tiny_net(), data);
  // f = 0.5, residual -0.5: dW = 2 * (-0.5) * 3 * 0.5 = -1.5, dB = -3.
  EXPECT_EQ(g.d_hidden_weights[0], -1.5);
  EXPECT_EQ(g.d_hidden_biases[0], -3.0);
  EXPECT_EQ(g.d_output_bias, -1.0);
}

TEST(RiskGradient, MatchesFiniteDifferencesOfExactRiskAwayFromKinks) {
  oracle::Draw draw(36);
  int done = 0;
  while (done < 100) {
    const std::size_t d = draw.index(1, 4), w = draw.index(1, 8), m = draw.index(1, 5);
    const auto net = fixture::random_net(draw, d, w);
    const auto data = fixture::random_dataset(draw, d, m);
    if (fixture::min_abs_preactivation(net, data) <= 1e-3) continue;
    ++done;
    const auto fd = central_differences(net, [&](const ShallowReluNet& n) { return empirical_risk(n, data); }, 1e-6);
    const auto g = flat(risk_gradient(net, data));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], fd[i], 1e-6 * std::max(1.0, std::abs(g[i])));
  }
}

TEST(RiskGradient, MatchesFiniteDifferencesOfSmoothedRiskAtLargeT) {
  // At t = 1e8 the smoothing offset ln(t)/t is 2e-7, well inside the tolerance.
  oracle::Draw draw(37);
  int done = 0;
  while (done < 100) {
    const std::size_t d = draw.index(1, 4), w = draw.index(1, 8), m = draw.index(1, 5);
    const auto net = fixture::random_net(draw, d, w);
    const auto data = fixture::random_dataset(draw, d, m);
    if (fixture::min_abs_preactivation(net, data) <= 1e-3) continue;
    ++done;
    const auto fd = central_differences(net, [&](const ShallowReluNet& n) { return smoothed_risk(n, data, 1e8); }, 1e-6);
    const auto g = flat(risk_gradient(net, data));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], fd[i], 1e-4);
  }
}

TEST(SmoothedRisk, RejectsNonpositiveT) {
  const Dataset data({{1.0}}, {1.0});
  EXPECT_THROW(smoothed_risk(tiny_net(), data, 0.0), DomainError);
}

TEST(SmoothedRisk, CloseToEmpiricalRiskAtLargeT) {
  // Parameters and inputs with norms at most 10.
  oracle::Draw draw(38);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t d = draw.index(1, 3), w = draw.index(1, 4), m = draw.index(1, 4);
    auto net = fixture::random_net(draw, d, w);
    auto data = fixture::random_dataset(draw, d, m);
    auto clamp_norm = [](std::vector<double>& v, double mx) {
      const double n = oracle::norm(v);
      if (n > mx)
        for (auto& x : v) x *= mx / n;
    };
    clamp_norm(net.hidden_weights, 10);
    clamp_norm(net.hidden_biases, 10);
    clamp_norm(net.output_weights, 10);
    for (std::size_t j = 0; j < m; ++j) {
      std::vector<double> x(data.x(j).begin(), data.x(j).end());
      clamp_norm(x, 10);
      std::copy(x.begin(), x.end(), data.inputs.begin() + static_cast<std::ptrdiff_t>(j * d));
    }
    EXPECT_LE(std::abs(smoothed_risk(net, data, 1e6) - empirical_risk(net, data)), 1e-3);
  }
}

TEST(SmoothedRisk, StronglyNegativePreActivations) {
  auto net = ShallowReluNet::zeros(2, 3);
  net.hidden_weights = {1, 0, 0, 1, 1, 1};
  net.hidden_biases = {-100, -100, -100};
  net.output_weights = {1.0, -2.0, 0.5};
  net.output_bias = 0.3;
  const Dataset data({{1, 0}, {0, 1}}, {1.0, -1.0});
  const double expected = (std::pow(0.3 - 1.0, 2) + std::pow(0.3 + 1.0, 2)) / 2.0;
  EXPECT_NEAR(smoothed_risk(net, data, 1e3), expected, 1e-12);
}

TEST(SmoothedRisk, ApproachesEmpiricalRiskMonotonically) {
  oracle::Draw draw(39);
  for (int rep = 0; rep < 20; ++rep) {
    const auto net = fixture::random_net(draw, 2, 5);
    const auto data = fixture::random_dataset(draw, 2, 4);
    const double r = empirical_risk(net, data);
    const double e2 = std::abs(smoothed_risk(net, data, 1e2) - r);
    const double e3 = std::abs(smoothed_risk(net, data, 1e3) - r);
    const double e4 = std::abs(smoothed_risk(net, data, 1e4) - r);
    EXPECT_GE(e2, e3);
    EXPECT_GE(e3, e4);
  }
}

TEST(Network, ParameterCount) { EXPECT_EQ(ShallowReluNet::zeros(3, 5).parameter_count(), 5u * 3 + 2 * 5 + 1); }
