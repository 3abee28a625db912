#include <cmath>
#include <vector>

#include <doctest.h>

#include "bflow/bench.hpp"
#include "bflow/sampler.hpp"
#include "support.hpp"

using namespace bflow;

namespace {

FlowSystem tiny_system(int n, std::uint64_t seed) {
  const GridSpec g(n, n);
  const ImageField f = make_first_image(g);
  const FlowField truth = sample_flow_field(FlowSpec{1}, g);
  RandomStream rng(seed);
  return assemble_system(f, advect_image(f, truth, {NoiseSpec::Kind::none, 0.0}, rng));
}

FlowSystem constant_image_system(int n) {
  const GridSpec g(n, n);
  const ImageField c(g, Eigen::MatrixXd::Constant(n, n, 0.5));
  return assemble_system(c, c);
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments draw_moments(double shape, double rate, int n, std::uint64_t seed) {
  RandomStream rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_gamma(shape, rate, rng);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  return {mean, (sumsq - n * mean * mean) / (n - 1)};
}

void check_gamma_moments(double shape, double rate, std::uint64_t seed) {
  const int n = 100000;
  const Moments m = draw_moments(shape, rate, n, seed);
  const double mean = shape / rate;
  const double var = shape / (rate * rate);
  // SE of the sample variance from the fourth central moment of a Gamma:
  // mu4 = 3 var^2 (1 + 2/shape).
  const double se_mean = std::sqrt(var / n);
  const double se_var = var * std::sqrt((2.0 + 6.0 / shape) / n);
  CHECK(std::abs(m.mean - mean) <= 3.0 * se_mean);
  CHECK(std::abs(m.var - var) <= 3.0 * se_var);
}

}  // namespace

TEST_CASE("gamma sampler moments") {
  SUBCASE("shape 1 is exponential") { check_gamma_moments(1.0, 2.0, 101); }
  SUBCASE("large shape") { check_gamma_moments(450.0, 3.0, 102); }
  SUBCASE("shape below one uses the boost") { check_gamma_moments(0.5, 1.0, 103); }

  SUBCASE("deterministic per seed") {
    RandomStream a(7), b(7);
    for (int i = 0; i < 100; ++i) {
      CHECK(sample_gamma(3.3, 0.7, a) == sample_gamma(3.3, 0.7, b));
    }
  }

  SUBCASE("parameter validation") {
    RandomStream rng(1);
    CHECK_THROWS_AS(sample_gamma(0.0, 1.0, rng), DomainError);
    CHECK_THROWS_AS(sample_gamma(1.0, -2.0, rng), DomainError);
  }
}

TEST_CASE("Gamma full-conditional parameters") {
  const HyperPriors priors;

  SUBCASE("constant image: misfit term vanishes") {
    const FlowSystem sys = constant_image_system(3);
    RandomStream rng(5);
    const Eigen::VectorXd x = testsupport::random_vector(sys.n, rng);
    const GammaParams p = lambda_conditional(sys, priors, x);
    CHECK(p.shape == doctest::Approx(0.5 * 9 + 1.0).epsilon(1e-15));
    CHECK(p.rate == doctest::Approx(1e-4).epsilon(1e-12));
  }

  SUBCASE("constant flow: regularity term vanishes") {
    const FlowSystem sys = tiny_system(3, 2);
    Eigen::VectorXd x(sys.n);
    x.head(sys.m).setConstant(0.7);
    x.tail(sys.m).setConstant(-1.2);
    const GammaParams p = delta_conditional(sys, priors, x);
    CHECK(p.shape == doctest::Approx(0.5 * 18 + 1.0).epsilon(1e-15));
    CHECK(p.rate == doctest::Approx(1e-4).epsilon(1e-10));
  }

  SUBCASE("rates match a dense computation") {
    const FlowSystem sys = tiny_system(3, 3);
    RandomStream rng(9);
    const Eigen::VectorXd x = testsupport::random_vector(sys.n, rng);
    const Eigen::MatrixXd a = sys.A.dense();
    const double rl = 0.5 * (a * x - sys.b).squaredNorm() + priors.beta_lambda;
    const double rd = 0.5 * x.dot(sys.L.dense() * x) + priors.beta_delta;
    CHECK(lambda_conditional(sys, priors, x).rate ==
          doctest::Approx(rl).epsilon(1e-12));
    CHECK(delta_conditional(sys, priors, x).rate ==
          doctest::Approx(rd).epsilon(1e-12));
  }

  SUBCASE("hyperprior validation") {
    HyperPriors bad;
    bad.beta_delta = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
  }
}

TEST_CASE("single Gibbs sweep") {
  const FlowSystem sys = tiny_system(3, 4);
  const HyperPriors priors;
  RandomStream rng(11);
  ChainState state;
  state.lambda = 1.0;
  state.delta = 1.0;
  state.k = 3;
  const GibbsStep step = gibbs_step(state, sys, priors, {}, rng);
  CHECK(step.state.k == 4);
  CHECK(step.state.lambda > 0.0);
  CHECK(step.state.delta > 0.0);
  CHECK(step.cg_converged);
  CHECK(step.state.x.size() == sys.n);
}

TEST_CASE("chain bookkeeping and determinism") {
  const FlowSystem sys = tiny_system(4, 6);
  const HyperPriors priors;

  SUBCASE("one kept sample when iterations = burn_in + 1") {
    ChainConfig cfg;
    cfg.iterations = 11;
    cfg.burn_in = 10;
    cfg.seed = 21;
    const ChainResult r = run_chain(sys, priors, cfg, {});
    CHECK(r.stats.count() == 1);
    CHECK(static_cast<int>(r.lambda_trace.size()) == cfg.iterations);
    CHECK(static_cast<int>(r.delta_trace.size()) == cfg.iterations);
  }

  SUBCASE("thinning arithmetic") {
    ChainConfig cfg;
    cfg.iterations = 30;
    cfg.burn_in = 10;
    cfg.thin = 4;
    cfg.seed = 22;
    const ChainResult r = run_chain(sys, priors, cfg, {});
    CHECK(r.stats.count() == 5);  // steps 10,14,18,22,26
  }

  SUBCASE("identical seeds give identical chains, including restarts") {
    ChainConfig cfg;
    cfg.iterations = 60;
    cfg.burn_in = 20;
    cfg.seed = 23;
    const ChainResult a = run_chain(sys, priors, cfg, {});
    const ChainResult b = run_chain(sys, priors, cfg, {});
    CHECK(a.restart_count == b.restart_count);
    CHECK(a.converged == b.converged);
    CHECK(a.seed_used == b.seed_used);
    REQUIRE(a.lambda_trace.size() == b.lambda_trace.size());
    for (std::size_t i = 0; i < a.lambda_trace.size(); ++i) {
      CHECK(a.lambda_trace[i] == b.lambda_trace[i]);
      CHECK(a.delta_trace[i] == b.delta_trace[i]);
    }
    CHECK((a.stats.mean() - b.stats.mean()).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("precisions stay positive along the trace") {
    ChainConfig cfg;
    cfg.iterations = 80;
    cfg.burn_in = 20;
    cfg.seed = 24;
    const ChainResult r = run_chain(sys, priors, cfg, {});
    for (const double v : r.lambda_trace) CHECK(v > 0.0);
    for (const double v : r.delta_trace) CHECK(v > 0.0);
  }

  SUBCASE("config validation") {
    ChainConfig bad;
    bad.burn_in = bad.iterations;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = ChainConfig{};
    bad.thin = 0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
  }
}

TEST_CASE("constant image: lambda trace is i.i.d. Gamma") {
  const FlowSystem sys = constant_image_system(3);
  const HyperPriors priors;
  ChainConfig cfg;
  cfg.iterations = 3000;
  cfg.burn_in = 10;
  cfg.seed = 31;
  const ChainResult r = run_chain(sys, priors, cfg, {});

  const double shape = 0.5 * sys.m + priors.alpha_lambda;
  const double mean = shape / priors.beta_lambda;
  const double sd = std::sqrt(shape) / priors.beta_lambda;
  double sum = 0.0;
  for (const double v : r.lambda_trace) sum += v;
  const double emp = sum / static_cast<double>(r.lambda_trace.size());
  const double se = sd / std::sqrt(static_cast<double>(r.lambda_trace.size()));
  CHECK(std::abs(emp - mean) <= 3.0 * se);
}

TEST_CASE("posterior mean matches the plug-in fixed point on a tiny system") {
  const FlowSystem sys = tiny_system(3, 8);
  const HyperPriors priors;
  ChainConfig cfg;
  cfg.iterations = 21000;
  cfg.burn_in = 1000;
  cfg.seed = 33;
  cfg.max_restarts = 6;
  const ChainResult r = run_chain(sys, priors, cfg, {});

  double lam_bar = 0.0, del_bar = 0.0;
  for (int k = cfg.burn_in; k < cfg.iterations; ++k) {
    lam_bar += r.lambda_trace[k];
    del_bar += r.delta_trace[k];
  }
  lam_bar /= cfg.iterations - cfg.burn_in;
  del_bar /= cfg.iterations - cfg.burn_in;

  const Eigen::MatrixXd a = sys.A.dense();
  const Eigen::MatrixXd prec =
      lam_bar * a.transpose() * a + del_bar * sys.L.dense();
  const Eigen::VectorXd fixed_point =
      testsupport::dense_solve_spd(prec, lam_bar * a.transpose() * sys.b);
  const Eigen::VectorXd mean = r.stats.mean();
  CHECK((mean - fixed_point).norm() / fixed_point.norm() <= 0.05);
}

TEST_CASE("effective regularization trace") {
  FlowAccumulator acc(4);
  ChainResult r{std::move(acc), {2.0, 2.0, 2.0}, {1.0, 1.0, 1.0}, {}};
  r.iterations = 3;
  const std::vector<double> ratio = effective_alpha_trace(r);
  REQUIRE(ratio.size() == 3);
  for (const double v : ratio) CHECK(v == 0.5);
}

TEST_CASE("stationarity check") {
  SUBCASE("i.i.d. noise passes at the calibrated rate") {
    RandomStream rng(404);
    const int burn = 400;
    const int len = burn + 1000;
    int passes = 0;
    for (int t = 0; t < 100; ++t) {
      std::vector<double> trace(len);
      for (double& v : trace) v = rng.normal();
      if (check_stationarity(trace, burn)) ++passes;
    }
    // Threshold 0.1 sigma on two 500-point means is a 1.58-sigma gate for
    // white noise, so roughly 89 of 100 traces should pass.
    CHECK(passes >= 75);
    CHECK(passes <= 99);
  }

  SUBCASE("strong linear drift fails") {
    RandomStream rng(405);
    const int burn = 100;
    const int n = 1000;
    std::vector<double> trace(burn + n);
    for (int i = 0; i < burn + n; ++i) {
      const double drift = 5.0 * static_cast<double>(i - burn) / n;
      trace[i] = drift + rng.normal();
    }
    CHECK_FALSE(check_stationarity(trace, burn));
  }

  SUBCASE("constant trace fails") {
    const std::vector<double> trace(200, 3.14);
    CHECK_FALSE(check_stationarity(trace, 50));
  }

  SUBCASE("too few post-burn-in points fail") {
    const std::vector<double> trace{1.0, 2.0, 1.5, 2.5, 1.0};
    CHECK_FALSE(check_stationarity(trace, 2));
  }

  SUBCASE("trace not longer than burn-in is rejected") {
    const std::vector<double> trace(10, 1.0);
    CHECK_THROWS_AS(check_stationarity(trace, 10), DomainError);
    CHECK_THROWS_AS(check_stationarity(trace, 15), DomainError);
  }
}

TEST_CASE("flow accumulator streaming moments") {
  FlowAccumulator acc(2);
  RandomStream rng(55);
  std::vector<Eigen::VectorXd> draws;
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x[i] = rng.normal() * (i + 1);
    acc.add(x);
    draws.push_back(x);
  }

  // Two-pass reference.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
  for (const auto& x : draws) mean += x;
  mean /= static_cast<double>(draws.size());
  CHECK((acc.mean() - mean).cwiseAbs().maxCoeff() <= 1e-12);

  for (int i = 0; i < 2; ++i) {
    double cuu = 0.0, cvv = 0.0, cuv = 0.0;
    for (const auto& x : draws) {
      cuu += (x[i] - mean[i]) * (x[i] - mean[i]);
      cvv += (x[2 + i] - mean[2 + i]) * (x[2 + i] - mean[2 + i]);
      cuv += (x[i] - mean[i]) * (x[2 + i] - mean[2 + i]);
    }
    const double denom = static_cast<double>(draws.size()) - 1.0;
    CHECK(acc.cov_uu(i) == doctest::Approx(cuu / denom).epsilon(1e-10));
    CHECK(acc.cov_vv(i) == doctest::Approx(cvv / denom).epsilon(1e-10));
    CHECK(acc.cov_uv(i) == doctest::Approx(cuv / denom).epsilon(1e-10));
  }

  CHECK_THROWS_AS(acc.add(Eigen::VectorXd::Zero(3)), DimensionError);
}
