#include "bflow/sampler.hpp"

#include <cmath>

namespace bflow {

double sample_gamma(double shape, double rate, RandomStream& rng) {
  if (shape <= 0.0 || rate <= 0.0) {
    throw DomainError("sample_gamma: shape and rate must be positive");
  }
  if (shape < 1.0) {
    // Boost: if y ~ Gamma(shape+1) and u ~ U(0,1), y u^(1/shape) ~ Gamma(shape).
    const double y = sample_gamma(shape + 1.0, 1.0, rng);
    const double u = rng.uniform();
    return y * std::pow(u, 1.0 / shape) / rate;
  }
  // Marsaglia-Tsang squeeze/rejection.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0, v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) {
      return d * v / rate;
    }
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
      return d * v / rate;
    }
  }
}

GammaParams lambda_conditional(const FlowSystem& sys, const HyperPriors& priors,
                               const Eigen::VectorXd& x) {
  const double misfit = (sys.A.apply(x) - sys.b).squaredNorm();
  return {0.5 * sys.m + priors.alpha_lambda, 0.5 * misfit + priors.beta_lambda};
}

GammaParams delta_conditional(const FlowSystem& sys, const HyperPriors& priors,
                              const Eigen::VectorXd& x) {
  const double penalty = x.dot(sys.L.apply(x));
  return {0.5 * sys.n + priors.alpha_delta, 0.5 * penalty + priors.beta_delta};
}

GibbsStep gibbs_step(const ChainState& state, const FlowSystem& sys,
                     const HyperPriors& priors, const CGConfig& cg, RandomStream& rng) {
  priors.validate();

  ConditionalSample draw =
      sample_conditional_x(sys, state.lambda, state.delta, cg, rng);

  GibbsStep step;
  step.cg_converged = draw.cg_converged;
  step.cg_iterations = draw.cg_iterations;
  step.state.x = std::move(draw.x);

  const GammaParams gl = lambda_conditional(sys, priors, step.state.x);
  step.state.lambda = sample_gamma(gl.shape, gl.rate, rng);
  const GammaParams gd = delta_conditional(sys, priors, step.state.x);
  step.state.delta = sample_gamma(gd.shape, gd.rate, rng);
  step.state.k = state.k + 1;
  return step;
}

namespace {

struct AttemptOutcome {
  ChainResult result;
  bool cg_failed = false;
};

AttemptOutcome run_attempt(const FlowSystem& sys, const HyperPriors& priors,
                           const ChainConfig& cfg, const CGConfig& cg,
                           std::uint64_t stream_seed) {
  AttemptOutcome out{ChainResult{FlowAccumulator(sys.m), {}, {}, {}}, false};
  ChainResult& res = out.result;
  res.iterations = cfg.iterations;
  res.burn_in = cfg.burn_in;
  res.thin = cfg.thin;
  res.seed_used = stream_seed;
  res.lambda_trace.reserve(cfg.iterations);
  res.delta_trace.reserve(cfg.iterations);

  RandomStream rng(stream_seed);
  ChainState state;
  state.lambda = cfg.lambda0;
  state.delta = cfg.delta0;
  state.k = 0;

  for (int step = 0; step < cfg.iterations; ++step) {
    const GibbsStep g = gibbs_step(state, sys, priors, cg, rng);
    if (!g.cg_converged) {
      out.cg_failed = true;
      return out;
    }
    state = g.state;
    // The trace records the freshly sampled precisions, not the initial values.
    res.lambda_trace.push_back(state.lambda);
    res.delta_trace.push_back(state.delta);
    if (step >= cfg.burn_in && (step - cfg.burn_in) % cfg.thin == 0) {
      res.stats.add(state.x);
      if (cfg.keep_samples) res.samples.push_back(state.x);
    }
  }
  return out;
}

}  // namespace

ChainResult run_chain(const FlowSystem& sys, const HyperPriors& priors,
                      const ChainConfig& cfg, const CGConfig& cg) {
  cfg.validate();
  priors.validate();

  ChainResult last{FlowAccumulator(sys.m), {}, {}, {}};
  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    const std::uint64_t stream_seed = RandomStream::derive_seed(cfg.seed, attempt);
    AttemptOutcome out = run_attempt(sys, priors, cfg, cg, stream_seed);
    out.result.restart_count = attempt;
    if (!out.cg_failed) {
      const std::vector<double> ratio = effective_alpha_trace(out.result);
      if (check_stationarity(ratio, cfg.burn_in)) {
        out.result.converged = true;
        return out.result;
      }
    }
    last = std::move(out.result);
  }
  last.converged = false;
  return last;
}

std::vector<double> effective_alpha_trace(const ChainResult& result) {
  std::vector<double> out(result.lambda_trace.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = result.delta_trace[i] / result.lambda_trace[i];
  }
  return out;
}

bool check_stationarity(const std::vector<double>& trace, int burn_in) {
  if (static_cast<int>(trace.size()) <= burn_in) {
    throw DomainError("check_stationarity: trace not longer than burn_in");
  }
  const int n = static_cast<int>(trace.size()) - burn_in;
  if (n < 4) return false;  // need two halves with a variance each

  const int h1 = n / 2;
  const int h2 = n - h1;
  const auto* post = trace.data() + burn_in;

  // A half of identical values has zero variance in exact arithmetic even
  // when the accumulated mean picks up rounding, so test that directly.
  bool flat1 = true, flat2 = true;
  for (int i = 1; i < h1 && flat1; ++i) flat1 = post[i] == post[0];
  for (int i = h1 + 1; i < n && flat2; ++i) flat2 = post[i] == post[h1];
  if (flat1 || flat2) return false;

  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < h1; ++i) m1 += post[i];
  for (int i = h1; i < n; ++i) m2 += post[i];
  m1 /= h1;
  m2 /= h2;

  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < h1; ++i) s1 += (post[i] - m1) * (post[i] - m1);
  for (int i = h1; i < n; ++i) s2 += (post[i] - m2) * (post[i] - m2);
  const double var1 = s1 / (h1 - 1);
  const double var2 = s2 / (h2 - 1);
  if (!(var1 > 0.0) || !(var2 > 0.0)) return false;

  const double pooled = std::sqrt((s1 + s2) / (h1 + h2 - 2));
  return std::abs(m1 - m2) <= 0.1 * pooled;
}

}  // namespace bflow
