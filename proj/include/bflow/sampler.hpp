#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "bflow/operators.hpp"
#include "bflow/rng.hpp"
#include "bflow/solver.hpp"

namespace bflow {

/// Gamma shape/rate hyperparameters for the noise precision lambda and the
/// prior precision delta. The defaults keep both hyperpriors wide.
struct HyperPriors {
  double alpha_lambda = 1.0;
  double beta_lambda = 1e-4;
  double alpha_delta = 1.0;
  double beta_delta = 1e-4;

  void validate() const {
    if (alpha_lambda <= 0 || beta_lambda <= 0 || alpha_delta <= 0 || beta_delta <= 0) {
      throw DomainError("HyperPriors: all parameters must be positive");
    }
  }
};

struct ChainConfig {
  int iterations = 5000;
  int burn_in = 1000;
  std::uint64_t seed = 0;
  double lambda0 = 1.0;
  double delta0 = 1.0;
  int thin = 1;
  int max_restarts = 3;
  bool keep_samples = false;  // retain thinned post-burn-in draws for diagnostics

  void validate() const {
    if (burn_in < 0 || burn_in >= iterations) {
      throw DomainError("ChainConfig: need 0 <= burn_in < iterations");
    }
    if (thin < 1) throw DomainError("ChainConfig: thin must be at least 1");
    if (max_restarts < 0) throw DomainError("ChainConfig: max_restarts must be >= 0");
    if (lambda0 <= 0 || delta0 <= 0) {
      throw DomainError("ChainConfig: initial precisions must be positive");
    }
  }
};

struct ChainState {
  Eigen::VectorXd x;
  double lambda = 1.0;
  double delta = 1.0;
  int k = 0;
};

/// Streaming per-pixel first and second moments of the flow draws, Welford
/// form, so a chain needs O(n) memory regardless of length.
class FlowAccumulator {
public:
  explicit FlowAccumulator(int pixel_count)
      : m_(pixel_count),
        mean_u_(Eigen::VectorXd::Zero(pixel_count)),
        mean_v_(Eigen::VectorXd::Zero(pixel_count)),
        c_uu_(Eigen::VectorXd::Zero(pixel_count)),
        c_vv_(Eigen::VectorXd::Zero(pixel_count)),
        c_uv_(Eigen::VectorXd::Zero(pixel_count)) {}

  void add(const Eigen::VectorXd& x) {
    if (x.size() != 2 * m_) {
      throw DimensionError("FlowAccumulator::add: draw length mismatch");
    }
    ++count_;
    for (int i = 0; i < m_; ++i) {
      const double u = x[i];
      const double v = x[m_ + i];
      const double du = u - mean_u_[i];
      const double dv = v - mean_v_[i];
      mean_u_[i] += du / count_;
      mean_v_[i] += dv / count_;
      c_uu_[i] += du * (u - mean_u_[i]);
      c_vv_[i] += dv * (v - mean_v_[i]);
      c_uv_[i] += du * (v - mean_v_[i]);
    }
  }

  long count() const { return count_; }
  int pixel_count() const { return m_; }

  /// Mean draw in vectorized [u; v] layout.
  Eigen::VectorXd mean() const {
    Eigen::VectorXd out(2 * m_);
    out.head(m_) = mean_u_;
    out.tail(m_) = mean_v_;
    return out;
  }

  double mean_u(int i) const { return mean_u_[i]; }
  double mean_v(int i) const { return mean_v_[i]; }
  // Unbiased (count-1) covariance entries; require count >= 2.
  double cov_uu(int i) const { return c_uu_[i] / (count_ - 1); }
  double cov_vv(int i) const { return c_vv_[i] / (count_ - 1); }
  double cov_uv(int i) const { return c_uv_[i] / (count_ - 1); }

private:
  int m_;
  long count_ = 0;
  Eigen::VectorXd mean_u_, mean_v_;
  Eigen::VectorXd c_uu_, c_vv_, c_uv_;
};

struct ChainResult {
  FlowAccumulator stats;                   // post-burn-in, thinned
  std::vector<double> lambda_trace;        // length iterations
  std::vector<double> delta_trace;         // length iterations
  std::vector<Eigen::VectorXd> samples;    // kept draws if keep_samples
  int iterations = 0;
  int burn_in = 0;
  int thin = 1;
  int restart_count = 0;
  bool converged = false;
  std::uint64_t seed_used = 0;  // derived stream seed of the reported attempt
};

/// Gamma(shape, rate) draw; mean shape/rate. Squeeze/rejection for
/// shape >= 1, boosted by u^(1/shape) below that. Deterministic per stream.
double sample_gamma(double shape, double rate, RandomStream& rng);

struct GammaParams {
  double shape = 0.0;
  double rate = 0.0;
};

/// Parameters of the lambda full conditional: shape m/2 + alpha_lambda,
/// rate ||A x - b||^2 / 2 + beta_lambda.
GammaParams lambda_conditional(const FlowSystem& sys, const HyperPriors& priors,
                               const Eigen::VectorXd& x);

/// Parameters of the delta full conditional: shape n/2 + alpha_delta,
/// rate x^T L x / 2 + beta_delta.
GammaParams delta_conditional(const FlowSystem& sys, const HyperPriors& priors,
                              const Eigen::VectorXd& x);

struct GibbsStep {
  ChainState state;
  bool cg_converged = false;
  int cg_iterations = 0;
};

/// One block Gibbs sweep: draw x at the current (lambda, delta), then refresh
/// lambda and delta from their Gamma full conditionals and advance k. CG
/// non-convergence is reported through the flag so the caller can restart.
GibbsStep gibbs_step(const ChainState& state, const FlowSystem& sys,
                     const HyperPriors& priors, const CGConfig& cg, RandomStream& rng);

/// Runs the Gibbs chain. Records full lambda/delta traces, accumulates
/// post-burn-in flow statistics, and checks the delta/lambda trace for
/// stationarity; a failed check or a failed CG solve restarts the chain from
/// a freshly derived seed, up to max_restarts times. The result always comes
/// back (converged=false after exhausting restarts), never an exception for
/// non-convergence.
ChainResult run_chain(const FlowSystem& sys, const HyperPriors& priors,
                      const ChainConfig& cfg, const CGConfig& cg);

/// Elementwise delta_k / lambda_k over all recorded steps, pre- and
/// post-burn-in (the result's burn_in field marks the split).
std::vector<double> effective_alpha_trace(const ChainResult& result);

/// Split-halves stationarity test on the post-burn-in trace: true iff the two
/// half means differ by at most 0.1 pooled standard deviations and both halves
/// carry positive variance. A constant or too-short trace fails.
bool check_stationarity(const std::vector<double>& trace, int burn_in);

}  // namespace bflow
