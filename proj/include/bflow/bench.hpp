#pragma once

#include <vector>

#include <Eigen/Core>

#include "bflow/grid.hpp"
#include "bflow/rng.hpp"

namespace bflow {

/// Selector for the five benchmark flow fields on [-1,1]^2:
///   1: (x, y)                              2: (-y, x)
///   3: (y, sin x)                          4: (-pi sin(pi x/2) cos(pi y/2),
///                                              pi cos(pi x/2) sin(pi y/2))
///   5: (-pi sin(pi x) cos(pi y), pi cos(pi x) sin(pi y))
struct FlowSpec {
  int id = 1;

  void validate() const {
    if (id < 1 || id > 5) throw DomainError("FlowSpec: id must be 1..5");
  }
};

struct NoiseSpec {
  enum class Kind { gaussian, uniform, laplace, none };
  Kind kind = Kind::none;
  double sigma = 0.0;  // standard deviation in intensity units; ignored for none

  void validate() const {
    if (kind != Kind::none && sigma < 0.0) {
      throw DomainError("NoiseSpec: sigma must be nonnegative");
    }
  }
};

struct Metrics {
  double aee = 0.0;        // mean endpoint error, grid units/frame
  double rmse_g = 0.0;     // RMSE against the noisy second image
  double rmse_gbar = 0.0;  // RMSE against the noiseless second image
};

/// Synthetic pair plus ground truth: the second image is produced by the
/// linearized flow equation, once with the requested noise and once without.
struct BenchCase {
  ImageField first;
  FlowField truth;
  ImageField second_noisy;  // G
  ImageField second_clean;  // G-bar
  FlowSpec flow;
  NoiseSpec noise;
};

/// Analytic evaluation of a benchmark field at one point.
Eigen::Vector2d eval_flow_field(const FlowSpec& spec, double x, double y);

/// The benchmark field sampled on every grid point.
FlowField sample_flow_field(const FlowSpec& spec, const GridSpec& grid);

/// First synthetic image F(x,y) = (cos(pi x) cos(pi y) + 1) / 2 on the grid.
ImageField make_first_image(const GridSpec& grid);

/// Linearized advection g = f - fx.*u - fy.*v + eta with forward-difference
/// gradients of the first image. Uniform noise is drawn on
/// [-sigma sqrt(3), sigma sqrt(3)] and Laplace noise uses scale sigma/sqrt(2),
/// so sigma is the standard deviation for every kind.
ImageField advect_image(const ImageField& first, const FlowField& flow,
                        const NoiseSpec& noise, RandomStream& rng);

/// Mean Euclidean distance between estimated and true flow vectors.
double endpoint_error(const FlowField& est, const FlowField& truth);

/// Second image implied by a flow estimate: advection with the noise term off.
ImageField reconstruct_second_image(const ImageField& first, const FlowField& flow);

struct ImageComparison {
  double rmse_g = 0.0;
  double rmse_gbar = 0.0;
  // Paired per-pixel values in vectorization order, for scatter plots.
  std::vector<double> ghat;
  std::vector<double> g;
  std::vector<double> gbar;
};

ImageComparison compare_images(const ImageField& g_hat, const ImageField& g_noisy,
                               const ImageField& g_true);

/// Builds the full benchmark case from a first image, a flow selector, and a
/// noise model.
BenchCase make_bench_case(const ImageField& first, const FlowSpec& flow,
                          const NoiseSpec& noise, RandomStream& rng);

}  // namespace bflow
