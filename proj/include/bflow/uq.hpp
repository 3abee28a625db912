#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "bflow/grid.hpp"
#include "bflow/sampler.hpp"

namespace bflow {

/// Per-pixel Gaussian fit of the posterior flow draws.
struct PixelUQ {
  Eigen::Vector2d mu = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();  // symmetric, PSD up to rounding
  long count = 0;
};

/// Confidence region boundary: center, semi-axes sorted descending, and the
/// major-axis orientation in (-pi/2, pi/2]. degenerate marks a singular
/// covariance (minor axis collapsed to zero).
struct Ellipse {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double orientation = 0.0;
  bool degenerate = false;
};

struct UQField {
  GridSpec grid;
  std::vector<PixelUQ> pixels;  // vectorization order, i + j*nx
  double q;                     // confidence level in (0,1)
};

/// Sample mean and unbiased (count-1) covariance of 2-vector draws.
PixelUQ pixel_stats(std::span<const Eigen::Vector2d> samples);

/// Exact chi-squared quantile with two degrees of freedom: -2 ln(1-q).
double chi2_quantile_2dof(double q);

/// Level-q confidence ellipse of the fitted Gaussian: eigendecompose sigma,
/// scale the axes by sqrt(eigenvalue * chi2_quantile_2dof(q)). A covariance
/// with an eigenvalue at or below 1e-14 times the largest yields a flagged
/// degenerate result instead of an error.
Ellipse confidence_ellipse(const PixelUQ& p, double q);

/// Area of the level-q region: pi * chi2 * sqrt(det sigma). Zero for singular
/// covariances.
double uncertainty_area(const PixelUQ& p, double q);

/// Devectorizes the accumulated post-burn-in mean draw into a flow field.
FlowField mean_flow(const ChainResult& result, const GridSpec& grid);

/// Per-pixel Gaussian fits for every pixel of a chain result.
UQField uq_field(const ChainResult& result, const GridSpec& grid, double q);

}  // namespace bflow
