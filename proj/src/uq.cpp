#include "bflow/uq.hpp"

#include <cmath>
#include <numbers>

namespace bflow {

PixelUQ pixel_stats(std::span<const Eigen::Vector2d> samples) {
  if (samples.size() < 2) {
    throw InsufficientDataError("pixel_stats: need at least 2 samples");
  }
  PixelUQ out;
  out.count = static_cast<long>(samples.size());

  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& s : samples) mean += s;
  mean /= static_cast<double>(samples.size());

  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& s : samples) {
    const Eigen::Vector2d d = s - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(samples.size() - 1);

  out.mu = mean;
  out.sigma = cov;
  return out;
}

double chi2_quantile_2dof(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("chi2_quantile_2dof: q must lie in (0,1)");
  }
  return -2.0 * std::log1p(-q);
}

namespace {

// Eigen-pairs of a symmetric 2x2 matrix, closed form. Returns eigenvalues
// sorted descending and the major-axis angle in (-pi/2, pi/2]; an isotropic
// matrix reports angle 0 by convention.
struct SymEig2 {
  double ev_major = 0.0;
  double ev_minor = 0.0;
  double angle = 0.0;
};

SymEig2 sym_eig2(const Eigen::Matrix2d& s) {
  const double a = s(0, 0);
  const double b = 0.5 * (s(0, 1) + s(1, 0));
  const double c = s(1, 1);
  const double half_trace = 0.5 * (a + c);
  const double radius = std::sqrt(0.25 * (a - c) * (a - c) + b * b);

  SymEig2 out;
  out.ev_major = half_trace + radius;
  out.ev_minor = half_trace - radius;
  if (radius == 0.0) {
    out.angle = 0.0;  // isotropic
    return out;
  }
  if (b == 0.0) {
    out.angle = a >= c ? 0.0 : std::numbers::pi / 2.0;
    return out;
  }
  double angle = std::atan2(out.ev_major - a, b);
  if (angle <= -std::numbers::pi / 2.0) angle += std::numbers::pi;
  if (angle > std::numbers::pi / 2.0) angle -= std::numbers::pi;
  out.angle = angle;
  return out;
}

}  // namespace

Ellipse confidence_ellipse(const PixelUQ& p, double q) {
  const double chi2 = chi2_quantile_2dof(q);
  const SymEig2 eig = sym_eig2(p.sigma);

  Ellipse e;
  e.center = p.mu;
  e.orientation = eig.angle;

  const double cutoff = 1e-14 * std::max(eig.ev_major, 0.0);
  if (eig.ev_major <= 0.0 || eig.ev_minor <= cutoff) {
    e.degenerate = true;
    e.semi_major = eig.ev_major > 0.0 ? std::sqrt(eig.ev_major * chi2) : 0.0;
    e.semi_minor = 0.0;
    if (eig.ev_major <= 0.0) e.orientation = 0.0;
    return e;
  }
  e.semi_major = std::sqrt(eig.ev_major * chi2);
  e.semi_minor = std::sqrt(eig.ev_minor * chi2);
  return e;
}

double uncertainty_area(const PixelUQ& p, double q) {
  const double chi2 = chi2_quantile_2dof(q);
  const double det = p.sigma(0, 0) * p.sigma(1, 1) - p.sigma(0, 1) * p.sigma(1, 0);
  if (det <= 0.0) return 0.0;
  return std::numbers::pi * chi2 * std::sqrt(det);
}

FlowField mean_flow(const ChainResult& result, const GridSpec& grid) {
  if (result.stats.count() < 1) {
    throw InsufficientDataError("mean_flow: chain kept no samples");
  }
  if (result.stats.pixel_count() != grid.pixel_count()) {
    throw DimensionError("mean_flow: grid does not match chain");
  }
  const Eigen::VectorXd mean = result.stats.mean();
  const int m = grid.pixel_count();
  return FlowField(grid, devectorize(mean.head(m), grid),
                   devectorize(mean.tail(m), grid));
}

UQField uq_field(const ChainResult& result, const GridSpec& grid, double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("uq_field: q must lie in (0,1)");
  }
  if (result.stats.count() < 2) {
    throw InsufficientDataError("uq_field: need at least 2 kept samples");
  }
  if (result.stats.pixel_count() != grid.pixel_count()) {
    throw DimensionError("uq_field: grid does not match chain");
  }
  UQField field{grid, {}, q};
  field.pixels.resize(grid.pixel_count());
  for (int i = 0; i < grid.pixel_count(); ++i) {
    PixelUQ& p = field.pixels[i];
    p.mu = {result.stats.mean_u(i), result.stats.mean_v(i)};
    p.sigma(0, 0) = result.stats.cov_uu(i);
    p.sigma(1, 1) = result.stats.cov_vv(i);
    p.sigma(0, 1) = p.sigma(1, 0) = result.stats.cov_uv(i);
    p.count = result.stats.count();
  }
  return field;
}

}  // namespace bflow
