#include "bflow/bench.hpp"

#include <cmath>
#include <numbers>

#include "bflow/operators.hpp"

namespace bflow {

namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::Vector2d eval_flow_field(const FlowSpec& spec, double x, double y) {
  spec.validate();
  switch (spec.id) {
    case 1:
      return {x, y};
    case 2:
      return {-y, x};
    case 3:
      return {y, std::sin(x)};
    case 4:
      return {-kPi * std::sin(0.5 * kPi * x) * std::cos(0.5 * kPi * y),
              kPi * std::cos(0.5 * kPi * x) * std::sin(0.5 * kPi * y)};
    default:
      return {-kPi * std::sin(kPi * x) * std::cos(kPi * y),
              kPi * std::cos(kPi * x) * std::sin(kPi * y)};
  }
}

FlowField sample_flow_field(const FlowSpec& spec, const GridSpec& grid) {
  spec.validate();
  Eigen::MatrixXd u(grid.nx, grid.ny);
  Eigen::MatrixXd v(grid.nx, grid.ny);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Eigen::Vector2d w = eval_flow_field(spec, grid.x(i), grid.y(j));
      u(i, j) = w[0];
      v(i, j) = w[1];
    }
  }
  return FlowField(grid, std::move(u), std::move(v));
}

ImageField make_first_image(const GridSpec& grid) {
  Eigen::MatrixXd data(grid.nx, grid.ny);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      data(i, j) = 0.5 * (std::cos(kPi * grid.x(i)) * std::cos(kPi * grid.y(j)) + 1.0);
    }
  }
  return ImageField(grid, std::move(data));
}

namespace {

double noise_draw(const NoiseSpec& noise, RandomStream& rng) {
  switch (noise.kind) {
    case NoiseSpec::Kind::gaussian:
      return noise.sigma * rng.normal();
    case NoiseSpec::Kind::uniform:
      // Width 2 sigma sqrt(3) gives standard deviation sigma.
      return noise.sigma * std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0);
    case NoiseSpec::Kind::laplace: {
      // Scale sigma/sqrt(2) gives standard deviation sigma.
      const double u = rng.uniform() - 0.5;
      const double scale = noise.sigma / std::sqrt(2.0);
      return -scale * std::copysign(std::log(1.0 - 2.0 * std::abs(u)), u);
    }
    case NoiseSpec::Kind::none:
      return 0.0;
  }
  return 0.0;
}

}  // namespace

ImageField advect_image(const ImageField& first, const FlowField& flow,
                        const NoiseSpec& noise, RandomStream& rng) {
  if (!(first.grid == flow.grid)) {
    throw DimensionError("advect_image: image and flow are on different grids");
  }
  noise.validate();

  const auto [qx, qy] = build_qx_qy(first.grid);
  const Eigen::VectorXd f = vectorize(first.data);
  const Eigen::VectorXd fx = qx.apply(f);
  const Eigen::VectorXd fy = qy.apply(f);
  const Eigen::VectorXd u = vectorize(flow.u);
  const Eigen::VectorXd v = vectorize(flow.v);

  Eigen::VectorXd g =
      f - fx.cwiseProduct(u) - fy.cwiseProduct(v);
  if (noise.kind != NoiseSpec::Kind::none) {
    for (int i = 0; i < g.size(); ++i) g[i] += noise_draw(noise, rng);
  }
  return ImageField(first.grid, devectorize(g, first.grid));
}

double endpoint_error(const FlowField& est, const FlowField& truth) {
  if (!(est.grid == truth.grid)) {
    throw DimensionError("endpoint_error: flows are on different grids");
  }
  const Eigen::MatrixXd du = est.u - truth.u;
  const Eigen::MatrixXd dv = est.v - truth.v;
  return (du.array().square() + dv.array().square()).sqrt().mean();
}

ImageField reconstruct_second_image(const ImageField& first, const FlowField& flow) {
  RandomStream unused(0);
  return advect_image(first, flow, NoiseSpec{NoiseSpec::Kind::none, 0.0}, unused);
}

ImageComparison compare_images(const ImageField& g_hat, const ImageField& g_noisy,
                               const ImageField& g_true) {
  if (!(g_hat.grid == g_noisy.grid) || !(g_hat.grid == g_true.grid)) {
    throw DimensionError("compare_images: images are on different grids");
  }
  ImageComparison out;
  out.rmse_g = std::sqrt((g_hat.data - g_noisy.data).array().square().mean());
  out.rmse_gbar = std::sqrt((g_hat.data - g_true.data).array().square().mean());

  const Eigen::VectorXd vh = vectorize(g_hat.data);
  const Eigen::VectorXd vg = vectorize(g_noisy.data);
  const Eigen::VectorXd vb = vectorize(g_true.data);
  out.ghat.assign(vh.data(), vh.data() + vh.size());
  out.g.assign(vg.data(), vg.data() + vg.size());
  out.gbar.assign(vb.data(), vb.data() + vb.size());
  return out;
}

BenchCase make_bench_case(const ImageField& first, const FlowSpec& flow,
                          const NoiseSpec& noise, RandomStream& rng) {
  flow.validate();
  noise.validate();
  FlowField truth = sample_flow_field(flow, first.grid);
  ImageField noisy = advect_image(first, truth, noise, rng);
  ImageField clean = reconstruct_second_image(first, truth);
  return BenchCase{first, std::move(truth), std::move(noisy), std::move(clean),
                   flow, noise};
}

}  // namespace bflow
