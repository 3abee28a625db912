#include "bflow/operators.hpp"

#include <vector>

namespace bflow {

SparseOperator build_diff_matrix(int k) {
  if (k < 2) {
    throw DomainError("build_diff_matrix: size must be at least 2");
  }
  std::vector<SparseOperator::Triplet> t;
  t.reserve(2 * static_cast<std::size_t>(k));
  for (int i = 0; i + 1 < k; ++i) {
    t.emplace_back(i, i, -1.0);
    t.emplace_back(i, i + 1, 1.0);
  }
  t.emplace_back(k - 1, k - 2, -1.0);
  t.emplace_back(k - 1, k - 1, 1.0);
  return SparseOperator::from_triplets(k, k, t);
}

std::pair<SparseOperator, SparseOperator> build_qx_qy(const GridSpec& grid) {
  const SparseOperator sx = build_diff_matrix(grid.nx);
  const SparseOperator sy = build_diff_matrix(grid.ny);
  SparseOperator qx =
      kron(SparseOperator::identity(grid.ny), sx).scaled(1.0 / grid.dx());
  SparseOperator qy =
      kron(sy, SparseOperator::identity(grid.nx)).scaled(1.0 / grid.dy());
  return {std::move(qx), std::move(qy)};
}

SparseOperator build_regularizer(const GridSpec& grid) {
  const auto [qx, qy] = build_qx_qy(grid);
  const SparseOperator k =
      add(multiply(qx.transpose(), qx), multiply(qy.transpose(), qy));
  return kron(SparseOperator::identity(2), k);
}

FlowSystem assemble_system(const ImageField& first, const ImageField& second) {
  if (!(first.grid == second.grid)) {
    throw DimensionError("assemble_system: images are on different grids");
  }
  const GridSpec grid = first.grid;
  const int m = grid.pixel_count();

  auto [qx, qy] = build_qx_qy(grid);
  const Eigen::VectorXd f = vectorize(first.data);
  const Eigen::VectorXd g = vectorize(second.data);
  const Eigen::VectorXd fx = qx.apply(f);
  const Eigen::VectorXd fy = qy.apply(f);

  std::vector<SparseOperator::Triplet> t;
  t.reserve(2 * static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    t.emplace_back(i, i, fx[i]);
    t.emplace_back(i, i + m, fy[i]);
  }

  FlowSystem sys{SparseOperator::from_triplets(m, 2 * m, t),
                 f - g,
                 build_regularizer(grid),
                 std::move(qx),
                 std::move(qy),
                 grid,
                 m,
                 2 * m};
  return sys;
}

}  // namespace bflow
