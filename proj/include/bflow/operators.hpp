#pragma once

#include <utility>

#include <Eigen/Core>

#include "bflow/grid.hpp"
#include "bflow/sparse.hpp"

namespace bflow {

/// k-by-k forward-difference stencil. Rows 0..k-2 hold (-1, +1) on the
/// diagonal and superdiagonal; the last row falls back to a backward
/// difference (-1 at k-2, +1 at k-1) so every row sums to zero and constants
/// are annihilated.
SparseOperator build_diff_matrix(int k);

/// Partial-derivative operators on vectorized nx-by-ny fields:
///   Qx = (1/dx) I_ny (x) S_nx,   Qy = (1/dy) S_ny (x) I_nx.
std::pair<SparseOperator, SparseOperator> build_qx_qy(const GridSpec& grid);

/// Gradient-penalty matrix L = I_2 (x) (Qx^T Qx + Qy^T Qy), size 2m x 2m.
/// Symmetric positive semidefinite; its null space is spanned by the two
/// constant flow components.
SparseOperator build_regularizer(const GridSpec& grid);

/// Discretized brightness-constancy system A x = b with regularizer attached.
///
/// A = [diag(fx), diag(fy)] is m x 2m with exactly two structural nonzeros
/// per row (columns i and i+m), x = [u; v], b = f - g. qx/qy are retained for
/// prior-factor sampling and image synthesis.
struct FlowSystem {
  SparseOperator A;   // m x n
  Eigen::VectorXd b;  // m
  SparseOperator L;   // n x n
  SparseOperator qx;  // m x m
  SparseOperator qy;  // m x m
  GridSpec grid;
  int m = 0;  // pixel count
  int n = 0;  // unknown count, 2m
};

/// Assembles the flow system from an image pair sharing one grid. Spatial
/// gradients are taken from the first image only; the temporal difference is
/// the direct pixel difference, so b = f - g.
FlowSystem assemble_system(const ImageField& first, const ImageField& second);

}  // namespace bflow
