#pragma once

#include <Eigen/Core>

#include "bflow/errors.hpp"

namespace bflow {

/// Uniform pixel grid on the fixed domain [-1,1] x [-1,1].
///
/// Grid point (i,j), 0-based, sits at (x_i, y_j) = (-1 + i*dx, -1 + j*dy).
/// Images and flow components are nx-by-ny matrices indexed (i,j), so the
/// first index walks the x direction and the second the y direction.
struct GridSpec {
  int nx = 0;
  int ny = 0;

  GridSpec(int nx_, int ny_) : nx(nx_), ny(ny_) {
    if (nx < 2 || ny < 2) {
      throw DomainError("GridSpec needs at least 2 points per direction");
    }
  }

  double dx() const { return 2.0 / (nx - 1); }
  double dy() const { return 2.0 / (ny - 1); }
  double x(int i) const { return -1.0 + i * dx(); }
  double y(int j) const { return -1.0 + j * dy(); }
  int pixel_count() const { return nx * ny; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Grayscale intensity samples on a grid. Entries are expected in [0,1] for
/// source images; derived images (noisy second frames) may exceed that range
/// and are kept unclamped.
struct ImageField {
  GridSpec grid;
  Eigen::MatrixXd data;  // nx x ny, data(i,j) = intensity at (x_i, y_j)

  ImageField(GridSpec g, Eigen::MatrixXd d) : grid(g), data(std::move(d)) {
    if (data.rows() != grid.nx || data.cols() != grid.ny) {
      throw DimensionError("ImageField data does not match grid");
    }
    if (!data.allFinite()) {
      throw DomainError("ImageField data must be finite");
    }
  }
};

/// Per-pixel velocity field (u horizontal, v vertical), grid units per frame.
struct FlowField {
  GridSpec grid;
  Eigen::MatrixXd u;  // nx x ny
  Eigen::MatrixXd v;  // nx x ny

  FlowField(GridSpec g, Eigen::MatrixXd u_, Eigen::MatrixXd v_)
      : grid(g), u(std::move(u_)), v(std::move(v_)) {
    if (u.rows() != grid.nx || u.cols() != grid.ny || v.rows() != grid.nx ||
        v.cols() != grid.ny) {
      throw DimensionError("FlowField components do not match grid");
    }
    if (!u.allFinite() || !v.allFinite()) {
      throw DomainError("FlowField components must be finite");
    }
  }

  static FlowField zero(GridSpec g) {
    return FlowField(g, Eigen::MatrixXd::Zero(g.nx, g.ny),
                     Eigen::MatrixXd::Zero(g.nx, g.ny));
  }
};

/// Column-stacking of a matrix: column j of M occupies entries
/// [j*rows, (j+1)*rows) of the result.
inline Eigen::VectorXd vectorize(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

/// Inverse of vectorize for an nx-by-ny grid.
inline Eigen::MatrixXd devectorize(const Eigen::VectorXd& v, const GridSpec& grid) {
  if (v.size() != grid.pixel_count()) {
    throw DimensionError("devectorize: vector length " + std::to_string(v.size()) +
                         " does not match grid with " +
                         std::to_string(grid.pixel_count()) + " pixels");
  }
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), grid.nx, grid.ny);
}

}  // namespace bflow
