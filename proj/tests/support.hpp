#pragma once

// Reference implementations the tests compare against. Everything here runs
// through plain index loops or dense Eigen factorizations, independent of the
// sparse operators and iterative solvers under test.

#include <filesystem>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "bflow/grid.hpp"
#include "bflow/rng.hpp"

namespace testsupport {

/// Forward-difference x-gradient by direct loop; last row backward.
inline Eigen::MatrixXd loop_grad_x(const bflow::ImageField& img) {
  const int nx = img.grid.nx;
  const int ny = img.grid.ny;
  const double inv = 1.0 / img.grid.dx();
  Eigen::MatrixXd out(nx, ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      out(i, j) = (img.data(i + 1, j) - img.data(i, j)) * inv;
    }
    out(nx - 1, j) = (img.data(nx - 1, j) - img.data(nx - 2, j)) * inv;
  }
  return out;
}

/// Forward-difference y-gradient by direct loop; last column backward.
inline Eigen::MatrixXd loop_grad_y(const bflow::ImageField& img) {
  const int nx = img.grid.nx;
  const int ny = img.grid.ny;
  const double inv = 1.0 / img.grid.dy();
  Eigen::MatrixXd out(nx, ny);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) {
      out(i, j) = (img.data(i, j + 1) - img.data(i, j)) * inv;
    }
    out(i, ny - 1) = (img.data(i, ny - 1) - img.data(i, ny - 2)) * inv;
  }
  return out;
}

inline Eigen::VectorXd dense_solve_spd(const Eigen::MatrixXd& m,
                                       const Eigen::VectorXd& rhs) {
  return m.ldlt().solve(rhs);
}

inline Eigen::MatrixXd random_matrix(int rows, int cols, bflow::RandomStream& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

inline Eigen::VectorXd random_vector(int n, bflow::RandomStream& rng) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("bflow_test_" + tag + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace testsupport
