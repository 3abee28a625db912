#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "bflow/errors.hpp"

namespace bflow {

/// Row-compressed sparse matrix. Column indices within a row are sorted and
/// duplicate-free; entries with value zero are kept (structural nonzeros), so
/// operator shape is independent of the numbers it happens to hold.
class SparseOperator {
public:
  using Triplet = Eigen::Triplet<double>;

  SparseOperator() = default;

  static SparseOperator from_triplets(int rows, int cols,
                                      const std::vector<Triplet>& entries) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> m(rows, cols);
    m.setFromTriplets(entries.begin(), entries.end());  // sums duplicates
    m.makeCompressed();
    return SparseOperator(std::move(m));
  }

  static SparseOperator identity(int k) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> m(k, k);
    m.setIdentity();
    return SparseOperator(std::move(m));
  }

  static SparseOperator diagonal(const Eigen::VectorXd& d) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(d.size()));
    for (int i = 0; i < d.size(); ++i) t.emplace_back(i, i, d[i]);
    return from_triplets(static_cast<int>(d.size()), static_cast<int>(d.size()), t);
  }

  int rows() const { return static_cast<int>(mat_.rows()); }
  int cols() const { return static_cast<int>(mat_.cols()); }
  int nonzero_count() const { return static_cast<int>(mat_.nonZeros()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    if (x.size() != mat_.cols()) {
      throw DimensionError("SparseOperator::apply: vector length mismatch");
    }
    return mat_ * x;
  }

  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const {
    if (x.size() != mat_.rows()) {
      throw DimensionError("SparseOperator::apply_transpose: vector length mismatch");
    }
    return mat_.transpose() * x;
  }

  /// Sorted (column, value) pairs of one row.
  std::vector<std::pair<int, double>> row(int r) const {
    std::vector<std::pair<int, double>> out;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(mat_, r); it;
         ++it) {
      out.emplace_back(static_cast<int>(it.col()), it.value());
    }
    return out;
  }

  SparseOperator transpose() const {
    Eigen::SparseMatrix<double, Eigen::RowMajor> t = mat_.transpose();
    t.makeCompressed();
    return SparseOperator(std::move(t));
  }

  SparseOperator scaled(double s) const {
    Eigen::SparseMatrix<double, Eigen::RowMajor> m = mat_ * s;
    m.makeCompressed();
    return SparseOperator(std::move(m));
  }

  /// Dense copy; test-scale matrices only.
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(mat_); }

  friend SparseOperator multiply(const SparseOperator& a, const SparseOperator& b) {
    if (a.cols() != b.rows()) {
      throw DimensionError("SparseOperator multiply: inner dimensions differ");
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> m = a.mat_ * b.mat_;
    m.makeCompressed();
    return SparseOperator(std::move(m));
  }

  friend SparseOperator add(const SparseOperator& a, const SparseOperator& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
      throw DimensionError("SparseOperator add: shapes differ");
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> m = a.mat_ + b.mat_;
    m.makeCompressed();
    return SparseOperator(std::move(m));
  }

  /// Kronecker product a (x) b.
  friend SparseOperator kron(const SparseOperator& a, const SparseOperator& b) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(a.nonzero_count()) *
              static_cast<std::size_t>(b.nonzero_count()));
    for (int ia = 0; ia < a.rows(); ++ia) {
      for (const auto& [ja, va] : a.row(ia)) {
        for (int ib = 0; ib < b.rows(); ++ib) {
          for (const auto& [jb, vb] : b.row(ib)) {
            t.emplace_back(ia * b.rows() + ib, ja * b.cols() + jb, va * vb);
          }
        }
      }
    }
    return from_triplets(a.rows() * b.rows(), a.cols() * b.cols(), t);
  }

private:
  explicit SparseOperator(Eigen::SparseMatrix<double, Eigen::RowMajor> m)
      : mat_(std::move(m)) {}

  Eigen::SparseMatrix<double, Eigen::RowMajor> mat_;
};

}  // namespace bflow
