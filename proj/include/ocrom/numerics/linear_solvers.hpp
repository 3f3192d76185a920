#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ocrom/numerics/types.hpp"

namespace ocrom::numerics {

/// Sparse direct LU with partial pivoting (UMFPACK). Factor once, solve many
/// right-hand sides; each solve is followed by up to three steps of iterative
/// refinement so that the relative residual meets `kResidualTolerance`.
class SparseLu {
 public:
  static constexpr double kResidualTolerance = 1e-10;

  SparseLu();
  explicit SparseLu(const SparseMatrix& a);
  ~SparseLu();
  SparseLu(SparseLu&&) noexcept;
  SparseLu& operator=(SparseLu&&) noexcept;

  void factor(const SparseMatrix& a);
  Vector solve(const Vector& b) const;
  /// Relative residual of the most recent solve.
  double last_residual() const { return last_residual_; }
  Index size() const { return matrix_.rows(); }

 private:
  struct Impl;
  SparseMatrix matrix_;
  std::unique_ptr<Impl> impl_;
  mutable double last_residual_ = 0.0;
};

/// One-shot convenience wrapper around SparseLu.
Vector sparse_lu_solve(const SparseMatrix& a, const Vector& b);

/// Sparse Cholesky for symmetric positive definite matrices (CHOLMOD).
class SpdSolver {
 public:
  SpdSolver();
  explicit SpdSolver(const SparseMatrix& a);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  void factor(const SparseMatrix& a);
  Vector solve(const Vector& b) const;
  DenseMatrix solve(const DenseMatrix& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Selection of a subset of indices, used to restrict operators to free
/// (non-Dirichlet) degrees of freedom.
class IndexSelection {
 public:
  IndexSelection() = default;
  IndexSelection(Index full_size, std::vector<int> selected);

  Index full_size() const { return full_size_; }
  Index size() const { return static_cast<Index>(selected_.size()); }
  std::span<const int> indices() const { return selected_; }
  /// Position of `full_index` in the selection, or -1.
  int position(int full_index) const { return position_[full_index]; }

  Vector restrict(const Vector& full) const;
  Vector extend(const Vector& reduced) const;
  DenseMatrix restrict_rows(const DenseMatrix& full) const;
  DenseMatrix extend_rows(const DenseMatrix& reduced) const;

 private:
  Index full_size_ = 0;
  std::vector<int> selected_;
  std::vector<int> position_;
};

/// a(rows, cols) for index selections; pass nullptr to keep every row/col.
SparseMatrix submatrix(const SparseMatrix& a, const IndexSelection* rows,
                       const IndexSelection* cols);

/// Appends the entries of `block` shifted by (row_offset, col_offset).
void append_block(std::vector<Triplet>& out, const SparseMatrix& block,
                  int row_offset, int col_offset, double scale = 1.0);

/// Dense LU with full pivoting; throws SingularMatrix when the matrix is
/// numerically rank deficient.
Vector dense_solve(const DenseMatrix& a, const Vector& b);

}  // namespace ocrom::numerics
