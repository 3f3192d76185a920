#include "ocrom/numerics/linear_solvers.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/LU>
#include <Eigen/UmfPackSupport>
#include <cmath>
#include <string>

#include "ocrom/errors.hpp"

namespace ocrom::numerics {

struct SparseLu::Impl {
  Eigen::UmfPackLU<SparseMatrix> lu;
};

SparseLu::SparseLu() = default;
SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

SparseLu::SparseLu(const SparseMatrix& a) { factor(a); }

void SparseLu::factor(const SparseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch("sparse_lu: matrix is " + std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()));
  }
  matrix_ = a;
  matrix_.makeCompressed();
  impl_ = std::make_unique<Impl>();
  // Nested dissection keeps the fill of the 3D saddle-point systems far below AMD.
  impl_->lu.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
  // UmfPackLU maps the compressed arrays of matrix_, which we own.
  impl_->lu.compute(matrix_);
  // UMFPACK flags an exactly zero pivot as a warning; Eigen maps any
  // non-OK status to NumericalIssue.
  if (impl_->lu.info() != Eigen::Success) {
    const int code = impl_->lu.umfpackFactorizeReturncode();
    impl_.reset();
    throw SingularMatrix("sparse_lu: factorization failed (umfpack status " +
                         std::to_string(code) + ")");
  }
}

Vector SparseLu::solve(const Vector& b) const {
  if (!impl_) throw SolverFailure("sparse_lu: solve before factor");
  if (b.size() != matrix_.rows()) {
    throw DimensionMismatch("sparse_lu: rhs length " + std::to_string(b.size()) +
                            " != " + std::to_string(matrix_.rows()));
  }
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    last_residual_ = 0.0;
    return Vector::Zero(b.size());
  }
  Vector x = impl_->lu.solve(b);
  Vector r = b - matrix_ * x;
  last_residual_ = r.norm() / bnorm;
  for (int step = 0; step < 3 && last_residual_ > kResidualTolerance; ++step) {
    x += impl_->lu.solve(r);
    r = b - matrix_ * x;
    last_residual_ = r.norm() / bnorm;
  }
  if (!std::isfinite(last_residual_) || last_residual_ > kResidualTolerance) {
    throw SolverFailure("sparse_lu: relative residual " + std::to_string(last_residual_) +
                        " above tolerance after refinement");
  }
  return x;
}

Vector sparse_lu_solve(const SparseMatrix& a, const Vector& b) {
  SparseLu lu(a);
  return lu.solve(b);
}

struct SpdSolver::Impl {
  Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> llt;
};

SpdSolver::SpdSolver() = default;
SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

SpdSolver::SpdSolver(const SparseMatrix& a) { factor(a); }

void SpdSolver::factor(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionMismatch("spd_solver: matrix not square");
  impl_ = std::make_unique<Impl>();
  impl_->llt.compute(a);
  if (impl_->llt.info() != Eigen::Success) {
    impl_.reset();
    throw SingularMatrix("spd_solver: matrix not positive definite");
  }
}

Vector SpdSolver::solve(const Vector& b) const {
  if (!impl_) throw SolverFailure("spd_solver: solve before factor");
  return impl_->llt.solve(b);
}

DenseMatrix SpdSolver::solve(const DenseMatrix& b) const {
  if (!impl_) throw SolverFailure("spd_solver: solve before factor");
  DenseMatrix x(b.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) x.col(j) = impl_->llt.solve(Vector(b.col(j)));
  return x;
}

IndexSelection::IndexSelection(Index full_size, std::vector<int> selected)
    : full_size_(full_size), selected_(std::move(selected)), position_(full_size, -1) {
  for (std::size_t k = 0; k < selected_.size(); ++k) {
    const int i = selected_[k];
    if (i < 0 || i >= full_size || position_[i] != -1) {
      throw DimensionMismatch("index selection: invalid or repeated index");
    }
    position_[i] = static_cast<int>(k);
  }
}

Vector IndexSelection::restrict(const Vector& full) const {
  if (full.size() != full_size_) throw DimensionMismatch("restrict: length mismatch");
  Vector out(size());
  for (Index k = 0; k < size(); ++k) out[k] = full[selected_[k]];
  return out;
}

Vector IndexSelection::extend(const Vector& reduced) const {
  if (reduced.size() != size()) throw DimensionMismatch("extend: length mismatch");
  Vector out = Vector::Zero(full_size_);
  for (Index k = 0; k < size(); ++k) out[selected_[k]] = reduced[k];
  return out;
}

DenseMatrix IndexSelection::restrict_rows(const DenseMatrix& full) const {
  if (full.rows() != full_size_) throw DimensionMismatch("restrict_rows: row mismatch");
  DenseMatrix out(size(), full.cols());
  for (Index k = 0; k < size(); ++k) out.row(k) = full.row(selected_[k]);
  return out;
}

DenseMatrix IndexSelection::extend_rows(const DenseMatrix& reduced) const {
  if (reduced.rows() != size()) throw DimensionMismatch("extend_rows: row mismatch");
  DenseMatrix out = DenseMatrix::Zero(full_size_, reduced.cols());
  for (Index k = 0; k < size(); ++k) out.row(selected_[k]) = reduced.row(k);
  return out;
}

SparseMatrix submatrix(const SparseMatrix& a, const IndexSelection* rows,
                       const IndexSelection* cols) {
  if (rows && rows->full_size() != a.rows()) throw DimensionMismatch("submatrix: rows");
  if (cols && cols->full_size() != a.cols()) throw DimensionMismatch("submatrix: cols");
  const Index nr = rows ? rows->size() : a.rows();
  const Index nc = cols ? cols->size() : a.cols();
  std::vector<Triplet> trip;
  trip.reserve(a.nonZeros());
  for (Index j = 0; j < a.outerSize(); ++j) {
    const int cj = cols ? cols->position(static_cast<int>(j)) : static_cast<int>(j);
    if (cj < 0) continue;
    for (SparseMatrix::InnerIterator it(a, j); it; ++it) {
      const int ri = rows ? rows->position(static_cast<int>(it.row()))
                          : static_cast<int>(it.row());
      if (ri >= 0) trip.emplace_back(ri, cj, it.value());
    }
  }
  SparseMatrix out(nr, nc);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

void append_block(std::vector<Triplet>& out, const SparseMatrix& block, int row_offset,
                  int col_offset, double scale) {
  for (Index j = 0; j < block.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(block, j); it; ++it) {
      out.emplace_back(static_cast<int>(it.row()) + row_offset,
                       static_cast<int>(it.col()) + col_offset, scale * it.value());
    }
  }
}

Vector dense_solve(const DenseMatrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw DimensionMismatch("dense_solve: shape mismatch");
  }
  Eigen::FullPivLU<DenseMatrix> lu(a);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) {
    throw SingularMatrix("dense_solve: matrix rank " + std::to_string(lu.rank()) + " < " +
                         std::to_string(a.rows()));
  }
  return lu.solve(b);
}

}  // namespace ocrom::numerics
