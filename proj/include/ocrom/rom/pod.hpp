#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ocrom/numerics/types.hpp"
#include "ocrom/optctrl/kkt.hpp"

namespace ocrom::rom {

using numerics::DenseMatrix;
using numerics::SparseMatrix;
using numerics::Vector;

struct TrainingSet {
  enum class Sampling { grid, random };
  std::vector<Vector> points;
  Sampling sampling = Sampling::random;
  std::uint64_t seed = 0;
};

/// `count` points drawn uniformly from the box with a seeded mt19937_64.
TrainingSet random_training_set(const std::vector<std::array<double, 2>>& domain, int count,
                                std::uint64_t seed);
/// Tensor grid with `per_dim` equispaced points per parameter.
TrainingSet grid_training_set(const std::vector<std::array<double, 2>>& domain, int per_dim);

/// Snapshot matrices, one column per successful training solve. The state
/// velocity columns hold the homogeneous part (lifting removed).
struct SnapshotSet {
  DenseMatrix v, p, u, w, q;
  std::vector<Vector> mu;
  std::vector<double> J;
  std::vector<std::pair<std::size_t, std::string>> failures;  // training index, reason
  int size() const { return static_cast<int>(mu.size()); }
};

SnapshotSet collect_snapshots(const optctrl::FullOrderModel& model, const TrainingSet& training);

struct FieldPod {
  Vector eigenvalues;  // all eigenvalues of the correlation matrix, descending
  DenseMatrix modes;   // retained modes, orthonormal in the field inner product
  int rank = 0;
  double retained_energy = 0.0;
  bool rank_deficient = false;  // fewer nonzero eigenvalues than requested
};

struct PodOptions {
  int n_max = 10;
  double eps_tol = 1e-4;
  /// Eigenvalues below eps_rank * lambda_1 count as zero (singular values
  /// below 1e-11 of the largest).
  double eps_rank = 1e-22;
};

/// POD of the columns of `snapshots` in the inner product `x`: eigenpairs of
/// (1/|L|) S^T X S, modes S rho / sqrt(|L| lambda). The eigenpairs come from
/// a Jacobi SVD of the triangular factor of the X-weighted snapshots, so
/// eigenvalues far below lambda_1 keep their accuracy.
FieldPod pod_compress(const DenseMatrix& snapshots, const SparseMatrix& x, const PodOptions& opt);

/// Modified Gram-Schmidt in the inner product `x` (two passes), optionally
/// against an already orthonormal set. Columns whose remaining norm falls
/// below `drop_tol` times their original norm are dropped.
DenseMatrix orthonormalize(const DenseMatrix& vectors, const SparseMatrix& x,
                           const DenseMatrix* against = nullptr, double drop_tol = 1e-10);

struct Supremizers {
  DenseMatrix raw;          // X_v T = B^T q on the homogeneous velocity space
  DenseMatrix orthonormal;  // raw after Gram-Schmidt in X_v
};

Supremizers compute_supremizers(const optctrl::FullOrderModel& model, const DenseMatrix& pressure_modes);

struct PodBasis {
  PodOptions options;
  FieldPod v, p, u, w, q;
  Supremizers state_sup, adjoint_sup;
  std::vector<std::string> warnings;
};

PodBasis build_pod(const optctrl::FullOrderModel& model, const SnapshotSet& snapshots,
                   const PodOptions& options);

}  // namespace ocrom::rom
