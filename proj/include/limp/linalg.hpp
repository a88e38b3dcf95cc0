#pragma once
// Dense tensors, compressed sparse matrices, and linear solvers.
//
// The dense Cholesky/LU factorizations are the reference solvers; the sparse
// SPD path (Eigen SimplicialLLT behind a pimpl) is a fast path proven
// equivalent by test. 64-bit floats throughout.

#include <memory>
#include <string>
#include <vector>

#include "limp/common.hpp"

namespace limp {

struct DenseMatrix {
  int rows = 0, cols = 0;
  std::vector<double> v;  // row-major

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {}
  DenseMatrix(int r, int c, std::vector<double> data)
      : rows(r), cols(c), v(std::move(data)) {
    require(v.size() == static_cast<size_t>(r) * c,
            "DenseMatrix: data length does not match rows*cols");
  }

  double& at(int i, int j) { return v[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return v[static_cast<size_t>(i) * cols + j]; }
  size_t size() const { return v.size(); }

  static DenseMatrix identity(int n) {
    DenseMatrix I(n, n);
    for (int i = 0; i < n; ++i) I.at(i, i) = 1.0;
    return I;
  }
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

struct Triplet {
  int row = 0, col = 0;
  double value = 0.0;
};

// Compressed-sparse-row matrix built from (row, col, value) triplets with
// duplicate entries summed and columns sorted within each row.
struct SparseMatrix {
  int rows = 0, cols = 0;
  std::vector<int> row_ptr;   // rows + 1
  std::vector<int> col_idx;   // nnz
  std::vector<double> vals;   // nnz

  int nnz() const { return static_cast<int>(vals.size()); }
  // Index into vals of entry (i, j), or -1 when absent from the pattern.
  int find(int i, int j) const;
  double at(int i, int j) const;
  std::vector<double> matvec(const std::vector<double>& x) const;
  DenseMatrix to_dense() const;
  double trace() const;
  bool is_symmetric(double rtol) const;
  // A + eps*I on an augmented pattern (diagonal entries added when missing).
  SparseMatrix plus_identity(double eps) const;
};

SparseMatrix sparse_from_triplets(int rows, int cols,
                                  const std::vector<Triplet>& triplets);

// Dense Cholesky (LLT) of an SPD matrix. Throws NumericalError naming the
// offending pivot index when a non-positive pivot is met.
struct DenseCholesky {
  int n = 0;
  std::vector<double> l;  // lower triangle, row-major n*n

  static DenseCholesky compute(const DenseMatrix& a);
  std::vector<double> solve(const std::vector<double>& b) const;
};

// Dense LU with partial pivoting for general square systems.
struct DenseLU {
  int n = 0;
  std::vector<double> lu;
  std::vector<int> piv;

  static DenseLU compute(const DenseMatrix& a);
  std::vector<double> solve(const std::vector<double>& b) const;
  // Solves A^T x = b against the same factorization.
  std::vector<double> solve_transposed(const std::vector<double>& b) const;
};

enum class SolverBackend { dense, sparse };

// Reusable SPD factorization; immutable after construction, safe for
// concurrent solves. The matrix must be symmetric (checked to 1e-10 relative)
// and positive definite.
class SpdFactorization {
 public:
  SpdFactorization(const SparseMatrix& a, SolverBackend backend);
  ~SpdFactorization();
  SpdFactorization(SpdFactorization&&) noexcept;
  SpdFactorization& operator=(SpdFactorization&&) noexcept;
  SpdFactorization(const SpdFactorization&) = delete;
  SpdFactorization& operator=(const SpdFactorization&) = delete;

  int size() const { return n_; }
  SolverBackend backend() const { return backend_; }
  std::vector<double> solve(const std::vector<double>& b) const;
  // Column-wise solve; identical to per-column single solves.
  DenseMatrix solve_multi(const DenseMatrix& b) const;

 private:
  struct Impl;
  int n_ = 0;
  SolverBackend backend_;
  std::unique_ptr<Impl> impl_;
};

SpdFactorization factor_spd(const SparseMatrix& a,
                            SolverBackend backend = SolverBackend::sparse);

// Small vector helpers (64-bit, deterministic order).
double vdot(const std::vector<double>& a, const std::vector<double>& b);
double vnorm(const std::vector<double>& a);

}  // namespace limp
