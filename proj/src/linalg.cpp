#include "limp/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>

namespace limp {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ (" +
                                std::to_string(a.cols) + " vs " +
                                std::to_string(b.rows) + ")");
  DenseMatrix c(a.rows, b.cols);
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> ma(a.v.data(), a.rows, a.cols);
  Eigen::Map<const RowMat> mb(b.v.data(), b.rows, b.cols);
  Eigen::Map<RowMat> mc(c.v.data(), a.rows, b.cols);
  mc.noalias() = ma * mb;
  return c;
}

DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

int SparseMatrix::find(int i, int j) const {
  const int lo = row_ptr[i], hi = row_ptr[i + 1];
  auto begin = col_idx.begin() + lo, end = col_idx.begin() + hi;
  auto it = std::lower_bound(begin, end, j);
  if (it != end && *it == j) return static_cast<int>(it - col_idx.begin());
  return -1;
}

double SparseMatrix::at(int i, int j) const {
  const int k = find(i, j);
  return k < 0 ? 0.0 : vals[k];
}

std::vector<double> SparseMatrix::matvec(const std::vector<double>& x) const {
  require(static_cast<int>(x.size()) == cols, "matvec: size mismatch");
  std::vector<double> y(rows, 0.0);
  for (int i = 0; i < rows; ++i) {
    double s = 0.0;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += vals[k] * x[col_idx[k]];
    y[i] = s;
  }
  return y;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      d.at(i, col_idx[k]) = vals[k];
  return d;
}

double SparseMatrix::trace() const {
  double t = 0.0;
  const int n = std::min(rows, cols);
  for (int i = 0; i < n; ++i) t += at(i, i);
  return t;
}

bool SparseMatrix::is_symmetric(double rtol) const {
  if (rows != cols) return false;
  double scale = 0.0;
  for (double v : vals) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return true;
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (std::abs(vals[k] - at(col_idx[k], i)) > rtol * scale) return false;
  return true;
}

SparseMatrix SparseMatrix::plus_identity(double eps) const {
  std::vector<Triplet> t;
  t.reserve(vals.size() + rows);
  for (int i = 0; i < rows; ++i)
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      t.push_back({i, col_idx[k], vals[k]});
  for (int i = 0; i < rows; ++i) t.push_back({i, i, eps});
  return sparse_from_triplets(rows, cols, t);
}

SparseMatrix sparse_from_triplets(int rows, int cols,
                                  const std::vector<Triplet>& triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw ValidationError("sparse_from_triplets: index out of range (" +
                            std::to_string(t.row) + "," + std::to_string(t.col) +
                            ") for " + std::to_string(rows) + "x" +
                            std::to_string(cols));
    if (!std::isfinite(t.value))
      throw NumericalError("sparse_from_triplets: non-finite value at (" +
                           std::to_string(t.row) + "," + std::to_string(t.col) +
                           ")");
  }
  std::vector<Triplet> sorted = triplets;
  std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    double sum = 0.0;
    while (j < sorted.size() && sorted[j].row == sorted[i].row &&
           sorted[j].col == sorted[i].col) {
      sum += sorted[j].value;
      ++j;
    }
    m.col_idx.push_back(sorted[i].col);
    m.vals.push_back(sum);
    m.row_ptr[sorted[i].row + 1]++;
    i = j;
  }
  for (int r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

DenseCholesky DenseCholesky::compute(const DenseMatrix& a) {
  require(a.rows == a.cols, "factor_spd: matrix not square");
  const int n = a.rows;
  DenseCholesky f;
  f.n = n;
  f.l.assign(static_cast<size_t>(n) * n, 0.0);
  auto L = [&](int i, int j) -> double& { return f.l[static_cast<size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a.at(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      if (i == j) {
        if (s <= 0.0 || !std::isfinite(s))
          throw NumericalError("factor_spd: not SPD at pivot " + std::to_string(i));
        L(i, i) = std::sqrt(s);
      } else {
        L(i, j) = s / L(j, j);
      }
    }
  }
  return f;
}

std::vector<double> DenseCholesky::solve(const std::vector<double>& b) const {
  require(static_cast<int>(b.size()) == n, "solve: rhs size mismatch");
  auto L = [&](int i, int j) { return l[static_cast<size_t>(i) * n + j]; };
  std::vector<double> x(b);
  for (int i = 0; i < n; ++i) {
    double s = x[i];
    for (int k = 0; k < i; ++k) s -= L(i, k) * x[k];
    x[i] = s / L(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < n; ++k) s -= L(k, i) * x[k];
    x[i] = s / L(i, i);
  }
  return x;
}

DenseLU DenseLU::compute(const DenseMatrix& a) {
  require(a.rows == a.cols, "lu: matrix not square");
  const int n = a.rows;
  DenseLU f;
  f.n = n;
  f.lu = a.v;
  f.piv.resize(n);
  auto A = [&](int i, int j) -> double& { return f.lu[static_cast<size_t>(i) * n + j]; };
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(A(i, k)) > std::abs(A(p, k))) p = i;
    f.piv[k] = p;
    if (p != k)
      for (int j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
    if (A(k, k) == 0.0)
      throw NumericalError("lu: singular matrix at pivot " + std::to_string(k));
    for (int i = k + 1; i < n; ++i) {
      A(i, k) /= A(k, k);
      const double f_ik = A(i, k);
      if (f_ik == 0.0) continue;
      for (int j = k + 1; j < n; ++j) A(i, j) -= f_ik * A(k, j);
    }
  }
  return f;
}

std::vector<double> DenseLU::solve(const std::vector<double>& b) const {
  require(static_cast<int>(b.size()) == n, "lu solve: rhs size mismatch");
  auto A = [&](int i, int j) { return lu[static_cast<size_t>(i) * n + j]; };
  std::vector<double> x(b);
  for (int k = 0; k < n; ++k) {
    if (piv[k] != k) std::swap(x[k], x[piv[k]]);
    for (int i = k + 1; i < n; ++i) x[i] -= A(i, k) * x[k];
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= A(i, j) * x[j];
    x[i] /= A(i, i);
  }
  return x;
}

std::vector<double> DenseLU::solve_transposed(const std::vector<double>& b) const {
  // A = P^T L U  =>  A^T = U^T L^T P. Solve U^T z = b, L^T w = z, x = P^T w.
  require(static_cast<int>(b.size()) == n, "lu solve_t: rhs size mismatch");
  auto A = [&](int i, int j) { return lu[static_cast<size_t>(i) * n + j]; };
  std::vector<double> x(b);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) x[i] -= A(k, i) * x[k];
    x[i] /= A(i, i);
  }
  for (int i = n - 1; i >= 0; --i)
    for (int k = i + 1; k < n; ++k) x[i] -= A(k, i) * x[k];
  for (int k = n - 1; k >= 0; --k)
    if (piv[k] != k) std::swap(x[k], x[piv[k]]);
  return x;
}

struct SpdFactorization::Impl {
  DenseCholesky dense;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

namespace {
Eigen::SparseMatrix<double> to_eigen(const SparseMatrix& a) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.vals.size());
  for (int i = 0; i < a.rows; ++i)
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      t.emplace_back(i, a.col_idx[k], a.vals[k]);
  Eigen::SparseMatrix<double> m(a.rows, a.cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}
}  // namespace

SpdFactorization::SpdFactorization(const SparseMatrix& a, SolverBackend backend)
    : n_(a.rows), backend_(backend), impl_(std::make_unique<Impl>()) {
  require(a.rows == a.cols, "factor_spd: matrix not square");
  if (!a.is_symmetric(1e-10))
    throw ValidationError("factor_spd: matrix not symmetric within 1e-10");
  if (backend_ == SolverBackend::dense) {
    impl_->dense = DenseCholesky::compute(a.to_dense());
  } else {
    impl_->llt.compute(to_eigen(a));
    if (impl_->llt.info() != Eigen::Success)
      throw NumericalError("factor_spd: not SPD (sparse factorization failed)");
  }
}

SpdFactorization::~SpdFactorization() = default;
SpdFactorization::SpdFactorization(SpdFactorization&&) noexcept = default;
SpdFactorization& SpdFactorization::operator=(SpdFactorization&&) noexcept = default;

std::vector<double> SpdFactorization::solve(const std::vector<double>& b) const {
  require(static_cast<int>(b.size()) == n_, "solve: rhs size mismatch");
  if (backend_ == SolverBackend::dense) return impl_->dense.solve(b);
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n_);
  Eigen::VectorXd x = impl_->llt.solve(bv);
  return std::vector<double>(x.data(), x.data() + n_);
}

DenseMatrix SpdFactorization::solve_multi(const DenseMatrix& b) const {
  require(b.rows == n_, "solve_multi: rhs rows mismatch");
  DenseMatrix x(b.rows, b.cols);
  std::vector<double> col(n_);
  for (int j = 0; j < b.cols; ++j) {
    for (int i = 0; i < n_; ++i) col[i] = b.at(i, j);
    const std::vector<double> sol = solve(col);
    for (int i = 0; i < n_; ++i) x.at(i, j) = sol[i];
  }
  return x;
}

SpdFactorization factor_spd(const SparseMatrix& a, SolverBackend backend) {
  return SpdFactorization(a, backend);
}

double vdot(const std::vector<double>& a, const std::vector<double>& b) {
  require(a.size() == b.size(), "vdot: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double vnorm(const std::vector<double>& a) { return std::sqrt(vdot(a, a)); }

}  // namespace limp
