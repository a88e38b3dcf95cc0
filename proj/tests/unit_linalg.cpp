#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "limp/linalg.hpp"
#include "limp/mesh.hpp"
#include "limp/operators.hpp"
#include "limp/rng.hpp"
#include "limp/shapes.hpp"

using namespace limp;

TEST_CASE("sparse_from_triplets sums duplicates") {
  const SparseMatrix m = sparse_from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}});
  CHECK(m.nnz() == 1);
  CHECK(m.at(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("sparse_from_triplets empty gives zero matrix") {
  const SparseMatrix m = sparse_from_triplets(3, 3, {});
  CHECK(m.nnz() == 0);
  const auto y = m.matvec({1.0, 2.0, 3.0});
  for (double v : y) CHECK(v == 0.0);
}

TEST_CASE("sparse_from_triplets rejects out-of-range indices") {
  CHECK_THROWS_AS(sparse_from_triplets(2, 2, {{2, 0, 1.0}}), ValidationError);
}

TEST_CASE("cotan assembly sparse matches dense entrywise") {
  const TriMesh mesh = make_unit_square();
  const MeshOperators ops = assemble_operators(mesh);
  const DenseMatrix dense = ops.L.to_dense();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(ops.L.at(i, j) == doctest::Approx(dense.at(i, j)).epsilon(1e-15));
}

TEST_CASE("factor_spd identity and analytic 2x2") {
  const SparseMatrix eye = sparse_from_triplets(3, 3, {{0, 0, 1}, {1, 1, 1}, {2, 2, 1}});
  const auto f = factor_spd(eye);
  const auto x = f.solve({1.0, 0.0, 0.0});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(0.0));

  const SparseMatrix a =
      sparse_from_triplets(2, 2, {{0, 0, 2}, {0, 1, 1}, {1, 0, 1}, {1, 1, 2}});
  for (auto backend : {SolverBackend::dense, SolverBackend::sparse}) {
    const auto fa = factor_spd(a, backend);
    const auto xa = fa.solve({3.0, 3.0});
    CHECK(xa[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(xa[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("heat-step system on a mesh solves to 1e-10 residual") {
  const TriMesh mesh = make_tube(5, 6, 0.3, 1.0);  // 30 vertices
  const MeshOperators ops = assemble_operators(mesh);
  const double t = 1e-3;
  SparseMatrix a = ops.L;
  for (double& v : a.vals) v *= t;
  for (int i = 0; i < ops.n; ++i) a.vals[ops.diag_index[i]] += ops.mass[i];
  Rng rng(7);
  std::vector<double> b(ops.n);
  for (double& v : b) v = rng.uniform(-1.0, 1.0);
  for (auto backend : {SolverBackend::dense, SolverBackend::sparse}) {
    const auto f = factor_spd(a, backend);
    const auto x = f.solve(b);
    const auto ax = a.matvec(x);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < ops.n; ++i) {
      num += (ax[i] - b[i]) * (ax[i] - b[i]);
      den += b[i] * b[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-10);
  }
}

TEST_CASE("solve of b = 0 gives x = 0; multi-column matches single solves") {
  Rng rng(11);
  const int n = 12;
  DenseMatrix base(n, n);
  for (double& v : base.v) v = rng.uniform(-1.0, 1.0);
  std::vector<Triplet> trips;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += base.at(k, i) * base.at(k, j);
      trips.push_back({i, j, s + (i == j ? n : 0.0)});
    }
  const SparseMatrix a = sparse_from_triplets(n, n, trips);
  const auto f = factor_spd(a);

  const auto zero = f.solve(std::vector<double>(n, 0.0));
  for (double v : zero) CHECK(std::abs(v) == 0.0);

  DenseMatrix b(n, 2);
  for (double& v : b.v) v = rng.uniform(-1.0, 1.0);
  const DenseMatrix x = f.solve_multi(b);
  std::vector<double> b1(n), b2(n);
  for (int i = 0; i < n; ++i) {
    b1[i] = b.at(i, 0);
    b2[i] = b.at(i, 1);
  }
  const auto x1 = f.solve(b1), x2 = f.solve(b2);
  for (int i = 0; i < n; ++i) {
    CHECK(x.at(i, 0) == x1[i]);
    CHECK(x.at(i, 1) == x2[i]);
  }
}

TEST_CASE("random SPD systems: residual, known-x recovery, left inverse, "
          "sparse/dense agreement") {
  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 20 + 36 * trial;  // up to 164 <= 200
    DenseMatrix base(n, n);
    for (double& v : base.v) v = rng.uniform(-1.0, 1.0);
    std::vector<Triplet> trips;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += base.at(k, i) * base.at(k, j);
        trips.push_back({i, j, s + (i == j ? n : 0.0)});
      }
    const SparseMatrix a = sparse_from_triplets(n, n, trips);
    const auto fs = factor_spd(a, SolverBackend::sparse);
    const auto fd = factor_spd(a, SolverBackend::dense);

    std::vector<double> x_known(n);
    for (double& v : x_known) v = rng.uniform(-1.0, 1.0);
    const auto b = a.matvec(x_known);
    const auto xs = fs.solve(b);
    const auto xd = fd.solve(b);
    double max_rec = 0.0, max_diff = 0.0, scale = 0.0;
    for (int i = 0; i < n; ++i) {
      max_rec = std::max(max_rec, std::abs(xs[i] - x_known[i]));
      max_diff = std::max(max_diff, std::abs(xs[i] - xd[i]));
      scale = std::max(scale, std::abs(x_known[i]));
    }
    CHECK(max_rec / scale <= 1e-10);   // left-inverse property / known recovery
    CHECK(max_diff / scale <= 1e-9);   // sparse and dense paths agree

    const auto ax = a.matvec(xs);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      num += (ax[i] - b[i]) * (ax[i] - b[i]);
      den += b[i] * b[i];
    }
    CHECK(std::sqrt(num / den) <= 1e-10);
  }
}

TEST_CASE("factor_spd reports the failing pivot") {
  const SparseMatrix bad =
      sparse_from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 0.0}, {1, 0, 0.0}, {1, 1, -1.0}});
  try {
    factor_spd(bad, SolverBackend::dense);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("pivot 1") != std::string::npos);
  }
}

TEST_CASE("factor_spd rejects asymmetric input") {
  const SparseMatrix asym =
      sparse_from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 1, 2.0}});
  CHECK_THROWS_AS(factor_spd(asym), ValidationError);
}

TEST_CASE("dense LU solves and transposed solves") {
  Rng rng(5);
  const int n = 20;
  DenseMatrix a(n, n);
  for (double& v : a.v) v = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < n; ++i) a.at(i, i) += 4.0;
  const DenseLU lu = DenseLU::compute(a);
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  const auto b = [&] {
    std::vector<double> r(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r[i] += a.at(i, j) * x[j];
    return r;
  }();
  const auto xs = lu.solve(b);
  const auto bt = [&] {
    std::vector<double> r(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) r[j] += a.at(i, j) * x[i];
    return r;
  }();
  const auto xt = lu.solve_transposed(bt);
  for (int i = 0; i < n; ++i) {
    CHECK(xs[i] == doctest::Approx(x[i]).epsilon(1e-10));
    CHECK(xt[i] == doctest::Approx(x[i]).epsilon(1e-10));
  }
}
