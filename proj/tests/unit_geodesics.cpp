#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "limp/geodesics.hpp"
#include "limp/rng.hpp"
#include "limp/shapes.hpp"
#include "test_helpers.hpp"

using namespace limp;

namespace {

double euclid(const TriMesh& mesh, int i, int j) {
  return norm(mesh.vertices[i] - mesh.vertices[j]);
}

// Max relative deviation between the analytic VJP and central finite
// differences of f(X) = <cot, D(X)>, normalized by the largest FD entry.
double vjp_fd_gap(const TriMesh& mesh, const GeodesicConfig& cfg,
                  const DenseMatrix& cot, double step) {
  const HeatContext ctx = heat_forward(mesh, cfg, {}, true);
  const DenseMatrix analytic = heat_distance_vjp(ctx, cot);
  double max_fd = 0.0, max_gap = 0.0;
  DenseMatrix fd(mesh.n(), 3);
  for (int i = 0; i < mesh.n(); ++i)
    for (int a = 0; a < 3; ++a) {
      TriMesh plus = mesh, minus = mesh;
      plus.vertices[i][a] += step;
      minus.vertices[i][a] -= step;
      const DistanceMatrix dp = heat_distance_all(plus, cfg);
      const DistanceMatrix dm = heat_distance_all(minus, cfg);
      double f = 0.0;
      for (int r = 0; r < dp.n; ++r)
        for (int c = 0; c < dp.n; ++c)
          f += cot.at(r, c) * (dp.at(r, c) - dm.at(r, c));
      fd.at(i, a) = f / (2.0 * step);
      max_fd = std::max(max_fd, std::abs(fd.at(i, a)));
    }
  for (int i = 0; i < mesh.n(); ++i)
    for (int a = 0; a < 3; ++a)
      max_gap = std::max(max_gap, std::abs(analytic.at(i, a) - fd.at(i, a)));
  return max_gap / std::max(max_fd, 1e-12);
}

}  // namespace

TEST_CASE("source distance to itself is exactly zero") {
  const TriMesh tube = make_tube(6, 8, 0.3, 1.0);
  const GeodesicConfig cfg;
  const auto d = heat_distance_single(tube, 11, cfg);
  CHECK(d[11] == 0.0);
}

TEST_CASE("equilateral triangle: all off-diagonal distances equal") {
  const TriMesh tri = make_equilateral_triangle(0.7);
  const DistanceMatrix D = heat_distance_all(tri, GeodesicConfig{});
  const double ref = D.at(0, 1);
  for (int i = 0; i < 3; ++i) {
    CHECK(D.at(i, i) == 0.0);
    for (int j = 0; j < 3; ++j)
      if (i != j) CHECK(D.at(i, j) == doctest::Approx(ref).epsilon(1e-9));
  }
}

TEST_CASE("flat 20x20 grid, corner source: max relative error vs Euclidean <= 2%") {
  const TriMesh grid = make_grid(20);
  const auto d = heat_distance_single(grid, 0, GeodesicConfig{});
  double max_rel = 0.0;
  for (int j = 1; j < grid.n(); ++j)
    max_rel = std::max(max_rel, std::abs(d[j] - euclid(grid, 0, j)) / euclid(grid, 0, j));
  INFO("max relative error ", max_rel);
  CHECK(max_rel <= 0.02);
}

TEST_CASE("unit icosphere: single-source mean relative error <= 5%") {
  const TriMesh ico = make_icosphere(3);
  const auto d = heat_distance_single(ico, 17, GeodesicConfig{});
  double sum_rel = 0.0;
  int count = 0;
  for (int j = 0; j < ico.n(); ++j) {
    if (j == 17) continue;
    const double c = std::clamp(dot(ico.vertices[17], ico.vertices[j]), -1.0, 1.0);
    const double gc = std::acos(c);
    sum_rel += std::abs(d[j] - gc) / gc;
    ++count;
  }
  INFO("mean relative error ", sum_rel / count);
  CHECK(sum_rel / count <= 0.05);
}

TEST_CASE("heat_distance_all equals symmetrized single-source calls") {
  const TriMesh grid = make_grid(7);
  const GeodesicConfig cfg;
  const DistanceMatrix D = heat_distance_all(grid, cfg);
  CHECK(D.kind == MatrixKind::geodesic);
  std::vector<std::vector<double>> singles;
  for (int s = 0; s < grid.n(); ++s) singles.push_back(heat_distance_single(grid, s, cfg));
  for (int i = 0; i < grid.n(); ++i)
    for (int j = 0; j < grid.n(); ++j) {
      const double expect = 0.5 * (singles[i][j] + singles[j][i]);
      CHECK(D.at(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("distance matrix invariants: symmetry, zero diagonal, near-nonnegative") {
  const TriMesh tube = limp::test::jittered_tube(7, 9, 0.01, 5);
  const DistanceMatrix D = heat_distance_all(tube, GeodesicConfig{});
  const double diam = shape_diameter(tube);
  for (int i = 0; i < D.n; ++i) {
    CHECK(D.at(i, i) == 0.0);
    for (int j = 0; j < D.n; ++j) {
      CHECK(D.at(i, j) == D.at(j, i));
      CHECK(D.at(i, j) >= -1e-9 * diam);
    }
  }
}

TEST_CASE("triangle inequality with heat-method slack on the icosphere") {
  const TriMesh ico = make_icosphere(2);
  const DistanceMatrix D = heat_distance_all(ico, GeodesicConfig{});
  const double slack = 0.05 * shape_diameter(ico);
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const int i = rng.uniform_int(0, ico.n() - 1);
    const int j = rng.uniform_int(0, ico.n() - 1);
    const int k = rng.uniform_int(0, ico.n() - 1);
    CHECK(D.at(i, k) <= D.at(i, j) + D.at(j, k) + slack);
  }
}

TEST_CASE("geodesic >= Euclidean minus slack on test meshes") {
  // Closed surfaces plus a flat patch. Open tubes are excluded: the natural
  // (Neumann) boundary condition bends the normalized heat gradient near open
  // rims, which shortens rim-to-rim distances by ~3% of the diameter. That is
  // a systematic property of the single-solve heat method, consistent across
  // same-topology meshes, so it cancels in metric-comparison losses.
  int checked = 0;
  for (const TriMesh& mesh : {make_icosphere(1), make_icosphere(2), make_grid(12)}) {
    const DistanceMatrix D = heat_distance_all(mesh, GeodesicConfig{});
    const double slack = 0.02 * shape_diameter(mesh);
    double worst = -1e30;
    for (int i = 0; i < mesh.n(); ++i)
      for (int j = 0; j < mesh.n(); ++j)
        worst = std::max(worst, euclid(mesh, i, j) - slack - D.at(i, j));
    CHECK(worst <= 0.0);
    ++checked;
  }
  CHECK(checked == 3);
}

TEST_CASE("rigid motion invariance to 1e-9") {
  const TriMesh tube = limp::test::jittered_tube(6, 7, 0.01, 77);
  const DistanceMatrix D0 = heat_distance_all(tube, GeodesicConfig{});
  // Rotation about a skew axis plus translation.
  const double c = std::cos(0.83), s = std::sin(0.83);
  TriMesh moved = tube;
  for (auto& v : moved.vertices) {
    const Vec3 r1 = {c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]};
    const Vec3 r2 = {r1[0], c * r1[1] - s * r1[2], s * r1[1] + c * r1[2]};
    v = r2 + Vec3{0.4, -1.1, 2.3};
  }
  const DistanceMatrix D1 = heat_distance_all(moved, GeodesicConfig{});
  double max_diff = 0.0;
  for (size_t i = 0; i < D0.d.size(); ++i)
    max_diff = std::max(max_diff, std::abs(D0.d[i] - D1.d[i]));
  CHECK(max_diff <= 1e-9);
}

TEST_CASE("VJP of a zero cotangent is zero") {
  const TriMesh tube = make_tube(5, 6, 0.3, 1.0);
  const HeatContext ctx = heat_forward(tube, GeodesicConfig{}, {}, true);
  const DenseMatrix grad = heat_distance_vjp(ctx, DenseMatrix(tube.n(), tube.n()));
  for (double v : grad.v) CHECK(v == 0.0);
}

TEST_CASE("homogeneity: <vjp(ones), X> equals sum of distances (Euler)") {
  const TriMesh tube = limp::test::jittered_tube(6, 6, 0.02, 13);
  const HeatContext ctx = heat_forward(tube, GeodesicConfig{}, {}, true);
  DenseMatrix ones(tube.n(), tube.n());
  for (double& v : ones.v) v = 1.0;
  const DenseMatrix grad = heat_distance_vjp(ctx, ones);
  double euler = 0.0;
  for (int i = 0; i < tube.n(); ++i)
    for (int a = 0; a < 3; ++a) euler += grad.at(i, a) * tube.vertices[i][a];
  double total = 0.0;
  for (double v : ctx.output.d) total += v;
  CHECK(euler == doctest::Approx(total).epsilon(1e-9));
}

TEST_CASE("gradient check vs central finite differences, 5 seeds") {
  for (int seed = 1; seed <= 5; ++seed) {
    const TriMesh mesh = limp::test::jittered_tube(5, 6, 0.02, seed);  // 30 vertices
    Rng rng(seed * 101);
    DenseMatrix cot(mesh.n(), mesh.n());
    for (double& v : cot.v) v = rng.uniform(-1.0, 1.0);
    for (int pin : {0, 1, 2}) {
      GeodesicConfig cfg;
      cfg.pin_rings = pin;
      const double gap = vjp_fd_gap(mesh, cfg, cot, 1e-5);
      INFO("seed ", seed, " pin_rings ", pin, " gap ", gap);
      CHECK(gap <= 1e-4);
    }
  }
}

TEST_CASE("gradient check on the fully pinned tiny mesh") {
  const TriMesh tri = make_equilateral_triangle(0.9);
  Rng rng(2);
  DenseMatrix cot(3, 3);
  for (double& v : cot.v) v = rng.uniform(-1.0, 1.0);
  CHECK(vjp_fd_gap(tri, GeodesicConfig{}, cot, 1e-6) <= 1e-6);
}

TEST_CASE("landmark mode matches the full matrix on the landmark set") {
  const TriMesh tube = make_tube(6, 8, 0.3, 1.0);
  const GeodesicConfig cfg;
  const std::vector<int> landmarks = {0, 7, 19, 30, 41};
  const HeatContext sub = heat_forward(tube, cfg, landmarks, false);
  const DistanceMatrix full = heat_distance_all(tube, cfg);
  for (size_t a = 0; a < landmarks.size(); ++a)
    for (size_t b = 0; b < landmarks.size(); ++b)
      CHECK(sub.output.at(a, b) ==
            doctest::Approx(full.at(landmarks[a], landmarks[b])).epsilon(1e-12));
}

TEST_CASE("vjp validates context and cotangent shape") {
  const TriMesh tube = make_tube(5, 6, 0.3, 1.0);
  const HeatContext no_state = heat_forward(tube, GeodesicConfig{}, {}, false);
  CHECK_THROWS_AS(heat_distance_vjp(no_state, DenseMatrix(tube.n(), tube.n())),
                  ValidationError);
  const HeatContext ctx = heat_forward(tube, GeodesicConfig{}, {}, true);
  CHECK_THROWS_AS(heat_distance_vjp(ctx, DenseMatrix(3, 3)), ValidationError);
}

TEST_CASE("bounded_distortion examples") {
  DistanceMatrix a(4, MatrixKind::geodesic), b(4, MatrixKind::geodesic);
  Rng rng(9);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const double v = rng.uniform(0.5, 2.0);
      a.at(i, j) = a.at(j, i) = v;
      b.at(i, j) = b.at(j, i) = v;
    }
  const auto same = bounded_distortion(a, b);
  CHECK(same.K == 0.0);
  CHECK(same.mean_distortion == 0.0);

  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) b.at(i, j) += 0.25;
  const auto off = bounded_distortion(a, b);
  CHECK(off.K == doctest::Approx(0.25));
  CHECK(off.K >= off.mean_distortion);
  CHECK(off.mean_distortion >= 0.0);
  CHECK(off.per_point.size() == 4);

  DistanceMatrix c(5, MatrixKind::geodesic);
  CHECK_THROWS_AS(bounded_distortion(a, c), ValidationError);
}

TEST_CASE("interp_metric endpoints, midpoint, bounds, and linearity of K") {
  DistanceMatrix x(3, MatrixKind::geodesic), y(3, MatrixKind::geodesic);
  x.at(0, 1) = x.at(1, 0) = 0.0;
  y.at(0, 1) = y.at(1, 0) = 2.0;
  x.at(0, 2) = x.at(2, 0) = 1.0;
  y.at(0, 2) = y.at(2, 0) = 0.5;
  x.at(1, 2) = x.at(2, 1) = 0.8;
  y.at(1, 2) = y.at(2, 1) = 1.6;

  CHECK(interp_metric(x, y, 0.0).d == x.d);
  CHECK(interp_metric(x, y, 1.0).d == y.d);
  CHECK(interp_metric(x, y, 0.5).at(0, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(interp_metric(x, y, 1.5), ValidationError);

  const double K = bounded_distortion(x, y).K;
  for (double alpha : {0.125, 0.25, 0.5, 0.75}) {
    const DistanceMatrix mid = interp_metric(x, y, alpha);
    for (size_t i = 0; i < mid.d.size(); ++i) {
      CHECK(mid.d[i] >= std::min(x.d[i], y.d[i]) - 1e-15);
      CHECK(mid.d[i] <= std::max(x.d[i], y.d[i]) + 1e-15);
    }
    CHECK(std::abs(bounded_distortion(x, mid).K - alpha * K) <= 1e-12);
  }
}
