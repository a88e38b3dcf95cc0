#include "limp/operators.hpp"

#include <cmath>

namespace limp {

MeshOperators assemble_operators(const TriMesh& mesh) {
  const int n = mesh.n(), m = mesh.m();
  MeshOperators ops;
  ops.n = n;
  ops.m = m;
  ops.faces = mesh.faces;
  ops.mass.assign(n, 0.0);
  ops.area.resize(m);
  ops.gvec.resize(m);

  const double diam = shape_diameter(mesh);
  const double area_floor = 1e-12 * diam * diam;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(m) * 9);
  for (int f = 0; f < m; ++f) {
    const auto& F = mesh.faces[f];
    const Vec3& p0 = mesh.vertices[F[0]];
    const Vec3& p1 = mesh.vertices[F[1]];
    const Vec3& p2 = mesh.vertices[F[2]];
    const Vec3 nvec = cross(p1 - p0, p2 - p0);
    const double r2 = dot(nvec, nvec);
    const double a = 0.5 * std::sqrt(r2);
    if (a < area_floor)
      throw NumericalError("assemble_operators: degenerate face " +
                           std::to_string(f));
    ops.area[f] = a;
    // e_c = edge opposite corner c; hat gradient = (N x e_c) / |N|^2.
    const Vec3 e[3] = {p2 - p1, p0 - p2, p1 - p0};
    for (int c = 0; c < 3; ++c) ops.gvec[f][c] = (1.0 / r2) * cross(nvec, e[c]);
    for (int c = 0; c < 3; ++c) {
      ops.mass[F[c]] += a / 3.0;
      for (int c2 = 0; c2 < 3; ++c2)
        trips.push_back({F[c], F[c2], a * dot(ops.gvec[f][c], ops.gvec[f][c2])});
    }
  }
  ops.L = sparse_from_triplets(n, n, trips);
  ops.diag_index.resize(n);
  for (int i = 0; i < n; ++i) {
    ops.diag_index[i] = ops.L.find(i, i);
    if (ops.diag_index[i] < 0)
      throw NumericalError("assemble_operators: vertex " + std::to_string(i) +
                           " not referenced by any face");
  }
  return ops;
}

std::vector<Vec3> apply_gradient(const MeshOperators& ops,
                                 const std::vector<double>& u) {
  require(static_cast<int>(u.size()) == ops.n, "apply_gradient: size mismatch");
  std::vector<Vec3> g(ops.m, Vec3{0, 0, 0});
  for (int f = 0; f < ops.m; ++f) {
    const auto& F = ops.faces[f];
    for (int c = 0; c < 3; ++c) g[f] += u[F[c]] * ops.gvec[f][c];
  }
  return g;
}

std::vector<double> apply_divergence(const MeshOperators& ops,
                                     const std::vector<Vec3>& field) {
  require(static_cast<int>(field.size()) == ops.m,
          "apply_divergence: size mismatch");
  std::vector<double> div(ops.n, 0.0);
  for (int f = 0; f < ops.m; ++f) {
    const auto& F = ops.faces[f];
    for (int c = 0; c < 3; ++c)
      div[F[c]] -= ops.area[f] * dot(ops.gvec[f][c], field[f]);
  }
  return div;
}

}  // namespace limp
