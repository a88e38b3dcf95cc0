#include "limp/shapes.hpp"

#include <cmath>
#include <map>

namespace limp {

TriMesh make_grid(int k) {
  require(k >= 2, "make_grid: k must be >= 2");
  const double h = 1.0 / (k - 1);
  const double row_h = h * std::sqrt(3.0) / 2.0;
  TriMesh mesh;
  mesh.vertices.reserve(static_cast<size_t>(k) * k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < k; ++i)
      mesh.vertices.push_back({(i - 0.5 * j) * h, j * row_h, 0.0});
  auto idx = [k](int i, int j) { return j * k + i; };
  for (int j = 0; j + 1 < k; ++j)
    for (int i = 0; i + 1 < k; ++i) {
      const int a = idx(i, j), b = idx(i + 1, j);
      const int c = idx(i + 1, j + 1), d = idx(i, j + 1);
      mesh.faces.push_back({a, b, c});
      mesh.faces.push_back({a, c, d});
    }
  return mesh;
}

TriMesh make_icosphere(int subdivisions) {
  require(subdivisions >= 0, "make_icosphere: negative subdivision count");
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh mesh;
  mesh.vertices = {
      {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
      {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
      {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : mesh.vertices) v = (1.0 / norm(v)) * v;
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      Vec3 p = mesh.vertices[a] + mesh.vertices[b];
      p = (1.0 / norm(p)) * p;
      mesh.vertices.push_back(p);
      const int id = mesh.n() - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> faces;
    faces.reserve(mesh.faces.size() * 4);
    for (const auto& f : mesh.faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      faces.push_back({f[0], ab, ca});
      faces.push_back({f[1], bc, ab});
      faces.push_back({f[2], ca, bc});
      faces.push_back({ab, bc, ca});
    }
    mesh.faces = std::move(faces);
  }
  return mesh;
}

TriMesh make_unit_square() {
  TriMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  mesh.faces = {{0, 1, 2}, {0, 2, 3}};
  return mesh;
}

TriMesh make_equilateral_triangle(double edge_length) {
  TriMesh mesh;
  mesh.vertices = {{0, 0, 0},
                   {edge_length, 0, 0},
                   {0.5 * edge_length, edge_length * std::sqrt(3.0) / 2.0, 0}};
  mesh.faces = {{0, 1, 2}};
  return mesh;
}

TriMesh make_tube(int n_ring, int n_rows, double radius, double length) {
  require(n_ring >= 3 && n_rows >= 2, "make_tube: need n_ring >= 3, n_rows >= 2");
  require(radius > 0 && length > 0, "make_tube: radius and length must be > 0");
  TriMesh mesh;
  mesh.vertices.reserve(static_cast<size_t>(n_ring) * n_rows);
  for (int r = 0; r < n_rows; ++r) {
    const double z = length * r / (n_rows - 1);
    for (int k = 0; k < n_ring; ++k) {
      const double a = 2.0 * M_PI * k / n_ring;
      mesh.vertices.push_back({radius * std::cos(a), radius * std::sin(a), z});
    }
  }
  auto idx = [n_ring](int r, int k) { return r * n_ring + (k % n_ring); };
  for (int r = 0; r + 1 < n_rows; ++r)
    for (int k = 0; k < n_ring; ++k) {
      const int a = idx(r, k), b = idx(r, k + 1);
      const int c = idx(r + 1, k + 1), d = idx(r + 1, k);
      mesh.faces.push_back({a, b, c});
      mesh.faces.push_back({a, c, d});
    }
  return mesh;
}

}  // namespace limp
