#include "limp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "limp/parallel.hpp"

namespace limp {

double face_area(const TriMesh& mesh, int f) {
  const auto& F = mesh.faces[f];
  const Vec3 u = mesh.vertices[F[1]] - mesh.vertices[F[0]];
  const Vec3 w = mesh.vertices[F[2]] - mesh.vertices[F[0]];
  return 0.5 * norm(cross(u, w));
}

double mean_edge_length(const TriMesh& mesh) {
  std::set<std::pair<int, int>> edges;
  for (const auto& f : mesh.faces)
    for (int c = 0; c < 3; ++c) {
      int a = f[c], b = f[(c + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  double s = 0.0;
  for (const auto& [a, b] : edges) s += norm(mesh.vertices[a] - mesh.vertices[b]);
  return s / static_cast<double>(edges.size());
}

void validate_mesh(const TriMesh& mesh) {
  const int n = mesh.n(), m = mesh.m();
  // The floor is 3, not 4: single-triangle meshes are used as analytic
  // fixtures by the operator and geodesic layers.
  if (n < 3) throw ValidationError("mesh: vertex count " + std::to_string(n) + " < 3");
  if (m < 1) throw ValidationError("mesh: face count " + std::to_string(m) + " < 1");
  for (const auto& v : mesh.vertices)
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]))
      throw NumericalError("mesh: non-finite vertex coordinate");
  std::string bad;
  for (int f = 0; f < m; ++f) {
    const auto& F = mesh.faces[f];
    const bool in_range = F[0] >= 0 && F[0] < n && F[1] >= 0 && F[1] < n &&
                          F[2] >= 0 && F[2] < n;
    if (!in_range) {
      bad += (bad.empty() ? "" : ", ") + std::to_string(f) + " (index out of range)";
      continue;
    }
    if (F[0] == F[1] || F[1] == F[2] || F[0] == F[2])
      bad += (bad.empty() ? "" : ", ") + std::to_string(f) + " (repeated vertex)";
  }
  if (!bad.empty()) throw ValidationError("mesh: invalid faces: " + bad);
  const double diam = shape_diameter(mesh);
  const double area_floor = 1e-12 * diam * diam;
  for (int f = 0; f < m; ++f)
    if (face_area(mesh, f) < area_floor)
      bad += (bad.empty() ? "" : ", ") + std::to_string(f) + " (degenerate area)";
  if (!bad.empty()) throw ValidationError("mesh: invalid faces: " + bad);
}

namespace {
// Reads the next whitespace-separated token, skipping blank lines and '#'
// comments, tracking the current line for error messages.
struct TokenReader {
  std::istream& in;
  int line = 1;

  std::string next() {
    std::string tok;
    char c;
    while (in.get(c)) {
      if (c == '\n') { ++line; continue; }
      if (c == '#') {
        std::string rest;
        std::getline(in, rest);
        ++line;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      tok.push_back(c);
      while (in.get(c)) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == '#') {
          in.unget();
          break;
        }
        tok.push_back(c);
      }
      return tok;
    }
    return tok;
  }

  double next_real(const std::string& what) {
    const std::string t = next();
    try {
      size_t pos = 0;
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("load_off: line " + std::to_string(line) +
                            ": expected " + what + ", got '" + t + "'");
    }
  }

  long next_int(const std::string& what) {
    const std::string t = next();
    try {
      size_t pos = 0;
      const long v = std::stol(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ValidationError("load_off: line " + std::to_string(line) +
                            ": expected " + what + ", got '" + t + "'");
    }
  }
};
}  // namespace

TriMesh load_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_off: cannot open '" + path + "'");
  TokenReader tr{in};
  const std::string magic = tr.next();
  const bool coff = magic == "COFF";
  if (magic != "OFF" && !coff)
    throw ValidationError("load_off: line 1: expected OFF or COFF header, got '" +
                          magic + "'");
  const long n = tr.next_int("vertex count");
  const long m = tr.next_int("face count");
  tr.next_int("edge count");
  TriMesh mesh;
  mesh.vertices.reserve(n);
  for (long i = 0; i < n; ++i) {
    Vec3 v;
    v[0] = tr.next_real("x coordinate");
    v[1] = tr.next_real("y coordinate");
    v[2] = tr.next_real("z coordinate");
    if (coff)
      for (int c = 0; c < 4; ++c) tr.next_real("color component");
    mesh.vertices.push_back(v);
  }
  mesh.faces.reserve(m);
  for (long f = 0; f < m; ++f) {
    const long k = tr.next_int("face vertex count");
    if (k != 3)
      throw ValidationError("load_off: line " + std::to_string(tr.line) +
                            ": face " + std::to_string(f) + " has " +
                            std::to_string(k) + " vertices; only triangles supported");
    std::array<int, 3> face;
    for (int c = 0; c < 3; ++c) {
      const long idx = tr.next_int("vertex index");
      if (idx < 0 || idx >= n)
        throw ValidationError("load_off: line " + std::to_string(tr.line) +
                              ": face " + std::to_string(f) + " index out of range (" +
                              std::to_string(idx) + " on a " + std::to_string(n) +
                              "-vertex mesh)");
      face[c] = static_cast<int>(idx);
    }
    mesh.faces.push_back(face);
  }
  validate_mesh(mesh);
  return mesh;
}

void save_off(const TriMesh& mesh, const std::string& path,
              const std::vector<double>* vertex_scalar) {
  if (vertex_scalar)
    require(static_cast<int>(vertex_scalar->size()) == mesh.n(),
            "save_off: vertex scalar length mismatch");
  std::ofstream out(path);
  if (!out) throw ValidationError("save_off: cannot open '" + path + "' for writing");
  out.precision(17);
  out << (vertex_scalar ? "COFF" : "OFF") << "\n";
  out << mesh.n() << " " << mesh.m() << " 0\n";
  for (int i = 0; i < mesh.n(); ++i) {
    const auto& v = mesh.vertices[i];
    out << v[0] << " " << v[1] << " " << v[2];
    if (vertex_scalar) {
      double s = (*vertex_scalar)[i];
      s = std::clamp(s, 0.0, 1.0);
      // White (s=0) to red (s=1): r fixed at 255, g and b fade out.
      const int gb = static_cast<int>(std::lround(255.0 * (1.0 - s)));
      out << " 255 " << gb << " " << gb << " 255";
    }
    out << "\n";
  }
  for (const auto& f : mesh.faces)
    out << "3 " << f[0] << " " << f[1] << " " << f[2] << "\n";
  if (!out) throw ValidationError("save_off: write failure on '" + path + "'");
}

double shape_diameter(const TriMesh& mesh, int* arg_i, int* arg_j) {
  const int n = mesh.n();
  double best = 0.0;
  int bi = 0, bj = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = norm(mesh.vertices[i] - mesh.vertices[j]);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  if (arg_i) *arg_i = bi;
  if (arg_j) *arg_j = bj;
  return best;
}

double shape_diameter(const TriMesh& mesh) {
  return shape_diameter(mesh, nullptr, nullptr);
}

NeighborhoodMask neighborhood_mask(const TriMesh& mesh, double radius_fraction) {
  require(radius_fraction > 0, "neighborhood_mask: radius_fraction must be > 0");
  const double diam = shape_diameter(mesh);
  if (diam <= 0.0)
    throw ValidationError("neighborhood_mask: zero shape diameter");
  const int n = mesh.n();
  NeighborhoodMask mask;
  mask.n = n;
  mask.radius = radius_fraction * diam;
  mask.entries.assign(static_cast<size_t>(n) * n, 0);
  par::for_chunks(n, [&](int, int b, int e) {
    for (int i = b; i < e; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double d = norm(mesh.vertices[i] - mesh.vertices[j]);
        mask.entries[static_cast<size_t>(i) * n + j] = d <= mask.radius ? 1 : 0;
      }
  });
  return mask;
}

}  // namespace limp
