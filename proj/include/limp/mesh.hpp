#pragma once
// Triangle-mesh representation, ASCII OFF/COFF I/O, validation, and geometric
// queries. TriMesh and NeighborhoodMask are immutable by convention after
// construction/validation and safe to share across readers.

#include <optional>
#include <string>
#include <vector>

#include "limp/common.hpp"

namespace limp {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  int n() const { return static_cast<int>(vertices.size()); }
  int m() const { return static_cast<int>(faces.size()); }
};

// Throws ValidationError listing offending faces: out-of-range or repeated
// indices, or area below 1e-12 * diameter^2. Also requires n >= 4, m >= 1.
void validate_mesh(const TriMesh& mesh);

TriMesh load_off(const std::string& path);

// Writes ASCII OFF; with vertex_scalar (length n, normalized to [0,1] by the
// caller or clamped here) writes COFF with a white-to-red linear colormap:
// r = 255, g = b = round(255*(1-s)).
void save_off(const TriMesh& mesh, const std::string& path,
              const std::vector<double>* vertex_scalar = nullptr);

// Maximum pairwise Euclidean vertex distance.
double shape_diameter(const TriMesh& mesh);
// Also reports the achieving vertex pair (lowest-index pair on ties).
double shape_diameter(const TriMesh& mesh, int* arg_i, int* arg_j);

double face_area(const TriMesh& mesh, int f);
double mean_edge_length(const TriMesh& mesh);

struct NeighborhoodMask {
  int n = 0;
  double radius = 0.0;
  std::vector<char> entries;  // n*n, symmetric, false diagonal

  bool at(int i, int j) const { return entries[static_cast<size_t>(i) * n + j] != 0; }
};

// radius = radius_fraction * diameter, measured on this (reference) mesh.
NeighborhoodMask neighborhood_mask(const TriMesh& mesh, double radius_fraction);

}  // namespace limp
