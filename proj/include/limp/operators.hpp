#pragma once
// Discrete differential operators on triangle meshes: cotangent Laplacian L
// (positive semi-definite, weak form), lumped barycentric mass M, per-face
// gradient G, and divergence Div = -G^T weighted by face areas. All assembled
// from per-face hat-function gradients so that Div(G(u)) = -L u holds to
// roundoff. Immutable after assembly; shareable across threads.

#include <array>
#include <vector>

#include "limp/linalg.hpp"
#include "limp/mesh.hpp"

namespace limp {

struct MeshOperators {
  int n = 0, m = 0;
  SparseMatrix L;                            // n x n cotangent Laplacian (PSD)
  std::vector<double> mass;                  // n, diagonal lumped mass
  std::vector<double> area;                  // m, face areas
  std::vector<std::array<Vec3, 3>> gvec;     // per face, hat gradient per corner
  std::vector<int> diag_index;               // n, CSR index of L's diagonal entry
  std::vector<std::array<int, 3>> faces;     // owned copy of face list
};

// Throws NumericalError naming the face when a face area is below
// 1e-12 * diameter^2.
MeshOperators assemble_operators(const TriMesh& mesh);

// Per-face gradient of a vertex scalar field.
std::vector<Vec3> apply_gradient(const MeshOperators& ops,
                                 const std::vector<double>& u);

// Integrated divergence per vertex; satisfies
// <G u, V>_areas = -<u, Div V> exactly (same arithmetic).
std::vector<double> apply_divergence(const MeshOperators& ops,
                                     const std::vector<Vec3>& field);

}  // namespace limp
