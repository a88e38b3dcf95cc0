#pragma once
// Heat-method geodesic distances and their reverse-mode derivatives with
// respect to vertex positions.
//
// Pipeline (per source s), on a copy of the mesh pre-scaled to unit diameter:
//   1. solve (M + t_abs L) u = delta_s with t_abs = t * hbar^2 (hbar = mean
//      edge length), natural (Neumann) boundary conditions;
//   2. per-face field U = -G u / max(|G u|, grad_norm_floor);
//   3. solve (L + eps I) d = G^T W_A U with eps = poisson_regularization *
//      trace(L)/n, optionally constraining the distances on the source's
//      1..pin_rings vertex rings to their Euclidean chord lengths (exact on
//      flat geometry) through a bordered/Schur system against the same
//      factorization;
//   4. shift d <- d - d[s].
// Distances are scaled back by the diameter afterward, which makes the whole
// map exactly homogeneous of degree 1 in the vertex positions.
//
// heat_distance_all solves every source against the two shared factorizations
// and symmetrizes the result as (D + D^T)/2. heat_forward additionally keeps
// the per-source forward state so heat_distance_vjp can run the hand-derived
// adjoint chain (adjoint solves reuse the same factorizations; the adjoint of
// y = A^{-1} b contributes bbar = A^{-T} ybar and Abar = -bbar y^T restricted
// to the sparsity pattern; Abar chains into vertex gradients through the
// analytic derivatives of the per-face hat gradients, areas, and masses).

#include <memory>
#include <vector>

#include "limp/linalg.hpp"
#include "limp/mesh.hpp"
#include "limp/operators.hpp"

namespace limp {

struct GeodesicConfig {
  double t = 0.5;                        // units of squared mean edge length
  double poisson_regularization = 1e-8;  // eps = this * trace(L)/n
  double grad_norm_floor = 1e-12;
  int pin_rings = 2;                     // 0 disables near-field pinning
  SolverBackend backend = SolverBackend::sparse;
};

enum class MatrixKind { euclidean, local_euclidean, geodesic };

struct DistanceMatrix {
  int n = 0;
  MatrixKind kind = MatrixKind::geodesic;
  std::vector<double> d;  // row-major n*n

  DistanceMatrix() = default;
  DistanceMatrix(int n_, MatrixKind k)
      : n(n_), kind(k), d(static_cast<size_t>(n_) * n_, 0.0) {}
  double& at(int i, int j) { return d[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return d[static_cast<size_t>(i) * n + j]; }
};

struct MetricDistortionReport {
  double K = 0.0;                 // max entrywise |Dx - Dy|
  double mean_distortion = 0.0;   // mean entrywise |Dx - Dy|
  std::vector<double> per_point;  // row means
};

// Per-source saved forward state (on the unit-diameter mesh).
struct HeatSourceState {
  int source = 0;
  std::vector<int> pinned;       // P, source first; empty when pin_rings == 0
  std::vector<double> pin_vals;  // chord lengths v (v[0] = 0 for the source)
  bool all_pinned = false;       // |P| == n: d is the chord vector directly
  std::vector<double> u;         // heat solve
  std::vector<Vec3> g;           // raw per-face gradients G u
  std::vector<double> rnorm;     // max(|g|, floor) per face
  std::vector<Vec3> U;           // normalized field
  std::vector<double> b2;        // Poisson right-hand side G^T W_A U
  std::vector<double> y0;        // unconstrained Poisson solution
  DenseMatrix ycols;             // n x k bordered-solve columns A2^{-1} E
  DenseCholesky schur;           // k x k factor of S = E^T A2^{-1} E
  std::vector<double> lambda;    // k multipliers
  std::vector<double> d_raw;     // before the source shift
};

struct HeatContext {
  GeodesicConfig cfg;
  std::vector<Vec3> orig_vertices;
  std::vector<std::array<int, 3>> faces;
  double diam = 0.0;
  int diam_i = 0, diam_j = 0;    // vertex pair achieving the diameter
  TriMesh scaled;                // unit-diameter copy
  MeshOperators ops;             // assembled on `scaled`
  double hbar = 0.0, t_abs = 0.0, eps_reg = 0.0, trace_l = 0.0;
  SparseMatrix a1, a2;           // share L's sparsity pattern
  std::vector<std::vector<int>> adjacency;  // sorted vertex neighbors
  std::shared_ptr<SpdFactorization> f1, f2;
  std::vector<int> sources;      // landmark list, or 0..n-1
  bool full = true;              // sources cover every vertex in order
  bool has_state = false;
  std::vector<HeatSourceState> state;      // per source when has_state
  std::vector<std::vector<double>> rows;   // per-source shifted d (scaled units)
  DistanceMatrix output;         // symmetrized, original units, kind geodesic
};

// Core entry point. Empty `landmarks` means all vertices. With keep_state the
// context can be passed to heat_distance_vjp.
HeatContext heat_forward(const TriMesh& mesh, const GeodesicConfig& cfg,
                         const std::vector<int>& landmarks = {},
                         bool keep_state = false);

std::vector<double> heat_distance_single(const TriMesh& mesh, int source,
                                         const GeodesicConfig& cfg);

DistanceMatrix heat_distance_all(const TriMesh& mesh, const GeodesicConfig& cfg);

// Vector-Jacobian product: cotangent has the shape of ctx.output (k x k for
// landmark mode, n x n for full); returns the n x 3 gradient of the original
// vertex positions. Requires a keep_state context.
DenseMatrix heat_distance_vjp(const HeatContext& ctx, const DenseMatrix& cotangent);

// Convenience form running its own forward pass.
DenseMatrix heat_distance_vjp(const TriMesh& mesh, const GeodesicConfig& cfg,
                              const DenseMatrix& cotangent);

MetricDistortionReport bounded_distortion(const DistanceMatrix& dx,
                                          const DistanceMatrix& dy);

// Entrywise (1-alpha) Dx + alpha Dy.
DistanceMatrix interp_metric(const DistanceMatrix& dx, const DistanceMatrix& dy,
                             double alpha);

// Sorted vertex rings around a source by breadth-first search over the edge
// graph; rings[r] holds the vertices at graph distance r+1, r < depth.
std::vector<std::vector<int>> vertex_rings(const TriMesh& mesh, int source,
                                           int depth);

}  // namespace limp
