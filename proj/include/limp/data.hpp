#pragma once
// Dataset records and the synthetic corresponded-shape family.
//
// Shapes are hinged tubes: each subject ("style", the isometry class) fixes a
// radius and two segment lengths; each pose bends the upper segment rigidly
// about a hinge, which preserves the intrinsic metric up to the one ring of
// triangles crossing the hinge. All records share topology and vertex order,
// so correspondence is by index. Ground-truth Euclidean/geodesic matrices and
// the neighborhood mask are precomputed per record at generation time.

#include <cstdint>
#include <vector>

#include "limp/geodesics.hpp"
#include "limp/mesh.hpp"
#include "limp/rng.hpp"

namespace limp {

struct ShapeRecord {
  TriMesh mesh;
  int subject_id = 0;
  int pose_id = 0;
  DistanceMatrix d_euclid;  // full n x n, kind euclidean
  DistanceMatrix d_geo;     // full n x n, kind geodesic
  NeighborhoodMask mask;
  double diameter = 0.0;
};

enum class PairKind { any, isometric, non_isometric };

// One sampled training pair: ordered dataset indices plus the interpolation
// scalar. isometric <=> same subject_id.
struct PairSample {
  int i = 0, j = 0;
  double alpha = 0.5;  // open interval (0,1)
  PairKind kind = PairKind::any;
};

struct FamilyConfig {
  int n_subjects = 2;
  int n_poses = 5;
  int resolution = 300;   // approximate vertex count; rings of 12 vertices
  uint64_t seed = 0;
  // Poses sweep bend angles over [-bend_max, bend_max] radians. The hinge
  // rotation stretches tube fibers by roughly angle x radius, so the default
  // keeps the worst intra-subject distortion below 0.2 x the inter-subject
  // distortion produced by the default radius spread.
  double bend_max = 0.12;
  // Optional explicit per-subject radii (overrides the seeded spread; size
  // must equal n_subjects).
  std::vector<double> radii;
  GeodesicConfig geodesic;       // settings for the ground-truth matrices
  double mask_radius_factor = 0.2;  // mask radius = factor * record diameter
};

// Deterministic in cfg. Verifies at generation that bending is near-isometric:
// with >= 2 subjects, the maximum intra-subject distortion K must not exceed
// 0.2 x the minimum inter-subject K.
std::vector<ShapeRecord> gen_synthetic_family(const FamilyConfig& cfg);
std::vector<ShapeRecord> gen_synthetic_family(int n_subjects, int n_poses,
                                              int resolution, uint64_t seed);

// Euclidean distance matrix of a vertex set (plain, non-differentiable).
DistanceMatrix euclid_matrix(const TriMesh& mesh);

// Uniform over eligible ordered pairs (i, j), i != j, with a fresh
// alpha ~ U(0,1) per call. Throws when no pair of the requested kind exists.
PairSample sample_pair(const std::vector<ShapeRecord>& dataset, Rng& rng,
                       PairKind kind);

// Evenly strided landmark indices (0 = empty list, meaning "all vertices").
std::vector<int> strided_landmarks(int n_vertices, int count);

}  // namespace limp
