#pragma once
// Latent-space applications over a trained checkpoint: interpolation,
// intrinsic/extrinsic swap, analogies, partial-shape completion,
// shape-from-metric optimization, and the two evaluation metrics. Every
// operation is a pure function of (params, inputs, seed).

#include <vector>

#include "limp/trainer.hpp"

namespace limp {

// Deterministic mean-code encoding of a mesh (z = mu).
LatentCode encode_mesh(const ModelParams& params, const TriMesh& mesh);

// Decoded vertices for z, with the topology of `like`.
TriMesh decode_to_mesh(const ModelParams& params, const std::vector<double>& z,
                       const TriMesh& like);

// Decodings of (1-alpha) z_a + alpha z_b at alpha = k/(steps-1); endpoints are
// the exact reconstructions of the two codes. steps >= 2.
std::vector<TriMesh> latent_interpolate(const ModelParams& params, const TriMesh& x_a,
                                        const TriMesh& x_b, int steps);

// decode(merge(z_i^int, z_j^ext)).
TriMesh latent_swap(const ModelParams& params, const TriMesh& x_i, const TriMesh& x_j);

// decode(z_a - z_b + z_c) on mean codes.
TriMesh latent_analogy(const ModelParams& params, const TriMesh& x_a, const TriMesh& x_b,
                       const TriMesh& x_c);

struct CompletionResult {
  LatentCode code;
  TriMesh mesh;
  double objective = 0.0;  // asymmetric Chamfer of the best restart
};

// Latent search minimizing the mean over partial points of the squared
// distance to the nearest decoded vertex. Restarts are seeded from the
// training shapes nearest (in Chamfer) to the partial cloud, plus noise.
CompletionResult complete_partial(const ModelParams& params,
                                  const std::vector<ShapeRecord>& train_data,
                                  const DenseMatrix& partial_points, int iters,
                                  uint64_t seed, int restarts = 8, double lr = 0.05);

struct FitMetricResult {
  TriMesh mesh;           // best-so-far vertices
  double objective = 0.0;  // best objective reached
  double initial = 0.0;    // objective at the initial vertices
};

// Adam on vertex positions minimizing the squared-Frobenius geodesic
// discrepancy to the target matrix; reports the best accepted iterate, which
// never increases the objective.
FitMetricResult fit_to_metric(const TriMesh& mesh_init, const DistanceMatrix& d_target,
                              int iters, double lr, const GeodesicConfig& cfg = {});

struct EvalProtocol {
  std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int landmarks = 16;   // geodesic landmark count for decoded shapes (0 = all)
  int max_pairs = 0;    // 0 = all ordered pairs; else the first k by (i,j) order
  GeodesicConfig geodesic;
};

struct EvalReport {
  double interpolation_error = 0.0;      // vs ground-truth endpoint metrics
  double interpolation_error_dec = 0.0;  // vs decoded endpoint metrics
  double disentanglement_error = 0.0;
  // One row per evaluated pair: i, j, then the pair's mean error.
  std::vector<std::array<double, 3>> interp_pairs;
  std::vector<std::array<double, 3>> disent_pairs;
};

// Mean over ordered pairs, the alpha grid, and matrix entries of
// |D_g(dec(z_alpha)) - ((1-alpha) D_g(X_i) + alpha D_g(X_j))| / diameter.
// The main value takes endpoint matrices from the records' ground truth; the
// _dec variant takes them from the decoded endpoints.
EvalReport eval_interpolation_error(const ModelParams& params,
                                    const std::vector<ShapeRecord>& data,
                                    const EvalProtocol& protocol = {});

// Mean over ordered (i, j) (including i = j) of the mean vertex distance
// between dec(z_i^int | z_j^ext) and the ground-truth (style i, pose j)
// record, normalized by that record's diameter. Fills disentanglement fields
// of the report.
EvalReport eval_disentanglement_error(const ModelParams& params,
                                      const std::vector<ShapeRecord>& data,
                                      const EvalProtocol& protocol = {});

// Both metrics in one report.
EvalReport eval_model(const ModelParams& params, const std::vector<ShapeRecord>& data,
                      const EvalProtocol& protocol = {});

}  // namespace limp
