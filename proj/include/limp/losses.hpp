#pragma once
// Loss terms over the tape: relative-error reconstruction, metric
// interpolation (geodesic + local-Euclidean), intrinsic/extrinsic
// disentanglement, and the KL regularizer, plus the differentiable geodesic
// matrix node that bridges the heat pipeline's hand-derived VJP into the
// autodiff graph.
//
// Conventions fixed here:
//  - Relative error applies to Euclidean terms only; geodesic terms use plain
//    squared Frobenius normalized by the entry count.
//  - rel_dist_err excludes entries whose ground-truth value is below
//    tau = 1e-9 * diameter (diagonal, coincident points).
//  - The interpolation losses build their targets from the decoded endpoint
//    shapes; the local term's neighborhood is the union of the two records'
//    masks.

#include <functional>
#include <memory>

#include "limp/data.hpp"
#include "limp/model.hpp"

namespace limp {

struct LossWeights {
  double recon = 1.0;
  double interp = 1.0;
  double disent_int = 1.0;
  double disent_ext = 1.0;
  double beta = 1e-3;  // KL weight
};

struct LossBreakdown {
  double recon = 0.0;
  double interp_geo = 0.0;
  double interp_local = 0.0;
  double disent_int = 0.0;
  double disent_ext = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

enum class TrainStage { warmup, full };

struct LossConfig {
  LossWeights weights;
  GeodesicConfig geodesic;    // for decoded-shape geodesics
  std::vector<int> landmarks; // empty = full matrices
};

// Shared evaluation state for one optimization step: the tape, the registered
// model, the dataset, and per-step encoded codes (each record encoded at most
// once per step).
struct LossEvalContext {
  Tape* tape = nullptr;
  const TapedModel* model = nullptr;
  const std::vector<ShapeRecord>* data = nullptr;
  LossConfig config;
  Rng* rng = nullptr;       // reparameterization noise
  bool stochastic = true;   // false: z = mu
  // Testing hook: replaces decode_node when set (e.g. ground-truth lookup).
  std::function<Var(Tape&, Var)> decode_override;

  // Cached per-record forward state, filled on first use so each record is
  // encoded (and its own code decoded) at most once per step.
  struct Cached {
    EncodedVar enc;
    Var z;
    bool has_decoded = false;
    Var decoded;
    bool has_geo = false;
    Var geo;  // geodesic matrix of the decoded shape
  };
  std::vector<std::unique_ptr<Cached>> cache;

  const Cached& code(int index);
  Var decoded_record(int index);
  Var decoded_geodesic(int index);
  Var decode(Var z);
};

// Pairwise Euclidean distance matrix of an (n,3) Var; symmetric, zero
// diagonal, differentiable.
Var euclid_dist_matrix(Var x);

// Sum over {ij : gt[ij] > 1e-9*diameter, and mask[ij] when given} of
// ((pred[ij] - gt[ij]) / gt[ij])^2.
Var rel_dist_err(Var pred, const DistanceMatrix& gt, double diameter,
                 const NeighborhoodMask* mask = nullptr);
// Variant with a differentiable target; the inclusion set is decided from the
// target's forward values.
Var rel_dist_err_var(Var pred, Var target, double diameter,
                     const NeighborhoodMask* mask = nullptr);

// Geodesic distance matrix of decoded vertices x (n,3) over the given face
// list; landmarks restrict it to a K x K submatrix. Backward runs the heat
// pipeline's hand-derived adjoint.
Var geodesic_matrix_node(Var x, const std::vector<std::array<int, 3>>& faces,
                         const GeodesicConfig& cfg,
                         const std::vector<int>& landmarks = {});

// gt geodesic matrix restricted to landmark rows/columns (identity when
// landmarks is empty).
DenseMatrix landmark_submatrix(const DistanceMatrix& d, const std::vector<int>& landmarks);

// Individual terms (single pair / single shape; unweighted).
Var loss_recon_term(LossEvalContext& ctx, Var decoded, const ShapeRecord& gt);
struct InterpTerms {
  Var geo;
  Var local;
};
InterpTerms loss_interp(LossEvalContext& ctx, const PairSample& pair);
Var loss_disent_int(LossEvalContext& ctx, const PairSample& pair);
Var loss_disent_ext(LossEvalContext& ctx, const PairSample& pair);
// 0.5 * sum(exp(logvar) + mu^2 - 1 - logvar), unweighted.
Var loss_kl(LossEvalContext& ctx, const EncodedVar& enc);

// One optimization step's batch: interp runs on `interp` pairs (any kind),
// disentanglement on `iso` / `non_iso`.
struct PairBatch {
  std::vector<PairSample> interp;
  std::vector<PairSample> iso;
  std::vector<PairSample> non_iso;
};

// Builds the staged total on ctx's tape. Warmup: recon + KL only (other
// components reported as zero and not evaluated). Components are sums over
// their contributing items; recon and KL run over every distinct record index
// in the batch, in ascending order.
LossBreakdown loss_total(LossEvalContext& ctx, const PairBatch& batch, TrainStage stage,
                         Var* total_out);

}  // namespace limp
