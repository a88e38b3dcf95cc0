#include "limp/losses.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace limp {

const LossEvalContext::Cached& LossEvalContext::code(int index) {
  require(tape && model && data, "loss context: tape/model/data not set");
  require(index >= 0 && index < static_cast<int>(data->size()),
          "loss context: record index " + std::to_string(index) + " out of range");
  if (cache.empty()) cache.resize(data->size());
  if (!cache[index]) {
    const ShapeRecord& rec = (*data)[index];
    const int n = rec.mesh.n();
    DenseMatrix x(n, 3);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) x.at(i, c) = rec.mesh.vertices[i][c];
    auto cached = std::make_unique<Cached>();
    cached->enc = encode_node(*tape, *model, tape->leaf(std::move(x), false));
    if (stochastic) {
      require(rng != nullptr, "loss context: stochastic mode needs an rng");
      cached->z = reparameterize_node(*tape, cached->enc, *rng);
    } else {
      cached->z = cached->enc.mu;
    }
    cache[index] = std::move(cached);
  }
  return *cache[index];
}

Var LossEvalContext::decoded_record(int index) {
  code(index);  // ensure the cache entry exists
  Cached& cached = *cache[index];
  if (!cached.has_decoded) {
    cached.decoded = decode(cached.z);
    cached.has_decoded = true;
  }
  return cached.decoded;
}

Var LossEvalContext::decoded_geodesic(int index) {
  code(index);
  Cached& cached = *cache[index];
  if (!cached.has_geo) {
    cached.geo = geodesic_matrix_node(decoded_record(index), (*data)[index].mesh.faces,
                                      config.geodesic, config.landmarks);
    cached.has_geo = true;
  }
  return cached.geo;
}

Var LossEvalContext::decode(Var z) {
  if (decode_override) return decode_override(*tape, z);
  return decode_node(*tape, *model, z);
}

Var euclid_dist_matrix(Var x) { return pairwise_row_distance(x); }

namespace {

std::string shape_of(const DenseMatrix& m) {
  return "(" + std::to_string(m.rows) + "," + std::to_string(m.cols) + ")";
}

// Inclusion matrix for relative error: reference value above tau, optional
// neighborhood restriction. The reference is a plain value array (row-major
// n*n view).
DenseMatrix inclusion_mask(const std::vector<double>& ref, int n, double tau,
                           const NeighborhoodMask* mask) {
  DenseMatrix mk(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (ref[static_cast<size_t>(i) * n + j] <= tau) continue;
      if (mask != nullptr && !mask->at(i, j)) continue;
      mk.at(i, j) = 1.0;
    }
  return mk;
}

}  // namespace

Var rel_dist_err(Var pred, const DistanceMatrix& gt, double diameter,
                 const NeighborhoodMask* mask) {
  Tape& t = *pred.tape;
  const DenseMatrix& pv = t.value(pred);
  if (pv.rows != gt.n || pv.cols != gt.n)
    throw ValidationError("rel_dist_err: dimension mismatch " + shape_of(pv) + " vs (" +
                          std::to_string(gt.n) + "," + std::to_string(gt.n) + ")");
  if (mask != nullptr)
    require(mask->n == gt.n, "rel_dist_err: mask dimension mismatch");
  const double tau = 1e-9 * diameter;
  const DenseMatrix mk = inclusion_mask(gt.d, gt.n, tau, mask);
  std::vector<double> gt_sel;
  for (size_t k = 0; k < mk.v.size(); ++k)
    if (mk.v[k] != 0.0) gt_sel.push_back(gt.d[k]);
  Var sel = masked_select(pred, mk);
  Var gt_leaf =
      t.leaf(DenseMatrix(static_cast<int>(gt_sel.size()), 1, gt_sel), false);
  return sum(square(div(sub(sel, gt_leaf), gt_leaf)));
}

Var rel_dist_err_var(Var pred, Var target, double diameter,
                     const NeighborhoodMask* mask) {
  Tape& t = *pred.tape;
  const DenseMatrix& pv = t.value(pred);
  const DenseMatrix& tv = t.value(target);
  if (pv.rows != tv.rows || pv.cols != tv.cols)
    throw ValidationError("rel_dist_err: dimension mismatch " + shape_of(pv) + " vs " +
                          shape_of(tv));
  if (mask != nullptr)
    require(mask->n == pv.rows, "rel_dist_err: mask dimension mismatch");
  const double tau = 1e-9 * diameter;
  const DenseMatrix mk = inclusion_mask(tv.v, pv.rows, tau, mask);
  Var sel = masked_select(pred, mk);
  Var tgt = masked_select(target, mk);
  return sum(square(div(sub(sel, tgt), tgt)));
}

Var geodesic_matrix_node(Var x, const std::vector<std::array<int, 3>>& faces,
                         const GeodesicConfig& cfg, const std::vector<int>& landmarks) {
  Tape& t = *x.tape;
  const DenseMatrix& xv = t.value(x);
  require(xv.cols == 3, "geodesic_matrix_node: positions must be (n,3)");
  TriMesh mesh;
  mesh.vertices.resize(xv.rows);
  for (int i = 0; i < xv.rows; ++i)
    mesh.vertices[i] = {xv.at(i, 0), xv.at(i, 1), xv.at(i, 2)};
  mesh.faces = faces;
  auto state = std::make_shared<HeatContext>(
      heat_forward(mesh, cfg, landmarks, /*keep_state=*/true));
  const int k = state->output.n;
  DenseMatrix value(k, k, state->output.d);
  const int px = x.id;
  return t.make_node(std::move(value), {px}, [px, state](Tape& tp, int self) {
    tp.add_grad(px, heat_distance_vjp(*state, tp.raw_grad(self)));
  });
}

DenseMatrix landmark_submatrix(const DistanceMatrix& d,
                               const std::vector<int>& landmarks) {
  if (landmarks.empty()) return DenseMatrix(d.n, d.n, d.d);
  const int k = static_cast<int>(landmarks.size());
  DenseMatrix out(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      require(landmarks[a] >= 0 && landmarks[a] < d.n,
              "landmark_submatrix: index out of range");
      out.at(a, b) = d.at(landmarks[a], landmarks[b]);
    }
  return out;
}

Var loss_recon_term(LossEvalContext& ctx, Var decoded, const ShapeRecord& gt) {
  return rel_dist_err(euclid_dist_matrix(decoded), gt.d_euclid, gt.diameter);
}

namespace {

void check_pair(const LossEvalContext& ctx, const PairSample& pair, const char* where) {
  const int n = static_cast<int>(ctx.data->size());
  require(pair.i >= 0 && pair.i < n && pair.j >= 0 && pair.j < n,
          std::string(where) + ": pair index out of range");
  require(pair.i != pair.j, std::string(where) + ": pair indices must differ");
  require(pair.alpha > 0.0 && pair.alpha < 1.0,
          std::string(where) + ": alpha must lie in (0,1)");
}

Var lerp(Var a, Var b, double alpha) {
  return add(scale(a, 1.0 - alpha), scale(b, alpha));
}

NeighborhoodMask mask_union(const NeighborhoodMask& a, const NeighborhoodMask& b) {
  NeighborhoodMask u = a;
  for (size_t k = 0; k < u.entries.size(); ++k)
    if (b.entries[k]) u.entries[k] = 1;
  return u;
}

Var frobenius_sq_normalized(Var diff) {
  const DenseMatrix& dv = diff.tape->value(diff);
  return scale(sum(square(diff)), 1.0 / (static_cast<double>(dv.rows) * dv.cols));
}

}  // namespace

InterpTerms loss_interp(LossEvalContext& ctx, const PairSample& pair) {
  check_pair(ctx, pair, "loss_interp");
  const ShapeRecord& ri = (*ctx.data)[pair.i];
  const ShapeRecord& rj = (*ctx.data)[pair.j];
  const auto& ci = ctx.code(pair.i);
  const auto& cj = ctx.code(pair.j);
  Var z_alpha = lerp(ci.z, cj.z, pair.alpha);
  Var xi = ctx.decoded_record(pair.i);
  Var xj = ctx.decoded_record(pair.j);
  Var xa = ctx.decode(z_alpha);

  // Geodesic discrepancy against the metric interpolation of the decoded
  // endpoints.
  Var da = geodesic_matrix_node(xa, ri.mesh.faces, ctx.config.geodesic,
                                ctx.config.landmarks);
  Var di = ctx.decoded_geodesic(pair.i);
  Var dj = ctx.decoded_geodesic(pair.j);
  Var geo = frobenius_sq_normalized(sub(da, lerp(di, dj, pair.alpha)));

  // Local Euclidean discrepancy on the union of the endpoint neighborhoods.
  Var ea = euclid_dist_matrix(xa);
  Var target = lerp(euclid_dist_matrix(xi), euclid_dist_matrix(xj), pair.alpha);
  const NeighborhoodMask joint = mask_union(ri.mask, rj.mask);
  Var local =
      rel_dist_err_var(ea, target, 0.5 * (ri.diameter + rj.diameter), &joint);
  return InterpTerms{geo, local};
}

Var loss_disent_int(LossEvalContext& ctx, const PairSample& pair) {
  check_pair(ctx, pair, "loss_disent_int");
  const ShapeRecord& ri = (*ctx.data)[pair.i];
  const ShapeRecord& rj = (*ctx.data)[pair.j];
  require(ri.subject_id == rj.subject_id, "loss_disent_int: pair is not isometric");
  const auto& ci = ctx.code(pair.i);
  const auto& cj = ctx.code(pair.j);
  const int int_dim = ctx.model->params->config.int_dim();
  auto [zi_int, zi_ext] = split(ci.z, 1, int_dim);
  auto [zj_int, zj_ext] = split(cj.z, 1, int_dim);
  (void)zj_ext;
  Var zm = concat(lerp(zi_int, zj_int, pair.alpha), zi_ext, 1);
  Var xm = ctx.decode(zm);
  return rel_dist_err(euclid_dist_matrix(xm), ri.d_euclid, ri.diameter);
}

Var loss_disent_ext(LossEvalContext& ctx, const PairSample& pair) {
  check_pair(ctx, pair, "loss_disent_ext");
  const ShapeRecord& ri = (*ctx.data)[pair.i];
  const ShapeRecord& rj = (*ctx.data)[pair.j];
  require(ri.subject_id != rj.subject_id, "loss_disent_ext: pair is not non-isometric");
  const auto& ci = ctx.code(pair.i);
  const auto& cj = ctx.code(pair.j);
  const int int_dim = ctx.model->params->config.int_dim();
  auto [zi_int, zi_ext] = split(ci.z, 1, int_dim);
  auto [zj_int, zj_ext] = split(cj.z, 1, int_dim);
  (void)zj_int;
  Var zm = concat(zi_int, lerp(zi_ext, zj_ext, pair.alpha), 1);
  Var xm = ctx.decode(zm);
  Var dm = geodesic_matrix_node(xm, ri.mesh.faces, ctx.config.geodesic,
                                ctx.config.landmarks);
  const DenseMatrix gt = landmark_submatrix(ri.d_geo, ctx.config.landmarks);
  Var gt_leaf = ctx.tape->leaf(gt, false);
  return frobenius_sq_normalized(sub(dm, gt_leaf));
}

Var loss_kl(LossEvalContext& ctx, const EncodedVar& enc) {
  (void)ctx;
  Var term = sub(add_scalar(add(exp(enc.logvar), square(enc.mu)), -1.0), enc.logvar);
  return scale(sum(term), 0.5);
}

LossBreakdown loss_total(LossEvalContext& ctx, const PairBatch& batch, TrainStage stage,
                         Var* total_out) {
  require(ctx.tape != nullptr, "loss_total: context tape not set");
  Tape& t = *ctx.tape;
  auto zero = [&t]() { return t.leaf(DenseMatrix(1, 1), false); };

  // Distinct record indices used this step, ascending for determinism.
  std::set<int> indices;
  for (const PairSample& p : batch.interp) {
    indices.insert(p.i);
    indices.insert(p.j);
  }
  for (const PairSample& p : batch.iso) {
    indices.insert(p.i);
    indices.insert(p.j);
  }
  for (const PairSample& p : batch.non_iso) {
    indices.insert(p.i);
    indices.insert(p.j);
  }
  require(!indices.empty(), "loss_total: empty batch");

  Var recon = zero();
  Var kl = zero();
  for (int idx : indices) {
    recon = add(recon, loss_recon_term(ctx, ctx.decoded_record(idx), (*ctx.data)[idx]));
    kl = add(kl, loss_kl(ctx, ctx.code(idx).enc));
  }

  Var interp_geo = zero();
  Var interp_local = zero();
  Var disent_int = zero();
  Var disent_ext = zero();
  if (stage == TrainStage::full) {
    for (const PairSample& p : batch.interp) {
      const InterpTerms terms = loss_interp(ctx, p);
      interp_geo = add(interp_geo, terms.geo);
      interp_local = add(interp_local, terms.local);
    }
    for (const PairSample& p : batch.iso) disent_int = add(disent_int, loss_disent_int(ctx, p));
    for (const PairSample& p : batch.non_iso)
      disent_ext = add(disent_ext, loss_disent_ext(ctx, p));
  }

  const LossWeights& w = ctx.config.weights;
  Var total = add(scale(recon, w.recon), scale(kl, w.beta));
  if (stage == TrainStage::full) {
    total = add(total, scale(add(interp_geo, interp_local), w.interp));
    total = add(total, scale(disent_int, w.disent_int));
    total = add(total, scale(disent_ext, w.disent_ext));
  }

  LossBreakdown breakdown;
  breakdown.recon = t.value(recon).at(0, 0);
  breakdown.interp_geo = t.value(interp_geo).at(0, 0);
  breakdown.interp_local = t.value(interp_local).at(0, 0);
  breakdown.disent_int = t.value(disent_int).at(0, 0);
  breakdown.disent_ext = t.value(disent_ext).at(0, 0);
  breakdown.kl = t.value(kl).at(0, 0);
  breakdown.total = t.value(total).at(0, 0);
  if (total_out != nullptr) *total_out = total;
  return breakdown;
}

}  // namespace limp
