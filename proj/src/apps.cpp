#include "limp/apps.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace limp {

namespace {

DenseMatrix vertex_matrix(const TriMesh& mesh) {
  DenseMatrix x(mesh.n(), 3);
  for (int i = 0; i < mesh.n(); ++i)
    for (int c = 0; c < 3; ++c) x.at(i, c) = mesh.vertices[i][c];
  return x;
}

TriMesh points_to_mesh(const DenseMatrix& x, const TriMesh& like) {
  TriMesh mesh;
  mesh.vertices.resize(x.rows);
  for (int i = 0; i < x.rows; ++i) mesh.vertices[i] = {x.at(i, 0), x.at(i, 1), x.at(i, 2)};
  mesh.faces = like.faces;
  return mesh;
}

std::vector<double> lerp_vec(const std::vector<double>& a, const std::vector<double>& b,
                             double alpha) {
  std::vector<double> out(a.size());
  for (size_t k = 0; k < a.size(); ++k) out[k] = (1.0 - alpha) * a[k] + alpha * b[k];
  return out;
}

// Plain asymmetric Chamfer: mean over rows of `partial` of squared distance to
// the nearest row of `points`.
double chamfer_value(const DenseMatrix& partial, const DenseMatrix& points) {
  double total = 0.0;
  for (int i = 0; i < partial.rows; ++i) {
    double best = 1e300;
    for (int j = 0; j < points.rows; ++j) {
      double d2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double diff = partial.at(i, c) - points.at(j, c);
        d2 += diff * diff;
      }
      best = std::min(best, d2);
    }
    total += best;
  }
  return total / partial.rows;
}

}  // namespace

LatentCode encode_mesh(const ModelParams& params, const TriMesh& mesh) {
  const auto [mu, logvar] = encode(params, vertex_matrix(mesh));
  (void)logvar;
  return make_latent(params.config, mu);
}

TriMesh decode_to_mesh(const ModelParams& params, const std::vector<double>& z,
                       const TriMesh& like) {
  return points_to_mesh(decode(params, z), like);
}

std::vector<TriMesh> latent_interpolate(const ModelParams& params, const TriMesh& x_a,
                                        const TriMesh& x_b, int steps) {
  require(steps >= 2, "latent_interpolate: steps must be >= 2");
  require(x_a.n() == x_b.n(), "latent_interpolate: vertex counts differ");
  const LatentCode za = encode_mesh(params, x_a);
  const LatentCode zb = encode_mesh(params, x_b);
  std::vector<TriMesh> out;
  out.reserve(steps);
  for (int k = 0; k < steps; ++k) {
    const double alpha = static_cast<double>(k) / (steps - 1);
    out.push_back(decode_to_mesh(params, lerp_vec(za.z, zb.z, alpha), x_a));
  }
  return out;
}

TriMesh latent_swap(const ModelParams& params, const TriMesh& x_i, const TriMesh& x_j) {
  const LatentCode zi = encode_mesh(params, x_i);
  const LatentCode zj = encode_mesh(params, x_j);
  const LatentCode merged = merge_latent(zi.z_int(), zj.z_ext());
  return decode_to_mesh(params, merged.z, x_i);
}

TriMesh latent_analogy(const ModelParams& params, const TriMesh& x_a, const TriMesh& x_b,
                       const TriMesh& x_c) {
  const LatentCode za = encode_mesh(params, x_a);
  const LatentCode zb = encode_mesh(params, x_b);
  const LatentCode zc = encode_mesh(params, x_c);
  std::vector<double> z(za.z.size());
  for (size_t k = 0; k < z.size(); ++k) z[k] = za.z[k] - zb.z[k] + zc.z[k];
  return decode_to_mesh(params, z, x_a);
}

CompletionResult complete_partial(const ModelParams& params,
                                  const std::vector<ShapeRecord>& train_data,
                                  const DenseMatrix& partial_points, int iters,
                                  uint64_t seed, int restarts, double lr) {
  require(partial_points.rows >= 1 && partial_points.cols == 3,
          "complete_partial: partial points must be (k,3) with k >= 1");
  for (const double v : partial_points.v)
    require(std::isfinite(v), "complete_partial: non-finite partial point");
  require(!train_data.empty(), "complete_partial: empty training data");
  require(iters >= 1, "complete_partial: iters must be >= 1");
  require(restarts >= 1, "complete_partial: restarts must be >= 1");
  require(lr > 0.0, "complete_partial: lr must be > 0");

  // Rank training shapes by plain Chamfer to the partial cloud.
  std::vector<std::pair<double, int>> ranked;
  for (size_t r = 0; r < train_data.size(); ++r)
    ranked.push_back({chamfer_value(partial_points, vertex_matrix(train_data[r].mesh)),
                      static_cast<int>(r)});
  std::sort(ranked.begin(), ranked.end());

  Rng rng(seed);
  const int d = params.config.latent_dim;
  std::vector<double> best_z;
  double best_obj = 1e300;

  for (int restart = 0; restart < restarts; ++restart) {
    // Restart 0 is the unperturbed nearest-shape code; later restarts walk
    // down the ranking (cycling) with noise added.
    const int rec = ranked[restart % ranked.size()].second;
    std::vector<double> z = encode_mesh(params, train_data[rec].mesh).z;
    if (restart > 0)
      for (double& v : z) v += 0.1 * rng.normal();

    AdamSlot slot;
    for (int it = 1; it <= iters; ++it) {
      Tape tape;
      TapedModel model = register_params(tape, params, false);
      Var zv = tape.leaf(DenseMatrix(1, d, z), true);
      Var decoded = decode_node(tape, model, zv);
      Var cross = cross_row_distance(tape.leaf(partial_points, false), decoded);
      // Row-wise nearest distance via max: min(x) = -max(-x).
      Var nearest = scale(rowwise_max(scale(cross, -1.0)), -1.0);
      Var obj = mean(square(nearest));
      const double value = tape.value(obj).at(0, 0);
      if (!std::isfinite(value))
        throw NumericalError("complete_partial: non-finite objective");
      if (value < best_obj) {
        best_obj = value;
        best_z = z;
      }
      tape.backward(obj);
      adam_update(z, tape.grad(zv).v, slot, it, lr);
    }
  }

  CompletionResult result;
  result.code = make_latent(params.config, best_z);
  result.objective = best_obj;
  result.mesh = decode_to_mesh(params, best_z, train_data[0].mesh);
  return result;
}

FitMetricResult fit_to_metric(const TriMesh& mesh_init, const DistanceMatrix& d_target,
                              int iters, double lr, const GeodesicConfig& cfg) {
  const int n = mesh_init.n();
  require(d_target.n == n, "fit_to_metric: target dimension " +
                               std::to_string(d_target.n) + " does not match mesh (" +
                               std::to_string(n) + " vertices)");
  for (const double v : d_target.d)
    require(std::isfinite(v) && v >= 0.0, "fit_to_metric: invalid target entry");
  require(iters >= 0, "fit_to_metric: iters must be >= 0");
  require(lr >= 0.0, "fit_to_metric: lr must be >= 0");

  const DenseMatrix target(n, n, d_target.d);
  const double norm = 1.0 / (static_cast<double>(n) * n);
  std::vector<double> x = vertex_matrix(mesh_init).v;

  FitMetricResult result;
  result.mesh = mesh_init;
  AdamSlot slot;
  for (int it = 1; it <= iters + 1; ++it) {
    Tape tape;
    Var xv = tape.leaf(DenseMatrix(n, 3, x), true);
    Var d = geodesic_matrix_node(xv, mesh_init.faces, cfg);
    Var obj = scale(sum(square(sub(d, tape.leaf(target, false)))), norm);
    const double value = tape.value(obj).at(0, 0);
    if (!std::isfinite(value)) throw NumericalError("fit_to_metric: non-finite objective");
    if (it == 1) {
      result.initial = value;
      result.objective = value;
    } else if (value < result.objective) {
      result.objective = value;
      result.mesh = points_to_mesh(DenseMatrix(n, 3, x), mesh_init);
    }
    if (it == iters + 1) break;  // final evaluation only
    tape.backward(obj);
    adam_update(x, tape.grad(xv).v, slot, it, lr);
  }
  return result;
}

namespace {

// Shared per-record eval state: mean codes and (landmarked) ground-truth
// geodesic submatrices.
struct EvalCache {
  std::vector<LatentCode> codes;
  std::vector<int> landmarks;
  std::vector<DenseMatrix> gt_geo;   // landmark submatrix of rec.d_geo
  std::vector<DenseMatrix> dec_geo;  // geodesics of the decoded record
};

EvalCache build_cache(const ModelParams& params, const std::vector<ShapeRecord>& data,
                      const EvalProtocol& protocol, bool with_decoded_geo) {
  require(!data.empty(), "eval: empty dataset");
  const int n = data[0].mesh.n();
  EvalCache cache;
  cache.landmarks = strided_landmarks(n, protocol.landmarks);
  for (const ShapeRecord& rec : data) {
    cache.codes.push_back(encode_mesh(params, rec.mesh));
    cache.gt_geo.push_back(landmark_submatrix(rec.d_geo, cache.landmarks));
    if (with_decoded_geo) {
      const TriMesh dec = decode_to_mesh(params, cache.codes.back().z, rec.mesh);
      const HeatContext ctx = heat_forward(dec, protocol.geodesic, cache.landmarks);
      cache.dec_geo.push_back(DenseMatrix(ctx.output.n, ctx.output.n, ctx.output.d));
    }
  }
  return cache;
}

double mean_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double total = 0.0;
  for (size_t k = 0; k < a.v.size(); ++k) total += std::fabs(a.v[k] - b.v[k]);
  return total / static_cast<double>(a.v.size());
}

DenseMatrix lerp_mat(const DenseMatrix& a, const DenseMatrix& b, double alpha) {
  DenseMatrix out(a.rows, a.cols);
  for (size_t k = 0; k < a.v.size(); ++k)
    out.v[k] = (1.0 - alpha) * a.v[k] + alpha * b.v[k];
  return out;
}

}  // namespace

EvalReport eval_interpolation_error(const ModelParams& params,
                                    const std::vector<ShapeRecord>& data,
                                    const EvalProtocol& protocol) {
  require(data.size() >= 2, "eval_interpolation_error: need at least two records");
  require(!protocol.alphas.empty(), "eval_interpolation_error: empty alpha grid");
  const EvalCache cache = build_cache(params, data, protocol, true);

  EvalReport report;
  double sum_gt = 0.0, sum_dec = 0.0;
  int pairs = 0;
  const int count = static_cast<int>(data.size());
  for (int i = 0; i < count && (protocol.max_pairs == 0 || pairs < protocol.max_pairs);
       ++i) {
    for (int j = 0; j < count; ++j) {
      if (i == j) continue;
      if (protocol.max_pairs != 0 && pairs >= protocol.max_pairs) break;
      const double diam = 0.5 * (data[i].diameter + data[j].diameter);
      double pair_gt = 0.0, pair_dec = 0.0;
      for (const double alpha : protocol.alphas) {
        const std::vector<double> z =
            lerp_vec(cache.codes[i].z, cache.codes[j].z, alpha);
        const TriMesh dec = decode_to_mesh(params, z, data[i].mesh);
        const HeatContext ctx = heat_forward(dec, protocol.geodesic, cache.landmarks);
        const DenseMatrix d_alpha(ctx.output.n, ctx.output.n, ctx.output.d);
        pair_gt += mean_abs_diff(d_alpha,
                                 lerp_mat(cache.gt_geo[i], cache.gt_geo[j], alpha)) /
                   diam;
        pair_dec += mean_abs_diff(d_alpha,
                                  lerp_mat(cache.dec_geo[i], cache.dec_geo[j], alpha)) /
                    diam;
      }
      pair_gt /= static_cast<double>(protocol.alphas.size());
      pair_dec /= static_cast<double>(protocol.alphas.size());
      report.interp_pairs.push_back({static_cast<double>(i), static_cast<double>(j), pair_gt});
      sum_gt += pair_gt;
      sum_dec += pair_dec;
      ++pairs;
    }
  }
  require(pairs > 0, "eval_interpolation_error: no pairs evaluated");
  report.interpolation_error = sum_gt / pairs;
  report.interpolation_error_dec = sum_dec / pairs;
  return report;
}

EvalReport eval_disentanglement_error(const ModelParams& params,
                                      const std::vector<ShapeRecord>& data,
                                      const EvalProtocol& protocol) {
  require(!data.empty(), "eval_disentanglement_error: empty dataset");
  // (subject, pose) -> record index; the swap target must exist.
  std::map<std::pair<int, int>, int> grid;
  for (size_t r = 0; r < data.size(); ++r)
    grid[{data[r].subject_id, data[r].pose_id}] = static_cast<int>(r);

  std::vector<LatentCode> codes;
  for (const ShapeRecord& rec : data) codes.push_back(encode_mesh(params, rec.mesh));

  EvalReport report;
  double total = 0.0;
  int pairs = 0;
  const int count = static_cast<int>(data.size());
  for (int i = 0; i < count; ++i)
    for (int j = 0; j < count; ++j) {
      const auto it = grid.find({data[i].subject_id, data[j].pose_id});
      require(it != grid.end(),
              "eval_disentanglement_error: missing ground truth for style " +
                  std::to_string(data[i].subject_id) + ", pose " +
                  std::to_string(data[j].pose_id));
      const ShapeRecord& gt = data[it->second];
      const LatentCode merged = merge_latent(codes[i].z_int(), codes[j].z_ext());
      const DenseMatrix dec = decode(params, merged.z);
      double mean_dist = 0.0;
      for (int v = 0; v < gt.mesh.n(); ++v) {
        double d2 = 0.0;
        for (int c = 0; c < 3; ++c) {
          const double diff = dec.at(v, c) - gt.mesh.vertices[v][c];
          d2 += diff * diff;
        }
        mean_dist += std::sqrt(d2);
      }
      mean_dist /= gt.mesh.n();
      const double err = mean_dist / gt.diameter;
      report.disent_pairs.push_back({static_cast<double>(i), static_cast<double>(j), err});
      total += err;
      ++pairs;
    }
  report.disentanglement_error = total / pairs;
  return report;
}

EvalReport eval_model(const ModelParams& params, const std::vector<ShapeRecord>& data,
                      const EvalProtocol& protocol) {
  EvalReport interp = eval_interpolation_error(params, data, protocol);
  const EvalReport disent = eval_disentanglement_error(params, data, protocol);
  interp.disentanglement_error = disent.disentanglement_error;
  interp.disent_pairs = disent.disent_pairs;
  return interp;
}

}  // namespace limp
