#include "limp/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "limp/parallel.hpp"

namespace limp {

namespace {
std::vector<std::vector<int>> build_adjacency(
    int n, const std::vector<std::array<int, 3>>& faces) {
  std::vector<std::set<int>> adj(n);
  for (const auto& f : faces)
    for (int c = 0; c < 3; ++c) {
      adj[f[c]].insert(f[(c + 1) % 3]);
      adj[f[(c + 1) % 3]].insert(f[c]);
    }
  std::vector<std::vector<int>> out(n);
  for (int i = 0; i < n; ++i) out[i].assign(adj[i].begin(), adj[i].end());
  return out;
}

std::vector<std::vector<int>> rings_from_adjacency(
    const std::vector<std::vector<int>>& adj, int source, int depth) {
  std::vector<int> dist(adj.size(), -1);
  dist[source] = 0;
  std::vector<std::vector<int>> rings;
  std::vector<int> frontier{source};
  for (int r = 0; r < depth && !frontier.empty(); ++r) {
    std::set<int> next;
    for (int v : frontier)
      for (int w : adj[v])
        if (dist[w] < 0) next.insert(w);
    frontier.assign(next.begin(), next.end());
    for (int v : frontier) dist[v] = r + 1;
    if (!frontier.empty()) rings.push_back(frontier);
  }
  return rings;
}
}  // namespace

std::vector<std::vector<int>> vertex_rings(const TriMesh& mesh, int source,
                                           int depth) {
  return rings_from_adjacency(build_adjacency(mesh.n(), mesh.faces), source,
                              depth);
}

namespace {

// Subtracts outer(x, y) from the pattern-restricted accumulator `acc`, which
// is aligned with the CSR pattern of `pat`.
void accumulate_neg_outer(const SparseMatrix& pat, const std::vector<double>& x,
                          const std::vector<double>& y, std::vector<double>& acc) {
  for (int i = 0; i < pat.rows; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (int k = pat.row_ptr[i]; k < pat.row_ptr[i + 1]; ++k)
      acc[k] -= xi * y[pat.col_idx[k]];
  }
}

struct SourceWork {
  // Forward solve for one source on the scaled mesh. Fills `st` (full detail
  // when keep_state) and returns the shifted distance vector.
  static std::vector<double> run(const HeatContext& ctx, int source,
                                 HeatSourceState& st, bool keep_state) {
    const int n = ctx.scaled.n(), m = ctx.scaled.m();
    st.source = source;

    // Near-field pin set and chord values.
    std::vector<int> pinned;
    std::vector<double> pin_vals;
    if (ctx.cfg.pin_rings > 0) {
      pinned.push_back(source);
      pin_vals.push_back(0.0);
      for (const auto& ring :
           rings_from_adjacency(ctx.adjacency, source, ctx.cfg.pin_rings))
        for (int v : ring) {
          pinned.push_back(v);
          pin_vals.push_back(norm(ctx.scaled.vertices[v] - ctx.scaled.vertices[source]));
        }
    }
    const int k = static_cast<int>(pinned.size());
    const bool all_pinned = k >= n;
    st.pinned = pinned;
    st.pin_vals = pin_vals;
    st.all_pinned = all_pinned;

    std::vector<double> d_raw;
    if (all_pinned) {
      d_raw.assign(n, 0.0);
      for (int q = 0; q < k; ++q) d_raw[pinned[q]] = pin_vals[q];
    } else {
      // Step 1: heat solve.
      std::vector<double> delta(n, 0.0);
      delta[source] = 1.0;
      std::vector<double> u = ctx.f1->solve(delta);

      // Step 2: normalized gradient field.
      std::vector<Vec3> g = apply_gradient(ctx.ops, u);
      std::vector<double> rnorm(m);
      std::vector<Vec3> U(m);
      for (int f = 0; f < m; ++f) {
        rnorm[f] = std::max(norm(g[f]), ctx.cfg.grad_norm_floor);
        U[f] = (-1.0 / rnorm[f]) * g[f];
      }

      // Step 3: Poisson solve, rhs b2 = G^T W_A U.
      std::vector<double> b2(n, 0.0);
      for (int f = 0; f < m; ++f) {
        const auto& F = ctx.ops.faces[f];
        for (int c = 0; c < 3; ++c)
          b2[F[c]] += ctx.ops.area[f] * dot(ctx.ops.gvec[f][c], U[f]);
      }
      std::vector<double> y0 = ctx.f2->solve(b2);

      if (k == 0) {
        d_raw = y0;
      } else {
        // Bordered system against the shared factorization:
        // minimize over the A2 solve subject to d[P] = v.
        DenseMatrix ycols(n, k);
        std::vector<double> e(n, 0.0);
        for (int q = 0; q < k; ++q) {
          e[pinned[q]] = 1.0;
          const std::vector<double> col = ctx.f2->solve(e);
          e[pinned[q]] = 0.0;
          for (int i = 0; i < n; ++i) ycols.at(i, q) = col[i];
        }
        DenseMatrix S(k, k);
        for (int p = 0; p < k; ++p)
          for (int q = 0; q < k; ++q) S.at(p, q) = ycols.at(pinned[p], q);
        DenseCholesky schur = DenseCholesky::compute(S);
        std::vector<double> w(k);
        for (int q = 0; q < k; ++q) w[q] = y0[pinned[q]] - pin_vals[q];
        const std::vector<double> lambda = schur.solve(w);
        d_raw = y0;
        for (int i = 0; i < n; ++i) {
          double s = 0.0;
          for (int q = 0; q < k; ++q) s += ycols.at(i, q) * lambda[q];
          d_raw[i] -= s;
        }
        if (keep_state) {
          st.ycols = std::move(ycols);
          st.schur = std::move(schur);
          st.lambda = lambda;
        }
      }
      if (keep_state) {
        st.u = std::move(u);
        st.g = std::move(g);
        st.rnorm = std::move(rnorm);
        st.U = std::move(U);
        st.b2 = std::move(b2);
        st.y0 = std::move(y0);
      }
    }

    // Step 4: shift so d[source] = 0.
    std::vector<double> d(n);
    const double shift = d_raw[source];
    for (int i = 0; i < n; ++i) d[i] = d_raw[i] - shift;
    if (!all_finite(d))
      throw NumericalError("heat_distance: non-finite distance from source " +
                           std::to_string(source));
    if (keep_state) st.d_raw = std::move(d_raw);
    return d;
  }
};

}  // namespace

HeatContext heat_forward(const TriMesh& mesh, const GeodesicConfig& cfg,
                         const std::vector<int>& landmarks, bool keep_state) {
  require(cfg.t > 0, "heat_forward: t must be > 0");
  require(cfg.poisson_regularization > 0 && cfg.grad_norm_floor > 0,
          "heat_forward: regularization floors must be > 0");
  require(cfg.pin_rings >= 0, "heat_forward: pin_rings must be >= 0");
  const int n = mesh.n();

  HeatContext ctx;
  ctx.cfg = cfg;
  ctx.orig_vertices = mesh.vertices;
  ctx.faces = mesh.faces;
  ctx.diam = shape_diameter(mesh, &ctx.diam_i, &ctx.diam_j);
  if (ctx.diam <= 0.0)
    throw ValidationError("heat_forward: zero shape diameter");

  ctx.scaled.faces = mesh.faces;
  ctx.scaled.vertices.resize(n);
  const double inv_diam = 1.0 / ctx.diam;
  for (int i = 0; i < n; ++i) ctx.scaled.vertices[i] = inv_diam * mesh.vertices[i];

  ctx.ops = assemble_operators(ctx.scaled);
  ctx.adjacency = build_adjacency(n, ctx.faces);
  ctx.hbar = mean_edge_length(ctx.scaled);
  ctx.t_abs = cfg.t * ctx.hbar * ctx.hbar;
  ctx.trace_l = ctx.ops.L.trace();
  ctx.eps_reg = cfg.poisson_regularization * ctx.trace_l / n;

  // A1 = M + t_abs L and A2 = L + eps I on L's sparsity pattern.
  ctx.a1 = ctx.ops.L;
  for (double& v : ctx.a1.vals) v *= ctx.t_abs;
  for (int i = 0; i < n; ++i) ctx.a1.vals[ctx.ops.diag_index[i]] += ctx.ops.mass[i];
  ctx.a2 = ctx.ops.L;
  for (int i = 0; i < n; ++i) ctx.a2.vals[ctx.ops.diag_index[i]] += ctx.eps_reg;
  ctx.f1 = std::make_shared<SpdFactorization>(ctx.a1, cfg.backend);
  ctx.f2 = std::make_shared<SpdFactorization>(ctx.a2, cfg.backend);

  if (landmarks.empty()) {
    ctx.full = true;
    ctx.sources.resize(n);
    for (int i = 0; i < n; ++i) ctx.sources[i] = i;
  } else {
    ctx.full = false;
    ctx.sources = landmarks;
    for (int s : ctx.sources)
      require(s >= 0 && s < n, "heat_forward: landmark index out of range");
  }
  const int ns = static_cast<int>(ctx.sources.size());
  ctx.has_state = keep_state;
  ctx.state.resize(keep_state ? ns : 0);
  ctx.rows.resize(ns);

  par::for_chunks(ns, [&](int, int b, int e) {
    HeatSourceState scratch;
    for (int si = b; si < e; ++si) {
      HeatSourceState& st = keep_state ? ctx.state[si] : scratch;
      ctx.rows[si] = SourceWork::run(ctx, ctx.sources[si], st, keep_state);
    }
  });

  // Symmetrized output in original units.
  ctx.output = DistanceMatrix(ns, MatrixKind::geodesic);
  for (int a = 0; a < ns; ++a)
    for (int b = 0; b < ns; ++b)
      ctx.output.at(a, b) = 0.5 * ctx.diam *
                            (ctx.rows[a][ctx.sources[b]] + ctx.rows[b][ctx.sources[a]]);
  return ctx;
}

std::vector<double> heat_distance_single(const TriMesh& mesh, int source,
                                         const GeodesicConfig& cfg) {
  require(source >= 0 && source < mesh.n(),
          "heat_distance_single: source out of range");
  HeatContext ctx = heat_forward(mesh, cfg, {source}, false);
  std::vector<double> d = ctx.rows[0];
  for (double& x : d) x *= ctx.diam;
  return d;
}

DistanceMatrix heat_distance_all(const TriMesh& mesh, const GeodesicConfig& cfg) {
  return heat_forward(mesh, cfg, {}, false).output;
}

namespace {

// Cross-source accumulators for the operator-level adjoints.
struct OpAdjoints {
  std::vector<double> abar1, abar2;            // aligned with L's pattern
  std::vector<std::array<Vec3, 3>> gvec_bar;   // per face, per corner
  std::vector<double> area_bar;                // per face
  std::vector<Vec3> pos_bar;                   // scaled-coordinate adjoints

  OpAdjoints(int nnz, int m, int n)
      : abar1(nnz, 0.0),
        abar2(nnz, 0.0),
        gvec_bar(m, {Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}}),
        area_bar(m, 0.0),
        pos_bar(n, Vec3{0, 0, 0}) {}

  void add(const OpAdjoints& o) {
    for (size_t i = 0; i < abar1.size(); ++i) abar1[i] += o.abar1[i];
    for (size_t i = 0; i < abar2.size(); ++i) abar2[i] += o.abar2[i];
    for (size_t f = 0; f < gvec_bar.size(); ++f)
      for (int c = 0; c < 3; ++c) gvec_bar[f][c] += o.gvec_bar[f][c];
    for (size_t f = 0; f < area_bar.size(); ++f) area_bar[f] += o.area_bar[f];
    for (size_t i = 0; i < pos_bar.size(); ++i) pos_bar[i] += o.pos_bar[i];
  }
};

// Adjoint chain for one source, accumulating into `acc`. dbar is the adjoint
// of the shifted distance vector of this source (scaled units).
void source_vjp(const HeatContext& ctx, const HeatSourceState& st,
                std::vector<double> dbar, OpAdjoints& acc) {
  const int n = ctx.scaled.n(), m = ctx.scaled.m();
  const int src = st.source;
  const int k = static_cast<int>(st.pinned.size());

  // Step 4 adjoint: d = d_raw - d_raw[src] * ones.
  double total = 0.0;
  for (double x : dbar) total += x;
  std::vector<double> draw_bar = std::move(dbar);
  draw_bar[src] -= total;

  std::vector<double> vbar;  // adjoint of the chord pin values
  if (st.all_pinned) {
    vbar.assign(k, 0.0);
    for (int q = 0; q < k; ++q) vbar[q] = draw_bar[st.pinned[q]];
  } else {
    std::vector<double> y0bar;
    if (k == 0) {
      y0bar = draw_bar;
    } else {
      // d = y0 - Y lambda, lambda = S^{-1} (E^T y0 - v), S = E^T Y.
      std::vector<double> lambda_bar(k, 0.0);
      for (int q = 0; q < k; ++q) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += st.ycols.at(i, q) * draw_bar[i];
        lambda_bar[q] = -s;
      }
      const std::vector<double> rbar = st.schur.solve(lambda_bar);
      y0bar = draw_bar;
      for (int q = 0; q < k; ++q) y0bar[st.pinned[q]] += rbar[q];
      vbar.assign(k, 0.0);
      for (int q = 0; q < k; ++q) vbar[q] = -rbar[q];

      // Ybar = -draw_bar lambda^T + E Sbar with Sbar = -rbar lambda^T;
      // each column chains through Y = A2^{-1} E.
      std::vector<double> ybar_col(n), z(n);
      for (int q = 0; q < k; ++q) {
        const double lam_q = st.lambda[q];
        for (int i = 0; i < n; ++i) ybar_col[i] = -draw_bar[i] * lam_q;
        for (int p = 0; p < k; ++p) ybar_col[st.pinned[p]] += -rbar[p] * lam_q;
        z = ctx.f2->solve(ybar_col);
        std::vector<double> ycol(n);
        for (int i = 0; i < n; ++i) ycol[i] = st.ycols.at(i, q);
        accumulate_neg_outer(ctx.ops.L, z, ycol, acc.abar2);
      }
    }

    // y0 = A2^{-1} b2.
    const std::vector<double> bbar = ctx.f2->solve(y0bar);
    accumulate_neg_outer(ctx.ops.L, bbar, st.y0, acc.abar2);

    // b2 assembly adjoint: b2[v_c] += A_f (gvec_c . U_f).
    std::vector<Vec3> Ubar(m, Vec3{0, 0, 0});
    for (int f = 0; f < m; ++f) {
      const auto& F = ctx.ops.faces[f];
      const double a = ctx.ops.area[f];
      for (int c = 0; c < 3; ++c) {
        const double bb = bbar[F[c]];
        if (bb == 0.0) continue;
        acc.area_bar[f] += bb * dot(ctx.ops.gvec[f][c], st.U[f]);
        acc.gvec_bar[f][c] += (a * bb) * st.U[f];
        Ubar[f] += (a * bb) * ctx.ops.gvec[f][c];
      }
    }

    // Normalization adjoint: U = -g / max(|g|, floor).
    std::vector<Vec3> gbar(m);
    for (int f = 0; f < m; ++f) {
      const double r = st.rnorm[f];
      if (norm(st.g[f]) > ctx.cfg.grad_norm_floor) {
        const double uu = dot(st.U[f], Ubar[f]);
        gbar[f] = (1.0 / r) * ((uu * st.U[f]) - Ubar[f]);
      } else {
        gbar[f] = (-1.0 / r) * Ubar[f];
      }
    }

    // g = G u adjoint.
    std::vector<double> ubar(n, 0.0);
    for (int f = 0; f < m; ++f) {
      const auto& F = ctx.ops.faces[f];
      for (int c = 0; c < 3; ++c) {
        ubar[F[c]] += dot(ctx.ops.gvec[f][c], gbar[f]);
        acc.gvec_bar[f][c] += st.u[F[c]] * gbar[f];
      }
    }

    // u = A1^{-1} delta.
    const std::vector<double> b1bar = ctx.f1->solve(ubar);
    accumulate_neg_outer(ctx.ops.L, b1bar, st.u, acc.abar1);
  }

  // Chord pin values: v_q = |y_p - y_src| (the source's v is the constant 0).
  for (int q = 1; q < k; ++q) {
    const double vb = vbar.empty() ? 0.0 : vbar[q];
    if (vb == 0.0) continue;
    const int p = st.pinned[q];
    const Vec3 e = ctx.scaled.vertices[p] - ctx.scaled.vertices[src];
    const Vec3 dir = (vb / st.pin_vals[q]) * e;
    acc.pos_bar[p] += dir;
    acc.pos_bar[src] -= dir;
  }
}

}  // namespace

DenseMatrix heat_distance_vjp(const HeatContext& ctx, const DenseMatrix& cotangent) {
  require(ctx.has_state,
          "heat_distance_vjp: context was built without forward state");
  const int ns = static_cast<int>(ctx.sources.size());
  if (cotangent.rows != ns || cotangent.cols != ns)
    throw ValidationError("heat_distance_vjp: cotangent " +
                          std::to_string(cotangent.rows) + "x" +
                          std::to_string(cotangent.cols) +
                          " mismatches forward state " + std::to_string(ns) + "x" +
                          std::to_string(ns));
  const int n = ctx.scaled.n(), m = ctx.scaled.m();
  const int nnz = ctx.ops.L.nnz();

  // Per-source adjoint chains, combined in fixed chunk order.
  const int chunks = par::num_chunks(ns);
  std::vector<OpAdjoints> partial(chunks, OpAdjoints(nnz, m, n));
  par::for_chunks(ns, [&](int c, int b, int e) {
    for (int si = b; si < e; ++si) {
      // Seed: output = diam * (rows + rows^T)/2 over the source set; the diam
      // factor is handled in the outer scale chain, so the inner cotangent is
      // the raw one.
      std::vector<double> dbar(n, 0.0);
      for (int sj = 0; sj < ns; ++sj)
        dbar[ctx.sources[sj]] +=
            0.5 * (cotangent.at(si, sj) + cotangent.at(sj, si));
      source_vjp(ctx, ctx.state[si], std::move(dbar), partial[c]);
    }
  });
  OpAdjoints acc = std::move(partial[0]);
  for (int c = 1; c < chunks; ++c) acc.add(partial[c]);

  // A2 = L + eps I: eps adjoint and pass-through to L.
  double eps_bar = 0.0;
  for (int i = 0; i < n; ++i) eps_bar += acc.abar2[ctx.ops.diag_index[i]];
  std::vector<double> lbar = acc.abar2;

  // A1 = M + t_abs L.
  std::vector<double> mbar(n, 0.0);
  double t_bar = 0.0;
  for (int i = 0; i < n; ++i) mbar[i] = acc.abar1[ctx.ops.diag_index[i]];
  for (int z = 0; z < nnz; ++z) {
    t_bar += acc.abar1[z] * ctx.ops.L.vals[z];
    lbar[z] += ctx.t_abs * acc.abar1[z];
  }

  // eps = p_reg * trace(L) / n feeds back into L's diagonal.
  const double trace_bar = eps_bar * ctx.cfg.poisson_regularization / n;
  for (int i = 0; i < n; ++i) lbar[ctx.ops.diag_index[i]] += trace_bar;

  // t_abs = t * hbar^2.
  double hbar_bar = t_bar * 2.0 * ctx.cfg.t * ctx.hbar;

  // L and M assembly adjoints -> per-face gvec/area adjoints.
  for (int f = 0; f < m; ++f) {
    const auto& F = ctx.ops.faces[f];
    const double a = ctx.ops.area[f];
    for (int c = 0; c < 3; ++c) {
      acc.area_bar[f] += mbar[F[c]] / 3.0;
      for (int c2 = 0; c2 < 3; ++c2) {
        const int idx = ctx.ops.L.find(F[c], F[c2]);
        const double lb = lbar[idx];
        if (lb == 0.0) continue;
        acc.area_bar[f] += lb * dot(ctx.ops.gvec[f][c], ctx.ops.gvec[f][c2]);
        acc.gvec_bar[f][c] += (lb * a) * ctx.ops.gvec[f][c2];
        acc.gvec_bar[f][c2] += (lb * a) * ctx.ops.gvec[f][c];
      }
    }
  }

  // Per-face geometry chain: area and hat gradients to positions.
  for (int f = 0; f < m; ++f) {
    const auto& F = ctx.ops.faces[f];
    const Vec3& p0 = ctx.scaled.vertices[F[0]];
    const Vec3& p1 = ctx.scaled.vertices[F[1]];
    const Vec3& p2 = ctx.scaled.vertices[F[2]];
    const Vec3 uvec = p1 - p0, wvec = p2 - p0;
    const Vec3 nvec = cross(uvec, wvec);
    const double r2 = dot(nvec, nvec);
    const double nn = std::sqrt(r2);
    const Vec3 e[3] = {p2 - p1, p0 - p2, p1 - p0};

    Vec3 nbar = (acc.area_bar[f] / (2.0 * nn)) * nvec;
    Vec3 ebar[3] = {Vec3{0, 0, 0}, Vec3{0, 0, 0}, Vec3{0, 0, 0}};
    for (int c = 0; c < 3; ++c) {
      const Vec3& gb = acc.gvec_bar[f][c];
      if (gb[0] == 0.0 && gb[1] == 0.0 && gb[2] == 0.0) continue;
      nbar += (1.0 / r2) * cross(e[c], gb);
      ebar[c] += (1.0 / r2) * cross(gb, nvec);
      nbar -= (2.0 * dot(gb, ctx.ops.gvec[f][c]) / r2) * nvec;
    }
    const Vec3 ubar_v = cross(wvec, nbar);
    const Vec3 wbar_v = cross(nbar, uvec);
    acc.pos_bar[F[1]] += ubar_v;
    acc.pos_bar[F[0]] -= ubar_v;
    acc.pos_bar[F[2]] += wbar_v;
    acc.pos_bar[F[0]] -= wbar_v;
    acc.pos_bar[F[2]] += ebar[0];
    acc.pos_bar[F[1]] -= ebar[0];
    acc.pos_bar[F[0]] += ebar[1];
    acc.pos_bar[F[2]] -= ebar[1];
    acc.pos_bar[F[1]] += ebar[2];
    acc.pos_bar[F[0]] -= ebar[2];
  }

  // Mean edge length over unique edges.
  if (hbar_bar != 0.0) {
    std::set<std::pair<int, int>> edges;
    for (const auto& f : ctx.faces)
      for (int c = 0; c < 3; ++c) {
        int a = f[c], b = f[(c + 1) % 3];
        edges.insert({std::min(a, b), std::max(a, b)});
      }
    const double w = hbar_bar / static_cast<double>(edges.size());
    for (const auto& [a, b] : edges) {
      const Vec3 e = ctx.scaled.vertices[a] - ctx.scaled.vertices[b];
      const Vec3 dir = (w / norm(e)) * e;
      acc.pos_bar[a] += dir;
      acc.pos_bar[b] -= dir;
    }
  }

  // Outer scale chain: X = diam * Y with diam = |x_a - x_b|.
  // Xbar = pos_bar (the inner VJP was seeded with the raw cotangent), plus
  // c * d(diam)/dX with c = <cot, D>/diam - <pos_bar, X>/diam.
  DenseMatrix xbar(n, 3);
  double cot_dot_d = 0.0;
  for (int a = 0; a < ns; ++a)
    for (int b = 0; b < ns; ++b) cot_dot_d += cotangent.at(a, b) * ctx.output.at(a, b);
  double posbar_dot_x = 0.0;
  for (int i = 0; i < n; ++i)
    posbar_dot_x += dot(acc.pos_bar[i], ctx.orig_vertices[i]);
  const double c_scale = cot_dot_d / ctx.diam - posbar_dot_x / ctx.diam;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < 3; ++a) xbar.at(i, a) = acc.pos_bar[i][a];
  const Vec3 ehat = (1.0 / ctx.diam) *
                    (ctx.orig_vertices[ctx.diam_i] - ctx.orig_vertices[ctx.diam_j]);
  for (int a = 0; a < 3; ++a) {
    xbar.at(ctx.diam_i, a) += c_scale * ehat[a];
    xbar.at(ctx.diam_j, a) -= c_scale * ehat[a];
  }
  return xbar;
}

DenseMatrix heat_distance_vjp(const TriMesh& mesh, const GeodesicConfig& cfg,
                              const DenseMatrix& cotangent) {
  const HeatContext ctx = heat_forward(mesh, cfg, {}, true);
  return heat_distance_vjp(ctx, cotangent);
}

MetricDistortionReport bounded_distortion(const DistanceMatrix& dx,
                                          const DistanceMatrix& dy) {
  if (dx.n != dy.n)
    throw ValidationError("bounded_distortion: dimension mismatch (" +
                          std::to_string(dx.n) + " vs " + std::to_string(dy.n) + ")");
  MetricDistortionReport rep;
  rep.per_point.assign(dx.n, 0.0);
  double total = 0.0;
  for (int i = 0; i < dx.n; ++i) {
    double row = 0.0;
    for (int j = 0; j < dx.n; ++j) {
      const double a = std::abs(dx.at(i, j) - dy.at(i, j));
      rep.K = std::max(rep.K, a);
      row += a;
    }
    rep.per_point[i] = row / dx.n;
    total += row;
  }
  rep.mean_distortion = total / (static_cast<double>(dx.n) * dx.n);
  return rep;
}

DistanceMatrix interp_metric(const DistanceMatrix& dx, const DistanceMatrix& dy,
                             double alpha) {
  if (dx.n != dy.n || dx.kind != dy.kind)
    throw ValidationError("interp_metric: operands differ in size or kind");
  require(alpha >= 0.0 && alpha <= 1.0, "interp_metric: alpha out of [0,1]");
  DistanceMatrix out(dx.n, dx.kind);
  for (size_t i = 0; i < out.d.size(); ++i)
    out.d[i] = (1.0 - alpha) * dx.d[i] + alpha * dy.d[i];
  return out;
}

}  // namespace limp
