#include "limp/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace limp {

namespace {

std::string shape_str(const DenseMatrix& m) {
  return "(" + std::to_string(m.rows) + "," + std::to_string(m.cols) + ")";
}

const DenseMatrix& val(Tape& t, int id) { return t.value(Var{id, &t}); }

void check_same_tape(const char* op, Var a, Var b) {
  require(a.tape != nullptr && a.tape == b.tape,
          std::string(op) + ": operands on different tapes");
}

void check_same_shape(const char* op, const DenseMatrix& x, const DenseMatrix& y) {
  if (x.rows != y.rows || x.cols != y.cols)
    throw ValidationError(std::string(op) + ": shape mismatch " + shape_str(x) +
                          " vs " + shape_str(y));
}

}  // namespace

Var Tape::check(Var v) const {
  require(v.tape == this, "Tape: Var belongs to a different tape");
  require(v.id >= 0 && v.id < static_cast<int>(nodes_.size()),
          "Tape: Var id out of range");
  return v;
}

Var Tape::leaf(DenseMatrix value, bool requires_grad) {
  require(all_finite(value.v), "Tape::leaf: non-finite value");
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1, this};
}

Var Tape::make_node(DenseMatrix value, const std::vector<int>& parents,
                    std::function<void(Tape&, int)> vjp) {
  Node node;
  node.value = std::move(value);
  node.parents = parents;
  for (int p : parents) {
    require(p >= 0 && p < static_cast<int>(nodes_.size()),
            "Tape::make_node: parent id out of range");
    if (nodes_[p].requires_grad) node.requires_grad = true;
  }
  if (node.requires_grad) node.vjp = std::move(vjp);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1, this};
}

const DenseMatrix& Tape::value(Var v) const { return nodes_[check(v).id].value; }

bool Tape::requires_grad(Var v) const { return nodes_[check(v).id].requires_grad; }

DenseMatrix Tape::grad(Var v) const {
  const Node& node = nodes_[check(v).id];
  if (node.grad.v.empty())
    return DenseMatrix(node.value.rows, node.value.cols);  // zeros
  return node.grad;
}

void Tape::add_grad(int id, const DenseMatrix& g) {
  Node& node = nodes_[id];
  if (!node.requires_grad) return;
  check_same_shape("Tape::add_grad", node.value, g);
  if (node.grad.v.empty()) node.grad = DenseMatrix(node.value.rows, node.value.cols);
  for (size_t k = 0; k < g.v.size(); ++k) node.grad.v[k] += g.v[k];
}

void Tape::backward(Var loss) {
  check(loss);
  const DenseMatrix& lv = nodes_[loss.id].value;
  if (lv.rows != 1 || lv.cols != 1)
    throw ValidationError("Tape::backward: loss must be scalar, got " + shape_str(lv));
  for (Node& node : nodes_) node.grad = DenseMatrix{};
  DenseMatrix seed(1, 1);
  seed.at(0, 0) = 1.0;
  add_grad(loss.id, seed);
  for (int i = loss.id; i >= 0; --i) {
    Node& node = nodes_[i];
    if (!node.requires_grad || !node.vjp || node.grad.v.empty()) continue;
    node.vjp(*this, i);
  }
}

// ---- Elementwise binaries -------------------------------------------------

Var add(Var a, Var b) {
  check_same_tape("add", a, b);
  Tape& t = *a.tape;
  const DenseMatrix &av = t.value(a), &bv = t.value(b);
  check_same_shape("add", av, bv);
  DenseMatrix out = av;
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] += bv.v[k];
  const int pa = a.id, pb = b.id;
  return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    tp.add_grad(pa, g);
    tp.add_grad(pb, g);
  });
}

Var sub(Var a, Var b) {
  check_same_tape("sub", a, b);
  Tape& t = *a.tape;
  const DenseMatrix &av = t.value(a), &bv = t.value(b);
  check_same_shape("sub", av, bv);
  DenseMatrix out = av;
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] -= bv.v[k];
  const int pa = a.id, pb = b.id;
  return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    tp.add_grad(pa, g);
    DenseMatrix ng = g;
    for (double& x : ng.v) x = -x;
    tp.add_grad(pb, ng);
  });
}

Var mul(Var a, Var b) {
  check_same_tape("mul", a, b);
  Tape& t = *a.tape;
  const DenseMatrix &av = t.value(a), &bv = t.value(b);
  check_same_shape("mul", av, bv);
  DenseMatrix out = av;
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] *= bv.v[k];
  const int pa = a.id, pb = b.id;
  return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix &x = val(tp, pa), &y = val(tp, pb);
    DenseMatrix ga = g, gb = g;
    for (size_t k = 0; k < g.v.size(); ++k) {
      ga.v[k] *= y.v[k];
      gb.v[k] *= x.v[k];
    }
    tp.add_grad(pa, ga);
    tp.add_grad(pb, gb);
  });
}

Var div(Var a, Var b) {
  check_same_tape("div", a, b);
  Tape& t = *a.tape;
  const DenseMatrix &av = t.value(a), &bv = t.value(b);
  check_same_shape("div", av, bv);
  DenseMatrix out = av;
  for (size_t k = 0; k < out.v.size(); ++k) out.v[k] /= bv.v[k];
  const int pa = a.id, pb = b.id;
  return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix &x = val(tp, pa), &y = val(tp, pb);
    DenseMatrix ga = g, gb = g;
    for (size_t k = 0; k < g.v.size(); ++k) {
      ga.v[k] /= y.v[k];
      gb.v[k] *= -x.v[k] / (y.v[k] * y.v[k]);
    }
    tp.add_grad(pa, ga);
    tp.add_grad(pb, gb);
  });
}

// ---- Linear algebra -------------------------------------------------------

Var matmul(Var a, Var b) {
  check_same_tape("matmul", a, b);
  Tape& t = *a.tape;
  const DenseMatrix &av = t.value(a), &bv = t.value(b);
  if (av.cols != bv.rows)
    throw ValidationError("matmul: shape mismatch " + shape_str(av) + " vs " +
                          shape_str(bv));
  const int pa = a.id, pb = b.id;
  return t.make_node(matmul(av, bv), {pa, pb}, [pa, pb](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    tp.add_grad(pa, matmul(g, transpose(val(tp, pb))));
    tp.add_grad(pb, matmul(transpose(val(tp, pa)), g));
  });
}

Var transpose(Var a) {
  Tape& t = *a.tape;
  const int pa = a.id;
  return t.make_node(transpose(t.value(a)), {pa}, [pa](Tape& tp, int self) {
    tp.add_grad(pa, transpose(tp.raw_grad(self)));
  });
}

Var concat(Var a, Var b, int dim) {
  check_same_tape("concat", a, b);
  require(dim == 0 || dim == 1, "concat: dim must be 0 or 1");
  Tape& t = *a.tape;
  const DenseMatrix &av = t.value(a), &bv = t.value(b);
  if (dim == 0 ? av.cols != bv.cols : av.rows != bv.rows)
    throw ValidationError("concat: shape mismatch " + shape_str(av) + " vs " +
                          shape_str(bv));
  DenseMatrix out(dim == 0 ? av.rows + bv.rows : av.rows,
                  dim == 1 ? av.cols + bv.cols : av.cols);
  for (int i = 0; i < av.rows; ++i)
    for (int j = 0; j < av.cols; ++j) out.at(i, j) = av.at(i, j);
  for (int i = 0; i < bv.rows; ++i)
    for (int j = 0; j < bv.cols; ++j)
      out.at(dim == 0 ? av.rows + i : i, dim == 1 ? av.cols + j : j) = bv.at(i, j);
  const int pa = a.id, pb = b.id, r0 = av.rows, c0 = av.cols;
  return t.make_node(std::move(out), {pa, pb}, [pa, pb, dim, r0, c0](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix &av2 = val(tp, pa), &bv2 = val(tp, pb);
    DenseMatrix ga(av2.rows, av2.cols), gb(bv2.rows, bv2.cols);
    for (int i = 0; i < ga.rows; ++i)
      for (int j = 0; j < ga.cols; ++j) ga.at(i, j) = g.at(i, j);
    for (int i = 0; i < gb.rows; ++i)
      for (int j = 0; j < gb.cols; ++j)
        gb.at(i, j) = g.at(dim == 0 ? r0 + i : i, dim == 1 ? c0 + j : j);
    tp.add_grad(pa, ga);
    tp.add_grad(pb, gb);
  });
}

std::pair<Var, Var> split(Var a, int dim, int k) {
  require(dim == 0 || dim == 1, "split: dim must be 0 or 1");
  Tape& t = *a.tape;
  const DenseMatrix& av = t.value(a);
  const int extent = dim == 0 ? av.rows : av.cols;
  require(k > 0 && k < extent, "split: k=" + std::to_string(k) +
                                   " out of range for extent " + std::to_string(extent));
  DenseMatrix first(dim == 0 ? k : av.rows, dim == 1 ? k : av.cols);
  DenseMatrix second(dim == 0 ? av.rows - k : av.rows,
                     dim == 1 ? av.cols - k : av.cols);
  for (int i = 0; i < first.rows; ++i)
    for (int j = 0; j < first.cols; ++j) first.at(i, j) = av.at(i, j);
  for (int i = 0; i < second.rows; ++i)
    for (int j = 0; j < second.cols; ++j)
      second.at(i, j) = av.at(dim == 0 ? k + i : i, dim == 1 ? k + j : j);
  const int pa = a.id;
  Var f = t.make_node(std::move(first), {pa}, [pa](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix& av2 = val(tp, pa);
    DenseMatrix ga(av2.rows, av2.cols);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) ga.at(i, j) = g.at(i, j);
    tp.add_grad(pa, ga);
  });
  Var s = t.make_node(std::move(second), {pa}, [pa, dim, k](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix& av2 = val(tp, pa);
    DenseMatrix ga(av2.rows, av2.cols);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j)
        ga.at(dim == 0 ? k + i : i, dim == 1 ? k + j : j) = g.at(i, j);
    tp.add_grad(pa, ga);
  });
  return {f, s};
}

// ---- Reductions and nonlinearities ----------------------------------------

Var rowwise_max(Var a) {
  Tape& t = *a.tape;
  const DenseMatrix& av = t.value(a);
  require(av.cols >= 1, "rowwise_max: empty rows");
  DenseMatrix out(av.rows, 1);
  std::vector<int> arg(av.rows, 0);
  for (int i = 0; i < av.rows; ++i) {
    double best = av.at(i, 0);
    for (int j = 1; j < av.cols; ++j)
      if (av.at(i, j) > best) {
        best = av.at(i, j);
        arg[i] = j;
      }
    out.at(i, 0) = best;
  }
  const int pa = a.id;
  return t.make_node(std::move(out), {pa}, [pa, arg](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix& av2 = val(tp, pa);
    DenseMatrix ga(av2.rows, av2.cols);
    for (int i = 0; i < av2.rows; ++i) ga.at(i, arg[i]) = g.at(i, 0);
    tp.add_grad(pa, ga);
  });
}

namespace {

// Shared scaffolding for unary elementwise ops whose derivative is a function
// of the input x and output y.
Var unary_op(Var a, const std::function<double(double)>& fwd,
             const std::function<double(double, double)>& dydx) {
  Tape& t = *a.tape;
  const DenseMatrix& av = t.value(a);
  DenseMatrix out = av;
  for (double& x : out.v) x = fwd(x);
  const int pa = a.id;
  return t.make_node(std::move(out), {pa}, [pa, dydx](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix& x = val(tp, pa);
    const DenseMatrix& y = val(tp, self);
    DenseMatrix ga = g;
    for (size_t k = 0; k < g.v.size(); ++k) ga.v[k] *= dydx(x.v[k], y.v[k]);
    tp.add_grad(pa, ga);
  });
}

}  // namespace

Var elu(Var a, double alpha) {
  return unary_op(
      a, [alpha](double x) { return x > 0 ? x : alpha * (std::exp(x) - 1.0); },
      [alpha](double x, double y) { return x > 0 ? 1.0 : y + alpha; });
}

Var tanh(Var a) {
  return unary_op(a, [](double x) { return std::tanh(x); },
                  [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var a) {
  return unary_op(a, [](double x) { return std::exp(x); },
                  [](double, double y) { return y; });
}

Var square(Var a) {
  return unary_op(a, [](double x) { return x * x; },
                  [](double x, double) { return 2.0 * x; });
}

Var sqrt(Var a) {
  return unary_op(a, [](double x) { return std::sqrt(x); },
                  [](double, double y) { return 0.5 / y; });
}

Var scale(Var a, double c) {
  return unary_op(a, [c](double x) { return c * x; },
                  [c](double, double) { return c; });
}

Var add_scalar(Var a, double c) {
  return unary_op(a, [c](double x) { return x + c; },
                  [](double, double) { return 1.0; });
}

Var sum(Var a) {
  Tape& t = *a.tape;
  const DenseMatrix& av = t.value(a);
  DenseMatrix out(1, 1);
  for (double x : av.v) out.at(0, 0) += x;
  const int pa = a.id;
  return t.make_node(std::move(out), {pa}, [pa](Tape& tp, int self) {
    const double g = tp.raw_grad(self).at(0, 0);
    const DenseMatrix& av2 = val(tp, pa);
    DenseMatrix ga(av2.rows, av2.cols);
    for (double& x : ga.v) x = g;
    tp.add_grad(pa, ga);
  });
}

Var mean(Var a) {
  const double inv = 1.0 / static_cast<double>(a.tape->value(a).size());
  return scale(sum(a), inv);
}

Var add_rowvec(Var a, Var b) {
  check_same_tape("add_rowvec", a, b);
  Tape& t = *a.tape;
  const DenseMatrix &av = t.value(a), &bv = t.value(b);
  if (bv.rows != 1 || bv.cols != av.cols)
    throw ValidationError("add_rowvec: shape mismatch " + shape_str(av) + " vs " +
                          shape_str(bv));
  DenseMatrix out = av;
  for (int i = 0; i < av.rows; ++i)
    for (int j = 0; j < av.cols; ++j) out.at(i, j) += bv.at(0, j);
  const int pa = a.id, pb = b.id;
  return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    tp.add_grad(pa, g);
    DenseMatrix gb(1, g.cols);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) gb.at(0, j) += g.at(i, j);
    tp.add_grad(pb, gb);
  });
}

Var reshape(Var a, int rows, int cols) {
  Tape& t = *a.tape;
  const DenseMatrix& av = t.value(a);
  if (static_cast<size_t>(rows) * cols != av.size())
    throw ValidationError("reshape: cannot reshape " + shape_str(av) + " to (" +
                          std::to_string(rows) + "," + std::to_string(cols) + ")");
  DenseMatrix out(rows, cols, av.v);
  const int pa = a.id;
  return t.make_node(std::move(out), {pa}, [pa](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix& av2 = val(tp, pa);
    tp.add_grad(pa, DenseMatrix(av2.rows, av2.cols, g.v));
  });
}

Var masked_select(Var a, const DenseMatrix& mask) {
  Tape& t = *a.tape;
  const DenseMatrix& av = t.value(a);
  check_same_shape("masked_select", av, mask);
  std::vector<int> idx;
  for (size_t k = 0; k < mask.v.size(); ++k)
    if (mask.v[k] != 0.0) idx.push_back(static_cast<int>(k));
  DenseMatrix out(static_cast<int>(idx.size()), 1);
  for (size_t s = 0; s < idx.size(); ++s) out.v[s] = av.v[idx[s]];
  const int pa = a.id;
  return t.make_node(std::move(out), {pa}, [pa, idx](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix& av2 = val(tp, pa);
    DenseMatrix ga(av2.rows, av2.cols);
    for (size_t s = 0; s < idx.size(); ++s) ga.v[idx[s]] += g.v[s];
    tp.add_grad(pa, ga);
  });
}

// ---- Distance nodes -------------------------------------------------------

namespace {
constexpr double kDistFloor = 1e-12;
}

Var pairwise_row_distance(Var x) {
  Tape& t = *x.tape;
  const DenseMatrix& xv = t.value(x);
  const int n = xv.rows, d = xv.cols;
  DenseMatrix out(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double s = 0;
      for (int c = 0; c < d; ++c) {
        const double diff = xv.at(i, c) - xv.at(j, c);
        s += diff * diff;
      }
      out.at(i, j) = out.at(j, i) = std::sqrt(s);
    }
  const int px = x.id;
  return t.make_node(std::move(out), {px}, [px](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix& xv2 = val(tp, px);
    const DenseMatrix& dv = val(tp, self);
    const int n2 = xv2.rows, d2 = xv2.cols;
    DenseMatrix gx(n2, d2);
    for (int i = 0; i < n2; ++i)
      for (int j = 0; j < n2; ++j) {
        if (i == j || dv.at(i, j) <= kDistFloor) continue;
        const double w = g.at(i, j) / dv.at(i, j);
        for (int c = 0; c < d2; ++c) {
          const double diff = xv2.at(i, c) - xv2.at(j, c);
          gx.at(i, c) += w * diff;
          gx.at(j, c) -= w * diff;
        }
      }
    tp.add_grad(px, gx);
  });
}

Var cross_row_distance(Var a, Var b) {
  check_same_tape("cross_row_distance", a, b);
  Tape& t = *a.tape;
  const DenseMatrix &av = t.value(a), &bv = t.value(b);
  if (av.cols != bv.cols)
    throw ValidationError("cross_row_distance: shape mismatch " + shape_str(av) +
                          " vs " + shape_str(bv));
  const int n = av.rows, m = bv.rows, d = av.cols;
  DenseMatrix out(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      double s = 0;
      for (int c = 0; c < d; ++c) {
        const double diff = av.at(i, c) - bv.at(j, c);
        s += diff * diff;
      }
      out.at(i, j) = std::sqrt(s);
    }
  const int pa = a.id, pb = b.id;
  return t.make_node(std::move(out), {pa, pb}, [pa, pb](Tape& tp, int self) {
    const DenseMatrix& g = tp.raw_grad(self);
    const DenseMatrix& av2 = val(tp, pa);
    const DenseMatrix& bv2 = val(tp, pb);
    const DenseMatrix& dv = val(tp, self);
    DenseMatrix ga(av2.rows, av2.cols), gb(bv2.rows, bv2.cols);
    for (int i = 0; i < av2.rows; ++i)
      for (int j = 0; j < bv2.rows; ++j) {
        if (dv.at(i, j) <= kDistFloor) continue;
        const double w = g.at(i, j) / dv.at(i, j);
        for (int c = 0; c < av2.cols; ++c) {
          const double diff = av2.at(i, c) - bv2.at(j, c);
          ga.at(i, c) += w * diff;
          gb.at(j, c) -= w * diff;
        }
      }
    tp.add_grad(pa, ga);
    tp.add_grad(pb, gb);
  });
}

// ---- Linear solve ---------------------------------------------------------

namespace {

DenseMatrix lu_solve_columns(const DenseLU& f, const DenseMatrix& b, bool transposed) {
  DenseMatrix x(b.rows, b.cols);
  std::vector<double> col(b.rows);
  for (int j = 0; j < b.cols; ++j) {
    for (int i = 0; i < b.rows; ++i) col[i] = b.at(i, j);
    const std::vector<double> sol = transposed ? f.solve_transposed(col) : f.solve(col);
    for (int i = 0; i < b.rows; ++i) x.at(i, j) = sol[i];
  }
  return x;
}

}  // namespace

Var solve_node(Var a, Var b) {
  check_same_tape("solve_node", a, b);
  Tape& t = *a.tape;
  const DenseMatrix &av = t.value(a), &bv = t.value(b);
  if (av.rows != av.cols)
    throw ValidationError("solve_node: A must be square, got " + shape_str(av));
  if (bv.rows != av.rows)
    throw ValidationError("solve_node: shape mismatch " + shape_str(av) + " vs " +
                          shape_str(bv));
  DenseLU f = DenseLU::compute(av);  // throws NumericalError when singular
  DenseMatrix x = lu_solve_columns(f, bv, false);
  const int pa = a.id, pb = b.id;
  return t.make_node(std::move(x), {pa, pb},
                     [pa, pb, f = std::move(f)](Tape& tp, int self) {
                       const DenseMatrix& g = tp.raw_grad(self);
                       const DenseMatrix bbar = lu_solve_columns(f, g, true);
                       tp.add_grad(pb, bbar);
                       DenseMatrix abar = matmul(bbar, transpose(val(tp, self)));
                       for (double& v : abar.v) v = -v;
                       tp.add_grad(pa, abar);
                     });
}

// ---- Gradient checking ----------------------------------------------------

GradCheckReport grad_check(const ScalarFn& f, const std::vector<DenseMatrix>& leaves,
                           double step, double tolerance) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(leaves.size());
  for (const DenseMatrix& m : leaves) vars.push_back(tape.leaf(m, true));
  const Var loss = f(tape, vars);
  tape.backward(loss);
  std::vector<DenseMatrix> analytic;
  analytic.reserve(vars.size());
  for (Var v : vars) analytic.push_back(tape.grad(v));

  auto eval = [&f](const std::vector<DenseMatrix>& ls) {
    Tape t2;
    std::vector<Var> vs;
    vs.reserve(ls.size());
    for (const DenseMatrix& m : ls) vs.push_back(t2.leaf(m, true));
    return t2.value(f(t2, vs)).at(0, 0);
  };

  GradCheckReport rep;
  rep.tolerance = tolerance;
  std::vector<DenseMatrix> work = leaves;
  for (size_t li = 0; li < work.size(); ++li) {
    double worst = 0.0;
    for (size_t e = 0; e < work[li].v.size(); ++e) {
      const double orig = work[li].v[e];
      work[li].v[e] = orig + step;
      const double fp = eval(work);
      work[li].v[e] = orig - step;
      const double fm = eval(work);
      work[li].v[e] = orig;
      const double fd = (fp - fm) / (2.0 * step);
      const double an = analytic[li].v[e];
      const double dev =
          std::fabs(an - fd) / std::max({1.0, std::fabs(an), std::fabs(fd)});
      worst = std::max(worst, dev);
    }
    rep.per_leaf.push_back(worst);
    rep.max_deviation = std::max(rep.max_deviation, worst);
  }
  rep.pass = rep.max_deviation <= tolerance;
  return rep;
}

}  // namespace limp
