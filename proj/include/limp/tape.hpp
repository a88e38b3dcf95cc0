#pragma once
// Reverse-mode automatic differentiation over dense matrices.
//
// Define-by-run: every primitive records one node on a Tape holding the
// forward value and a closure that scatters the node's cotangent to its
// parents. backward() walks nodes in reverse creation order (which is a
// reverse topological order by construction) and accumulates gradients
// additively across fan-out. A tape is confined to one logical thread;
// independent tapes share no mutable state.
//
// The primitive set is the closure needed for a PointNet-style encoder, an
// MLP decoder, the metric losses, and the differentiable linear solves: no
// fusion, no higher-order derivatives.

#include <functional>
#include <utility>
#include <vector>

#include "limp/linalg.hpp"

namespace limp {

class Tape;

// Lightweight handle to a node on a tape.
struct Var {
  int id = -1;
  Tape* tape = nullptr;
};

class Tape {
 public:
  // Registers an input node. Leaf values must be finite.
  Var leaf(DenseMatrix value, bool requires_grad = true);

  // Registers an interior node. The vjp receives this tape and the node's own
  // id; it reads grad(self), writes parents via add_grad. requires_grad is
  // inherited from the parents.
  Var make_node(DenseMatrix value, const std::vector<int>& parents,
                std::function<void(Tape&, int)> vjp);

  const DenseMatrix& value(Var v) const;
  // Gradient of the last backward() target w.r.t. node v; zeros when no path
  // reached it.
  DenseMatrix grad(Var v) const;
  bool requires_grad(Var v) const;
  int size() const { return static_cast<int>(nodes_.size()); }

  // Seeds d(loss)/d(loss) = 1 and runs all VJPs in reverse order. The loss
  // must be a 1x1 node on this tape; previous gradients are cleared first, so
  // repeated calls are idempotent and bit-identical.
  void backward(Var loss);

  // Accumulates g into the stored gradient of node id (used by VJPs).
  void add_grad(int id, const DenseMatrix& g);
  // Internal gradient storage (empty until touched by add_grad).
  const DenseMatrix& raw_grad(int id) const { return nodes_[id].grad; }

 private:
  struct Node {
    DenseMatrix value;
    DenseMatrix grad;  // empty until accumulated into
    bool requires_grad = false;
    std::vector<int> parents;
    std::function<void(Tape&, int)> vjp;  // empty for leaves / detached nodes
  };
  std::vector<Node> nodes_;
  Var check(Var v) const;
};

// ---- Primitives -----------------------------------------------------------
// All binary ops require both operands on the same tape and matching shapes
// (errors name both shapes). Each returns a new node with its VJP attached.

Var add(Var a, Var b);       // elementwise a + b
Var sub(Var a, Var b);       // elementwise a - b
Var mul(Var a, Var b);       // elementwise a * b
Var div(Var a, Var b);       // elementwise a / b
Var matmul(Var a, Var b);    // (n,k)·(k,m)
Var transpose(Var a);
Var concat(Var a, Var b, int dim);            // dim 0: stack rows, 1: columns
std::pair<Var, Var> split(Var a, int dim, int k);  // first part has size k
Var rowwise_max(Var a);      // (n,m) -> (n,1); ties to the lowest column
Var elu(Var a, double alpha = 1.0);
Var tanh(Var a);
Var exp(Var a);
Var square(Var a);
Var sqrt(Var a);
Var sum(Var a);              // -> (1,1)
Var mean(Var a);             // -> (1,1)
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var add_rowvec(Var a, Var b);  // (n,m) + broadcast (1,m)
Var reshape(Var a, int rows, int cols);

// Entries of a where mask != 0, row-major, as a (k,1) column. The mask is a
// constant, not a Var.
Var masked_select(Var a, const DenseMatrix& mask);

// Self pairwise distances: (n,d) -> (n,n) with D[i][j] = |row_i - row_j|.
// The diagonal is exactly zero and receives no gradient; off-diagonal pairs
// closer than 1e-12 are treated as coincident (zero subgradient).
Var pairwise_row_distance(Var x);
// Cross pairwise distances: (n,d),(m,d) -> (n,m).
Var cross_row_distance(Var a, Var b);

// x = A^-1 b for dense square A via LU. Backward: b_bar = A^-T x_bar,
// A_bar = -b_bar x^T. Throws NumericalError when A is singular.
Var solve_node(Var a, Var b);

// ---- Gradient checking ----------------------------------------------------

struct GradCheckReport {
  std::vector<double> per_leaf;  // max deviation per leaf
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// f builds a scalar Var from fresh leaves on the given tape; it is re-run on
// fresh tapes for every central-difference probe. Deviation per entry is
// |analytic - fd| / max(1, |analytic|, |fd|).
using ScalarFn = std::function<Var(Tape&, const std::vector<Var>&)>;
GradCheckReport grad_check(const ScalarFn& f, const std::vector<DenseMatrix>& leaves,
                           double step, double tolerance);

}  // namespace limp
