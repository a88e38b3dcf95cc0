#pragma once
// Staged Adam training: a reconstruction-only warmup, then the full
// metric-preservation loss. One optimizer step consumes one sampled batch of
// pairs; every step rebuilds the tape from the current parameters, so training
// is a pure function of (dataset, config) and is reproducible bit-exactly.

#include <functional>
#include <string>
#include <vector>

#include "limp/losses.hpp"

namespace limp {

struct TrainConfig {
  double learning_rate = 1e-4;
  int warmup_iters = 1000;  // reconstruction-only stage
  int total_iters = 6000;
  // Pairs sampled per step: `any` feeds the interpolation term, `iso` /
  // `non_iso` the two disentanglement terms. A kind with no eligible pair in
  // the dataset is skipped silently.
  int batch_any = 4;
  int batch_iso = 2;
  int batch_non_iso = 2;
  ModelConfig model;   // n_points may be 0: filled from the dataset
  LossWeights weights;
  GeodesicConfig geodesic;
  int landmarks = 16;  // geodesic landmark count (0 = full matrices)
  uint64_t seed = 0;
  int checkpoint_interval = 1000;  // steps between checkpoint saves
  // Optional observer called after every completed step with the 1-based
  // iteration and its loss row. Purely informational; never affects the run.
  std::function<void(int, const LossBreakdown&)> on_iteration;
};

void validate_train_config(const TrainConfig& cfg);

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8, bias-corrected): the
// vector core plus the whole-model wrapper.
struct AdamSlot {
  std::vector<double> m, v;
};
struct AdamState {
  long t = 0;                   // completed steps
  std::vector<AdamSlot> slots;  // one per parameter tensor
};

// One update of x in place; slot must match x in size (zero-initialized on
// first use). t is the 1-based step count.
void adam_update(std::vector<double>& x, const std::vector<double>& g, AdamSlot& slot,
                 long t, double lr);

// grads aligned with params.tensors; advances state.t by one.
void adam_step(ModelParams& params, const std::vector<std::vector<double>>& grads,
               AdamState& state, double lr);

struct TrainResult {
  ModelParams params;
  std::vector<LossBreakdown> trace;  // one row per iteration, 1-based
  std::string checkpoint_path;       // out_dir/checkpoint.bin
  std::string trace_path;            // out_dir/trace.csv
};

// Runs the staged schedule and writes checkpoint + trace under out_dir
// (created if missing). A non-finite loss or parameter aborts with
// NumericalError; the checkpoint file then still holds the last save.
TrainResult train(const std::vector<ShapeRecord>& dataset, const TrainConfig& cfg,
                  const std::string& out_dir);

}  // namespace limp
