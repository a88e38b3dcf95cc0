#include "limp/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace limp {

void validate_train_config(const TrainConfig& cfg) {
  require(cfg.learning_rate > 0.0, "train config: learning_rate must be > 0");
  require(cfg.total_iters > 0, "train config: total_iters must be > 0");
  require(cfg.warmup_iters >= 0 && cfg.warmup_iters < cfg.total_iters,
          "train config: warmup_iters must lie in [0, total_iters)");
  require(cfg.batch_any >= 1, "train config: batch_any must be >= 1");
  require(cfg.batch_iso >= 0 && cfg.batch_non_iso >= 0,
          "train config: batch sizes must be >= 0");
  require(cfg.landmarks >= 0, "train config: landmarks must be >= 0");
  require(cfg.checkpoint_interval >= 1,
          "train config: checkpoint_interval must be >= 1");
}

void adam_update(std::vector<double>& x, const std::vector<double>& g, AdamSlot& slot,
                 long t, double lr) {
  require(x.size() == g.size(), "adam_update: gradient size mismatch");
  if (slot.m.empty()) {
    slot.m.assign(x.size(), 0.0);
    slot.v.assign(x.size(), 0.0);
  }
  require(slot.m.size() == x.size(), "adam_update: state size mismatch");
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (size_t k = 0; k < x.size(); ++k) {
    slot.m[k] = b1 * slot.m[k] + (1.0 - b1) * g[k];
    slot.v[k] = b2 * slot.v[k] + (1.0 - b2) * g[k] * g[k];
    const double mhat = slot.m[k] / c1;
    const double vhat = slot.v[k] / c2;
    x[k] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void adam_step(ModelParams& params, const std::vector<std::vector<double>>& grads,
               AdamState& state, double lr) {
  require(grads.size() == params.tensors.size(), "adam_step: gradient count mismatch");
  if (state.slots.empty()) state.slots.resize(params.tensors.size());
  require(state.slots.size() == params.tensors.size(), "adam_step: state count mismatch");
  ++state.t;
  for (size_t i = 0; i < params.tensors.size(); ++i)
    adam_update(params.tensors[i].v, grads[i], state.slots[i], state.t, lr);
}

namespace {

bool params_finite(const ModelParams& params) {
  for (const Tensor& t : params.tensors)
    for (const double v : t.v)
      if (!std::isfinite(v)) return false;
  return true;
}

void write_trace_row(std::ofstream& out, int iteration, const LossBreakdown& b) {
  out << iteration << ',' << b.recon << ',' << b.interp_geo << ',' << b.interp_local
      << ',' << b.disent_int << ',' << b.disent_ext << ',' << b.kl << ',' << b.total
      << '\n';
}

}  // namespace

TrainResult train(const std::vector<ShapeRecord>& dataset, const TrainConfig& cfg,
                  const std::string& out_dir) {
  validate_train_config(cfg);
  require(!dataset.empty(), "train: dataset is empty");
  require(!out_dir.empty(), "train: out_dir is empty");
  const int n = dataset[0].mesh.n();

  ModelConfig model_cfg = cfg.model;
  if (model_cfg.n_points == 0) model_cfg.n_points = n;
  require(model_cfg.n_points == n, "train: model n_points " +
                                       std::to_string(model_cfg.n_points) +
                                       " does not match dataset vertex count " +
                                       std::to_string(n));
  validate_model_config(model_cfg);

  // Pair-kind availability decides once whether iso/non-iso slots are filled.
  std::set<int> subjects;
  bool has_iso = false;
  for (const ShapeRecord& rec : dataset) {
    if (subjects.count(rec.subject_id)) has_iso = true;
    subjects.insert(rec.subject_id);
  }
  const bool has_non_iso = subjects.size() >= 2;

  std::filesystem::create_directories(out_dir);
  TrainResult result;
  result.checkpoint_path = out_dir + "/checkpoint.bin";
  result.trace_path = out_dir + "/trace.csv";

  ModelParams params = init_params(model_cfg, cfg.seed);
  AdamState adam;
  Rng rng(cfg.seed + 1);  // pair sampling + reparameterization stream
  const std::vector<int> landmarks = strided_landmarks(n, cfg.landmarks);

  std::ofstream trace(result.trace_path);
  require(trace.good(), "train: cannot write " + result.trace_path);
  trace.precision(17);
  trace << "iteration,recon,interp_geo,interp_local,disent_int,disent_ext,kl,total\n";

  bool have_checkpoint = false;
  for (int iter = 1; iter <= cfg.total_iters; ++iter) {
    const TrainStage stage =
        iter <= cfg.warmup_iters ? TrainStage::warmup : TrainStage::full;

    PairBatch batch;
    for (int k = 0; k < cfg.batch_any; ++k)
      batch.interp.push_back(sample_pair(dataset, rng, PairKind::any));
    if (has_iso)
      for (int k = 0; k < cfg.batch_iso; ++k)
        batch.iso.push_back(sample_pair(dataset, rng, PairKind::isometric));
    if (has_non_iso)
      for (int k = 0; k < cfg.batch_non_iso; ++k)
        batch.non_iso.push_back(sample_pair(dataset, rng, PairKind::non_isometric));

    Tape tape;
    TapedModel model = register_params(tape, params, true);
    LossEvalContext ctx;
    ctx.tape = &tape;
    ctx.model = &model;
    ctx.data = &dataset;
    ctx.config.weights = cfg.weights;
    ctx.config.geodesic = cfg.geodesic;
    ctx.config.landmarks = landmarks;
    ctx.rng = &rng;
    ctx.stochastic = true;

    // Inputs were validated up front, so any throw inside the step indicates
    // numerical collapse (degenerate decoded geometry, singular solves, ...).
    Var total{};
    LossBreakdown breakdown;
    try {
      breakdown = loss_total(ctx, batch, stage, &total);
    } catch (const LimpError& e) {
      throw NumericalError("train: numerical failure at iteration " +
                           std::to_string(iter) + " (" + e.what() +
                           "); last checkpoint retained");
    }
    if (!std::isfinite(breakdown.total))
      throw NumericalError("train: non-finite loss at iteration " +
                           std::to_string(iter) + " (last checkpoint retained)");

    tape.backward(total);
    std::vector<std::vector<double>> grads(params.tensors.size());
    for (size_t i = 0; i < params.tensors.size(); ++i)
      grads[i] = tape.grad(model.vars[i]).v;
    adam_step(params, grads, adam, cfg.learning_rate);
    if (!params_finite(params))
      throw NumericalError("train: non-finite parameters at iteration " +
                           std::to_string(iter) + " (last checkpoint retained)");

    result.trace.push_back(breakdown);
    write_trace_row(trace, iter, breakdown);
    if (cfg.on_iteration) cfg.on_iteration(iter, breakdown);

    if (iter % cfg.checkpoint_interval == 0) {
      save_checkpoint(params, result.checkpoint_path);
      have_checkpoint = true;
    }
  }

  if (!have_checkpoint || cfg.total_iters % cfg.checkpoint_interval != 0)
    save_checkpoint(params, result.checkpoint_path);
  trace.flush();
  result.params = std::move(params);
  return result;
}

}  // namespace limp
