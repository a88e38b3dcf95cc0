#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "limp/trainer.hpp"

using namespace limp;

namespace {

std::string temp_dir(const std::string& name) {
  const std::string path =
      (std::filesystem::temp_directory_path() / ("limp_trainer_" + name)).string();
  std::filesystem::remove_all(path);
  return path;
}

std::vector<char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<char>(std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>());
}

TrainConfig smoke_config() {
  TrainConfig cfg;
  cfg.model.enc_conv = {8, 8, 16};
  cfg.model.enc_mlp = {16, 8};
  cfg.model.dec_hidden = {8, 16};
  cfg.model.latent_dim = 8;
  cfg.landmarks = 12;
  cfg.checkpoint_interval = 250;
  return cfg;
}

std::vector<ShapeRecord> two_pose_dataset(uint64_t seed) {
  FamilyConfig fam;
  fam.n_subjects = 1;
  fam.n_poses = 2;
  fam.resolution = 48;
  fam.seed = seed;
  return gen_synthetic_family(fam);
}

}  // namespace

TEST_CASE("adam: zero gradients leave parameters bit-identical") {
  std::vector<double> x = {0.3, -1.7, 2.4};
  const std::vector<double> before = x;
  AdamSlot slot;
  for (long t = 1; t <= 5; ++t) adam_update(x, {0.0, 0.0, 0.0}, slot, t, 1e-2);
  for (size_t k = 0; k < x.size(); ++k) CHECK(x[k] == before[k]);
}

TEST_CASE("adam: bias-corrected first step has magnitude ~ lr") {
  std::vector<double> x = {0.0, 0.0};
  AdamSlot slot;
  adam_update(x, {3.0, -0.25}, slot, 1, 1e-3);
  // First step: m_hat = g, v_hat = g^2, update = lr * g / (|g| + eps).
  CHECK(x[0] == doctest::Approx(-1e-3).epsilon(1e-6));
  CHECK(x[1] == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("adam: quadratic bowl converges below 1e-3 in 2000 steps") {
  std::vector<double> x = {1.0, -2.0, 3.0, -0.5};
  AdamSlot slot;
  for (long t = 1; t <= 2000; ++t) {
    std::vector<double> g(x.size());
    for (size_t k = 0; k < x.size(); ++k) g[k] = 2.0 * x[k];
    adam_update(x, g, slot, t, 1e-2);
  }
  double norm2 = 0.0;
  for (const double v : x) norm2 += v * v;
  CHECK(std::sqrt(norm2) < 1e-3);
}

TEST_CASE("adam_step updates every tensor through the wrapper") {
  ModelConfig config;
  config.enc_conv = {4};
  config.enc_mlp = {4};
  config.dec_hidden = {4};
  config.latent_dim = 4;
  config.n_points = 6;
  ModelParams params = init_params(config, 1);
  const ModelParams before = params;
  std::vector<std::vector<double>> grads;
  for (const Tensor& t : params.tensors) grads.push_back(std::vector<double>(t.v.size(), 1.0));
  AdamState state;
  adam_step(params, grads, state, 1e-3);
  CHECK(state.t == 1);
  for (size_t i = 0; i < params.tensors.size(); ++i)
    for (size_t k = 0; k < params.tensors[i].v.size(); ++k)
      CHECK(params.tensors[i].v[k] ==
            doctest::Approx(before.tensors[i].v[k] - 1e-3).epsilon(1e-6));
}

TEST_CASE("train config validation rejects degenerate settings") {
  TrainConfig cfg = smoke_config();
  cfg.warmup_iters = 10;
  cfg.total_iters = 10;
  CHECK_THROWS_AS(validate_train_config(cfg), ValidationError);
  cfg = smoke_config();
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(validate_train_config(cfg), ValidationError);
  cfg = smoke_config();
  cfg.batch_any = 0;
  CHECK_THROWS_AS(validate_train_config(cfg), ValidationError);
  cfg = smoke_config();
  cfg.checkpoint_interval = 0;
  CHECK_THROWS_AS(validate_train_config(cfg), ValidationError);
}

TEST_CASE("500+500 smoke run: reconstruction drops >= 90% and stages gate") {
  const std::vector<ShapeRecord> data = two_pose_dataset(21);
  TrainConfig cfg = smoke_config();
  cfg.learning_rate = 1e-3;
  cfg.warmup_iters = 500;
  cfg.total_iters = 1000;
  cfg.seed = 5;
  const std::string dir = temp_dir("smoke");
  const TrainResult result = train(data, cfg, dir);

  REQUIRE(static_cast<int>(result.trace.size()) == cfg.total_iters);
  // Warmup rows report zero metric terms; the boundary row warmup+1 is the
  // first with a nonzero interpolation component.
  for (int i = 0; i < cfg.warmup_iters; ++i) {
    CHECK(result.trace[i].interp_geo == 0.0);
    CHECK(result.trace[i].interp_local == 0.0);
    CHECK(result.trace[i].disent_int == 0.0);
    CHECK(result.trace[i].disent_ext == 0.0);
  }
  CHECK(result.trace[cfg.warmup_iters].interp_geo > 0.0);
  // Single-subject data: iso pairs exist, non-iso never sampled.
  CHECK(result.trace[cfg.warmup_iters].disent_int > 0.0);
  CHECK(result.trace[cfg.warmup_iters].disent_ext == 0.0);

  const double first = result.trace.front().recon;
  const double last = result.trace.back().recon;
  INFO("recon first ", first, " last ", last);
  CHECK(last <= 0.1 * first);
  for (const LossBreakdown& row : result.trace) CHECK(std::isfinite(row.total));

  // Artifacts: loadable checkpoint matching the returned params, trace CSV
  // with header + one row per iteration.
  const ModelParams loaded = load_checkpoint(result.checkpoint_path);
  REQUIRE(loaded.tensors.size() == result.params.tensors.size());
  for (size_t i = 0; i < loaded.tensors.size(); ++i)
    CHECK(loaded.tensors[i].v == result.params.tensors[i].v);
  std::ifstream trace(result.trace_path);
  REQUIRE(trace.good());
  std::string line;
  std::getline(trace, line);
  CHECK(line == "iteration,recon,interp_geo,interp_local,disent_int,disent_ext,kl,total");
  int rows = 0;
  while (std::getline(trace, line))
    if (!line.empty()) ++rows;
  CHECK(rows == cfg.total_iters);
}

TEST_CASE("same seed twice: identical checkpoint bytes and traces") {
  const std::vector<ShapeRecord> data = two_pose_dataset(31);
  TrainConfig cfg = smoke_config();
  cfg.warmup_iters = 20;
  cfg.total_iters = 40;
  cfg.checkpoint_interval = 40;
  cfg.seed = 9;
  const std::string dir_a = temp_dir("det_a");
  const std::string dir_b = temp_dir("det_b");
  const TrainResult a = train(data, cfg, dir_a);
  const TrainResult b = train(data, cfg, dir_b);
  CHECK(read_bytes(a.checkpoint_path) == read_bytes(b.checkpoint_path));
  CHECK(read_bytes(a.trace_path) == read_bytes(b.trace_path));
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].total == b.trace[i].total);

  // A different seed diverges.
  TrainConfig other = cfg;
  other.seed = 10;
  const TrainResult c = train(data, other, temp_dir("det_c"));
  CHECK(c.trace.back().total != a.trace.back().total);
}

TEST_CASE("non-finite loss aborts and retains the last good checkpoint") {
  const std::vector<ShapeRecord> data = two_pose_dataset(41);
  TrainConfig cfg = smoke_config();
  cfg.learning_rate = 1e8;  // guaranteed blow-up within a few steps
  cfg.warmup_iters = 1;
  cfg.total_iters = 50;
  cfg.checkpoint_interval = 1;
  cfg.seed = 3;
  const std::string dir = temp_dir("abort");
  CHECK_THROWS_AS(train(data, cfg, dir), NumericalError);
  // The per-iteration checkpoint from the last completed step must load.
  const ModelParams retained = load_checkpoint(dir + "/checkpoint.bin");
  for (const Tensor& t : retained.tensors)
    for (const double v : t.v) CHECK(std::isfinite(v));
}

TEST_CASE("train validates dataset and model coherence") {
  TrainConfig cfg = smoke_config();
  CHECK_THROWS_AS(train({}, cfg, temp_dir("bad")), ValidationError);
  const std::vector<ShapeRecord> data = two_pose_dataset(51);
  TrainConfig wrong = smoke_config();
  wrong.model.n_points = 17;
  CHECK_THROWS_AS(train(data, wrong, temp_dir("bad2")), ValidationError);
}
