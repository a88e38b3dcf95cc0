#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "limp/model.hpp"
#include "test_helpers.hpp"

using namespace limp;

namespace {

ModelConfig small_config(int n_points = 12, int latent = 8) {
  ModelConfig config;
  config.enc_conv = {8, 8, 16};
  config.enc_mlp = {16, 8};
  config.dec_hidden = {8, 16};
  config.latent_dim = latent;
  config.n_points = n_points;
  return config;
}

DenseMatrix random_points(int n, Rng& rng, double scale = 1.0) {
  DenseMatrix x(n, 3);
  for (double& v : x.v) v = rng.uniform(-scale, scale);
  return x;
}

}  // namespace

TEST_CASE("init_params is deterministic and fan-in bounded with zero biases") {
  const ModelConfig config = small_config();
  const ModelParams a = init_params(config, 42);
  const ModelParams b = init_params(config, 42);
  REQUIRE(a.tensors.size() == b.tensors.size());
  for (size_t i = 0; i < a.tensors.size(); ++i) {
    CHECK(a.tensors[i].name == b.tensors[i].name);
    REQUIRE(a.tensors[i].v.size() == b.tensors[i].v.size());
    for (size_t k = 0; k < a.tensors[i].v.size(); ++k)
      CHECK(a.tensors[i].v[k] == b.tensors[i].v[k]);
  }
  const ModelParams c = init_params(config, 43);
  CHECK(c.tensors[0].v[0] != a.tensors[0].v[0]);
  for (const Tensor& t : a.tensors) {
    if (t.name.size() >= 2 && t.name.substr(t.name.size() - 2) == ".b") {
      for (double v : t.v) CHECK(v == 0.0);
    } else {
      const double bound = 1.0 / std::sqrt(static_cast<double>(t.dims[0]));
      for (double v : t.v) CHECK(std::fabs(v) <= bound);
    }
  }
}

TEST_CASE("latent split sizes match the 25% extrinsic reservation") {
  ModelConfig c32 = small_config(12, 32);
  CHECK(c32.int_dim() == 24);
  CHECK(c32.ext_dim() == 8);
  ModelConfig c128 = small_config(12, 128);
  CHECK(c128.int_dim() == 96);
  CHECK(c128.ext_dim() == 32);
}

TEST_CASE("encoder is invariant to point permutation") {
  const ModelConfig config = small_config(10);
  const ModelParams params = init_params(config, 7);
  Rng rng(1);
  const DenseMatrix x = random_points(10, rng);
  DenseMatrix perm(10, 3);
  const int order[10] = {9, 3, 0, 7, 5, 1, 8, 2, 6, 4};
  for (int i = 0; i < 10; ++i)
    for (int c = 0; c < 3; ++c) perm.at(i, c) = x.at(order[i], c);
  const auto [mu1, lv1] = encode(params, x);
  const auto [mu2, lv2] = encode(params, perm);
  for (size_t k = 0; k < mu1.size(); ++k) {
    CHECK(std::fabs(mu1[k] - mu2[k]) <= 1e-12);
    CHECK(std::fabs(lv1[k] - lv2[k]) <= 1e-12);
  }
}

TEST_CASE("encoder stays finite on the zero matrix and on |X| <= 10") {
  const ModelConfig config = small_config(15);
  const ModelParams params = init_params(config, 9);
  const auto [mu0, lv0] = encode(params, DenseMatrix(15, 3));
  CHECK(all_finite(mu0));
  CHECK(all_finite(lv0));
  Rng rng(2);
  const DenseMatrix big = random_points(15, rng, 10.0);
  const auto [mu, lv] = encode(params, big);
  CHECK(all_finite(mu));
  CHECK(all_finite(lv));
  const LatentCode z = reparameterize(config, mu, lv, rng);
  CHECK(all_finite(decode(params, z.z).v));
}

TEST_CASE("encode rejects non-finite and mis-shaped input") {
  const ModelParams params = init_params(small_config(4), 3);
  Tape tape;
  const TapedModel model = register_params(tape, params, false);
  DenseMatrix bad(4, 3);
  bad.at(2, 1) = std::numeric_limits<double>::infinity();
  Var leaf = tape.leaf(DenseMatrix(4, 3), false);
  (void)leaf;
  CHECK_THROWS_AS(encode(params, bad), ValidationError);
  Var wrong = tape.leaf(DenseMatrix(3, 4), false);
  CHECK_THROWS_AS(encode_node(tape, model, wrong), ValidationError);
}

TEST_CASE("reparameterize collapses to mu at logvar -60 and is seed-reproducible") {
  const ModelConfig config = small_config();
  std::vector<double> mu(config.latent_dim), lv(config.latent_dim, -60.0);
  for (int i = 0; i < config.latent_dim; ++i) mu[i] = 0.3 * i - 1.0;
  Rng rng(5);
  const LatentCode z = reparameterize(config, mu, lv, rng);
  for (int i = 0; i < config.latent_dim; ++i) CHECK(std::fabs(z.z[i] - mu[i]) <= 1e-12);

  Rng r1(99), r2(99);
  const LatentCode a = reparameterize(config, mu, std::vector<double>(mu.size(), 0.5), r1);
  const LatentCode b = reparameterize(config, mu, std::vector<double>(mu.size(), 0.5), r2);
  for (size_t k = 0; k < a.z.size(); ++k) CHECK(a.z[k] == b.z[k]);
}

TEST_CASE("reparameterize sample mean approaches mu (law of large numbers)") {
  const ModelConfig config = small_config();
  std::vector<double> mu(config.latent_dim), lv(config.latent_dim);
  for (int i = 0; i < config.latent_dim; ++i) {
    mu[i] = std::sin(1.7 * i);
    lv[i] = -1.0 + 0.2 * i / config.latent_dim;
  }
  Rng rng(123);
  std::vector<double> acc(config.latent_dim, 0.0);
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    const LatentCode z = reparameterize(config, mu, lv, rng);
    for (int i = 0; i < config.latent_dim; ++i) acc[i] += z.z[i];
  }
  for (int i = 0; i < config.latent_dim; ++i) {
    const double sigma = std::exp(0.5 * lv[i]);
    CHECK(std::fabs(acc[i] / draws - mu[i]) <= 3.0 * sigma / 100.0);
  }
}

TEST_CASE("decode is deterministic and its latent gradient matches finite differences") {
  const ModelConfig config = small_config(8);
  const ModelParams params = init_params(config, 21);
  Rng rng(4);
  std::vector<double> z(config.latent_dim);
  for (double& v : z) v = rng.uniform(-1.0, 1.0);
  const DenseMatrix x1 = decode(params, z);
  const DenseMatrix x2 = decode(params, z);
  for (size_t k = 0; k < x1.v.size(); ++k) CHECK(x1.v[k] == x2.v[k]);
  CHECK(x1.rows == 8);
  CHECK(x1.cols == 3);

  const auto f = [&params](Tape& tape, const std::vector<Var>& leaves) {
    const TapedModel model = register_params(tape, params, false);
    return sum(square(decode_node(tape, model, leaves[0])));
  };
  const DenseMatrix z_mat(1, config.latent_dim, z);
  const GradCheckReport rep = grad_check(f, {z_mat}, 1e-6, 1e-6);
  CHECK(rep.pass);
}

TEST_CASE("encoder parameter gradients match finite differences end to end") {
  // Differentiates a scalar of encode+decode w.r.t. two representative
  // parameter tensors (first conv weight, decoder output bias).
  ModelConfig config = small_config(6, 4);
  config.enc_conv = {4, 6};
  config.enc_mlp = {6};
  config.dec_hidden = {5};
  ModelParams params = init_params(config, 31);
  Rng rng(6);
  const DenseMatrix x = random_points(6, rng);
  const auto f = [&params, &config, &x](Tape& tape, const std::vector<Var>& leaves) {
    ModelParams local = params;
    local.find("enc_conv.0.w").v = tape.value(leaves[0]).v;
    local.find("dec_out.b").v = tape.value(leaves[1]).v;
    TapedModel model = register_params(tape, local, false);
    // Rebind the two probed tensors to the gradient-carrying leaves.
    for (size_t i = 0; i < local.tensors.size(); ++i) {
      if (local.tensors[i].name == "enc_conv.0.w") model.vars[i] = leaves[0];
      if (local.tensors[i].name == "dec_out.b") model.vars[i] = leaves[1];
    }
    const EncodedVar enc = encode_node(tape, model, tape.leaf(x, false));
    const Var out = decode_node(tape, model, enc.mu);
    return add(sum(square(out)), sum(square(enc.logvar)));
  };
  const Tensor& w = params.find("enc_conv.0.w");
  const Tensor& b = params.find("dec_out.b");
  const GradCheckReport rep = grad_check(
      f,
      {DenseMatrix(w.dims[0], w.dims[1], w.v),
       DenseMatrix(1, static_cast<int>(b.v.size()), b.v)},
      1e-6, 1e-6);
  CHECK(rep.pass);
}

TEST_CASE("split and merge round-trip, and cross-merge keeps parts") {
  const ModelConfig config = small_config(12, 32);
  Rng rng(8);
  std::vector<double> raw(32);
  for (double& v : raw) v = rng.uniform(-2.0, 2.0);
  const LatentCode z = make_latent(config, raw);
  CHECK(static_cast<int>(z.z_int().size()) == 24);
  CHECK(static_cast<int>(z.z_ext().size()) == 8);
  const LatentCode back = merge_latent(z.z_int(), z.z_ext());
  REQUIRE(back.dim() == z.dim());
  for (int i = 0; i < z.dim(); ++i) CHECK(back.z[i] == z.z[i]);

  std::vector<double> other(8, 9.5);
  const LatentCode swapped = merge_latent(z.z_int(), other);
  for (int i = 0; i < 24; ++i) CHECK(swapped.z[i] == z.z[i]);
  for (int i = 24; i < 32; ++i) CHECK(swapped.z[i] == 9.5);
  CHECK_THROWS_AS(make_latent(config, std::vector<double>(31, 0.0)), ValidationError);
}

TEST_CASE("checkpoint round-trip is bit-identical and bad magic is rejected") {
  const ModelConfig config = small_config(9, 8);
  const ModelParams params = init_params(config, 55);
  const std::string path = "/tmp/limp_test_ckpt.bin";
  save_checkpoint(params, path);
  const ModelParams loaded = load_checkpoint(path);
  CHECK(loaded.config.latent_dim == config.latent_dim);
  CHECK(loaded.config.n_points == config.n_points);
  CHECK(loaded.config.enc_conv == config.enc_conv);
  CHECK(loaded.config.enc_mlp == config.enc_mlp);
  CHECK(loaded.config.dec_hidden == config.dec_hidden);
  REQUIRE(loaded.tensors.size() == params.tensors.size());
  for (size_t i = 0; i < params.tensors.size(); ++i) {
    CHECK(loaded.tensors[i].name == params.tensors[i].name);
    REQUIRE(loaded.tensors[i].v.size() == params.tensors[i].v.size());
    for (size_t k = 0; k < params.tensors[i].v.size(); ++k)
      CHECK(loaded.tensors[i].v[k] == params.tensors[i].v[k]);
  }

  const std::string bad = limp::test::write_temp("limp_bad_ckpt.bin", "NOTLIMPCK0000");
  CHECK_THROWS_AS(load_checkpoint(bad), ValidationError);
  CHECK_THROWS_AS(load_checkpoint("/tmp/limp_no_such_ckpt.bin"), ValidationError);
  std::remove(path.c_str());
  std::remove(bad.c_str());
}
