#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "limp/config.hpp"

using limp::load_run_config;
using limp::parse_config_pairs;
using limp::parse_run_config;
using limp::RunConfig;
using limp::ValidationError;

TEST_CASE("pair parser handles comments, whitespace, and blank lines") {
  const std::string text =
      "# full-line comment\n"
      "\n"
      "  learning_rate =  2e-3   # trailing comment\n"
      "enc_conv = 8, 8, 16\n"
      "\t\n"
      "seed=9\n";
  const auto pairs = parse_config_pairs(text);
  CHECK(pairs.size() == 3);
  CHECK(pairs.at("learning_rate") == "2e-3");
  CHECK(pairs.at("enc_conv") == "8, 8, 16");
  CHECK(pairs.at("seed") == "9");
}

TEST_CASE("pair parser rejects malformed lines and duplicates") {
  CHECK_THROWS_WITH_AS(parse_config_pairs("just words\n"),
                       "config: line 1 is not 'key = value': 'just words'",
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_config_pairs("= 3\n"), "config: line 1 has an empty key",
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_config_pairs("seed = 1\nseed = 2\n"),
                       "config: duplicate key 'seed' at line 2", ValidationError);
}

TEST_CASE("empty text yields defaults") {
  const RunConfig cfg = parse_run_config("");
  CHECK(cfg.train.learning_rate == 1e-4);
  CHECK(cfg.train.total_iters == 6000);
  CHECK(cfg.train.warmup_iters == 1000);
  CHECK(cfg.train.model.latent_dim == 32);
  CHECK(cfg.family.n_subjects == 2);
  CHECK(cfg.family.n_poses == 5);
  CHECK(cfg.eval.landmarks == 16);
  CHECK(cfg.eval.alphas.size() == 9);
}

TEST_CASE("every key lands in the right field") {
  const std::string text =
      "learning_rate = 5e-4\n"
      "warmup_iters = 10\n"
      "total_iters = 50\n"
      "batch_any = 3\n"
      "batch_iso = 1\n"
      "batch_non_iso = 0\n"
      "seed = 77\n"
      "checkpoint_interval = 25\n"
      "landmarks = 9\n"
      "latent_dim = 12\n"
      "enc_conv = 8,16\n"
      "enc_mlp = 16,8\n"
      "dec_hidden = 8,8\n"
      "w_recon = 2.0\n"
      "w_interp = 0.5\n"
      "w_disent_int = 0.25\n"
      "w_disent_ext = 0.75\n"
      "beta = 1e-2\n"
      "geodesic_t = 0.7\n"
      "geodesic_pin_rings = 0\n"
      "n_subjects = 3\n"
      "n_poses = 4\n"
      "resolution = 60\n"
      "data_seed = 123\n"
      "bend_max = 0.2\n"
      "radii = 0.1, 0.15, 0.2\n"
      "mask_radius_factor = 0.3\n"
      "eval_landmarks = 10\n"
      "eval_max_pairs = 6\n"
      "eval_alphas = 0.25, 0.5, 0.75\n";
  const RunConfig cfg = parse_run_config(text);
  CHECK(cfg.train.learning_rate == 5e-4);
  CHECK(cfg.train.warmup_iters == 10);
  CHECK(cfg.train.total_iters == 50);
  CHECK(cfg.train.batch_any == 3);
  CHECK(cfg.train.batch_iso == 1);
  CHECK(cfg.train.batch_non_iso == 0);
  CHECK(cfg.train.seed == 77);
  CHECK(cfg.train.checkpoint_interval == 25);
  CHECK(cfg.train.landmarks == 9);
  CHECK(cfg.train.model.latent_dim == 12);
  CHECK(cfg.train.model.enc_conv == std::vector<int>{8, 16});
  CHECK(cfg.train.model.enc_mlp == std::vector<int>{16, 8});
  CHECK(cfg.train.model.dec_hidden == std::vector<int>{8, 8});
  CHECK(cfg.train.weights.recon == 2.0);
  CHECK(cfg.train.weights.interp == 0.5);
  CHECK(cfg.train.weights.disent_int == 0.25);
  CHECK(cfg.train.weights.disent_ext == 0.75);
  CHECK(cfg.train.weights.beta == 1e-2);
  CHECK(cfg.train.geodesic.t == 0.7);
  CHECK(cfg.eval.geodesic.t == 0.7);
  CHECK(cfg.family.geodesic.t == 0.7);
  CHECK(cfg.train.geodesic.pin_rings == 0);
  CHECK(cfg.eval.geodesic.pin_rings == 0);
  CHECK(cfg.family.geodesic.pin_rings == 0);
  CHECK(cfg.family.n_subjects == 3);
  CHECK(cfg.family.n_poses == 4);
  CHECK(cfg.family.resolution == 60);
  CHECK(cfg.family.seed == 123);
  CHECK(cfg.family.bend_max == 0.2);
  CHECK(cfg.family.radii == std::vector<double>{0.1, 0.15, 0.2});
  CHECK(cfg.family.mask_radius_factor == 0.3);
  CHECK(cfg.eval.landmarks == 10);
  CHECK(cfg.eval.max_pairs == 6);
  CHECK(cfg.eval.alphas == std::vector<double>{0.25, 0.5, 0.75});
}

TEST_CASE("unknown keys and bad numbers are rejected") {
  CHECK_THROWS_WITH_AS(parse_run_config("wibble = 1\n"),
                       "config: unknown key 'wibble'", ValidationError);
  CHECK_THROWS_WITH_AS(parse_run_config("total_iters = soon\n"),
                       "config: key 'total_iters' expects an integer, got 'soon'",
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_run_config("learning_rate = fast\n"),
                       "config: key 'learning_rate' expects a number, got 'fast'",
                       ValidationError);
  CHECK_THROWS_WITH_AS(parse_run_config("learning_rate = 1e-3extra\n"),
                       "config: key 'learning_rate' expects a number, got '1e-3extra'",
                       ValidationError);
  CHECK_THROWS_AS(parse_run_config("eval_alphas = ,\n"), ValidationError);
}

TEST_CASE("parsed schedule is validated") {
  CHECK_THROWS_AS(parse_run_config("learning_rate = 0\n"), ValidationError);
  CHECK_THROWS_AS(parse_run_config("warmup_iters = 50\ntotal_iters = 50\n"),
                  ValidationError);
}

TEST_CASE("load_run_config reads a file and reports missing paths") {
  const std::string path = "config_roundtrip_tmp.cfg";
  {
    std::ofstream out(path);
    out << "seed = 31\nresolution = 72\n";
  }
  const RunConfig cfg = load_run_config(path);
  CHECK(cfg.train.seed == 31);
  CHECK(cfg.family.resolution == 72);
  std::remove(path.c_str());
  CHECK_THROWS_WITH_AS(load_run_config("no/such/file.cfg"),
                       "config: cannot read 'no/such/file.cfg'", ValidationError);
}
