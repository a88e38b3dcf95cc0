#pragma once
// The VAE: a permutation-invariant point encoder (shared per-point MLP,
// max-pool over points, head MLP to mean and log-variance), reparameterized
// sampling, and an MLP decoder back to n x 3 vertex positions. The latent
// code is split (z_int | z_ext) with |z_ext| = floor(0.25 * d).
//
// Forward passes are expressed on a Tape so the same code serves training
// (parameters registered with gradients) and evaluation (constant leaves).
// Checkpoints are a flat list of named tensors behind the magic "LIMPCKPT1".

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "limp/rng.hpp"
#include "limp/tape.hpp"

namespace limp {

struct ModelConfig {
  std::vector<int> enc_conv{64, 64, 128};    // per-point shared layers
  std::vector<int> enc_mlp{128, 64, 64, 64}; // post-pool head layers
  std::vector<int> dec_hidden{32, 64, 128};  // decoder hidden layers
  int latent_dim = 32;
  int n_points = 0;

  int ext_dim() const { return latent_dim / 4; }  // floor(0.25 d)
  int int_dim() const { return latent_dim - ext_dim(); }
};

void validate_model_config(const ModelConfig& config);

// Named dense tensor; the unit of parameter storage, optimizer state, and
// checkpoint serialization.
struct Tensor {
  std::string name;
  std::vector<int> dims;
  std::vector<double> v;

  int64_t size() const;
};

struct ModelParams {
  ModelConfig config;
  std::vector<Tensor> tensors;  // fixed order set by init_params

  Tensor& find(const std::string& name);
  const Tensor& find(const std::string& name) const;
};

// Deterministic initialization: weights uniform in +-1/sqrt(fan_in), biases
// zero.
ModelParams init_params(const ModelConfig& config, uint64_t seed);

// A latent code with its fixed intrinsic/extrinsic split.
struct LatentCode {
  std::vector<double> z;
  int ext = 0;  // trailing extrinsic length

  int dim() const { return static_cast<int>(z.size()); }
  int int_dim() const { return dim() - ext; }
  std::vector<double> z_int() const;
  std::vector<double> z_ext() const;
};

LatentCode make_latent(const ModelConfig& config, std::vector<double> z);
// merge(split(z)) = z exactly; |result| = |z_int| + |z_ext|.
LatentCode merge_latent(const std::vector<double>& z_int,
                        const std::vector<double>& z_ext);

// ---- Tape-based forward passes --------------------------------------------

// Parameters registered on a tape, one Var per tensor in params order.
struct TapedModel {
  const ModelParams* params = nullptr;
  std::vector<Var> vars;

  Var var(const std::string& name) const;
};

TapedModel register_params(Tape& tape, const ModelParams& params,
                           bool requires_grad = true);

struct EncodedVar {
  Var mu;      // (1, d)
  Var logvar;  // (1, d)
};

// X is (n, 3). Permutation of rows leaves the output unchanged (max-pool).
EncodedVar encode_node(Tape& tape, const TapedModel& model, Var x);
// z = mu + exp(logvar / 2) * eta with eta drawn once from rng and fixed as a
// constant, so gradients flow to mu and logvar (reparameterization trick).
Var reparameterize_node(Tape& tape, const EncodedVar& enc, Rng& rng);
// z is (1, d); returns (n, 3).
Var decode_node(Tape& tape, const TapedModel& model, Var z);

// ---- Plain evaluation forms -----------------------------------------------

// (mu, logvar) for one shape.
std::pair<std::vector<double>, std::vector<double>> encode(const ModelParams& params,
                                                           const DenseMatrix& x);
LatentCode reparameterize(const ModelConfig& config, const std::vector<double>& mu,
                          const std::vector<double>& logvar, Rng& rng);
DenseMatrix decode(const ModelParams& params, const std::vector<double>& z);

// ---- Checkpoints ----------------------------------------------------------
// Layout: magic "LIMPCKPT1"; u32 tensor count; per tensor u32 name length,
// name bytes, u32 rank, u32 dims, then 64-bit little-endian row-major values.
// The model config rides along as "config/..." tensors.

void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace limp
