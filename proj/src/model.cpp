#include "limp/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace limp {

void validate_model_config(const ModelConfig& config) {
  require(config.latent_dim >= 4, "model config: latent_dim must be >= 4, got " +
                                      std::to_string(config.latent_dim));
  require(config.n_points >= 3, "model config: n_points must be >= 3, got " +
                                    std::to_string(config.n_points));
  require(!config.enc_conv.empty() && !config.enc_mlp.empty() &&
              !config.dec_hidden.empty(),
          "model config: layer lists must be non-empty");
  for (int w : config.enc_conv)
    require(w >= 1, "model config: non-positive encoder conv width");
  for (int w : config.enc_mlp)
    require(w >= 1, "model config: non-positive encoder mlp width");
  for (int w : config.dec_hidden)
    require(w >= 1, "model config: non-positive decoder width");
}

int64_t Tensor::size() const {
  int64_t s = 1;
  for (int d : dims) s *= d;
  return s;
}

Tensor& ModelParams::find(const std::string& name) {
  for (Tensor& t : tensors)
    if (t.name == name) return t;
  throw ValidationError("model params: no tensor named '" + name + "'");
}

const Tensor& ModelParams::find(const std::string& name) const {
  for (const Tensor& t : tensors)
    if (t.name == name) return t;
  throw ValidationError("model params: no tensor named '" + name + "'");
}

namespace {

// (in x out) weight plus (out) bias for one linear layer.
void push_layer(std::vector<Tensor>& out, const std::string& prefix, int in, int width,
                Rng& rng) {
  Tensor w;
  w.name = prefix + ".w";
  w.dims = {in, width};
  w.v.resize(static_cast<size_t>(in) * width);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& x : w.v) x = rng.uniform(-bound, bound);
  out.push_back(std::move(w));
  Tensor b;
  b.name = prefix + ".b";
  b.dims = {width};
  b.v.assign(static_cast<size_t>(width), 0.0);
  out.push_back(std::move(b));
}

}  // namespace

ModelParams init_params(const ModelConfig& config, uint64_t seed) {
  validate_model_config(config);
  ModelParams params;
  params.config = config;
  Rng rng(seed);
  int in = 3;
  for (size_t i = 0; i < config.enc_conv.size(); ++i) {
    push_layer(params.tensors, "enc_conv." + std::to_string(i), in, config.enc_conv[i],
               rng);
    in = config.enc_conv[i];
  }
  for (size_t i = 0; i < config.enc_mlp.size(); ++i) {
    push_layer(params.tensors, "enc_mlp." + std::to_string(i), in, config.enc_mlp[i],
               rng);
    in = config.enc_mlp[i];
  }
  push_layer(params.tensors, "enc_head", in, 2 * config.latent_dim, rng);
  in = config.latent_dim;
  for (size_t i = 0; i < config.dec_hidden.size(); ++i) {
    push_layer(params.tensors, "dec." + std::to_string(i), in, config.dec_hidden[i],
               rng);
    in = config.dec_hidden[i];
  }
  push_layer(params.tensors, "dec_out", in, 3 * config.n_points, rng);
  return params;
}

std::vector<double> LatentCode::z_int() const {
  return std::vector<double>(z.begin(), z.begin() + int_dim());
}

std::vector<double> LatentCode::z_ext() const {
  return std::vector<double>(z.begin() + int_dim(), z.end());
}

LatentCode make_latent(const ModelConfig& config, std::vector<double> z) {
  require(static_cast<int>(z.size()) == config.latent_dim,
          "latent: dimension " + std::to_string(z.size()) + " does not match model " +
              std::to_string(config.latent_dim));
  return LatentCode{std::move(z), config.ext_dim()};
}

LatentCode merge_latent(const std::vector<double>& z_int,
                        const std::vector<double>& z_ext) {
  require(!z_int.empty() && !z_ext.empty(), "merge_latent: empty part");
  LatentCode code;
  code.z = z_int;
  code.z.insert(code.z.end(), z_ext.begin(), z_ext.end());
  code.ext = static_cast<int>(z_ext.size());
  return code;
}

// ---- Tape-based forward passes --------------------------------------------

Var TapedModel::var(const std::string& name) const {
  for (size_t i = 0; i < params->tensors.size(); ++i)
    if (params->tensors[i].name == name) return vars[i];
  throw ValidationError("model params: no tensor named '" + name + "'");
}

TapedModel register_params(Tape& tape, const ModelParams& params, bool requires_grad) {
  TapedModel model;
  model.params = &params;
  model.vars.reserve(params.tensors.size());
  for (const Tensor& t : params.tensors) {
    const int rows = t.dims.size() == 2 ? t.dims[0] : 1;
    const int cols = t.dims.size() == 2 ? t.dims[1] : static_cast<int>(t.size());
    model.vars.push_back(tape.leaf(DenseMatrix(rows, cols, t.v), requires_grad));
  }
  return model;
}

namespace {

Var linear(Tape&, const TapedModel& model, const std::string& prefix, Var x) {
  return add_rowvec(matmul(x, model.var(prefix + ".w")), model.var(prefix + ".b"));
}

}  // namespace

EncodedVar encode_node(Tape& tape, const TapedModel& model, Var x) {
  const ModelConfig& config = model.params->config;
  const DenseMatrix& xv = tape.value(x);
  require(all_finite(xv.v), "encode: non-finite input");
  if (xv.cols != 3)
    throw ValidationError("encode: input must be (n,3), got (" +
                          std::to_string(xv.rows) + "," + std::to_string(xv.cols) + ")");
  Var h = x;
  for (size_t i = 0; i < config.enc_conv.size(); ++i)
    h = elu(linear(tape, model, "enc_conv." + std::to_string(i), h));
  // Max-pool over points: column-wise max via a transpose sandwich.
  Var pooled = transpose(rowwise_max(transpose(h)));
  h = pooled;
  for (size_t i = 0; i < config.enc_mlp.size(); ++i)
    h = elu(linear(tape, model, "enc_mlp." + std::to_string(i), h));
  Var head = linear(tape, model, "enc_head", h);
  auto [mu, logvar] = split(head, 1, config.latent_dim);
  return EncodedVar{mu, logvar};
}

Var reparameterize_node(Tape& tape, const EncodedVar& enc, Rng& rng) {
  const DenseMatrix& mv = tape.value(enc.mu);
  DenseMatrix eta(mv.rows, mv.cols);
  for (double& e : eta.v) e = rng.normal();
  Var eta_leaf = tape.leaf(std::move(eta), false);
  return add(enc.mu, mul(exp(scale(enc.logvar, 0.5)), eta_leaf));
}

Var decode_node(Tape& tape, const TapedModel& model, Var z) {
  const ModelConfig& config = model.params->config;
  const DenseMatrix& zv = tape.value(z);
  if (zv.rows != 1 || zv.cols != config.latent_dim)
    throw ValidationError("decode: latent must be (1," +
                          std::to_string(config.latent_dim) + "), got (" +
                          std::to_string(zv.rows) + "," + std::to_string(zv.cols) + ")");
  Var h = z;
  for (size_t i = 0; i < config.dec_hidden.size(); ++i)
    h = elu(linear(tape, model, "dec." + std::to_string(i), h));
  Var out = linear(tape, model, "dec_out", h);
  return reshape(out, config.n_points, 3);
}

// ---- Plain evaluation forms -----------------------------------------------

std::pair<std::vector<double>, std::vector<double>> encode(const ModelParams& params,
                                                           const DenseMatrix& x) {
  Tape tape;
  const TapedModel model = register_params(tape, params, false);
  const EncodedVar enc = encode_node(tape, model, tape.leaf(x, false));
  return {tape.value(enc.mu).v, tape.value(enc.logvar).v};
}

LatentCode reparameterize(const ModelConfig& config, const std::vector<double>& mu,
                          const std::vector<double>& logvar, Rng& rng) {
  require(mu.size() == logvar.size(), "reparameterize: mu/logvar length mismatch");
  require(all_finite(mu) && all_finite(logvar), "reparameterize: non-finite input");
  std::vector<double> z(mu.size());
  for (size_t i = 0; i < z.size(); ++i)
    z[i] = mu[i] + std::exp(0.5 * logvar[i]) * rng.normal();
  return make_latent(config, std::move(z));
}

DenseMatrix decode(const ModelParams& params, const std::vector<double>& z) {
  Tape tape;
  const TapedModel model = register_params(tape, params, false);
  Var zv = tape.leaf(DenseMatrix(1, static_cast<int>(z.size()), z), false);
  return tape.value(decode_node(tape, model, zv));
}

// ---- Checkpoints ----------------------------------------------------------

namespace {

constexpr char kMagic[] = "LIMPCKPT1";  // 9 bytes, no terminator on disk

void write_u32(std::ofstream& out, uint32_t x) {
  unsigned char b[4] = {static_cast<unsigned char>(x & 0xff),
                        static_cast<unsigned char>((x >> 8) & 0xff),
                        static_cast<unsigned char>((x >> 16) & 0xff),
                        static_cast<unsigned char>((x >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ValidationError("checkpoint: truncated file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void write_tensor(std::ofstream& out, const Tensor& t) {
  write_u32(out, static_cast<uint32_t>(t.name.size()));
  out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
  write_u32(out, static_cast<uint32_t>(t.dims.size()));
  for (int d : t.dims) write_u32(out, static_cast<uint32_t>(d));
  out.write(reinterpret_cast<const char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(double)));
}

Tensor read_tensor(std::ifstream& in) {
  Tensor t;
  const uint32_t name_len = read_u32(in);
  require(name_len <= 4096, "checkpoint: tensor name too long");
  t.name.resize(name_len);
  in.read(t.name.data(), name_len);
  const uint32_t rank = read_u32(in);
  require(rank <= 8, "checkpoint: tensor rank too large");
  int64_t count = 1;
  for (uint32_t r = 0; r < rank; ++r) {
    const uint32_t d = read_u32(in);
    require(d >= 1 && count * d <= (int64_t(1) << 32), "checkpoint: bad tensor dims");
    t.dims.push_back(static_cast<int>(d));
    count *= d;
  }
  t.v.resize(static_cast<size_t>(count));
  in.read(reinterpret_cast<char*>(t.v.data()),
          static_cast<std::streamsize>(t.v.size() * sizeof(double)));
  if (!in) throw ValidationError("checkpoint: truncated file");
  return t;
}

Tensor int_list_tensor(const std::string& name, const std::vector<int>& xs) {
  Tensor t;
  t.name = name;
  t.dims = {static_cast<int>(xs.size())};
  for (int x : xs) t.v.push_back(static_cast<double>(x));
  return t;
}

std::vector<int> as_int_list(const Tensor& t) {
  std::vector<int> xs;
  for (double x : t.v) xs.push_back(static_cast<int>(x));
  return xs;
}

}  // namespace

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "checkpoint: cannot open '" + path + "' for writing");
  out.write(kMagic, 9);
  const ModelConfig& c = params.config;
  const std::vector<Tensor> meta = {
      int_list_tensor("config/latent_dim", {c.latent_dim}),
      int_list_tensor("config/n_points", {c.n_points}),
      int_list_tensor("config/enc_conv", c.enc_conv),
      int_list_tensor("config/enc_mlp", c.enc_mlp),
      int_list_tensor("config/dec_hidden", c.dec_hidden),
  };
  write_u32(out, static_cast<uint32_t>(meta.size() + params.tensors.size()));
  for (const Tensor& t : meta) write_tensor(out, t);
  for (const Tensor& t : params.tensors) write_tensor(out, t);
  require(out.good(), "checkpoint: write to '" + path + "' failed");
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "checkpoint: cannot open '" + path + "'");
  char magic[9];
  in.read(magic, 9);
  if (!in || std::string(magic, 9) != kMagic)
    throw ValidationError("checkpoint: bad magic in '" + path + "'");
  const uint32_t count = read_u32(in);
  require(count >= 5, "checkpoint: missing config tensors");
  ModelParams params;
  std::vector<Tensor> config_tensors;
  for (uint32_t i = 0; i < count; ++i) {
    Tensor t = read_tensor(in);
    if (t.name.rfind("config/", 0) == 0)
      config_tensors.push_back(std::move(t));
    else
      params.tensors.push_back(std::move(t));
  }
  ModelConfig c;
  bool have_latent = false, have_n = false;
  for (const Tensor& t : config_tensors) {
    if (t.name == "config/latent_dim") {
      c.latent_dim = static_cast<int>(t.v.at(0));
      have_latent = true;
    } else if (t.name == "config/n_points") {
      c.n_points = static_cast<int>(t.v.at(0));
      have_n = true;
    } else if (t.name == "config/enc_conv") {
      c.enc_conv = as_int_list(t);
    } else if (t.name == "config/enc_mlp") {
      c.enc_mlp = as_int_list(t);
    } else if (t.name == "config/dec_hidden") {
      c.dec_hidden = as_int_list(t);
    } else {
      throw ValidationError("checkpoint: unknown config tensor '" + t.name + "'");
    }
  }
  require(have_latent && have_n, "checkpoint: incomplete config");
  validate_model_config(c);
  params.config = c;
  // The weight layout must match what init_params would produce.
  const ModelParams expect = init_params(c, 0);
  require(expect.tensors.size() == params.tensors.size(),
          "checkpoint: tensor count does not match the declared config");
  for (size_t i = 0; i < expect.tensors.size(); ++i) {
    require(expect.tensors[i].name == params.tensors[i].name &&
                expect.tensors[i].dims == params.tensors[i].dims,
            "checkpoint: tensor '" + params.tensors[i].name +
                "' does not match the declared config");
    require(all_finite(params.tensors[i].v),
            "checkpoint: non-finite values in '" + params.tensors[i].name + "'");
  }
  return params;
}

}  // namespace limp
