#include "limp/config.hpp"

#include <fstream>
#include <sstream>

namespace limp {

namespace {

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config: key '" + key + "' expects a number, got '" + value +
                          "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config: key '" + key + "' expects an integer, got '" + value +
                          "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream stream(value);
  std::string item;
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const std::string& item : split_list(value))
    out.push_back(static_cast<int>(parse_int(key, item)));
  return out;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value)) out.push_back(parse_real(key, item));
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_config_pairs(const std::string& text) {
  std::map<std::string, std::string> pairs;
  std::stringstream stream(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const size_t hash = raw.find('#');
    if (hash != std::string::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config: line " + std::to_string(line_no) +
                            " is not 'key = value': '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ValidationError("config: line " + std::to_string(line_no) + " has an empty key");
    if (pairs.count(key))
      throw ValidationError("config: duplicate key '" + key + "' at line " +
                            std::to_string(line_no));
    pairs[key] = value;
  }
  return pairs;
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  for (const auto& [key, value] : parse_config_pairs(text)) {
    // Training schedule and optimizer.
    if (key == "learning_rate") cfg.train.learning_rate = parse_real(key, value);
    else if (key == "warmup_iters") cfg.train.warmup_iters = static_cast<int>(parse_int(key, value));
    else if (key == "total_iters") cfg.train.total_iters = static_cast<int>(parse_int(key, value));
    else if (key == "batch_any") cfg.train.batch_any = static_cast<int>(parse_int(key, value));
    else if (key == "batch_iso") cfg.train.batch_iso = static_cast<int>(parse_int(key, value));
    else if (key == "batch_non_iso") cfg.train.batch_non_iso = static_cast<int>(parse_int(key, value));
    else if (key == "seed") cfg.train.seed = static_cast<uint64_t>(parse_int(key, value));
    else if (key == "checkpoint_interval") cfg.train.checkpoint_interval = static_cast<int>(parse_int(key, value));
    else if (key == "landmarks") cfg.train.landmarks = static_cast<int>(parse_int(key, value));
    // Model layout.
    else if (key == "latent_dim") cfg.train.model.latent_dim = static_cast<int>(parse_int(key, value));
    else if (key == "enc_conv") cfg.train.model.enc_conv = parse_int_list(key, value);
    else if (key == "enc_mlp") cfg.train.model.enc_mlp = parse_int_list(key, value);
    else if (key == "dec_hidden") cfg.train.model.dec_hidden = parse_int_list(key, value);
    // Loss weights.
    else if (key == "w_recon") cfg.train.weights.recon = parse_real(key, value);
    else if (key == "w_interp") cfg.train.weights.interp = parse_real(key, value);
    else if (key == "w_disent_int") cfg.train.weights.disent_int = parse_real(key, value);
    else if (key == "w_disent_ext") cfg.train.weights.disent_ext = parse_real(key, value);
    else if (key == "beta") cfg.train.weights.beta = parse_real(key, value);
    // Geodesic pipeline (shared by training and eval).
    else if (key == "geodesic_t") {
      cfg.train.geodesic.t = parse_real(key, value);
      cfg.eval.geodesic.t = cfg.train.geodesic.t;
      cfg.family.geodesic.t = cfg.train.geodesic.t;
    } else if (key == "geodesic_pin_rings") {
      const int rings = static_cast<int>(parse_int(key, value));
      cfg.train.geodesic.pin_rings = rings;
      cfg.eval.geodesic.pin_rings = rings;
      cfg.family.geodesic.pin_rings = rings;
    }
    // Synthetic family.
    else if (key == "n_subjects") cfg.family.n_subjects = static_cast<int>(parse_int(key, value));
    else if (key == "n_poses") cfg.family.n_poses = static_cast<int>(parse_int(key, value));
    else if (key == "resolution") cfg.family.resolution = static_cast<int>(parse_int(key, value));
    else if (key == "data_seed") cfg.family.seed = static_cast<uint64_t>(parse_int(key, value));
    else if (key == "bend_max") cfg.family.bend_max = parse_real(key, value);
    else if (key == "radii") cfg.family.radii = parse_real_list(key, value);
    else if (key == "mask_radius_factor") cfg.family.mask_radius_factor = parse_real(key, value);
    // Evaluation protocol.
    else if (key == "eval_landmarks") cfg.eval.landmarks = static_cast<int>(parse_int(key, value));
    else if (key == "eval_max_pairs") cfg.eval.max_pairs = static_cast<int>(parse_int(key, value));
    else if (key == "eval_alphas") {
      cfg.eval.alphas = parse_real_list(key, value);
      require(!cfg.eval.alphas.empty(), "config: eval_alphas must not be empty");
    } else {
      throw ValidationError("config: unknown key '" + key + "'");
    }
  }
  validate_train_config(cfg.train);
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ValidationError("config: cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

}  // namespace limp
