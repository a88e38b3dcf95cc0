// limp: command-line front end. Subcommands cover the full pipeline: data
// generation, training, latent-space applications, geodesics, evaluation, and
// the standing gradient suites. Exit codes: 0 success, 2 validation error,
// 3 numerical failure.
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <regex>
#include <sstream>
#include <tuple>

#include "limp/apps.hpp"
#include "limp/config.hpp"
#include "limp/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace limp;

namespace {

RunConfig load_config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

// --seed overrides exactly one seed per subcommand; -1 means "keep config".
uint64_t pick_seed(long long flag, uint64_t fallback) {
  return flag >= 0 ? static_cast<uint64_t>(flag) : fallback;
}

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) throw ValidationError("cannot read '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  for (char& c : text)
    if (c == ',' || c == ';') c = ' ';
  std::stringstream tokens(text);
  std::vector<double> out;
  double v = 0.0;
  while (tokens >> v) out.push_back(v);
  if (!tokens.eof())
    throw ValidationError("'" + path + "': non-numeric content in CSV");
  return out;
}

DenseMatrix read_points_csv(const std::string& path) {
  const std::vector<double> nums = read_numbers(path);
  require(!nums.empty() && nums.size() % 3 == 0,
          "'" + path + "': expected rows of x,y,z coordinates");
  return DenseMatrix(static_cast<int>(nums.size() / 3), 3, nums);
}

DistanceMatrix read_matrix_csv(const std::string& path) {
  const std::vector<double> nums = read_numbers(path);
  const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(nums.size()))));
  require(n >= 1 && static_cast<size_t>(n) * n == nums.size(),
          "'" + path + "': expected a square n x n matrix");
  DistanceMatrix d(n, MatrixKind::geodesic);
  d.d = nums;
  return d;
}

std::vector<double> read_code_csv(const std::string& path) {
  const std::vector<double> nums = read_numbers(path);
  require(!nums.empty(), "'" + path + "': empty latent code");
  return nums;
}

void write_code_csv(const std::vector<double>& z, const std::string& path) {
  std::ofstream out(path);
  if (!out.good()) throw ValidationError("cannot write '" + path + "'");
  out << std::setprecision(17);
  for (size_t i = 0; i < z.size(); ++i) out << (i ? "," : "") << z[i];
  out << "\n";
}

void write_rows(std::ostream& out, const double* data, int rows, int cols) {
  out << std::setprecision(17);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out << (j ? "," : "") << data[static_cast<size_t>(i) * cols + j];
    out << "\n";
  }
}

// Writes to the path, or to stdout when the path is empty.
void emit_rows(const std::string& path, const double* data, int rows, int cols) {
  if (path.empty()) {
    write_rows(std::cout, data, rows, cols);
    return;
  }
  std::ofstream out(path);
  if (!out.good()) throw ValidationError("cannot write '" + path + "'");
  write_rows(out, data, rows, cols);
}

ShapeRecord record_from_mesh(TriMesh mesh, int subject, int pose,
                             const FamilyConfig& fam) {
  ShapeRecord rec;
  rec.mesh = std::move(mesh);
  rec.subject_id = subject;
  rec.pose_id = pose;
  rec.d_euclid = euclid_matrix(rec.mesh);
  rec.d_geo = heat_distance_all(rec.mesh, fam.geodesic);
  rec.mask = neighborhood_mask(rec.mesh, fam.mask_radius_factor);
  rec.diameter = shape_diameter(rec.mesh);
  return rec;
}

// "synthetic" regenerates from the config; otherwise a directory of
// s<subject>_p<pose>.off meshes (the gen-data layout) with ground-truth
// matrices recomputed on load.
std::vector<ShapeRecord> load_dataset(const std::string& spec, const RunConfig& cfg) {
  if (spec == "synthetic") return gen_synthetic_family(cfg.family);
  if (!fs::is_directory(spec))
    throw ValidationError("data: '" + spec + "' is neither 'synthetic' nor a directory");
  const std::regex pattern(R"(s(\d+)_p(\d+)\.off)");
  std::vector<std::tuple<int, int, std::string>> found;
  for (const auto& entry : fs::directory_iterator(spec)) {
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (std::regex_match(name, m, pattern))
      found.emplace_back(std::stoi(m[1]), std::stoi(m[2]), entry.path().string());
  }
  if (found.empty())
    throw ValidationError("data: no s<subject>_p<pose>.off meshes in '" + spec + "'");
  std::sort(found.begin(), found.end());
  std::vector<ShapeRecord> records;
  for (const auto& [subject, pose, path] : found) {
    std::cerr << "loading " << path << "\n";
    records.push_back(record_from_mesh(load_off(path), subject, pose, cfg.family));
  }
  return records;
}

void require_mesh_matches(const ModelParams& params, const TriMesh& mesh,
                          const std::string& what) {
  require(mesh.n() == params.config.n_points,
          what + ": mesh has " + std::to_string(mesh.n()) + " vertices, checkpoint expects " +
              std::to_string(params.config.n_points));
}

// ---------------------------------------------------------------------------
// Subcommand bodies.

void run_gen_data(const RunConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::vector<ShapeRecord> records = gen_synthetic_family(cfg.family);
  std::ofstream manifest(fs::path(out_dir) / "family.csv");
  manifest << "subject,pose,file,vertices,diameter\n" << std::setprecision(17);
  for (const ShapeRecord& rec : records) {
    const std::string name =
        "s" + std::to_string(rec.subject_id) + "_p" + std::to_string(rec.pose_id) + ".off";
    save_off(rec.mesh, (fs::path(out_dir) / name).string());
    manifest << rec.subject_id << "," << rec.pose_id << "," << name << ","
             << rec.mesh.n() << "," << rec.diameter << "\n";
  }
  std::cout << "wrote " << records.size() << " meshes to " << out_dir << "\n";
}

void run_train(RunConfig cfg, const std::string& data, const std::string& out_dir) {
  const std::vector<ShapeRecord> dataset = load_dataset(data, cfg);
  const int interval = cfg.train.checkpoint_interval;
  const int total = cfg.train.total_iters;
  cfg.train.on_iteration = [interval, total](int iter, const LossBreakdown& b) {
    if (iter == 1 || iter == total || iter % interval == 0)
      std::cerr << "iter " << iter << "/" << total << "  total " << b.total << "  recon "
                << b.recon << "  interp " << b.interp_geo + b.interp_local << "\n";
  };
  const TrainResult result = train(dataset, cfg.train, out_dir);
  const LossBreakdown& last = result.trace.back();
  std::cout << "checkpoint " << result.checkpoint_path << "\n"
            << "trace " << result.trace_path << "\n"
            << "final total " << last.total << " recon " << last.recon << "\n";
}

void run_interpolate(const ModelParams& params, const std::string& a_path,
                     const std::string& b_path, int steps, const std::string& out_dir,
                     bool color, const GeodesicConfig& geo) {
  const TriMesh a = load_off(a_path), b = load_off(b_path);
  require_mesh_matches(params, a, "interpolate");
  require_mesh_matches(params, b, "interpolate");
  const std::vector<TriMesh> meshes = latent_interpolate(params, a, b, steps);
  fs::create_directories(out_dir);

  // Per-vertex distortion for COFF coloring: row means of the gap between the
  // decoded geodesics and the linear blend of the decoded endpoint metrics.
  std::vector<std::vector<double>> scalars;
  if (color) {
    const DistanceMatrix da = heat_distance_all(meshes.front(), geo);
    const DistanceMatrix db = heat_distance_all(meshes.back(), geo);
    double max_s = 0.0;
    for (int k = 0; k < steps; ++k) {
      const double alpha = steps == 1 ? 0.0 : static_cast<double>(k) / (steps - 1);
      const DistanceMatrix dk = heat_distance_all(meshes[k], geo);
      std::vector<double> s(dk.n, 0.0);
      for (int i = 0; i < dk.n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < dk.n; ++j)
          acc += std::abs(dk.at(i, j) -
                          ((1.0 - alpha) * da.at(i, j) + alpha * db.at(i, j)));
        s[i] = acc / dk.n;
        max_s = std::max(max_s, s[i]);
      }
      scalars.push_back(std::move(s));
    }
    if (max_s > 0.0)
      for (auto& s : scalars)
        for (double& v : s) v /= max_s;
  }

  for (int k = 0; k < steps; ++k) {
    std::ostringstream name;
    name << "step_" << std::setw(3) << std::setfill('0') << k << ".off";
    save_off(meshes[k], (fs::path(out_dir) / name.str()).string(),
             color ? &scalars[k] : nullptr);
  }
  std::cout << "wrote " << steps << " meshes to " << out_dir << "\n";
}

void run_complete(const ModelParams& params, const RunConfig& cfg, const std::string& data,
                  const std::string& partial_path, int iters, int restarts, double lr,
                  uint64_t seed, const std::string& out_path,
                  const std::string& code_out) {
  const std::vector<ShapeRecord> dataset = load_dataset(data, cfg);
  const DenseMatrix partial = read_points_csv(partial_path);
  const CompletionResult result =
      complete_partial(params, dataset, partial, iters, seed, restarts, lr);
  save_off(result.mesh, out_path);
  if (!code_out.empty()) write_code_csv(result.code.z, code_out);
  std::cout << "objective " << std::setprecision(17) << result.objective << "\n"
            << "mesh " << out_path << "\n";
}

void run_fit_metric(const std::string& mesh_path, const std::string& target_csv,
                    const std::string& target_mesh, int iters, double lr,
                    const GeodesicConfig& geo, const std::string& out_path) {
  const TriMesh init = load_off(mesh_path);
  DistanceMatrix target;
  if (!target_csv.empty()) {
    target = read_matrix_csv(target_csv);
  } else if (!target_mesh.empty()) {
    target = heat_distance_all(load_off(target_mesh), geo);
  } else {
    throw ValidationError("fit-metric: provide --target or --target-mesh");
  }
  const FitMetricResult result = fit_to_metric(init, target, iters, lr, geo);
  save_off(result.mesh, out_path);
  std::cout << std::setprecision(17) << "initial objective " << result.initial << "\n"
            << "best objective " << result.objective << "\n"
            << "mesh " << out_path << "\n";
}

void run_geodesic(const std::string& mesh_path, int source, bool all,
                  const GeodesicConfig& geo, const std::string& out_path) {
  const TriMesh mesh = load_off(mesh_path);
  require(all != (source >= 0), "geodesic: choose exactly one of --source or --all");
  if (all) {
    const DistanceMatrix d = heat_distance_all(mesh, geo);
    emit_rows(out_path, d.d.data(), d.n, d.n);
  } else {
    const std::vector<double> d = heat_distance_single(mesh, source, geo);
    emit_rows(out_path, d.data(), static_cast<int>(d.size()), 1);
  }
}

void run_eval(const ModelParams& params, const RunConfig& cfg, const std::string& data,
              const std::string& out_path) {
  const std::vector<ShapeRecord> dataset = load_dataset(data, cfg);
  const EvalReport report = eval_model(params, dataset, cfg.eval);
  std::cout << std::setprecision(17)
            << "interpolation_error " << report.interpolation_error << "\n"
            << "interpolation_error_dec " << report.interpolation_error_dec << "\n"
            << "disentanglement_error " << report.disentanglement_error << "\n";
  if (out_path.empty()) return;
  std::ofstream out(out_path);
  if (!out.good()) throw ValidationError("cannot write '" + out_path + "'");
  out << "metric,i,j,error\n" << std::setprecision(17);
  for (const auto& row : report.interp_pairs)
    out << "interp," << static_cast<int>(row[0]) << "," << static_cast<int>(row[1]) << ","
        << row[2] << "\n";
  for (const auto& row : report.disent_pairs)
    out << "disent," << static_cast<int>(row[0]) << "," << static_cast<int>(row[1]) << ","
        << row[2] << "\n";
  out << "interpolation_error,-1,-1," << report.interpolation_error << "\n"
      << "interpolation_error_dec,-1,-1," << report.interpolation_error_dec << "\n"
      << "disentanglement_error,-1,-1," << report.disentanglement_error << "\n";
}

void run_check_grad(uint64_t base_seed, int n_seeds) {
  require(n_seeds >= 1, "check-grad: --seeds must be >= 1");
  int failures = 0;
  for (int k = 0; k < n_seeds; ++k) {
    const uint64_t seed = base_seed + static_cast<uint64_t>(k);
    for (const GradSuiteResult& r : run_gradient_suites(seed)) {
      std::cout << (r.pass ? "PASS" : "FAIL") << "  seed " << seed << "  " << r.name
                << "  deviation " << r.deviation << " (tolerance " << r.tolerance
                << ")\n";
      failures += r.pass ? 0 : 1;
    }
  }
  if (failures > 0)
    throw NumericalError("check-grad: " + std::to_string(failures) +
                         " suite(s) outside tolerance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"limp: metric-preserving latent shape model"};
  app.require_subcommand(1);

  std::string config_path;    // every subcommand accepts --config
  long long seed_flag = -1;   // and --seed (-1: keep the config's seed)
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--seed", seed_flag, "seed override");
    return sub;
  };
  std::string ckpt_path;
  const auto add_ckpt = [&](CLI::App* sub) {
    sub->add_option("--ckpt", ckpt_path, "model checkpoint")->required();
    return sub;
  };

  std::string data = "synthetic", out_path, a_path, b_path, c_path;
  std::string mesh_path, code_path, like_path, partial_path, code_out;
  std::string target_csv, target_mesh;
  int steps = 5, iters = 200, restarts = 8, source = -1, n_seeds = 1;
  double lr = 0.0;
  bool all = false, color = false;

  CLI::App* gen = add_common(app.add_subcommand("gen-data", "generate the synthetic family"));
  gen->add_option("--out", out_path, "output directory")->required();
  gen->callback([&] {
    RunConfig cfg = load_config_or_default(config_path);
    cfg.family.seed = pick_seed(seed_flag, cfg.family.seed);
    run_gen_data(cfg, out_path);
  });

  CLI::App* tr = add_common(app.add_subcommand("train", "train the model"));
  tr->add_option("--data", data, "'synthetic' or a mesh directory");
  tr->add_option("--out", out_path, "checkpoint/trace directory")->required();
  tr->callback([&] {
    RunConfig cfg = load_config_or_default(config_path);
    cfg.train.seed = pick_seed(seed_flag, cfg.train.seed);
    run_train(cfg, data, out_path);
  });

  CLI::App* enc = add_ckpt(app.add_subcommand("encode", "mesh -> latent code CSV"));
  enc->add_option("--mesh", mesh_path, "input OFF mesh")->required();
  enc->add_option("--out", out_path, "output code CSV")->required();
  enc->callback([&] {
    const ModelParams params = load_checkpoint(ckpt_path);
    const TriMesh mesh = load_off(mesh_path);
    require_mesh_matches(params, mesh, "encode");
    write_code_csv(encode_mesh(params, mesh).z, out_path);
  });

  CLI::App* dec = add_ckpt(app.add_subcommand("decode", "latent code CSV -> mesh"));
  dec->add_option("--code", code_path, "input code CSV")->required();
  dec->add_option("--like", like_path, "mesh providing the face topology")->required();
  dec->add_option("--out", out_path, "output OFF mesh")->required();
  dec->callback([&] {
    const ModelParams params = load_checkpoint(ckpt_path);
    const TriMesh like = load_off(like_path);
    require_mesh_matches(params, like, "decode");
    save_off(decode_to_mesh(params, read_code_csv(code_path), like), out_path);
  });

  CLI::App* interp =
      add_common(add_ckpt(app.add_subcommand("interpolate", "decode the latent segment")));
  interp->add_option("--a", a_path, "endpoint mesh A")->required();
  interp->add_option("--b", b_path, "endpoint mesh B")->required();
  interp->add_option("--steps", steps, "number of samples (>= 2)");
  interp->add_option("--out", out_path, "output directory")->required();
  interp->add_flag("--color", color, "write COFF with per-vertex metric distortion");
  interp->callback([&] {
    const RunConfig cfg = load_config_or_default(config_path);
    run_interpolate(load_checkpoint(ckpt_path), a_path, b_path, steps, out_path, color,
                    cfg.eval.geodesic);
  });

  CLI::App* swap = add_ckpt(app.add_subcommand("swap", "intrinsic of A with extrinsic of B"));
  swap->add_option("--a", a_path, "intrinsic donor mesh")->required();
  swap->add_option("--b", b_path, "extrinsic donor mesh")->required();
  swap->add_option("--out", out_path, "output OFF mesh")->required();
  swap->callback([&] {
    const ModelParams params = load_checkpoint(ckpt_path);
    const TriMesh a = load_off(a_path), b = load_off(b_path);
    require_mesh_matches(params, a, "swap");
    require_mesh_matches(params, b, "swap");
    save_off(latent_swap(params, a, b), out_path);
  });

  CLI::App* ana = add_ckpt(app.add_subcommand("analogy", "decode z_a - z_b + z_c"));
  ana->add_option("--a", a_path, "mesh A")->required();
  ana->add_option("--b", b_path, "mesh B")->required();
  ana->add_option("--c", c_path, "mesh C")->required();
  ana->add_option("--out", out_path, "output OFF mesh")->required();
  ana->callback([&] {
    const ModelParams params = load_checkpoint(ckpt_path);
    const TriMesh a = load_off(a_path), b = load_off(b_path), c = load_off(c_path);
    for (const TriMesh* m : {&a, &b, &c}) require_mesh_matches(params, *m, "analogy");
    save_off(latent_analogy(params, a, b, c), out_path);
  });

  CLI::App* comp =
      add_common(add_ckpt(app.add_subcommand("complete", "latent search for a partial cloud")));
  comp->add_option("--data", data, "'synthetic' or a mesh directory (restart seeds)");
  comp->add_option("--partial", partial_path, "partial points CSV (x,y,z rows)")->required();
  comp->add_option("--iters", iters, "optimization iterations per restart");
  comp->add_option("--restarts", restarts, "number of restarts");
  comp->add_option("--lr", lr, "Adam learning rate (0: library default)");
  comp->add_option("--out", out_path, "output OFF mesh")->required();
  comp->add_option("--code-out", code_out, "also write the best code CSV");
  comp->callback([&] {
    const RunConfig cfg = load_config_or_default(config_path);
    run_complete(load_checkpoint(ckpt_path), cfg, data, partial_path, iters, restarts,
                 lr > 0.0 ? lr : 0.05, pick_seed(seed_flag, 0), out_path, code_out);
  });

  CLI::App* fitm = add_common(app.add_subcommand("fit-metric", "optimize vertices to a metric"));
  fitm->add_option("--mesh", mesh_path, "initial OFF mesh")->required();
  fitm->add_option("--target", target_csv, "target geodesic matrix CSV");
  fitm->add_option("--target-mesh", target_mesh, "mesh whose geodesics are the target");
  fitm->add_option("--iters", iters, "Adam iterations");
  fitm->add_option("--lr", lr, "Adam learning rate (0: 0.02)");
  fitm->add_option("--out", out_path, "output OFF mesh")->required();
  fitm->callback([&] {
    const RunConfig cfg = load_config_or_default(config_path);
    run_fit_metric(mesh_path, target_csv, target_mesh, iters, lr > 0.0 ? lr : 0.02,
                   cfg.family.geodesic, out_path);
  });

  CLI::App* geod = add_common(app.add_subcommand("geodesic", "heat-method distances as CSV"));
  geod->add_option("mesh", mesh_path, "input OFF mesh")->required();
  geod->add_option("--source", source, "source vertex (single-column output)");
  geod->add_flag("--all", all, "full distance matrix");
  geod->add_option("--out", out_path, "output CSV (default: stdout)");
  geod->callback([&] {
    const RunConfig cfg = load_config_or_default(config_path);
    run_geodesic(mesh_path, source, all, cfg.family.geodesic, out_path);
  });

  CLI::App* ev = add_common(add_ckpt(app.add_subcommand("eval", "interpolation + disentanglement errors")));
  ev->add_option("--data", data, "'synthetic' or a mesh directory");
  ev->add_option("--out", out_path, "per-pair report CSV");
  ev->callback([&] {
    const RunConfig cfg = load_config_or_default(config_path);
    run_eval(load_checkpoint(ckpt_path), cfg, data, out_path);
  });

  CLI::App* cg = add_common(app.add_subcommand("check-grad", "run the standing gradient suites"));
  cg->add_option("--seeds", n_seeds, "number of consecutive seeds");
  cg->callback([&] { run_check_grad(pick_seed(seed_flag, 1), n_seeds); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const LimpError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
