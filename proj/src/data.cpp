#include "limp/data.hpp"

#include <algorithm>
#include <cmath>

#include "limp/shapes.hpp"

namespace limp {

DistanceMatrix euclid_matrix(const TriMesh& mesh) {
  const int n = mesh.n();
  DistanceMatrix d(n, MatrixKind::euclidean);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dist = norm(mesh.vertices[i] - mesh.vertices[j]);
      d.at(i, j) = d.at(j, i) = dist;
    }
  return d;
}

std::vector<int> strided_landmarks(int n_vertices, int count) {
  if (count <= 0 || count >= n_vertices) return {};
  std::vector<int> landmarks;
  landmarks.reserve(count);
  for (int k = 0; k < count; ++k)
    landmarks.push_back(static_cast<int>(static_cast<int64_t>(k) * n_vertices / count));
  return landmarks;
}

namespace {

struct SubjectStyle {
  double radius = 0.0;
  double l1 = 0.0, l2 = 0.0;
};

TriMesh bent_tube(const SubjectStyle& style, double angle, int n_ring, int n_rows) {
  TriMesh tube = make_tube(n_ring, n_rows, style.radius, style.l1 + style.l2);
  const double zh = style.l1;  // hinge height
  const double c = std::cos(angle), s = std::sin(angle);
  for (Vec3& v : tube.vertices) {
    if (v[2] <= zh) continue;
    const double y = v[1], dz = v[2] - zh;
    v[1] = y * c - dz * s;
    v[2] = zh + y * s + dz * c;
  }
  return tube;
}

}  // namespace

std::vector<ShapeRecord> gen_synthetic_family(const FamilyConfig& cfg) {
  require(cfg.n_subjects >= 1, "gen_synthetic_family: n_subjects must be >= 1, got " +
                                   std::to_string(cfg.n_subjects));
  require(cfg.n_poses >= 1, "gen_synthetic_family: n_poses must be >= 1, got " +
                                std::to_string(cfg.n_poses));
  require(cfg.resolution >= 48, "gen_synthetic_family: resolution must be >= 48, got " +
                                    std::to_string(cfg.resolution));
  require(cfg.bend_max >= 0.0 && cfg.bend_max < 1.5,
          "gen_synthetic_family: bend_max must be in [0, 1.5)");
  require(cfg.radii.empty() || static_cast<int>(cfg.radii.size()) == cfg.n_subjects,
          "gen_synthetic_family: radii list must match n_subjects");
  require(cfg.mask_radius_factor > 0.0,
          "gen_synthetic_family: mask_radius_factor must be > 0");

  const int n_ring = 12;
  const int n_rows = std::max(4, (cfg.resolution + n_ring / 2) / n_ring);
  Rng rng(cfg.seed);

  // Subject styles: radii spread deterministically across subjects (with a
  // small seeded jitter) so inter-subject distortion is well separated from
  // the near-zero intra-subject one.
  std::vector<SubjectStyle> styles;
  for (int s = 0; s < cfg.n_subjects; ++s) {
    const double u =
        cfg.n_subjects == 1 ? 0.5 : static_cast<double>(s) / (cfg.n_subjects - 1);
    SubjectStyle style;
    style.radius = cfg.radii.empty() ? 0.10 + 0.10 * u + 0.01 * rng.uniform(-1.0, 1.0)
                                     : cfg.radii[s];
    require(style.radius > 0.0, "gen_synthetic_family: non-positive radius");
    style.l1 = 0.50 + 0.06 * rng.uniform(-1.0, 1.0);
    style.l2 = 0.60 + 0.06 * rng.uniform(-1.0, 1.0);
    styles.push_back(style);
  }

  std::vector<ShapeRecord> records;
  records.reserve(static_cast<size_t>(cfg.n_subjects) * cfg.n_poses);
  for (int s = 0; s < cfg.n_subjects; ++s)
    for (int p = 0; p < cfg.n_poses; ++p) {
      const double angle =
          cfg.n_poses == 1
              ? 0.0
              : -cfg.bend_max + 2.0 * cfg.bend_max * p / (cfg.n_poses - 1);
      ShapeRecord rec;
      rec.mesh = bent_tube(styles[s], angle, n_ring, n_rows);
      rec.subject_id = s;
      rec.pose_id = p;
      rec.diameter = shape_diameter(rec.mesh);
      rec.d_euclid = euclid_matrix(rec.mesh);
      rec.d_geo = heat_distance_all(rec.mesh, cfg.geodesic);
      rec.mask = neighborhood_mask(rec.mesh, cfg.mask_radius_factor);
      records.push_back(std::move(rec));
    }

  // Generation-time near-isometry check: poses of one subject must distort
  // the metric far less than subject changes do.
  if (cfg.n_subjects >= 2 && cfg.n_poses >= 2) {
    double max_intra = 0.0, min_inter = 1e300;
    for (size_t a = 0; a < records.size(); ++a)
      for (size_t b = a + 1; b < records.size(); ++b) {
        const double k = bounded_distortion(records[a].d_geo, records[b].d_geo).K;
        if (records[a].subject_id == records[b].subject_id)
          max_intra = std::max(max_intra, k);
        else
          min_inter = std::min(min_inter, k);
      }
    if (max_intra > 0.2 * min_inter)
      throw NumericalError(
          "gen_synthetic_family: near-isometry check failed (intra-subject K " +
          std::to_string(max_intra) + " > 0.2 x inter-subject K " +
          std::to_string(min_inter) + ")");
  }
  return records;
}

std::vector<ShapeRecord> gen_synthetic_family(int n_subjects, int n_poses,
                                              int resolution, uint64_t seed) {
  FamilyConfig cfg;
  cfg.n_subjects = n_subjects;
  cfg.n_poses = n_poses;
  cfg.resolution = resolution;
  cfg.seed = seed;
  return gen_synthetic_family(cfg);
}

PairSample sample_pair(const std::vector<ShapeRecord>& dataset, Rng& rng,
                       PairKind kind) {
  const int n = static_cast<int>(dataset.size());
  std::vector<std::pair<int, int>> eligible;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool iso = dataset[i].subject_id == dataset[j].subject_id;
      if (kind == PairKind::isometric && !iso) continue;
      if (kind == PairKind::non_isometric && iso) continue;
      eligible.emplace_back(i, j);
    }
  if (eligible.empty()) {
    const char* name = kind == PairKind::any
                           ? "any"
                           : (kind == PairKind::isometric ? "isometric" : "non_isometric");
    throw ValidationError(std::string("sample_pair: no eligible pair of kind ") + name);
  }
  const auto [i, j] =
      eligible[rng.uniform_int(0, static_cast<int>(eligible.size()) - 1)];
  double alpha = rng.uniform();
  while (alpha == 0.0) alpha = rng.uniform();  // open interval (0,1)
  return PairSample{i, j, alpha, kind};
}

}  // namespace limp
