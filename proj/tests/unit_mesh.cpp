#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "limp/mesh.hpp"
#include "limp/rng.hpp"
#include "limp/shapes.hpp"
#include "test_helpers.hpp"

using namespace limp;
using limp::test::write_temp;

TEST_CASE("load_off parses two triangles on a unit square") {
  const std::string path = write_temp(
      "square.off",
      "OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n");
  const TriMesh mesh = load_off(path);
  CHECK(mesh.n() == 4);
  CHECK(mesh.m() == 2);
  CHECK(mesh.vertices[2][0] == doctest::Approx(1.0));
}

TEST_CASE("load_off rejects out-of-range face index") {
  const std::string path = write_temp(
      "bad_index.off", "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 9\n");
  try {
    load_off(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("index out of range") != std::string::npos);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("load_off reports parse errors with line numbers") {
  const std::string path =
      write_temp("bad_tok.off", "OFF\n4 1 0\n0 0 zap\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n");
  try {
    load_off(path);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("icosphere generator and OFF round trip") {
  const TriMesh ico = make_icosphere(3);
  CHECK(ico.n() == 642);
  CHECK(ico.m() == 1280);
  const std::string path = write_temp("ico.off", "");
  save_off(ico, path);
  const TriMesh back = load_off(path);
  REQUIRE(back.n() == 642);
  CHECK(back.m() == 1280);
  double max_rel = 0.0;
  for (int i = 0; i < ico.n(); ++i)
    max_rel = std::max(max_rel, norm(ico.vertices[i] - back.vertices[i]));
  CHECK(max_rel <= 1e-9);
}

TEST_CASE("save_off writes COFF with the white-to-red map") {
  const TriMesh mesh = make_unit_square();
  const std::vector<double> zeros(4, 0.0);
  const std::string path = write_temp("white.coff", "");
  save_off(mesh, path, &zeros);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "COFF");
  std::string counts, v0;
  std::getline(in, counts);
  std::getline(in, v0);
  // Scalar 0 -> white: r=g=b=255.
  CHECK(v0.find("255 255 255 255") != std::string::npos);

  const std::vector<double> ones(4, 1.0);
  save_off(mesh, path, &ones);
  std::ifstream in2(path);
  std::getline(in2, header);
  std::getline(in2, counts);
  std::getline(in2, v0);
  // Scalar 1 -> red: 255 0 0.
  CHECK(v0.find("255 0 0 255") != std::string::npos);

  const TriMesh back = load_off(path);  // COFF is loadable
  CHECK(back.n() == 4);
}

TEST_CASE("shape_diameter analytic values") {
  CHECK(shape_diameter(make_unit_square()) == doctest::Approx(std::sqrt(2.0)));
  const double d = shape_diameter(make_icosphere(3));
  CHECK(d == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("degenerate repeated vertices: zero diameter errors in mask") {
  TriMesh mesh;
  mesh.vertices = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  mesh.faces = {{0, 1, 2}};
  CHECK(shape_diameter(mesh) == 0.0);
  CHECK_THROWS_AS(neighborhood_mask(mesh, 0.1), ValidationError);
}

TEST_CASE("neighborhood_mask matches a brute-force ball query") {
  const TriMesh grid = make_grid(10);
  const double frac = 0.15;
  const NeighborhoodMask mask = neighborhood_mask(grid, frac);
  const double radius = frac * shape_diameter(grid);
  CHECK(mask.radius == doctest::Approx(radius));
  for (int i = 0; i < grid.n(); ++i) {
    int count = 0, brute = 0;
    for (int j = 0; j < grid.n(); ++j) {
      if (mask.at(i, j)) ++count;
      if (i != j && norm(grid.vertices[i] - grid.vertices[j]) <= radius) ++brute;
    }
    CHECK(count == brute);
  }
}

TEST_CASE("neighborhood_mask symmetry, false diagonal, radius >= 1 full") {
  const TriMesh tube = limp::test::jittered_tube(6, 8, 0.02, 99);
  const NeighborhoodMask mask = neighborhood_mask(tube, 0.2);
  for (int i = 0; i < tube.n(); ++i) {
    CHECK(!mask.at(i, i));
    for (int j = 0; j < tube.n(); ++j) CHECK(mask.at(i, j) == mask.at(j, i));
  }
  const NeighborhoodMask full = neighborhood_mask(tube, 1.000001);
  for (int i = 0; i < tube.n(); ++i)
    for (int j = 0; j < tube.n(); ++j)
      if (i != j) CHECK(full.at(i, j));
}

TEST_CASE("validate_mesh names offending faces") {
  TriMesh mesh = make_unit_square();
  mesh.faces.push_back({1, 1, 2});
  try {
    validate_mesh(mesh);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("2 (repeated vertex)") != std::string::npos);
  }
}

TEST_CASE("grid fixture geometry") {
  const TriMesh grid = make_grid(20);
  CHECK(grid.n() == 400);
  CHECK(grid.m() == 2 * 19 * 19);
  // Equilateral cells: every edge of face 0 has length h.
  const double h = 1.0 / 19.0;
  const auto& f = grid.faces[0];
  for (int c = 0; c < 3; ++c) {
    const double len = norm(grid.vertices[f[c]] - grid.vertices[f[(c + 1) % 3]]);
    CHECK(len == doctest::Approx(h).epsilon(1e-12));
  }
}
