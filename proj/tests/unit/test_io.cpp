#include <doctest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "eigenmatch/io.hpp"
#include "eigenmatch/spectral.hpp"
#include "oracles.hpp"
#include "test_meshes.hpp"

using namespace eigenmatch;
namespace emt = eigenmatch::testing;

TEST_CASE("checksum: stable and content-sensitive") {
  const std::string dir = emt::scratch_dir("io");
  {
    std::ofstream out(dir + "/a.bin", std::ios::binary);
    out << "hello";
  }
  const uint64_t a1 = file_checksum(dir + "/a.bin");
  const uint64_t a2 = file_checksum(dir + "/a.bin");
  CHECK(a1 == a2);
  {
    std::ofstream out(dir + "/a.bin", std::ios::binary);
    out << "hellp";
  }
  CHECK(file_checksum(dir + "/a.bin") != a1);
  CHECK_THROWS_AS(file_checksum(dir + "/nope.bin"), IoError);
}

TEST_CASE("basis container: bit exact round trip") {
  const TriMesh mesh = emt::make_bumpy_sphere(1);
  BasisFile file;
  file.mesh_checksum = 0xdeadbeefcafef00dull;
  file.basis = compute_basis(mesh, 8);
  file.signature = hks_derivative_signature(file.basis, 3, 8);

  const std::string path = emt::scratch_dir("io") + "/shape.emb";
  write_basis_file(path, file);
  const BasisFile back = read_basis_file(path);

  CHECK(back.mesh_checksum == file.mesh_checksum);
  CHECK(back.basis.count() == 8);
  CHECK((back.basis.eigenvalues - file.basis.eigenvalues).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((back.basis.eigenfunctions - file.basis.eigenfunctions)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((back.basis.mass.diagonal - file.basis.mass.diagonal)
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((back.signature.values - file.signature.values).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((back.signature.times - file.signature.times).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.basis.near_degenerate == file.basis.near_degenerate);

  CHECK_THROWS_AS(read_basis_file(emt::scratch_dir("io") + "/none.emb"), IoError);
}

TEST_CASE("basis container: wrong magic and truncation rejected") {
  const std::string dir = emt::scratch_dir("io");
  {
    std::ofstream out(dir + "/bad.emb", std::ios::binary);
    out << "NOPE-not-a-container";
  }
  CHECK_THROWS_AS(read_basis_file(dir + "/bad.emb"), IoError);

  // a valid container cut short mid-payload
  BasisFile file;
  file.basis = compute_basis(emt::make_icosphere(1), 4);
  file.signature = hks_derivative_signature(file.basis, 2, 4);
  write_basis_file(dir + "/full.emb", file);
  std::ifstream in(dir + "/full.emb", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  {
    std::ofstream out(dir + "/cut.emb", std::ios::binary);
    out.write(bytes.data(), bytes.size() / 2);
  }
  CHECK_THROWS_AS(read_basis_file(dir + "/cut.emb"), IoError);
}

TEST_CASE("moments container: bit exact round trip") {
  MomentsFile file;
  file.mesh_checksum = 42;
  file.moments = oracle::random_moments(5, 2, 3, 77);
  file.moments.weights.threshold = 0.0123;

  const std::string path = emt::scratch_dir("io") + "/shape.emm";
  write_moments_file(path, file);
  const MomentsFile back = read_moments_file(path);

  CHECK(back.mesh_checksum == 42);
  CHECK(back.moments.N == 5);
  CHECK(back.moments.P == 2);
  CHECK(back.moments.Q == 3);
  CHECK(back.moments.alpha == file.moments.alpha);
  CHECK(back.moments.weights.threshold == 0.0123);
  CHECK(back.moments.mu.data() == file.moments.mu.data());
  CHECK(back.moments.xi.data() == file.moments.xi.data());
  CHECK(back.moments.xiS.data() == file.moments.xiS.data());
  CHECK((back.moments.muS - file.moments.muS).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("match report: json round trip of params and config") {
  const MomentSet m = oracle::random_moments(4, 2, 2, 5);
  MatchResult result = match_moment_sets(m, m);
  result.degeneracy_x.emplace_back(1, 2);

  ConfigEcho echo;
  echo.N = 4;
  echo.h = 12;
  echo.Q = 2;
  echo.beta = 0.25;
  echo.K = 16;

  const std::string dir = emt::scratch_dir("io");
  write_match_report_json(dir + "/report.json", result, echo);
  write_match_report_text(dir + "/report.txt", result, echo);

  const MatchReport back = read_match_report_json(dir + "/report.json");
  CHECK(back.params == result.params);
  CHECK(back.cost.total == result.cost.total);
  CHECK(back.config.N == 4);
  CHECK(back.config.h == 12);
  CHECK(back.config.Q == 2);
  CHECK(back.config.beta == 0.25);
  CHECK(back.config.K == 16);

  // json holds every candidate with both cost layers
  std::ifstream in(dir + "/report.json");
  nlohmann::json j;
  in >> j;
  CHECK(j.at("candidates").size() == result.candidates.size());
  CHECK(j.at("near_degenerate_x").size() == 1);
}

TEST_CASE("correspondence table format") {
  const std::string path = emt::scratch_dir("io") + "/table.txt";
  write_correspondence_table(path, {{0, 5, 0.125}, {7, 2, 1.5}});
  std::ifstream in(path);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  CHECK(l1 == "0 5 0.125");
  CHECK(l2 == "7 2 1.5");
}

TEST_CASE("diverging palette: neutral zero, mirror symmetry, monotonicity") {
  const auto neutral = diverging_color(0.0, 1.0);
  CHECK(neutral == std::array<int, 3>{255, 255, 255});

  for (double v : {0.2, 0.55, 1.0}) {
    const auto hot = diverging_color(v, 1.0);
    const auto cold = diverging_color(-v, 1.0);
    CHECK(hot[0] == cold[2]);  // red of +v equals blue of -v
    CHECK(hot[1] == cold[1]);
    CHECK(hot[2] == cold[0]);
  }

  // red channel non-increasing toward negative, blue toward positive
  int last_blue = 256;
  for (double v = -1.0; v <= 1.0; v += 0.125) {
    const auto c = diverging_color(v, 1.0);
    CHECK(c[2] <= last_blue);
    last_blue = c[2];
  }
}

TEST_CASE("colored ply export: constant field is uniformly neutral") {
  const TriMesh mesh = emt::make_square();
  const std::string path = emt::scratch_dir("io") + "/flat.ply";
  export_colored_ply(path, mesh, Eigen::VectorXd::Constant(4, 3.25));

  std::ifstream in(path);
  std::string line;
  int color_rows = 0;
  bool in_vertices = false;
  while (std::getline(in, line)) {
    if (line == "end_header") {
      in_vertices = true;
      continue;
    }
    if (in_vertices && color_rows < 4) {
      CHECK(line.substr(line.size() - 12) == " 255 255 255");
      ++color_rows;
    }
  }
  CHECK(color_rows == 4);

  // the export parses back as a valid mesh
  const TriMesh again = load_mesh(path, MeshFormat::PlyAscii);
  CHECK(again.vertex_count() == 4);
  CHECK(again.face_count() == 2);
}

TEST_CASE("colored ply export: negated field mirrors the palette") {
  const TriMesh mesh = emt::make_square();
  Eigen::VectorXd f(4);
  f << -1.0, -0.25, 0.5, 1.0;
  const std::string dir = emt::scratch_dir("io");
  export_colored_ply(dir + "/pos.ply", mesh, f);
  export_colored_ply(dir + "/neg.ply", mesh, -f);

  auto read_colors = [](const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::vector<std::array<int, 3>> colors;
    bool body = false;
    while (std::getline(in, line)) {
      if (line == "end_header") {
        body = true;
        continue;
      }
      if (body && colors.size() < 4) {
        std::istringstream ss(line);
        double x, y, z;
        int r, g, b;
        ss >> x >> y >> z >> r >> g >> b;
        colors.push_back({r, g, b});
      }
    }
    return colors;
  };
  const auto pos = read_colors(dir + "/pos.ply");
  const auto neg = read_colors(dir + "/neg.ply");
  for (int v = 0; v < 4; ++v) {
    CHECK(pos[v][0] == neg[v][2]);
    CHECK(pos[v][1] == neg[v][1]);
    CHECK(pos[v][2] == neg[v][0]);
  }
}

TEST_CASE("segment export lists both vertex blocks and line elements") {
  const TriMesh a = emt::make_square();
  const TriMesh b = emt::make_equilateral();
  const std::string path = emt::scratch_dir("io") + "/segs.obj";
  export_correspondence_segments(path, a, b, {{0, 1, 0.5}, {3, 2, 0.25}});
  std::ifstream in(path);
  std::string line;
  int verts = 0, lines = 0;
  while (std::getline(in, line)) {
    if (line.rfind("v ", 0) == 0) ++verts;
    if (line.rfind("l ", 0) == 0) ++lines;
  }
  CHECK(verts == 7);
  CHECK(lines == 2);
}
