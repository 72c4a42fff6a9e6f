#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "eigenmatch/correspondence.hpp"
#include "eigenmatch/io.hpp"
#include "eigenmatch/matching.hpp"
#include "eigenmatch/mesh.hpp"
#include "eigenmatch/moments.hpp"
#include "eigenmatch/spectral.hpp"

namespace fs = std::filesystem;
using namespace eigenmatch;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitUsage = 4;

struct Settings {
  int num_eigs = 10;    // N, matched band
  int hks_eigs = 30;    // h, eigenpairs for the basis and HKS
  int hks_samples = 6;  // Q
  double beta = 0.5;
  int candidates = 32;  // K
  std::string out_dir = ".";
  std::string points = "fps:20";
};

// flat key=value file; '#' starts a comment
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

// config file fills anything the command line left at its default
void apply_config(Settings& s, const std::map<std::string, std::string>& kv,
                  const CLI::App& cmd) {
  auto use_file = [&cmd](const std::string& flag) {
    const CLI::Option* opt = cmd.get_option_no_throw("--" + flag);
    return opt == nullptr || opt->count() == 0;
  };
  for (const auto& [key, value] : kv) {
    try {
      if (key == "num_eigs" && use_file("num-eigs")) s.num_eigs = std::stoi(value);
      else if (key == "hks_eigs" && use_file("hks-eigs")) s.hks_eigs = std::stoi(value);
      else if (key == "hks_samples" && use_file("hks-samples"))
        s.hks_samples = std::stoi(value);
      else if (key == "beta" && use_file("beta")) s.beta = std::stod(value);
      else if (key == "candidates" && use_file("candidates"))
        s.candidates = std::stoi(value);
      else if (key == "out_dir" && use_file("out-dir")) s.out_dir = value;
      else if (key == "points" && use_file("points")) s.points = value;
      else if (key != "num_eigs" && key != "hks_eigs" && key != "hks_samples" &&
               key != "beta" && key != "candidates" && key != "out_dir" &&
               key != "points")
        throw CLI::ValidationError("config", "unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw CLI::ValidationError("config", "bad value for " + key + ": " + value);
    }
  }
}

void check_settings(const Settings& s) {
  if (s.num_eigs < 1 || s.num_eigs > s.hks_eigs)
    throw CLI::ValidationError("settings", "need 0 < num-eigs <= hks-eigs");
  if (s.hks_samples < 1)
    throw CLI::ValidationError("settings", "hks-samples must be >= 1");
  if (s.beta < 0.0 || s.beta > 1.0)
    throw CLI::ValidationError("settings", "beta must lie in [0, 1]");
  if (s.candidates < 1)
    throw CLI::ValidationError("settings", "candidates must be >= 1");
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

ConfigEcho make_echo(const Settings& s) {
  ConfigEcho echo;
  echo.N = s.num_eigs;
  echo.h = s.hks_eigs;
  echo.P = 2;
  echo.Q = s.hks_samples;
  echo.beta = s.beta;
  echo.K = s.candidates;
  return echo;
}

struct DecomposedShape {
  BasisFile basis;
  MomentsFile moments;
};

// Computes (or reuses cached) basis + moments files for a mesh.
DecomposedShape decompose_shape(const std::string& mesh_path, const Settings& s,
                                bool* cache_hit = nullptr) {
  const uint64_t checksum = file_checksum(mesh_path);
  fs::create_directories(s.out_dir);
  const std::string stem = stem_of(mesh_path);
  const std::string basis_path = s.out_dir + "/" + stem + ".emb";
  const std::string moments_path = s.out_dir + "/" + stem + ".emm";

  if (fs::exists(basis_path) && fs::exists(moments_path)) {
    try {
      BasisFile cached = read_basis_file(basis_path);
      MomentsFile cached_m = read_moments_file(moments_path);
      if (cached.mesh_checksum == checksum &&
          cached.basis.count() == s.hks_eigs &&
          cached.signature.count() == s.hks_samples &&
          cached_m.mesh_checksum == checksum &&
          cached_m.moments.N == s.num_eigs) {
        if (cache_hit) *cache_hit = true;
        return {std::move(cached), std::move(cached_m)};
      }
    } catch (const IoError&) {
      // unreadable cache: recompute below
    }
  }

  const TriMesh mesh = load_mesh(mesh_path);
  DecomposedShape shape;
  shape.basis.mesh_checksum = checksum;
  shape.basis.basis = compute_basis(mesh, s.hks_eigs);
  shape.basis.signature =
      hks_derivative_signature(shape.basis.basis, s.hks_samples, s.hks_eigs);
  shape.moments.mesh_checksum = checksum;
  shape.moments.moments = compute_moment_set(mesh, shape.basis.basis,
                                             shape.basis.signature, s.num_eigs);
  write_basis_file(basis_path, shape.basis);
  write_moments_file(moments_path, shape.moments);
  if (cache_hit) *cache_hit = false;
  return shape;
}

std::vector<int> resolve_points(const std::string& selector, const TriMesh& mesh) {
  if (selector.rfind("fps:", 0) == 0) {
    const int k = std::stoi(selector.substr(4));
    return farthest_point_sample(mesh, k);
  }
  std::ifstream in(selector);
  if (!in) throw IoError("cannot open points file: " + selector);
  std::vector<int> pts;
  int v;
  while (in >> v) {
    if (v < 0 || v >= mesh.vertex_count())
      throw DimensionMismatchError("point index out of range: " + std::to_string(v));
    pts.push_back(v);
  }
  if (pts.empty()) throw IoError("points file is empty: " + selector);
  return pts;
}

int run(int argc, char** argv) {
  CLI::App app{"LBO eigenspace alignment via high-order eigenfunction statistics"};
  app.require_subcommand(1);

  Settings s;
  std::string config_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "flat key=value config file");
    cmd->add_option("--num-eigs", s.num_eigs, "matched eigenfunctions N");
    cmd->add_option("--hks-eigs", s.hks_eigs, "basis size h for HKS");
    cmd->add_option("--hks-samples", s.hks_samples, "signature sample count Q");
    cmd->add_option("--beta", s.beta, "descriptor blend in [0,1]");
    cmd->add_option("--candidates", s.candidates, "sign candidate list size K");
    cmd->add_option("--out-dir", s.out_dir, "output directory");
  };

  std::string mesh_path, mesh_path_y, basis_x, basis_y, report_path;
  std::string field_file, out_path, segments_path;
  int field_index = -1;

  CLI::App* decompose = app.add_subcommand(
      "decompose", "eigendecompose a mesh and persist basis + moments");
  decompose->add_option("mesh", mesh_path, "OFF or ascii PLY mesh")->required();
  add_common(decompose);

  CLI::App* match = app.add_subcommand(
      "match", "align two decomposed shapes and write a match report");
  match->add_option("basis_x", basis_x, "first shape .emb file")->required();
  match->add_option("basis_y", basis_y, "second shape .emb file")->required();
  add_common(match);

  CLI::App* correspond = app.add_subcommand(
      "correspond", "match feature points through a computed alignment");
  correspond->add_option("mesh_x", mesh_path, "first mesh")->required();
  correspond->add_option("mesh_y", mesh_path_y, "second mesh")->required();
  correspond->add_option("report", report_path, "match report JSON")->required();
  correspond->add_option("--points", s.points, "vertex list file or fps:<k>");
  correspond->add_option("--segments", segments_path,
                         "also export correspondence line segments (OBJ)");
  add_common(correspond);

  CLI::App* exportc = app.add_subcommand(
      "export-colored", "write a mesh as ascii PLY colored by a scalar field");
  exportc->add_option("mesh", mesh_path, "OFF or ascii PLY mesh")->required();
  exportc->add_option("--basis", basis_x, "basis file to take fields from");
  exportc->add_option("--field-index", field_index,
                      "eigenfunction index (1-based) in the basis file");
  exportc->add_option("--field-file", field_file, "text file of per-vertex values");
  exportc->add_option("-o,--output", out_path, "output PLY path")->required();
  add_common(exportc);

  app.parse(argc, argv);
  CLI::App* active = app.get_subcommands().front();
  if (!config_path.empty())
    apply_config(s, read_config_file(config_path), *active);
  check_settings(s);

  if (decompose->parsed()) {
    bool cache_hit = false;
    decompose_shape(mesh_path, s, &cache_hit);
    const std::string stem = stem_of(mesh_path);
    std::cout << (cache_hit ? "cache hit: " : "wrote: ") << s.out_dir << "/"
              << stem << ".emb and " << stem << ".emm\n";
    return kExitOk;
  }

  if (match->parsed()) {
    const BasisFile bx = read_basis_file(basis_x);
    const BasisFile by = read_basis_file(basis_y);
    auto moments_path = [](const std::string& p) {
      return fs::path(p).replace_extension(".emm").string();
    };
    const MomentsFile mx = read_moments_file(moments_path(basis_x));
    const MomentsFile my = read_moments_file(moments_path(basis_y));
    if (mx.moments.N != my.moments.N)
      throw DimensionMismatchError("moment sets disagree on N");

    MatchOptions opts;
    opts.K = s.candidates;
    MatchResult result = match_moment_sets(mx.moments, my.moments, opts);
    const int N = mx.moments.N;
    for (auto [a, b] : bx.basis.near_degenerate)
      if (a < N && b < N) result.degeneracy_x.emplace_back(a, b);
    for (auto [a, b] : by.basis.near_degenerate)
      if (a < N && b < N) result.degeneracy_y.emplace_back(a, b);

    fs::create_directories(s.out_dir);
    ConfigEcho echo = make_echo(s);
    echo.N = N;
    echo.h = bx.basis.count();
    echo.Q = mx.moments.Q;
    const std::string base = s.out_dir + "/match_" + stem_of(basis_x) + "_" +
                             stem_of(basis_y);
    write_match_report_json(base + ".json", result, echo);
    write_match_report_text(base + ".txt", result, echo);
    std::cout << "wrote: " << base << ".json\n";
    return kExitOk;
  }

  if (correspond->parsed()) {
    const MatchReport report = read_match_report_json(report_path);
    Settings derived = s;
    derived.num_eigs = report.config.N;
    derived.hks_eigs = report.config.h;
    derived.hks_samples = report.config.Q;

    const DecomposedShape sx = decompose_shape(mesh_path, derived);
    const DecomposedShape sy = decompose_shape(mesh_path_y, derived);
    const TriMesh mx = load_mesh(mesh_path);
    const TriMesh my = load_mesh(mesh_path_y);

    const int N = report.config.N;
    const DescriptorField fx = descriptor_field(
        sx.basis.basis, sx.basis.basis.eigenfunctions.leftCols(N),
        sx.basis.signature, s.beta);
    const DescriptorField fy = descriptor_field(
        sy.basis.basis, apply_match(sy.basis.basis, report.params, N),
        sy.basis.signature, s.beta);

    const std::vector<int> pts = resolve_points(s.points, mx);
    const auto matches = match_points(pts, fx, fy);

    std::vector<PointMatchRow> rows;
    rows.reserve(matches.size());
    for (const PointMatch& m : matches)
      rows.push_back(PointMatchRow{m.src, m.dst, m.distance});
    fs::create_directories(s.out_dir);
    const std::string table = s.out_dir + "/correspondence_" +
                              stem_of(mesh_path) + "_" + stem_of(mesh_path_y) +
                              ".txt";
    std::ostringstream echo;
    echo << "num_eigs=" << N << " hks_eigs=" << report.config.h
         << " hks_samples=" << report.config.Q << " beta=" << s.beta
         << " points=" << s.points;
    write_correspondence_table(table, rows, echo.str());
    if (!segments_path.empty())
      export_correspondence_segments(segments_path, mx, my, rows);
    std::cout << "wrote: " << table << "\n";
    return kExitOk;
  }

  if (exportc->parsed()) {
    const TriMesh mesh = load_mesh(mesh_path);
    Eigen::VectorXd field;
    if (!field_file.empty()) {
      std::ifstream in(field_file);
      if (!in) throw IoError("cannot open field file: " + field_file);
      std::vector<double> values;
      double v;
      while (in >> v) values.push_back(v);
      field = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
    } else if (field_index >= 1) {
      const std::string path = !basis_x.empty()
                                   ? basis_x
                                   : s.out_dir + "/" + stem_of(mesh_path) + ".emb";
      const BasisFile bf = read_basis_file(path);
      if (field_index > bf.basis.count())
        throw DimensionMismatchError("field index exceeds basis size");
      field = bf.basis.eigenfunctions.col(field_index - 1);
    } else {
      throw CLI::ValidationError("export-colored",
                                 "need --field-index or --field-file");
    }
    export_colored_ply(out_path, mesh, field);
    std::cout << "wrote: " << out_path << "\n";
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError& e) {
    CLI::App dummy;
    const int code = dummy.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DegenerateMeshError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const MeshMismatchError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DimensionMismatchError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DisconnectedMeshError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
