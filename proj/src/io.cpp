#include "eigenmatch/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "eigenmatch/errors.hpp"

namespace eigenmatch {

namespace {

using ordered_json = nlohmann::ordered_json;

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64s(std::ostream& out, const double* data, size_t count) {
  out.write(reinterpret_cast<const char*>(data), count * sizeof(double));
}

uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("unexpected end of container file");
  return v;
}
uint64_t read_u64(std::istream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("unexpected end of container file");
  return v;
}
void read_f64s(std::istream& in, double* data, size_t count) {
  in.read(reinterpret_cast<char*>(data), count * sizeof(double));
  if (!in) throw IoError("unexpected end of container file");
}

void expect_magic(std::istream& in, const char expected[4], const std::string& what) {
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, expected, 4) != 0)
    throw IoError("not a " + what + " container");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ordered_json params_to_json(const MatchParams& p) {
  ordered_json j;
  j["signs"] = p.signs;
  // 1-based in reports to match the usual eigenfunction numbering
  std::vector<int> perm1;
  perm1.reserve(p.perm.size());
  for (int v : p.perm) perm1.push_back(v + 1);
  j["perm"] = perm1;
  return j;
}

ordered_json config_to_json(const ConfigEcho& c) {
  ordered_json j;
  j["num_eigs"] = c.N;
  j["hks_eigs"] = c.h;
  j["weight_functions"] = c.P;
  j["hks_samples"] = c.Q;
  j["beta"] = c.beta;
  j["candidates"] = c.K;
  return j;
}

}  // namespace

uint64_t fnv1a64(const void* data, size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t file_checksum(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for checksum: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return fnv1a64(bytes.data(), bytes.size());
}

void write_basis_file(const std::string& path, const BasisFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write basis file: " + path);
  const SpectralBasis& b = file.basis;
  const int nv = b.vertex_count(), h = b.count(), q = file.signature.count();
  if (file.signature.vertex_count() != nv && q > 0)
    throw MeshMismatchError("signature does not match basis vertex count");

  out.write("EMB1", 4);
  write_u32(out, 1);
  write_u64(out, file.mesh_checksum);
  write_u32(out, static_cast<uint32_t>(nv));
  write_u32(out, static_cast<uint32_t>(h));
  write_u32(out, static_cast<uint32_t>(q));
  write_f64s(out, b.eigenvalues.data(), h);
  write_f64s(out, b.mass.diagonal.data(), nv);
  // vertex-major: all eigenfunction values of vertex 0, then vertex 1, ...
  for (int v = 0; v < nv; ++v)
    for (int i = 0; i < h; ++i) {
      const double x = b.eigenfunctions(v, i);
      write_f64s(out, &x, 1);
    }
  write_f64s(out, file.signature.times.data(), q);
  for (int v = 0; v < nv; ++v)
    for (int i = 0; i < q; ++i) {
      const double x = file.signature.values(v, i);
      write_f64s(out, &x, 1);
    }
  write_u32(out, static_cast<uint32_t>(b.near_degenerate.size()));
  for (auto [i, j] : b.near_degenerate) {
    write_u32(out, static_cast<uint32_t>(i));
    write_u32(out, static_cast<uint32_t>(j));
  }
  if (!out) throw IoError("failed while writing basis file: " + path);
}

BasisFile read_basis_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open basis file: " + path);
  expect_magic(in, "EMB1", "basis");
  if (read_u32(in) != 1) throw IoError("unsupported basis container version");

  BasisFile file;
  file.mesh_checksum = read_u64(in);
  const uint32_t nv = read_u32(in);
  const uint32_t h = read_u32(in);
  const uint32_t q = read_u32(in);

  SpectralBasis& b = file.basis;
  b.eigenvalues.resize(h);
  read_f64s(in, b.eigenvalues.data(), h);
  b.mass.diagonal.resize(nv);
  read_f64s(in, b.mass.diagonal.data(), nv);
  b.eigenfunctions.resize(nv, h);
  for (uint32_t v = 0; v < nv; ++v)
    for (uint32_t i = 0; i < h; ++i) read_f64s(in, &b.eigenfunctions(v, i), 1);
  file.signature.times.resize(q);
  read_f64s(in, file.signature.times.data(), q);
  file.signature.values.resize(nv, q);
  for (uint32_t v = 0; v < nv; ++v)
    for (uint32_t i = 0; i < q; ++i) read_f64s(in, &file.signature.values(v, i), 1);
  const uint32_t ndeg = read_u32(in);
  for (uint32_t i = 0; i < ndeg; ++i) {
    const int a = static_cast<int>(read_u32(in));
    const int bb = static_cast<int>(read_u32(in));
    b.near_degenerate.emplace_back(a, bb);
  }
  return file;
}

void write_moments_file(const std::string& path, const MomentsFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write moments file: " + path);
  const MomentSet& m = file.moments;
  out.write("EMM1", 4);
  write_u32(out, 1);
  write_u64(out, file.mesh_checksum);
  write_u32(out, static_cast<uint32_t>(m.N));
  write_u32(out, static_cast<uint32_t>(m.P));
  write_u32(out, static_cast<uint32_t>(m.Q));
  const double th = m.weights.threshold;
  write_f64s(out, &th, 1);
  write_f64s(out, &m.alpha, 1);
  write_f64s(out, m.mu.data().data(), m.mu.data().size());
  write_f64s(out, m.xi.data().data(), m.xi.data().size());
  write_f64s(out, m.muS.data(), static_cast<size_t>(m.N) * m.Q);
  write_f64s(out, m.xiS.data().data(), m.xiS.data().size());
  if (!out) throw IoError("failed while writing moments file: " + path);
}

MomentsFile read_moments_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open moments file: " + path);
  expect_magic(in, "EMM1", "moments");
  if (read_u32(in) != 1) throw IoError("unsupported moments container version");

  MomentsFile file;
  file.mesh_checksum = read_u64(in);
  MomentSet& m = file.moments;
  m.N = static_cast<int>(read_u32(in));
  m.P = static_cast<int>(read_u32(in));
  m.Q = static_cast<int>(read_u32(in));
  read_f64s(in, &m.weights.threshold, 1);
  m.weights.P = m.P;
  read_f64s(in, &m.alpha, 1);
  m.mu = Tensor3(m.N);
  read_f64s(in, m.mu.data().data(), m.mu.data().size());
  m.xi = Tensor4(m.N, m.P);
  read_f64s(in, m.xi.data().data(), m.xi.data().size());
  m.muS.resize(m.N, m.Q);
  read_f64s(in, m.muS.data(), static_cast<size_t>(m.N) * m.Q);
  m.xiS = SigTensor4(m.N, m.Q, m.P);
  read_f64s(in, m.xiS.data().data(), m.xiS.data().size());
  return file;
}

void write_match_report_json(const std::string& path, const MatchResult& result,
                             const ConfigEcho& config) {
  ordered_json j;
  j["config"] = config_to_json(config);
  j["params"] = params_to_json(result.params);
  j["alpha"] = result.cost.alpha;
  j["costs"] = {{"mu", result.cost.c_mu},
                {"muS", result.cost.c_muS},
                {"xi", result.cost.c_xi},
                {"xiS", result.cost.c_xiS},
                {"total", result.cost.total}};
  j["undetermined"] = result.undetermined;
  ordered_json degx = ordered_json::array(), degy = ordered_json::array();
  for (auto [a, b] : result.degeneracy_x) degx.push_back({a, b});
  for (auto [a, b] : result.degeneracy_y) degy.push_back({a, b});
  j["near_degenerate_x"] = degx;
  j["near_degenerate_y"] = degy;
  ordered_json cands = ordered_json::array();
  for (const Candidate& c : result.candidates) {
    ordered_json jc = params_to_json(c.params);
    jc["cost_cs"] = c.cost_cs;
    jc["total"] = c.total;
    cands.push_back(jc);
  }
  j["candidates"] = cands;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write match report: " + path);
  out << j.dump(2) << "\n";
}

void write_match_report_text(const std::string& path, const MatchResult& result,
                             const ConfigEcho& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write match report: " + path);
  out << "eigenfunction match report\n";
  out << "config: N=" << config.N << " h=" << config.h << " P=" << config.P
      << " Q=" << config.Q << " beta=" << format_double(config.beta)
      << " K=" << config.K << "\n";
  out << "signs:";
  for (int s : result.params.signs) out << (s > 0 ? " +1" : " -1");
  out << "\nperm: ";
  for (size_t i = 0; i < result.params.perm.size(); ++i)
    out << (i ? " " : "") << result.params.perm[i] + 1;
  out << "\nalpha: " << format_double(result.cost.alpha) << "\n";
  out << "cost mu:   " << format_double(result.cost.c_mu) << "\n";
  out << "cost muS:  " << format_double(result.cost.c_muS) << "\n";
  out << "cost xi:   " << format_double(result.cost.c_xi) << "\n";
  out << "cost xiS:  " << format_double(result.cost.c_xiS) << "\n";
  out << "cost total: " << format_double(result.cost.total) << "\n";
  if (!result.undetermined.empty()) {
    out << "undetermined signs (diagonal moment vanished):";
    for (int i : result.undetermined) out << " " << i + 1;
    out << "\n";
  }
  for (auto [a, b] : result.degeneracy_x)
    out << "warning: near-degenerate eigenvalues " << a + 1 << "," << b + 1
        << " on shape X\n";
  for (auto [a, b] : result.degeneracy_y)
    out << "warning: near-degenerate eigenvalues " << a + 1 << "," << b + 1
        << " on shape Y\n";
  out << "candidates (" << result.candidates.size() << "):\n";
  for (const Candidate& c : result.candidates) {
    out << "  signs";
    for (int s : c.params.signs) out << (s > 0 ? " +" : " -");
    out << " perm";
    for (int v : c.params.perm) out << " " << v + 1;
    out << " cs=" << format_double(c.cost_cs)
        << " total=" << format_double(c.total) << "\n";
  }
}

MatchReport read_match_report_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open match report: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError(std::string("malformed match report: ") + e.what());
  }
  MatchReport report;
  report.params.signs = j.at("params").at("signs").get<std::vector<int>>();
  for (int v : j.at("params").at("perm").get<std::vector<int>>())
    report.params.perm.push_back(v - 1);
  report.cost.alpha = j.at("alpha").get<double>();
  report.cost.c_mu = j.at("costs").at("mu").get<double>();
  report.cost.c_muS = j.at("costs").at("muS").get<double>();
  report.cost.c_xi = j.at("costs").at("xi").get<double>();
  report.cost.c_xiS = j.at("costs").at("xiS").get<double>();
  report.cost.total = j.at("costs").at("total").get<double>();
  const auto& c = j.at("config");
  report.config.N = c.at("num_eigs").get<int>();
  report.config.h = c.at("hks_eigs").get<int>();
  report.config.P = c.at("weight_functions").get<int>();
  report.config.Q = c.at("hks_samples").get<int>();
  report.config.beta = c.at("beta").get<double>();
  report.config.K = c.at("candidates").get<int>();
  return report;
}

void write_correspondence_table(const std::string& path,
                                const std::vector<PointMatchRow>& rows,
                                const std::string& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write correspondence table: " + path);
  if (!header.empty()) out << "# " << header << "\n";
  for (const PointMatchRow& r : rows)
    out << r.src << " " << r.dst << " " << format_double(r.distance) << "\n";
}

std::array<int, 3> diverging_color(double value, double bound) {
  double t = bound > 0.0 ? value / bound : 0.0;
  t = std::clamp(t, -1.0, 1.0);
  // blue (cold) through white to red (hot)
  double r = 1.0, g = 1.0, b = 1.0;
  if (t >= 0.0) {
    g -= t;
    b -= t;
  } else {
    r += t;
    g += t;
  }
  auto to_byte = [](double x) {
    return std::clamp(static_cast<int>(std::lround(x * 255.0)), 0, 255);
  };
  return {to_byte(r), to_byte(g), to_byte(b)};
}

void export_colored_ply(const std::string& path, const TriMesh& mesh,
                        const Eigen::VectorXd& field) {
  if (field.size() != mesh.vertex_count())
    throw DimensionMismatchError("field length does not match vertex count");
  const double lo = field.minCoeff(), hi = field.maxCoeff();
  // constant field has no sign structure; render it neutral
  double bound = std::max(std::abs(lo), std::abs(hi));
  if (hi - lo <= 1e-15 * std::max(1.0, bound)) bound = 0.0;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write colored PLY: " + path);
  out << "ply\nformat ascii 1.0\n";
  out << "comment diverging palette, symmetric bound " << format_double(bound)
      << "\n";
  out << "element vertex " << mesh.vertex_count() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "element face " << mesh.face_count() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const auto color = diverging_color(field[v], bound);
    out << format_double(mesh.vertices(v, 0)) << " "
        << format_double(mesh.vertices(v, 1)) << " "
        << format_double(mesh.vertices(v, 2)) << " " << color[0] << " "
        << color[1] << " " << color[2] << "\n";
  }
  for (int f = 0; f < mesh.face_count(); ++f)
    out << "3 " << mesh.faces(f, 0) << " " << mesh.faces(f, 1) << " "
        << mesh.faces(f, 2) << "\n";
}

void export_correspondence_segments(const std::string& path, const TriMesh& mesh_x,
                                    const TriMesh& mesh_y,
                                    const std::vector<PointMatchRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write segment export: " + path);
  out << "# correspondence segments: X vertices first, then Y\n";
  for (int v = 0; v < mesh_x.vertex_count(); ++v)
    out << "v " << format_double(mesh_x.vertices(v, 0)) << " "
        << format_double(mesh_x.vertices(v, 1)) << " "
        << format_double(mesh_x.vertices(v, 2)) << "\n";
  for (int v = 0; v < mesh_y.vertex_count(); ++v)
    out << "v " << format_double(mesh_y.vertices(v, 0)) << " "
        << format_double(mesh_y.vertices(v, 1)) << " "
        << format_double(mesh_y.vertices(v, 2)) << "\n";
  const int off = mesh_x.vertex_count();
  for (const PointMatchRow& r : rows)
    out << "l " << r.src + 1 << " " << off + r.dst + 1 << "\n";
}

}  // namespace eigenmatch
