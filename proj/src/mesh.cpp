#include "eigenmatch/mesh.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

namespace eigenmatch {

namespace {

constexpr double kAreaTolFactor = 1e-12;    // of bbox_diag^2
constexpr double kEdgeTolFactor = 1e-12;    // of bbox_diag

// Locale-independent float/int tokenization over one line.
struct LineTokens {
  LineTokens(const std::string& line, long line_no) : line_no_(line_no) {
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) tokens_.push_back(tok);
  }

  size_t size() const { return tokens_.size(); }

  double number(size_t idx) const {
    const std::string& t = at(idx);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw ParseError("expected a number, got '" + t + "'", line_no_);
    return value;
  }

  long integer(size_t idx) const {
    const std::string& t = at(idx);
    long value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size())
      throw ParseError("expected an integer, got '" + t + "'", line_no_);
    return value;
  }

 private:
  const std::string& at(size_t idx) const {
    if (idx >= tokens_.size())
      throw ParseError("too few fields on line", line_no_);
    return tokens_[idx];
  }

  std::vector<std::string> tokens_;
  long line_no_;
};

// Returns the next content line, skipping blanks and '#' comments.
bool next_line(std::istream& in, std::string& line, long& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    return true;
  }
  return false;
}

double triangle_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                     const Eigen::Vector3d& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

double TriMesh::bbox_diagonal() const {
  if (vertices.rows() == 0) return 0.0;
  Eigen::Vector3d lo = vertices.colwise().minCoeff();
  Eigen::Vector3d hi = vertices.colwise().maxCoeff();
  return (hi - lo).norm();
}

void validate_mesh(const TriMesh& mesh) {
  const int nv = mesh.vertex_count();
  const int nf = mesh.face_count();
  const double diag = mesh.bbox_diagonal();
  const double area_tol = kAreaTolFactor * diag * diag;
  const double edge_tol = kEdgeTolFactor * diag;

  std::map<std::pair<int, int>, int> edge_use;
  for (int f = 0; f < nf; ++f) {
    const Eigen::Vector3i tri = mesh.faces.row(f);
    for (int c = 0; c < 3; ++c) {
      if (tri[c] < 0 || tri[c] >= nv)
        throw ParseError("face " + std::to_string(f) + " references vertex " +
                         std::to_string(tri[c]) + " outside [0, " +
                         std::to_string(nv) + ")");
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw DegenerateMeshError("repeated vertex index in face", f);

    const Eigen::Vector3d a = mesh.vertices.row(tri[0]);
    const Eigen::Vector3d b = mesh.vertices.row(tri[1]);
    const Eigen::Vector3d c = mesh.vertices.row(tri[2]);
    if (triangle_area(a, b, c) <= area_tol)
      throw DegenerateMeshError("zero-area face", f);
    for (int e = 0; e < 3; ++e) {
      int i = tri[e], j = tri[(e + 1) % 3];
      if ((mesh.vertices.row(i) - mesh.vertices.row(j)).norm() <= edge_tol)
        throw DegenerateMeshError("zero-length edge", f);
      auto key = std::minmax(i, j);
      if (++edge_use[{key.first, key.second}] > 2)
        throw DegenerateMeshError("non-manifold edge (" + std::to_string(i) +
                                      ", " + std::to_string(j) + ")",
                                  f);
    }
  }
}

TriMesh parse_off(std::istream& in) {
  std::string line;
  long line_no = 0;
  if (!next_line(in, line, line_no)) throw ParseError("empty OFF file");
  {
    std::istringstream ss(line);
    std::string magic;
    ss >> magic;
    if (magic != "OFF") throw ParseError("missing OFF header", line_no);
  }
  if (!next_line(in, line, line_no)) throw ParseError("missing counts line");
  LineTokens counts(line, line_no);
  const long nv = counts.integer(0);
  const long nf = counts.integer(1);
  if (nv < 0 || nf < 0) throw ParseError("negative counts", line_no);

  TriMesh mesh;
  mesh.vertices.resize(nv, 3);
  for (long v = 0; v < nv; ++v) {
    if (!next_line(in, line, line_no))
      throw ParseError("unexpected end of file in vertex block", line_no);
    LineTokens tok(line, line_no);
    // tokens may throw: keep them out of the comma initializer
    const double x = tok.number(0), y = tok.number(1), z = tok.number(2);
    mesh.vertices.row(v) << x, y, z;
  }
  mesh.faces.resize(nf, 3);
  for (long f = 0; f < nf; ++f) {
    if (!next_line(in, line, line_no))
      throw ParseError("unexpected end of file in face block", line_no);
    LineTokens tok(line, line_no);
    if (tok.integer(0) != 3)
      throw ParseError("only triangular faces are supported", line_no);
    const int a = static_cast<int>(tok.integer(1));
    const int b = static_cast<int>(tok.integer(2));
    const int c = static_cast<int>(tok.integer(3));
    mesh.faces.row(f) << a, b, c;
  }
  validate_mesh(mesh);
  return mesh;
}

TriMesh parse_ply_ascii(std::istream& in) {
  std::string line;
  long line_no = 0;
  if (!next_line(in, line, line_no) || line.substr(0, 3) != "ply")
    throw ParseError("missing ply header", line_no);

  long nv = -1, nf = -1;
  int vertex_props = 0;
  int xi = -1, yi = -1, zi = -1;
  bool ascii = false;
  std::string current_element;

  while (true) {
    if (!next_line(in, line, line_no))
      throw ParseError("unexpected end of header", line_no);
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw == "comment") continue;
    if (kw == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "ascii")
        throw ParseError("only ascii PLY is supported, got format '" + fmt + "'",
                         line_no);
      ascii = true;
    } else if (kw == "element") {
      std::string name;
      long count;
      ss >> name >> count;
      current_element = name;
      if (name == "vertex") nv = count;
      else if (name == "face") nf = count;
    } else if (kw == "property") {
      if (current_element == "vertex") {
        std::string type, name;
        ss >> type >> name;
        if (type == "list")
          throw ParseError("list property not supported on vertices", line_no);
        if (name == "x") xi = vertex_props;
        if (name == "y") yi = vertex_props;
        if (name == "z") zi = vertex_props;
        ++vertex_props;
      }
      // face properties: only the index list is read, extra ones rejected below
    } else if (kw == "end_header") {
      break;
    } else if (kw == "ply") {
      // tolerated repeat
    } else {
      throw ParseError("unknown header keyword '" + kw + "'", line_no);
    }
  }
  if (!ascii) throw ParseError("missing format line", line_no);
  if (nv < 0) throw ParseError("missing vertex element", line_no);
  if (nf < 0) throw ParseError("missing face element", line_no);
  if (xi < 0 || yi < 0 || zi < 0)
    throw ParseError("vertex element lacks x/y/z properties", line_no);

  TriMesh mesh;
  mesh.vertices.resize(nv, 3);
  for (long v = 0; v < nv; ++v) {
    if (!next_line(in, line, line_no))
      throw ParseError("unexpected end of file in vertex block", line_no);
    LineTokens tok(line, line_no);
    if (tok.size() < static_cast<size_t>(vertex_props))
      throw ParseError("vertex line has too few properties", line_no);
    const double x = tok.number(xi), y = tok.number(yi), z = tok.number(zi);
    mesh.vertices.row(v) << x, y, z;
  }
  mesh.faces.resize(nf, 3);
  for (long f = 0; f < nf; ++f) {
    if (!next_line(in, line, line_no))
      throw ParseError("unexpected end of file in face block", line_no);
    LineTokens tok(line, line_no);
    if (tok.integer(0) != 3)
      throw ParseError("only triangular faces are supported", line_no);
    const int a = static_cast<int>(tok.integer(1));
    const int b = static_cast<int>(tok.integer(2));
    const int c = static_cast<int>(tok.integer(3));
    mesh.faces.row(f) << a, b, c;
  }
  validate_mesh(mesh);
  return mesh;
}

TriMesh load_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file: " + path);
  switch (format) {
    case MeshFormat::Off:
      return parse_off(in);
    case MeshFormat::PlyAscii:
      return parse_ply_ascii(in);
  }
  throw IoError("unknown mesh format");
}

TriMesh load_mesh(const std::string& path) {
  auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == "off") return load_mesh(path, MeshFormat::Off);
  if (ext == "ply") return load_mesh(path, MeshFormat::PlyAscii);
  throw IoError("cannot infer mesh format from extension: " + path);
}

Eigen::VectorXd face_areas(const TriMesh& mesh) {
  Eigen::VectorXd areas(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Eigen::Vector3i tri = mesh.faces.row(f);
    areas[f] = triangle_area(mesh.vertices.row(tri[0]), mesh.vertices.row(tri[1]),
                             mesh.vertices.row(tri[2]));
  }
  return areas;
}

Eigen::MatrixX3d face_normals(const TriMesh& mesh) {
  const double diag = mesh.bbox_diagonal();
  const double area_tol = kAreaTolFactor * diag * diag;
  Eigen::MatrixX3d normals(mesh.face_count(), 3);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Eigen::Vector3i tri = mesh.faces.row(f);
    const Eigen::Vector3d a = mesh.vertices.row(tri[0]);
    const Eigen::Vector3d b = mesh.vertices.row(tri[1]);
    const Eigen::Vector3d c = mesh.vertices.row(tri[2]);
    Eigen::Vector3d n = (b - a).cross(c - a);
    const double len = n.norm();
    if (0.5 * len <= area_tol) throw DegenerateMeshError("zero-area face", f);
    normals.row(f) = n / len;
  }
  return normals;
}

MassMatrix vertex_areas(const TriMesh& mesh) {
  const double diag = mesh.bbox_diagonal();
  const double area_tol = kAreaTolFactor * diag * diag;
  Eigen::VectorXd areas = Eigen::VectorXd::Zero(mesh.vertex_count());

  for (int f = 0; f < mesh.face_count(); ++f) {
    const Eigen::Vector3i tri = mesh.faces.row(f);
    const Eigen::Vector3d p[3] = {mesh.vertices.row(tri[0]),
                                  mesh.vertices.row(tri[1]),
                                  mesh.vertices.row(tri[2])};
    const double area = triangle_area(p[0], p[1], p[2]);
    if (area <= area_tol) throw DegenerateMeshError("zero-area face", f);

    // cos of the corner angles; obtuse iff some cos < 0
    double cosang[3];
    int obtuse = -1;
    for (int c = 0; c < 3; ++c) {
      const Eigen::Vector3d u = p[(c + 1) % 3] - p[c];
      const Eigen::Vector3d v = p[(c + 2) % 3] - p[c];
      cosang[c] = u.dot(v) / (u.norm() * v.norm());
      if (cosang[c] < 0.0) obtuse = c;
    }

    if (obtuse >= 0) {
      for (int c = 0; c < 3; ++c)
        areas[tri[c]] += (c == obtuse) ? area / 2.0 : area / 4.0;
      continue;
    }
    // Circumcentric (Voronoi) share: 1/8 * sum over the two incident edges of
    // |edge|^2 * cot(opposite angle).
    double cot[3];
    for (int c = 0; c < 3; ++c) {
      const Eigen::Vector3d u = p[(c + 1) % 3] - p[c];
      const Eigen::Vector3d v = p[(c + 2) % 3] - p[c];
      cot[c] = u.dot(v) / u.cross(v).norm();
    }
    for (int c = 0; c < 3; ++c) {
      const int j = (c + 1) % 3, k = (c + 2) % 3;
      const double ej2 = (p[c] - p[j]).squaredNorm();  // edge (c,j), opposite k
      const double ek2 = (p[c] - p[k]).squaredNorm();  // edge (c,k), opposite j
      areas[tri[c]] += (ej2 * cot[k] + ek2 * cot[j]) / 8.0;
    }
  }
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (areas[v] <= 0.0)
      throw DegenerateMeshError("vertex " + std::to_string(v) +
                                " has no area (unreferenced by any face)");
  return MassMatrix{std::move(areas)};
}

StiffnessMatrix cotan_matrix(const TriMesh& mesh) {
  const double diag = mesh.bbox_diagonal();
  const double edge_tol = kEdgeTolFactor * diag;
  const int nv = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(mesh.face_count()) * 12);

  for (int f = 0; f < mesh.face_count(); ++f) {
    const Eigen::Vector3i tri = mesh.faces.row(f);
    const Eigen::Vector3d p[3] = {mesh.vertices.row(tri[0]),
                                  mesh.vertices.row(tri[1]),
                                  mesh.vertices.row(tri[2])};
    for (int c = 0; c < 3; ++c) {
      const int i = tri[(c + 1) % 3], j = tri[(c + 2) % 3];
      const Eigen::Vector3d u = p[(c + 1) % 3] - p[c];
      const Eigen::Vector3d v = p[(c + 2) % 3] - p[c];
      if (u.norm() <= edge_tol || v.norm() <= edge_tol ||
          (p[(c + 1) % 3] - p[(c + 2) % 3]).norm() <= edge_tol)
        throw DegenerateMeshError("zero-length edge", f);
      const double half_cot = 0.5 * u.dot(v) / u.cross(v).norm();
      trips.emplace_back(i, j, -half_cot);
      trips.emplace_back(j, i, -half_cot);
      trips.emplace_back(i, i, half_cot);
      trips.emplace_back(j, j, half_cot);
    }
  }
  StiffnessMatrix W(nv, nv);
  W.setFromTriplets(trips.begin(), trips.end());
  W.makeCompressed();
  return W;
}

FaceGradientOperator::FaceGradientOperator(const TriMesh& mesh) {
  maps_.reserve(mesh.face_count());
  const double diag = mesh.bbox_diagonal();
  const double area_tol = kAreaTolFactor * diag * diag;
  Eigen::Matrix<double, 2, 3> D;
  D << -1, 1, 0, -1, 0, 1;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Eigen::Vector3i tri = mesh.faces.row(f);
    const Eigen::Vector3d vi = mesh.vertices.row(tri[0]);
    const Eigen::Vector3d vj = mesh.vertices.row(tri[1]);
    const Eigen::Vector3d vk = mesh.vertices.row(tri[2]);
    Eigen::Matrix<double, 2, 3> J;
    J.row(0) = (vj - vi).transpose();
    J.row(1) = (vk - vi).transpose();
    const Eigen::Matrix2d JJt = J * J.transpose();
    // det(J J^T) = |u x v|^2 = (2 * face area)^2, zero iff collinear
    if (JJt.determinant() <= 4.0 * area_tol * area_tol)
      throw DegenerateMeshError("collinear triangle", f);
    maps_.push_back(J.transpose() * JJt.inverse() * D);
  }
}

Eigen::MatrixX3d FaceGradientOperator::apply(const TriMesh& mesh,
                                             const Eigen::VectorXd& values) const {
  if (values.size() != mesh.vertex_count())
    throw DimensionMismatchError("value count does not match vertex count");
  Eigen::MatrixX3d grads(face_count(), 3);
  for (int f = 0; f < face_count(); ++f) {
    const Eigen::Vector3i tri = mesh.faces.row(f);
    const Eigen::Vector3d fv(values[tri[0]], values[tri[1]], values[tri[2]]);
    grads.row(f) = (maps_[f] * fv).transpose();
  }
  return grads;
}

Eigen::MatrixX3d face_gradient(const TriMesh& mesh, const Eigen::VectorXd& values) {
  return FaceGradientOperator(mesh).apply(mesh, values);
}

}  // namespace eigenmatch
