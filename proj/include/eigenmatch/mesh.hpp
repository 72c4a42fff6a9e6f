#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <iosfwd>
#include <string>
#include <vector>

#include "eigenmatch/errors.hpp"

namespace eigenmatch {

enum class MeshFormat { Off, PlyAscii };

// Triangulated surface. Faces are counterclockwise when seen from outside,
// so the winding determines the outward normal. Immutable by convention once
// validated; every operator below takes it by const reference.
struct TriMesh {
  Eigen::MatrixX3d vertices;
  Eigen::MatrixX3i faces;

  int vertex_count() const { return static_cast<int>(vertices.rows()); }
  int face_count() const { return static_cast<int>(faces.rows()); }
  double bbox_diagonal() const;
};

// Checks the TriMesh invariants: indices in range, no repeated index within a
// face, face areas above 1e-12 * bbox_diag^2, edge lengths above
// 1e-12 * bbox_diag, and every edge shared by at most two faces.
// Throws DegenerateMeshError / ParseError on violation.
void validate_mesh(const TriMesh& mesh);

TriMesh load_mesh(const std::string& path, MeshFormat format);
// Picks the format from the file extension (.off / .ply).
TriMesh load_mesh(const std::string& path);

TriMesh parse_off(std::istream& in);
TriMesh parse_ply_ascii(std::istream& in);

// Lumped (diagonal) mass matrix of per-vertex mixed Voronoi areas.
struct MassMatrix {
  Eigen::VectorXd diagonal;
  double total_area() const { return diagonal.sum(); }
};

// Meyer's mixed Voronoi areas: circumcentric shares for non-obtuse
// triangles, barycentric (1/2, 1/4, 1/4) split when a triangle is obtuse.
MassMatrix vertex_areas(const TriMesh& mesh);

// Symmetric PSD cotangent stiffness matrix with zero row sums. Off-diagonal
// entry of edge (i,j) is -(cot a_ij + cot b_ij)/2, a single cotangent for
// boundary edges.
using StiffnessMatrix = Eigen::SparseMatrix<double>;
StiffnessMatrix cotan_matrix(const TriMesh& mesh);

Eigen::VectorXd face_areas(const TriMesh& mesh);

// Unit face normals following the winding.
Eigen::MatrixX3d face_normals(const TriMesh& mesh);

// Per-face linear map from the three vertex values to the in-plane gradient
// vector: grad = op * (f_i, f_j, f_k).
class FaceGradientOperator {
 public:
  explicit FaceGradientOperator(const TriMesh& mesh);

  // values has one entry per vertex; returns one gradient row per face.
  Eigen::MatrixX3d apply(const TriMesh& mesh, const Eigen::VectorXd& values) const;

  const Eigen::Matrix3d& face_map(int f) const { return maps_[f]; }
  int face_count() const { return static_cast<int>(maps_.size()); }

 private:
  std::vector<Eigen::Matrix3d> maps_;
};

// One-shot convenience around FaceGradientOperator.
Eigen::MatrixX3d face_gradient(const TriMesh& mesh, const Eigen::VectorXd& values);

}  // namespace eigenmatch
