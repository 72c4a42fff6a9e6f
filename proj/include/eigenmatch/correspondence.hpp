#pragma once

#include <Eigen/Core>
#include <vector>

#include "eigenmatch/mesh.hpp"
#include "eigenmatch/spectral.hpp"

namespace eigenmatch {

// Per-vertex joint descriptor: beta-weighted eigenfunction block followed by
// the (1-beta)-weighted signature block, each normalized by its mass-weighted
// field RMS so the two parts are commensurate.
struct DescriptorField {
  Eigen::MatrixXd values;  // vertex_count x (N + Q)
  int N = 0, Q = 0;
  double beta = 0.5;

  int vertex_count() const { return static_cast<int>(values.rows()); }
};

DescriptorField descriptor_field(const SpectralBasis& basis,
                                 const Eigen::MatrixXd& matched_stack,
                                 const SignatureField& sig, double beta);

struct PointMatch {
  int src = 0;
  int dst = 0;
  double distance = 0.0;
};

// Exact nearest neighbor by linear scan; ties resolve to the lowest index.
std::vector<PointMatch> match_points(const std::vector<int>& src,
                                     const DescriptorField& field_x,
                                     const DescriptorField& field_y);

// Euclidean farthest-point sampling over the vertices, seeded at the given
// vertex; deterministic with ties to the lowest index.
std::vector<int> farthest_point_sample(const TriMesh& mesh, int k, int seed = 0);

}  // namespace eigenmatch
