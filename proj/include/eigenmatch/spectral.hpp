#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "eigenmatch/mesh.hpp"

namespace eigenmatch {

// Eigenpairs of the generalized problem W phi = lambda A phi.
// Eigenvalues ascend from the numerically-zero constant mode; eigenfunctions
// are columns of `eigenfunctions`, orthonormal in the A inner product.
struct SpectralBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenfunctions;  // vertex_count x count
  MassMatrix mass;
  // Consecutive index pairs whose eigenvalues are closer than 1e-3 relative;
  // the matcher reports these as potential permutation/rotation hazards.
  std::vector<std::pair<int, int>> near_degenerate;

  int count() const { return static_cast<int>(eigenvalues.size()); }
  int vertex_count() const { return static_cast<int>(eigenfunctions.rows()); }
  double total_area() const { return mass.diagonal.sum(); }
};

struct SolverOptions {
  // Meshes below this vertex count use the dense symmetric solver; larger
  // ones use shift-invert subspace iteration on the sparse matrices.
  int dense_threshold = 3000;
  int max_iterations = 200;
  // Relative to ||A phi||; two decades under the 1e-6 acceptance bound.
  double residual_tol = 1e-8;
};

SpectralBasis compute_basis(const TriMesh& mesh, int h,
                            const SolverOptions& opts = {});

struct DiffusionMap {
  Eigen::MatrixXd coords;  // vertex_count x N, column i = e^(-lambda_i t) phi_i
  double time = 0.0;
};

DiffusionMap diffusion_map(const SpectralBasis& basis, double t, int N);

double diffusion_distance(const SpectralBasis& basis, double t, int x, int y, int N);

// Heat kernel signature at a single time over all eigenpairs in the basis.
Eigen::VectorXd hks(const SpectralBasis& basis, double t);

// External per-vertex descriptor channels and their sample times.
struct SignatureField {
  Eigen::MatrixXd values;  // vertex_count x Q, each column unit L2(A) norm
  Eigen::VectorXd times;

  int count() const { return static_cast<int>(times.size()); }
  int vertex_count() const { return static_cast<int>(values.rows()); }
};

// Time derivative of the HKS sampled at Q log-spaced times between
// 1/(50 lambda*) and 1/lambda*, lambda* the first nonzero eigenvalue.
// Each channel is normalized to unit mass-weighted L2 norm.
SignatureField hks_derivative_signature(const SpectralBasis& basis, int Q, int h);

}  // namespace eigenmatch
