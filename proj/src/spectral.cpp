#include "eigenmatch/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "eigenmatch/errors.hpp"

namespace eigenmatch {

namespace {

// Largest-magnitude entry positive, ties broken by lowest vertex index.
void normalize_signs(Eigen::MatrixXd& phi) {
  for (int c = 0; c < phi.cols(); ++c) {
    int best = 0;
    double mag = std::abs(phi(0, c));
    for (int r = 1; r < phi.rows(); ++r) {
      if (std::abs(phi(r, c)) > mag) {
        mag = std::abs(phi(r, c));
        best = r;
      }
    }
    if (phi(best, c) < 0.0) phi.col(c) = -phi.col(c);
  }
}

struct EigPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

EigPairs solve_dense(const StiffnessMatrix& W, const Eigen::VectorXd& mass, int k) {
  const Eigen::VectorXd inv_sqrt = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd B = Eigen::MatrixXd(W);
  B = inv_sqrt.asDiagonal() * B * inv_sqrt.asDiagonal();
  B = 0.5 * (B + B.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
  if (eig.info() != Eigen::Success)
    throw SolverError("dense eigensolver failed to converge");
  EigPairs out;
  out.values = eig.eigenvalues().head(k);
  out.vectors = inv_sqrt.asDiagonal() * eig.eigenvectors().leftCols(k);
  return out;
}

// Shift-invert block subspace iteration with Rayleigh-Ritz in the A inner
// product. Deterministic start so repeated runs are bit-identical.
EigPairs solve_shift_invert(const StiffnessMatrix& W, const Eigen::VectorXd& mass,
                            int k, const SolverOptions& opts) {
  const int n = static_cast<int>(mass.size());
  const int m = std::min(n, k + std::max(8, k / 2));
  const double sigma = 1e-3 * W.diagonal().sum() / mass.sum() / n;

  StiffnessMatrix shifted = W;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma * mass[i];
  Eigen::SimplicialLDLT<StiffnessMatrix> ldlt(shifted);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("factorization of shifted stiffness matrix failed");

  std::mt19937 rng(0x5eed);
  Eigen::MatrixXd X(n, m);
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < n; ++r)
      X(r, c) = static_cast<double>(rng()) / 4294967296.0 - 0.5;
  X.col(0).setOnes();

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(m);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    // solve into a fresh matrix: the rhs references X
    const Eigen::MatrixXd rhs = mass.asDiagonal() * X;
    X = ldlt.solve(rhs);
    // A-orthonormalize
    Eigen::MatrixXd gram = X.transpose() * (mass.asDiagonal() * X);
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (gram + gram.transpose()));
    if (llt.info() != Eigen::Success)
      throw SolverError("subspace lost rank during iteration");
    const Eigen::MatrixXd xt = X.transpose();
    X = llt.matrixL().solve(xt).transpose();
    // Rayleigh-Ritz
    Eigen::MatrixXd T = X.transpose() * (W * X);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(0.5 * (T + T.transpose()));
    theta = small.eigenvalues();
    X = (X * small.eigenvectors()).eval();

    bool converged = true;
    for (int i = 0; i < k && converged; ++i) {
      const Eigen::VectorXd ax = mass.asDiagonal() * X.col(i);
      const double res = (W * X.col(i) - theta[i] * ax).norm();
      if (res > opts.residual_tol * ax.norm()) converged = false;
    }
    if (converged) {
      EigPairs out;
      out.values = theta.head(k);
      out.vectors = X.leftCols(k);
      return out;
    }
  }
  throw SolverError("shift-invert iteration did not converge");
}

}  // namespace

SpectralBasis compute_basis(const TriMesh& mesh, int h, const SolverOptions& opts) {
  const int nv = mesh.vertex_count();
  if (h < 1 || h >= nv)
    throw DimensionMismatchError("requested eigenpair count must be in [1, vertex_count)");

  MassMatrix mass = vertex_areas(mesh);
  StiffnessMatrix W = cotan_matrix(mesh);
  const int k = std::min(nv, std::max(h, 3));

  EigPairs pairs = nv < opts.dense_threshold
                       ? solve_dense(W, mass.diagonal, k)
                       : solve_shift_invert(W, mass.diagonal, k, opts);

  pairs.values = pairs.values.cwiseMax(0.0);
  if (pairs.values.size() >= 3 && pairs.values[1] <= 1e-8 * pairs.values[2])
    throw DisconnectedMeshError("second zero eigenvalue: mesh has more than one component");
  if (pairs.values.size() >= 2 && pairs.values[0] > 1e-8 * pairs.values[1])
    throw SolverError("constant mode eigenvalue did not vanish");

  // Residual acceptance for both solver paths.
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd ax = mass.diagonal.asDiagonal() * pairs.vectors.col(i);
    const double res = (W * pairs.vectors.col(i) - pairs.values[i] * ax).norm();
    if (res > 1e-6 * ax.norm())
      throw SolverError("eigenpair residual exceeds tolerance at index " +
                        std::to_string(i));
  }

  SpectralBasis basis;
  basis.eigenvalues = pairs.values.head(h);
  basis.eigenfunctions = pairs.vectors.leftCols(h);
  normalize_signs(basis.eigenfunctions);
  basis.mass = std::move(mass);
  for (int i = 0; i + 1 < h; ++i) {
    const double gap = basis.eigenvalues[i + 1] - basis.eigenvalues[i];
    if (basis.eigenvalues[i + 1] > 0.0 && gap < 1e-3 * basis.eigenvalues[i + 1])
      basis.near_degenerate.emplace_back(i, i + 1);
  }
  return basis;
}

DiffusionMap diffusion_map(const SpectralBasis& basis, double t, int N) {
  if (N < 1 || N > basis.count())
    throw DimensionMismatchError("diffusion map dimension exceeds basis size");
  DiffusionMap map;
  map.time = t;
  map.coords = basis.eigenfunctions.leftCols(N);
  for (int i = 0; i < N; ++i)
    map.coords.col(i) *= std::exp(-basis.eigenvalues[i] * t);
  return map;
}

double diffusion_distance(const SpectralBasis& basis, double t, int x, int y, int N) {
  if (N < 1 || N > basis.count())
    throw DimensionMismatchError("diffusion distance dimension exceeds basis size");
  double sum = 0.0;
  for (int i = 0; i < N; ++i) {
    const double d = basis.eigenfunctions(x, i) - basis.eigenfunctions(y, i);
    sum += std::exp(-2.0 * basis.eigenvalues[i] * t) * d * d;
  }
  return std::sqrt(sum);
}

Eigen::VectorXd hks(const SpectralBasis& basis, double t) {
  if (t <= 0.0) throw Error("hks time must be positive");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(basis.vertex_count());
  for (int i = 0; i < basis.count(); ++i)
    out += std::exp(-basis.eigenvalues[i] * t) *
           basis.eigenfunctions.col(i).cwiseAbs2();
  return out;
}

SignatureField hks_derivative_signature(const SpectralBasis& basis, int Q, int h) {
  if (Q < 1) throw DimensionMismatchError("signature sample count must be >= 1");
  if (h < 1 || h > basis.count())
    throw DimensionMismatchError("signature eigenpair count exceeds basis size");

  const double lambda_max = basis.eigenvalues.maxCoeff();
  double lambda_star = 0.0;
  for (int i = 0; i < basis.count(); ++i) {
    if (basis.eigenvalues[i] > 1e-8 * lambda_max && basis.eigenvalues[i] > 0.0) {
      lambda_star = basis.eigenvalues[i];
      break;
    }
  }
  if (lambda_star <= 0.0)
    throw DisconnectedMeshError("no nonzero eigenvalue to place signature times");

  SignatureField sig;
  sig.times.resize(Q);
  if (Q == 1) {
    sig.times[0] = 1.0 / lambda_star;
  } else {
    const double t1 = 1.0 / (50.0 * lambda_star);
    const double ratio = std::pow(50.0, 1.0 / (Q - 1));
    for (int q = 0; q < Q; ++q) sig.times[q] = t1 * std::pow(ratio, q);
  }

  sig.values.resize(basis.vertex_count(), Q);
  for (int q = 0; q < Q; ++q) {
    Eigen::VectorXd field = Eigen::VectorXd::Zero(basis.vertex_count());
    for (int i = 0; i < h; ++i)
      field += -basis.eigenvalues[i] *
               std::exp(-basis.eigenvalues[i] * sig.times[q]) *
               basis.eigenfunctions.col(i).cwiseAbs2();
    const double norm =
        std::sqrt(field.dot(basis.mass.diagonal.asDiagonal() * field));
    if (norm <= 0.0)
      throw SolverError("signature channel vanished; cannot normalize");
    sig.values.col(q) = field / norm;
  }
  return sig;
}

}  // namespace eigenmatch
