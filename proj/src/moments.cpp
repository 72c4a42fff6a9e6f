#include "eigenmatch/moments.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "eigenmatch/errors.hpp"

namespace eigenmatch {

namespace {

double sum_squares_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// Per-face quadrature context shared by the gradient moments: face areas,
// per-face gradients of the first N fields, the precomputed (grad x n)
// factors, face averages of the fields, and the weighted phi_k w_p tables.
struct FaceContext {
  Eigen::VectorXd area;
  std::vector<Eigen::MatrixX3d> grads;    // one F x 3 block per field
  std::vector<Eigen::MatrixX3d> cross_n;  // grad x n per field
  Eigen::MatrixXd avg;                    // F x N face averages
  Eigen::MatrixXd weighted;               // F x (N*P), column k*P+p = avg_k * w_p(|avg_k|)
};

FaceContext make_face_context(const TriMesh& mesh, const Eigen::MatrixXd& fields,
                              int N, const WeightConfig& cfg) {
  FaceContext ctx;
  ctx.area = face_areas(mesh);
  const Eigen::MatrixX3d normals = face_normals(mesh);
  const FaceGradientOperator grad_op(mesh);
  const int nf = mesh.face_count();

  ctx.grads.reserve(N);
  ctx.cross_n.reserve(N);
  for (int i = 0; i < N; ++i) {
    ctx.grads.push_back(grad_op.apply(mesh, fields.col(i)));
    Eigen::MatrixX3d cn(nf, 3);
    for (int f = 0; f < nf; ++f)
      cn.row(f) = Eigen::Vector3d(ctx.grads.back().row(f))
                      .cross(Eigen::Vector3d(normals.row(f)))
                      .transpose();
    ctx.cross_n.push_back(std::move(cn));
  }

  ctx.avg.resize(nf, N);
  for (int f = 0; f < nf; ++f) {
    const Eigen::Vector3i tri = mesh.faces.row(f);
    for (int k = 0; k < N; ++k)
      ctx.avg(f, k) =
          (fields(tri[0], k) + fields(tri[1], k) + fields(tri[2], k)) / 3.0;
  }

  ctx.weighted.resize(nf, N * cfg.P);
  for (int k = 0; k < N; ++k)
    for (int p = 0; p < cfg.P; ++p)
      for (int f = 0; f < nf; ++f)
        ctx.weighted(f, k * cfg.P + p) =
            ctx.avg(f, k) * weight_function(p, std::abs(ctx.avg(f, k)), cfg);
  return ctx;
}

}  // namespace

double Tensor3::sum_squares() const { return sum_squares_of(v_); }
double Tensor4::sum_squares() const { return sum_squares_of(v_); }
double SigTensor4::sum_squares() const { return sum_squares_of(v_); }

WeightConfig WeightConfig::for_area(double total_area) {
  if (total_area <= 0.0)
    throw DegenerateStatisticsError("total area must be positive");
  WeightConfig cfg;
  cfg.P = 2;
  cfg.threshold = 0.1 / std::sqrt(total_area);
  return cfg;
}

double weight_function(int p, double z, const WeightConfig& cfg) {
  if (p != 0 && p != 1)
    throw DimensionMismatchError("weight index must be 0 or 1");
  const double m = std::abs(z);
  double w0;
  if (m <= cfg.threshold)
    w0 = 0.0;
  else if (m >= 2.0 * cfg.threshold)
    w0 = 1.0;
  else
    w0 = (m - cfg.threshold) / cfg.threshold;
  return p == 0 ? w0 : 1.0 - w0;
}

Tensor3 compute_mu(const SpectralBasis& basis, int N) {
  if (N < 1 || N > basis.count())
    throw DimensionMismatchError("moment order exceeds basis size");
  const Eigen::MatrixXd& phi = basis.eigenfunctions;
  const Eigen::VectorXd& mass = basis.mass.diagonal;
  const int nv = basis.vertex_count();

  Tensor3 mu(N);
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      for (int k = j; k < N; ++k) {
        double s = 0.0;
        for (int v = 0; v < nv; ++v) {
          double a = phi(v, i), b = phi(v, j), c = phi(v, k);
          // multiply in descending |value| order: the float result then
          // depends only on the factor multiset, which makes the tensor
          // exactly equivariant under eigenfunction reordering and flips
          if (std::abs(a) < std::abs(b)) std::swap(a, b);
          if (std::abs(b) < std::abs(c)) std::swap(b, c);
          if (std::abs(a) < std::abs(b)) std::swap(a, b);
          s += mass[v] * (a * b * c);
        }
        mu(i, j, k) = s;
        mu(i, k, j) = s;
        mu(j, i, k) = s;
        mu(j, k, i) = s;
        mu(k, i, j) = s;
        mu(k, j, i) = s;
      }
    }
  }
  return mu;
}

Eigen::VectorXd nu_field(const TriMesh& mesh, const Eigen::MatrixXd& fields,
                         int i, int j) {
  if (i < 0 || j < 0 || i >= fields.cols() || j >= fields.cols())
    throw DimensionMismatchError("field index out of range");
  if (fields.rows() != mesh.vertex_count())
    throw MeshMismatchError("field length does not match vertex count");
  if (i == j) return Eigen::VectorXd::Zero(mesh.face_count());
  if (i > j) return -nu_field(mesh, fields, j, i);

  const Eigen::MatrixX3d normals = face_normals(mesh);
  const FaceGradientOperator grad_op(mesh);
  const Eigen::MatrixX3d gi = grad_op.apply(mesh, fields.col(i));
  const Eigen::MatrixX3d gj = grad_op.apply(mesh, fields.col(j));

  Eigen::VectorXd nu(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    // (grad_i x grad_j) . n = grad_i . (grad_j x n)
    const Eigen::Vector3d cn =
        Eigen::Vector3d(gj.row(f)).cross(Eigen::Vector3d(normals.row(f)));
    nu[f] = Eigen::Vector3d(gi.row(f)).dot(cn);
  }
  return nu;
}

Eigen::VectorXd compute_nu(const TriMesh& mesh, const SpectralBasis& basis,
                           int i, int j) {
  return nu_field(mesh, basis.eigenfunctions, i, j);
}

Tensor4 compute_xi(const TriMesh& mesh, const SpectralBasis& basis,
                   const WeightConfig& cfg, int N) {
  if (N < 1 || N > basis.count())
    throw DimensionMismatchError("moment order exceeds basis size");
  if (basis.vertex_count() != mesh.vertex_count())
    throw MeshMismatchError("basis does not belong to this mesh");

  const FaceContext ctx = make_face_context(mesh, basis.eigenfunctions, N, cfg);
  const int nf = mesh.face_count();

  Tensor4 xi(N, cfg.P);
  Eigen::VectorXd nu_area(nf);
  for (int i = 0; i < N; ++i) {
    for (int j = i + 1; j < N; ++j) {
      for (int f = 0; f < nf; ++f) {
        const double nu = Eigen::Vector3d(ctx.grads[i].row(f))
                              .dot(Eigen::Vector3d(ctx.cross_n[j].row(f)));
        nu_area[f] = ctx.area[f] * nu;
      }
      const Eigen::RowVectorXd sums = nu_area.transpose() * ctx.weighted;
      for (int k = 0; k < N; ++k) {
        for (int p = 0; p < cfg.P; ++p) {
          xi(i, j, k, p) = sums[k * cfg.P + p];
          xi(j, i, k, p) = -sums[k * cfg.P + p];
        }
      }
    }
  }
  return xi;
}

Eigen::MatrixXd compute_muS(const SpectralBasis& basis, const SignatureField& sig,
                            int N) {
  if (N < 1 || N > basis.count())
    throw DimensionMismatchError("moment order exceeds basis size");
  if (sig.vertex_count() != basis.vertex_count())
    throw MeshMismatchError("signature and basis vertex counts differ");
  return basis.eigenfunctions.leftCols(N).transpose() *
         basis.mass.diagonal.asDiagonal() * sig.values;
}

SigTensor4 compute_xiS(const TriMesh& mesh, const SpectralBasis& basis,
                       const SignatureField& sig, const WeightConfig& cfg, int N) {
  if (N < 1 || N > basis.count())
    throw DimensionMismatchError("moment order exceeds basis size");
  if (sig.vertex_count() != basis.vertex_count() ||
      basis.vertex_count() != mesh.vertex_count())
    throw MeshMismatchError("mesh, basis and signature vertex counts differ");

  const FaceContext ctx = make_face_context(mesh, basis.eigenfunctions, N, cfg);
  const Eigen::MatrixX3d normals = face_normals(mesh);
  const FaceGradientOperator grad_op(mesh);
  const int nf = mesh.face_count();
  const int Q = sig.count();

  // (grad psi_q x n), computed once per channel
  std::vector<Eigen::MatrixX3d> sig_cross(Q);
  for (int q = 0; q < Q; ++q) {
    const Eigen::MatrixX3d g = grad_op.apply(mesh, sig.values.col(q));
    sig_cross[q].resize(nf, 3);
    for (int f = 0; f < nf; ++f)
      sig_cross[q].row(f) = Eigen::Vector3d(g.row(f))
                                .cross(Eigen::Vector3d(normals.row(f)))
                                .transpose();
  }

  SigTensor4 xiS(N, Q, cfg.P);
  Eigen::VectorXd nu_area(nf);
  for (int i = 0; i < N; ++i) {
    for (int q = 0; q < Q; ++q) {
      for (int f = 0; f < nf; ++f) {
        const double nu = Eigen::Vector3d(ctx.grads[i].row(f))
                              .dot(Eigen::Vector3d(sig_cross[q].row(f)));
        nu_area[f] = ctx.area[f] * nu;
      }
      const Eigen::RowVectorXd sums = nu_area.transpose() * ctx.weighted;
      for (int k = 0; k < N; ++k)
        for (int p = 0; p < cfg.P; ++p) xiS(i, q, k, p) = sums[k * cfg.P + p];
    }
  }
  return xiS;
}

double compute_alpha(const MomentSet& m) {
  const double numer = m.mu.sum_squares() + m.N * m.muS.squaredNorm();
  const double denom = m.xi.sum_squares() + m.xiS.sum_squares();
  if (denom < 1e-30)
    throw DegenerateStatisticsError("gradient moments vanish; alpha undefined");
  return numer / denom;
}

MomentSet compute_moment_set(const TriMesh& mesh, const SpectralBasis& basis,
                             const SignatureField& sig, int N) {
  MomentSet m;
  m.N = N;
  m.Q = sig.count();
  m.weights = WeightConfig::for_area(basis.total_area());
  m.P = m.weights.P;
  m.mu = compute_mu(basis, N);
  m.xi = compute_xi(mesh, basis, m.weights, N);
  m.muS = compute_muS(basis, sig, N);
  m.xiS = compute_xiS(mesh, basis, sig, m.weights, N);
  m.alpha = compute_alpha(m);
  return m;
}

}  // namespace eigenmatch
