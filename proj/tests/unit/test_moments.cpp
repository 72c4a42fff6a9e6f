#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "eigenmatch/moments.hpp"
#include "oracles.hpp"
#include "test_meshes.hpp"

using namespace eigenmatch;
namespace emt = eigenmatch::testing;

namespace {

struct ShapeData {
  TriMesh mesh;
  SpectralBasis basis;
  SignatureField sig;
};

// 42-vertex blob: small enough for brute force, irregular enough to make
// every tensor entry generic.
ShapeData small_blob() {
  ShapeData s;
  s.mesh = emt::make_bumpy_sphere(1);
  s.basis = compute_basis(s.mesh, 8);
  s.sig = hks_derivative_signature(s.basis, 3, 8);
  return s;
}

}  // namespace

TEST_CASE("weight function: threshold pins and partition of unity") {
  WeightConfig cfg;
  cfg.threshold = 0.25;
  CHECK(weight_function(0, 0.0, cfg) == 0.0);
  CHECK(weight_function(1, 0.0, cfg) == 1.0);
  CHECK(weight_function(0, 2.0 * cfg.threshold, cfg) == 1.0);
  CHECK(weight_function(0, 1.5 * cfg.threshold, cfg) == doctest::Approx(0.5));
  CHECK(weight_function(0, -1.5 * cfg.threshold, cfg) == doctest::Approx(0.5));
  for (double z : {0.0, 0.1, 0.25, 0.3, 0.49, 0.5, 0.7, 3.0})
    CHECK(weight_function(0, z, cfg) + weight_function(1, z, cfg) == 1.0);
  CHECK_THROWS_AS(weight_function(2, 0.0, cfg), DimensionMismatchError);
}

TEST_CASE("weight config: threshold from total area") {
  const WeightConfig cfg = WeightConfig::for_area(4.0);
  CHECK(cfg.threshold == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(cfg.P == 2);
}

TEST_CASE("compute_mu: constant eigenfunction row gives scaled identity") {
  const ShapeData s = small_blob();
  const int N = 6;
  const Tensor3 mu = compute_mu(s.basis, N);
  const double inv_sqrt_area = 1.0 / std::sqrt(s.basis.total_area());
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < N; ++k) {
      const double expected = (j == k) ? inv_sqrt_area : 0.0;
      CHECK(std::abs(mu(0, j, k) - expected) <= 1e-8);
    }
}

TEST_CASE("compute_mu: full symmetry and sign-flip parity") {
  const ShapeData s = small_blob();
  const int N = 5;
  const Tensor3 mu = compute_mu(s.basis, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        CHECK(std::abs(mu(i, j, k) - mu(j, i, k)) <= 1e-10);
        CHECK(std::abs(mu(i, j, k) - mu(k, j, i)) <= 1e-10);
      }

  SpectralBasis flipped = s.basis;
  flipped.eigenfunctions.col(2) = -flipped.eigenfunctions.col(2);
  const Tensor3 muf = compute_mu(flipped, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const int parity = (i == 2) + (j == 2) + (k == 2);
        const double expected = (parity % 2 ? -1.0 : 1.0) * mu(i, j, k);
        CHECK(muf(i, j, k) == expected);  // exact: products only change sign
      }
}

TEST_CASE("compute_mu: brute force equality") {
  const ShapeData s = small_blob();
  const int N = 5;
  const Tensor3 mu = compute_mu(s.basis, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        CHECK(std::abs(mu(i, j, k) - oracle::mu_entry(s.basis, i, j, k)) <= 1e-10);
}

TEST_CASE("compute_nu: self, antisymmetry, planar cross check") {
  const ShapeData s = small_blob();
  const Eigen::VectorXd self = compute_nu(s.mesh, s.basis, 2, 2);
  CHECK(self.cwiseAbs().maxCoeff() == 0.0);

  const Eigen::VectorXd ab = compute_nu(s.mesh, s.basis, 1, 3);
  const Eigen::VectorXd ba = compute_nu(s.mesh, s.basis, 3, 1);
  CHECK((ab + ba).cwiseAbs().maxCoeff() == 0.0);  // exact negation

  // x and y fields on a flat grid: (grad x cross grad y) . z = 1
  const TriMesh grid = emt::make_grid(3, 2);
  Eigen::MatrixXd fields(grid.vertex_count(), 2);
  fields.col(0) = grid.vertices.col(0);
  fields.col(1) = grid.vertices.col(1);
  const Eigen::VectorXd nu = nu_field(grid, fields, 0, 1);
  for (int f = 0; f < grid.face_count(); ++f)
    CHECK(nu[f] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("compute_nu: against the independent gradient oracle") {
  const ShapeData s = small_blob();
  const Eigen::VectorXd nu = compute_nu(s.mesh, s.basis, 1, 4);
  for (int f = 0; f < s.mesh.face_count(); ++f)
    CHECK(nu[f] ==
          doctest::Approx(oracle::nu_on_face(s.mesh, s.basis.eigenfunctions, 1, 4, f))
              .epsilon(1e-9)
              .scale(1.0));
}

TEST_CASE("compute_xi: diagonal zero, parity, brute force") {
  const ShapeData s = small_blob();
  const int N = 5;
  const WeightConfig cfg = WeightConfig::for_area(s.basis.total_area());
  const Tensor4 xi = compute_xi(s.mesh, s.basis, cfg, N);

  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k)
      for (int p = 0; p < cfg.P; ++p) CHECK(xi(i, i, k, p) == 0.0);

  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int p = 0; p < cfg.P; ++p)
          CHECK(std::abs(xi(i, j, k, p) + xi(j, i, k, p)) <= 1e-12);

  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int p = 0; p < cfg.P; ++p)
          CHECK(std::abs(xi(i, j, k, p) -
                         oracle::xi_entry(s.mesh, s.basis, cfg, i, j, k, p)) <=
                1e-10);

  // negating phi_k with k outside {i, j} flips the sign of xi_ijk
  SpectralBasis flipped = s.basis;
  flipped.eigenfunctions.col(4) = -flipped.eigenfunctions.col(4);
  const Tensor4 xif = compute_xi(s.mesh, flipped, cfg, N);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < cfg.P; ++p)
        CHECK(xif(i, j, 4, p) == doctest::Approx(-xi(i, j, 4, p)).epsilon(1e-12));
}

TEST_CASE("compute_xi: two-face boundary mesh equals per-face brute force") {
  const TriMesh square = emt::make_square();
  const SpectralBasis basis = compute_basis(square, 3);
  const WeightConfig cfg = WeightConfig::for_area(basis.total_area());
  const Tensor4 xi = compute_xi(square, basis, cfg, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int p = 0; p < cfg.P; ++p)
          CHECK(std::abs(xi(i, j, k, p) -
                         oracle::xi_entry(square, basis, cfg, i, j, k, p)) <=
                1e-10);
}

TEST_CASE("compute_muS: orthonormality rows and linearity") {
  const ShapeData s = small_blob();
  const int N = 5;
  // use eigenfunctions themselves as a synthetic signature
  SignatureField syn;
  syn.times = Eigen::VectorXd::Ones(2);
  syn.values.resize(s.basis.vertex_count(), 2);
  syn.values.col(0) = s.basis.eigenfunctions.col(2);
  syn.values.col(1) = s.basis.eigenfunctions.col(4);
  const Eigen::MatrixXd muS = compute_muS(s.basis, syn, N);
  for (int i = 0; i < N; ++i) {
    CHECK(std::abs(muS(i, 0) - (i == 2 ? 1.0 : 0.0)) <= 1e-8);
    CHECK(std::abs(muS(i, 1) - (i == 4 ? 1.0 : 0.0)) <= 1e-8);
  }

  SpectralBasis flipped = s.basis;
  flipped.eigenfunctions.col(1) = -flipped.eigenfunctions.col(1);
  const Eigen::MatrixXd muSf = compute_muS(flipped, s.sig, N);
  const Eigen::MatrixXd muS0 = compute_muS(s.basis, s.sig, N);
  CHECK((muSf.row(1) + muS0.row(1)).cwiseAbs().maxCoeff() == 0.0);

  for (int i = 0; i < N; ++i)
    for (int q = 0; q < s.sig.count(); ++q)
      CHECK(std::abs(muS0(i, q) - oracle::muS_entry(s.basis, s.sig, i, q)) <=
            1e-10);

  SignatureField wrong = s.sig;
  wrong.values.conservativeResize(10, Eigen::NoChange);
  CHECK_THROWS_AS(compute_muS(s.basis, wrong, N), MeshMismatchError);
}

TEST_CASE("compute_xiS: constant signature vanishes, brute force, linearity") {
  const ShapeData s = small_blob();
  const int N = 4;
  const WeightConfig cfg = WeightConfig::for_area(s.basis.total_area());

  SignatureField constant;
  constant.times = Eigen::VectorXd::Ones(1);
  constant.values = Eigen::MatrixXd::Constant(s.basis.vertex_count(), 1, 2.5);
  const SigTensor4 zero = compute_xiS(s.mesh, s.basis, constant, cfg, N);
  CHECK(std::sqrt(zero.sum_squares()) <= 1e-12);

  const SigTensor4 xiS = compute_xiS(s.mesh, s.basis, s.sig, cfg, N);
  for (int i = 0; i < N; ++i)
    for (int q = 0; q < s.sig.count(); ++q)
      for (int k = 0; k < N; ++k)
        for (int p = 0; p < cfg.P; ++p)
          CHECK(std::abs(xiS(i, q, k, p) -
                         oracle::xiS_entry(s.mesh, s.basis, s.sig, cfg, i, q, k, p)) <=
                1e-10);

  SpectralBasis flipped = s.basis;
  flipped.eigenfunctions.col(2) = -flipped.eigenfunctions.col(2);
  const SigTensor4 xiSf = compute_xiS(s.mesh, flipped, s.sig, cfg, N);
  for (int q = 0; q < s.sig.count(); ++q)
    for (int k = 0; k < N; ++k)
      if (k != 2)
        for (int p = 0; p < cfg.P; ++p)
          CHECK(xiSf(2, q, k, p) ==
                doctest::Approx(-xiS(2, q, k, p)).epsilon(1e-12));
}

TEST_CASE("compute_alpha: scaling, zero numerator, hand ratio") {
  const ShapeData s = small_blob();
  MomentSet m = compute_moment_set(s.mesh, s.basis, s.sig, 5);
  CHECK(m.alpha > 0.0);

  const double hand = (m.mu.sum_squares() + m.N * m.muS.squaredNorm()) /
                      (m.xi.sum_squares() + m.xiS.sum_squares());
  CHECK(m.alpha == doctest::Approx(hand).epsilon(1e-15));

  MomentSet doubled = m;
  for (double& v : doubled.xi.data()) v *= 2.0;
  for (double& v : doubled.xiS.data()) v *= 2.0;
  CHECK(compute_alpha(doubled) == doctest::Approx(m.alpha / 4.0).epsilon(1e-12));

  MomentSet zero_numer = m;
  zero_numer.mu = Tensor3(m.N);
  zero_numer.muS.setZero();
  CHECK(compute_alpha(zero_numer) == 0.0);

  MomentSet zero_denom = m;
  zero_denom.xi = Tensor4(m.N, m.P);
  zero_denom.xiS = SigTensor4(m.N, m.Q, m.P);
  CHECK_THROWS_AS(compute_alpha(zero_denom), DegenerateStatisticsError);
}

TEST_CASE("moments: permutation equivariance is exact") {
  const ShapeData s = small_blob();
  const int N = 4;
  const WeightConfig cfg = WeightConfig::for_area(s.basis.total_area());
  const Tensor3 mu = compute_mu(s.basis, N);
  const Tensor4 xi = compute_xi(s.mesh, s.basis, cfg, N);

  // reorder eigenfunctions (2 3 0 1) and recompute
  const std::vector<int> reorder = {2, 3, 0, 1};
  SpectralBasis shuffled = s.basis;
  for (int i = 0; i < N; ++i)
    shuffled.eigenfunctions.col(i) = s.basis.eigenfunctions.col(reorder[i]);
  const Tensor3 mu2 = compute_mu(shuffled, N);
  const Tensor4 xi2 = compute_xi(s.mesh, shuffled, cfg, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        // mu: exact thanks to the canonical factor ordering
        CHECK(mu2(i, j, k) == mu(reorder[i], reorder[j], reorder[k]));
        // xi: the nu triple product reassociates when the pair order flips,
        // so recomputation agrees only to rounding
        for (int p = 0; p < cfg.P; ++p)
          CHECK(std::abs(xi2(i, j, k, p) -
                         xi(reorder[i], reorder[j], reorder[k], p)) <= 1e-12);
      }
}

TEST_CASE("moments: rigid motion invariance") {
  const ShapeData s = small_blob();
  const int N = 4;
  TriMesh moved = s.mesh;
  const Eigen::Matrix3d R =
      Eigen::AngleAxisd(1.1, Eigen::Vector3d(0.2, 1.0, -0.4).normalized())
          .toRotationMatrix();
  for (int v = 0; v < moved.vertex_count(); ++v)
    moved.vertices.row(v) =
        (R * Eigen::Vector3d(s.mesh.vertices.row(v)) + Eigen::Vector3d(1, 2, 3))
            .transpose();

  // same connectivity, same intrinsic metric: reuse the eigenfunctions but
  // let all geometric quantities (areas, gradients, normals) come from the
  // moved embedding
  SpectralBasis moved_basis = s.basis;
  const WeightConfig cfg = WeightConfig::for_area(s.basis.total_area());

  const Tensor4 xi0 = compute_xi(s.mesh, s.basis, cfg, N);
  const Tensor4 xi1 = compute_xi(moved, moved_basis, cfg, N);
  double max_diff = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k)
        for (int p = 0; p < cfg.P; ++p)
          max_diff = std::max(max_diff,
                              std::abs(xi0(i, j, k, p) - xi1(i, j, k, p)));
  CHECK(max_diff <= 1e-8);

  const SigTensor4 xiS0 = compute_xiS(s.mesh, s.basis, s.sig, cfg, N);
  const SigTensor4 xiS1 = compute_xiS(moved, moved_basis, s.sig, cfg, N);
  double max_diff_s = 0.0;
  for (size_t idx = 0; idx < xiS0.data().size(); ++idx)
    max_diff_s =
        std::max(max_diff_s, std::abs(xiS0.data()[idx] - xiS1.data()[idx]));
  CHECK(max_diff_s <= 1e-8);
}

TEST_CASE("moments: mirror reflection negates the gradient moments") {
  const ShapeData s = small_blob();
  const int N = 4;
  const WeightConfig cfg = WeightConfig::for_area(s.basis.total_area());

  // reflect through x -> -x and flip the winding to keep normals outward
  TriMesh mirrored = s.mesh;
  mirrored.vertices.col(0) = -mirrored.vertices.col(0);
  for (int f = 0; f < mirrored.face_count(); ++f)
    std::swap(mirrored.faces(f, 1), mirrored.faces(f, 2));

  const Tensor3 mu0 = compute_mu(s.basis, N);
  const Tensor4 xi0 = compute_xi(s.mesh, s.basis, cfg, N);
  const Tensor3 mu1 = compute_mu(s.basis, N);  // mass unchanged by reflection
  const Tensor4 xi1 = compute_xi(mirrored, s.basis, cfg, N);

  for (size_t idx = 0; idx < mu0.data().size(); ++idx)
    CHECK(std::abs(mu0.data()[idx] - mu1.data()[idx]) <= 1e-8);
  for (size_t idx = 0; idx < xi0.data().size(); ++idx)
    CHECK(std::abs(xi0.data()[idx] + xi1.data()[idx]) <= 1e-8);

  const SigTensor4 xiS0 = compute_xiS(s.mesh, s.basis, s.sig, cfg, N);
  const SigTensor4 xiS1 = compute_xiS(mirrored, s.basis, s.sig, cfg, N);
  for (size_t idx = 0; idx < xiS0.data().size(); ++idx)
    CHECK(std::abs(xiS0.data()[idx] + xiS1.data()[idx]) <= 1e-8);
}
