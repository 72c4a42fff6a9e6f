#include "eigenmatch/correspondence.hpp"

#include <cmath>
#include <limits>

#include "eigenmatch/errors.hpp"

namespace eigenmatch {

namespace {

// Mass-weighted RMS over all entries of a block; for orthonormal fields this
// is 1/sqrt(total area) regardless of the channel count.
double block_rms(const Eigen::MatrixXd& block, const Eigen::VectorXd& mass) {
  double energy = 0.0;
  for (int c = 0; c < block.cols(); ++c)
    energy += block.col(c).dot(mass.asDiagonal() * block.col(c));
  const double area = mass.sum();
  return std::sqrt(energy / (area * block.cols()));
}

}  // namespace

DescriptorField descriptor_field(const SpectralBasis& basis,
                                 const Eigen::MatrixXd& matched_stack,
                                 const SignatureField& sig, double beta) {
  if (matched_stack.rows() != basis.vertex_count() ||
      sig.vertex_count() != basis.vertex_count())
    throw MeshMismatchError("descriptor inputs live on different meshes");
  if (beta < 0.0 || beta > 1.0)
    throw DimensionMismatchError("beta must lie in [0, 1]");

  const int N = static_cast<int>(matched_stack.cols());
  const int Q = sig.count();
  DescriptorField out;
  out.N = N;
  out.Q = Q;
  out.beta = beta;
  out.values.resize(basis.vertex_count(), N + Q);

  const double rms_spectral = block_rms(matched_stack, basis.mass.diagonal);
  const double rms_sig = block_rms(sig.values, basis.mass.diagonal);
  const double ws = rms_spectral > 0.0 ? beta / rms_spectral : 0.0;
  const double wg = rms_sig > 0.0 ? (1.0 - beta) / rms_sig : 0.0;

  out.values.leftCols(N) = ws * matched_stack;
  out.values.rightCols(Q) = wg * sig.values;
  return out;
}

std::vector<PointMatch> match_points(const std::vector<int>& src,
                                     const DescriptorField& field_x,
                                     const DescriptorField& field_y) {
  if (src.empty()) throw DimensionMismatchError("no source points given");
  if (field_x.N != field_y.N || field_x.Q != field_y.Q ||
      field_x.beta != field_y.beta)
    throw DimensionMismatchError("descriptor fields built with different settings");

  const int ny = field_y.vertex_count();
  std::vector<PointMatch> matches;
  matches.reserve(src.size());
  for (int s : src) {
    if (s < 0 || s >= field_x.vertex_count())
      throw DimensionMismatchError("source vertex index out of range");
    const Eigen::RowVectorXd d = field_x.values.row(s);
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int v = 0; v < ny; ++v) {
      const double d2 = (field_y.values.row(v) - d).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = v;
      }
    }
    matches.push_back(PointMatch{s, best, std::sqrt(best_d2)});
  }
  return matches;
}

std::vector<int> farthest_point_sample(const TriMesh& mesh, int k, int seed) {
  const int nv = mesh.vertex_count();
  if (k < 1 || k > nv)
    throw DimensionMismatchError("sample count must be in [1, vertex_count]");
  if (seed < 0 || seed >= nv)
    throw DimensionMismatchError("seed vertex out of range");

  std::vector<int> picked = {seed};
  Eigen::VectorXd dist(nv);
  for (int v = 0; v < nv; ++v)
    dist[v] = (mesh.vertices.row(v) - mesh.vertices.row(seed)).norm();

  while (static_cast<int>(picked.size()) < k) {
    int best = 0;
    for (int v = 1; v < nv; ++v)
      if (dist[v] > dist[best]) best = v;
    picked.push_back(best);
    for (int v = 0; v < nv; ++v)
      dist[v] = std::min(dist[v],
                         (mesh.vertices.row(v) - mesh.vertices.row(best)).norm());
  }
  return picked;
}

}  // namespace eigenmatch
