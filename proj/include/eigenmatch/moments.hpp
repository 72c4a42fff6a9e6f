#pragma once

#include <Eigen/Core>
#include <vector>

#include "eigenmatch/mesh.hpp"
#include "eigenmatch/spectral.hpp"

namespace eigenmatch {

// Soft-threshold region weights: w_0 ramps from 0 below TH to 1 above 2*TH,
// w_1 = 1 - w_0, with TH = 0.1 / sqrt(total surface area).
struct WeightConfig {
  int P = 2;
  double threshold = 0.1;

  static WeightConfig for_area(double total_area);
};

double weight_function(int p, double z, const WeightConfig& cfg);

// Dense N x N x N tensor, row-major (i slow, k fast).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), v_(static_cast<size_t>(n) * n * n, 0.0) {}

  double& operator()(int i, int j, int k) { return v_[idx(i, j, k)]; }
  double operator()(int i, int j, int k) const { return v_[idx(i, j, k)]; }

  int dim() const { return n_; }
  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }
  double sum_squares() const;

 private:
  size_t idx(int i, int j, int k) const {
    return (static_cast<size_t>(i) * n_ + j) * n_ + k;
  }
  int n_ = 0;
  std::vector<double> v_;
};

// Dense N x N x N x P tensor for the gradient-cross-normal moments.
class Tensor4 {
 public:
  Tensor4() = default;
  Tensor4(int n, int p) : n_(n), p_(p), v_(static_cast<size_t>(n) * n * n * p, 0.0) {}

  double& operator()(int i, int j, int k, int p) { return v_[idx(i, j, k, p)]; }
  double operator()(int i, int j, int k, int p) const { return v_[idx(i, j, k, p)]; }

  int dim() const { return n_; }
  int weights() const { return p_; }
  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }
  double sum_squares() const;

 private:
  size_t idx(int i, int j, int k, int p) const {
    return ((static_cast<size_t>(i) * n_ + j) * n_ + k) * p_ + p;
  }
  int n_ = 0, p_ = 0;
  std::vector<double> v_;
};

// Dense N x Q x N x P tensor for the signature gradient moments.
class SigTensor4 {
 public:
  SigTensor4() = default;
  SigTensor4(int n, int q, int p)
      : n_(n), q_(q), p_(p),
        v_(static_cast<size_t>(n) * q * n * p, 0.0) {}

  double& operator()(int i, int q, int k, int p) { return v_[idx(i, q, k, p)]; }
  double operator()(int i, int q, int k, int p) const { return v_[idx(i, q, k, p)]; }

  int dim() const { return n_; }
  int channels() const { return q_; }
  int weights() const { return p_; }
  const std::vector<double>& data() const { return v_; }
  std::vector<double>& data() { return v_; }
  double sum_squares() const;

 private:
  size_t idx(int i, int q, int k, int p) const {
    return ((static_cast<size_t>(i) * q_ + q) * n_ + k) * p_ + p;
  }
  int n_ = 0, q_ = 0, p_ = 0;
  std::vector<double> v_;
};

// All raw-moment statistics of one shape, computed independently of any
// other shape, plus the balance weight between value and gradient terms.
struct MomentSet {
  int N = 0, P = 0, Q = 0;
  Tensor3 mu;            // E[phi_i phi_j phi_k]
  Tensor4 xi;            // E[nu_ij phi_k w_p(|phi_k|)]
  Eigen::MatrixXd muS;   // E[phi_i psi_q], N x Q
  SigTensor4 xiS;        // E[nu^S_iq phi_k w_p(|phi_k|)]
  double alpha = 0.0;
  WeightConfig weights;
};

// Third-order eigenfunction moments integrated against the vertex masses.
Tensor3 compute_mu(const SpectralBasis& basis, int N);

// (grad f_i x grad f_j) . n per face for two columns of an arbitrary
// per-vertex field matrix. i == j returns exact zeros; (j, i) is the exact
// negation of (i, j).
Eigen::VectorXd nu_field(const TriMesh& mesh, const Eigen::MatrixXd& fields,
                         int i, int j);

Eigen::VectorXd compute_nu(const TriMesh& mesh, const SpectralBasis& basis,
                           int i, int j);

Tensor4 compute_xi(const TriMesh& mesh, const SpectralBasis& basis,
                   const WeightConfig& cfg, int N);

Eigen::MatrixXd compute_muS(const SpectralBasis& basis, const SignatureField& sig,
                            int N);

SigTensor4 compute_xiS(const TriMesh& mesh, const SpectralBasis& basis,
                       const SignatureField& sig, const WeightConfig& cfg, int N);

// alpha = (sum mu^2 + N sum muS^2) / (sum xi^2 + sum xiS^2).
double compute_alpha(const MomentSet& m);

// Computes every tensor and alpha with TH taken from the mesh area.
MomentSet compute_moment_set(const TriMesh& mesh, const SpectralBasis& basis,
                             const SignatureField& sig, int N);

}  // namespace eigenmatch
