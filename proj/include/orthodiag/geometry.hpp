#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "orthodiag/symtensor.hpp"

namespace orthodiag {

/// Plane rotation in coordinates (i, j), i < j, with cached cosine and sine.
struct GivensRotation {
  int i = 0;
  int j = 1;
  double theta = 0.0;
  double c = 1.0;
  double s = 0.0;

  static GivensRotation make(int i, int j, double theta);
};

/// Identity except entries (i,i),(i,j),(j,i),(j,j) = c, -s, s, c.
Eigen::MatrixXd givens_matrix(int n, int i, int j, double theta);

/// Derivative of givens_matrix at theta = 0: -1 at (i,j), +1 at (j,i).
Eigen::MatrixXd givens_generator(int n, int i, int j);

/// Haar-distributed special orthogonal matrix; deterministic for a seed.
Eigen::MatrixXd random_rotation(int n, std::uint64_t seed);

/// ||Q^T Q - I||_F.
double orthogonality_defect(const Eigen::MatrixXd& q);

/// Skew-symmetric n x n matrix; only the upper triangle is ever written.
class LambdaMatrix {
 public:
  explicit LambdaMatrix(int n) : m_(Eigen::MatrixXd::Zero(n, n)) {}

  void set_upper(int k, int l, double value) {
    m_(k, l) = value;
    m_(l, k) = -value;
  }

  double operator()(int k, int l) const { return m_(k, l); }
  int dim() const noexcept { return static_cast<int>(m_.rows()); }
  double norm() const { return m_.norm(); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }

 private:
  Eigen::MatrixXd m_;
};

/// Riemannian gradient factor of f at the rotated set W: grad f(Q) = Q Lambda.
/// Lambda_{kl} = sum_l d (W_{kl..l} W_{l..l} - W_{k..k} W_{k..kl}) for k < l.
LambdaMatrix lambda_of(const TensorSet& rotated);

/// Current iterate Q together with the rotated tensors W = A x_1 Q^T ... x_d Q^T.
class RotationState {
 public:
  /// Q0 must be orthogonal within 1e-8.
  RotationState(TensorSet original, Eigen::MatrixXd q0);
  explicit RotationState(TensorSet original);

  const Eigen::MatrixXd& q() const noexcept { return q_; }
  const TensorSet& rotated() const noexcept { return rotated_; }
  const TensorSet& original() const noexcept { return original_; }
  int dim() const noexcept { return original_.dim(); }
  int order() const noexcept { return original_.order(); }

  /// Objective f(Q) = sum of squared diagonals of the rotated tensors.
  double f() const noexcept { return f_; }
  double total_sq_norm() const noexcept { return total_sq_norm_; }

  /// Q <- Q G; every W rotated in place; f updated from the two changed
  /// diagonal entries of each tensor.
  void apply(const GivensRotation& rot);

  /// Re-orthonormalizes Q (polar factor) and rebuilds W from the originals
  /// when ||Q^T Q - I|| exceeds `threshold`.  Returns true if it did.
  bool reorthonormalize_if_needed(double threshold = 1e-8);

  /// Number of reorthonormalizations performed so far.
  int reorthonormalizations() const noexcept { return reorth_count_; }

 private:
  void rebuild();

  TensorSet original_;
  TensorSet rotated_;
  Eigen::MatrixXd q_;
  double f_ = 0.0;
  double total_sq_norm_ = 0.0;
  int applied_since_check_ = 0;
  int reorth_count_ = 0;
};

LambdaMatrix lambda_of(const RotationState& state);

}  // namespace orthodiag
