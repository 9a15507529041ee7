#include "orthodiag/geometry.hpp"

#include <cmath>
#include <string>

#include "orthodiag/errors.hpp"
#include "orthodiag/rng.hpp"

namespace orthodiag {
namespace {

void check_pair(int n, int i, int j) {
  if (i < 0 || j >= n || i >= j) {
    throw ContractViolation("rotation pair must satisfy 0 <= i < j < n (got i=" +
                            std::to_string(i) + ", j=" + std::to_string(j) +
                            ", n=" + std::to_string(n) + ")");
  }
}

}  // namespace

GivensRotation GivensRotation::make(int i, int j, double theta) {
  if (i < 0 || i >= j) throw ContractViolation("GivensRotation: need 0 <= i < j");
  return GivensRotation{i, j, theta, std::cos(theta), std::sin(theta)};
}

Eigen::MatrixXd givens_matrix(int n, int i, int j, double theta) {
  check_pair(n, i, j);
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  g(i, i) = c;
  g(j, j) = c;
  g(i, j) = -s;
  g(j, i) = s;
  return g;
}

Eigen::MatrixXd givens_generator(int n, int i, int j) {
  check_pair(n, i, j);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  g(i, j) = -1.0;
  g(j, i) = 1.0;
  return g;
}

Eigen::MatrixXd random_rotation(int n, std::uint64_t seed) {
  if (n < 2) throw ContractViolation("random_rotation: n must be >= 2");
  Rng rng(seed);
  Eigen::MatrixXd gauss(n, n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) gauss(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  // Unique QR with positive diagonal of R gives Haar measure on O(n).
  for (int k = 0; k < n; ++k) {
    if (r(k, k) < 0.0) q.col(k) *= -1.0;
  }
  if (q.determinant() < 0.0) q.col(0) *= -1.0;
  return q;
}

double orthogonality_defect(const Eigen::MatrixXd& q) {
  return (q.transpose() * q - Eigen::MatrixXd::Identity(q.cols(), q.cols())).norm();
}

LambdaMatrix lambda_of(const TensorSet& rotated) {
  const int n = rotated.dim();
  const int d = rotated.order();
  LambdaMatrix lambda(n);
  for (int k = 0; k < n; ++k) {
    for (int l = k + 1; l < n; ++l) {
      double sum = 0.0;
      for (const auto& w : rotated) {
        sum += w.near(k, l, d - 1) * w.diag(l) - w.diag(k) * w.near(k, l, 1);
      }
      lambda.set_upper(k, l, d * sum);
    }
  }
  return lambda;
}

LambdaMatrix lambda_of(const RotationState& state) { return lambda_of(state.rotated()); }

RotationState::RotationState(TensorSet original, Eigen::MatrixXd q0)
    : original_(std::move(original)), rotated_(original_), q_(std::move(q0)) {
  const int n = original_.dim();
  if (q_.rows() != n || q_.cols() != n) {
    throw ContractViolation("initial rotation must be " + std::to_string(n) + " x " +
                            std::to_string(n));
  }
  if (!(orthogonality_defect(q_) <= 1e-8)) {
    throw ContractViolation("initial rotation is not orthogonal within 1e-8");
  }
  total_sq_norm_ = set_frobenius_sq(original_);
  rebuild();
}

RotationState::RotationState(TensorSet original)
    : RotationState(original, Eigen::MatrixXd::Identity(original.dim(), original.dim())) {}

void RotationState::rebuild() {
  rotated_ = transform_all_modes(original_, q_.transpose());
  f_ = set_diag_sq_norm(rotated_);
}

void RotationState::apply(const GivensRotation& rot) {
  check_pair(dim(), rot.i, rot.j);
  if (rot.theta == 0.0) return;

  for (auto& w : rotated_) {
    const double before = w.diag(rot.i) * w.diag(rot.i) + w.diag(rot.j) * w.diag(rot.j);
    rotate_all_modes_givens(w, rot.i, rot.j, rot.c, rot.s);
    const double after = w.diag(rot.i) * w.diag(rot.i) + w.diag(rot.j) * w.diag(rot.j);
    f_ += after - before;
  }

  const Eigen::VectorXd col_i = q_.col(rot.i);
  q_.col(rot.i) = rot.c * col_i + rot.s * q_.col(rot.j);
  q_.col(rot.j) = rot.c * q_.col(rot.j) - rot.s * col_i;

  const int n = dim();
  if (++applied_since_check_ >= n * (n - 1) / 2) {
    applied_since_check_ = 0;
    reorthonormalize_if_needed();
  }
}

bool RotationState::reorthonormalize_if_needed(double threshold) {
  if (orthogonality_defect(q_) <= threshold) return false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  q_ = svd.matrixU() * svd.matrixV().transpose();
  rebuild();
  ++reorth_count_;
  return true;
}

}  // namespace orthodiag
