#pragma once

// Dense tensors, symmetric tensors and the contractions used by the
// diagonalization drivers.
//
// Storage is always the full row-major array (last index fastest).  A
// SymTensor keeps the symmetric invariant by construction: it is built by
// symmetrizing or by validated loading, and afterwards only changed through
// rotate_all_modes_givens, which maps symmetric tensors to symmetric tensors.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace orthodiag {

inline constexpr int kMinOrder = 2;
inline constexpr int kMaxOrder = 4;

/// General dense tensor with arbitrary extents, row-major.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<int> shape);
  DenseTensor(std::vector<int> shape, std::vector<double> values);

  /// Cubical tensor of the given order and dimension, zero filled.
  static DenseTensor cubical(int order, int dim);

  int order() const noexcept { return static_cast<int>(shape_.size()); }
  int extent(int mode) const { return shape_.at(static_cast<std::size_t>(mode)); }
  const std::vector<int>& shape() const noexcept { return shape_; }
  bool is_cubical() const noexcept;
  std::size_t size() const noexcept { return values_.size(); }

  std::size_t stride(int mode) const { return strides_.at(static_cast<std::size_t>(mode)); }
  std::size_t offset(std::span<const int> idx) const;

  double at(std::span<const int> idx) const { return values_[offset(idx)]; }
  double at(std::initializer_list<int> idx) const {
    return at(std::span<const int>(idx.begin(), idx.size()));
  }
  double& at(std::span<const int> idx) { return values_[offset(idx)]; }
  double& at(std::initializer_list<int> idx) {
    return at(std::span<const int>(idx.begin(), idx.size()));
  }

  double operator[](std::size_t flat) const { return values_[flat]; }
  double& operator[](std::size_t flat) { return values_[flat]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double frobenius_sq() const noexcept;

 private:
  std::vector<int> shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
};

/// k-mode product T x_k M: contracts mode `mode` (0-based) of `t` with the
/// columns of `m`.  The result has extent m.rows() in that mode.
DenseTensor mode_product(const DenseTensor& t, const Eigen::MatrixXd& m, int mode);

/// Average of `t` over all permutations of its indices.  Requires a cubical
/// tensor.
DenseTensor symmetrize(const DenseTensor& t);

/// Largest |T[idx] - T[perm(idx)]| over all entries and index permutations.
double symmetry_defect(const DenseTensor& t);

/// Symmetric cubical tensor of order 2..4.
class SymTensor {
 public:
  SymTensor(int order, int dim);

  /// Symmetrized copy of a cubical tensor (fixed point for symmetric input).
  static SymTensor from_dense(const DenseTensor& t);

  /// Validates symmetry of row-major `values` within `tol * ||T||` and then
  /// symmetrizes.  Throws ContractViolation on size or symmetry failure.
  static SymTensor from_values(int order, int dim, std::vector<double> values,
                               double tol = 1e-9);

  /// Diagonal tensor with the given diagonal entries.
  static SymTensor diagonal(int order, std::span<const double> diag);

  int order() const noexcept { return tensor_.order(); }
  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return tensor_.size(); }

  double at(std::span<const int> idx) const { return tensor_.at(idx); }
  double at(std::initializer_list<int> idx) const { return tensor_.at(idx); }

  /// Entry W_{k...k}.
  double diag(int k) const { return tensor_[static_cast<std::size_t>(k) * diag_stride_]; }

  /// Entry with `count_second` indices equal to `b` and the rest equal to
  /// `a`, e.g. near(a, b, 1) = W_{a..ab}.
  double near(int a, int b, int count_second) const;

  /// Sets every permutation of `idx` to `value`.
  void set_symmetric(std::span<const int> idx, double value);
  void set_symmetric(std::initializer_list<int> idx, double value) {
    set_symmetric(std::span<const int>(idx.begin(), idx.size()), value);
  }

  const DenseTensor& dense() const noexcept { return tensor_; }
  std::span<const double> values() const noexcept { return tensor_.values(); }

  double frobenius_sq() const noexcept { return tensor_.frobenius_sq(); }

 private:
  explicit SymTensor(DenseTensor t);
  friend void rotate_all_modes_givens(SymTensor& w, int i, int j, double c, double s);

  DenseTensor tensor_;
  int dim_ = 0;
  std::size_t diag_stride_ = 0;
};

/// W <- W x_1 M x_2 M ... x_d M, symmetrized.
SymTensor transform_all_modes(const SymTensor& w, const Eigen::MatrixXd& m);

/// In-place W <- W x_1 G^T ... x_d G^T for the Givens rotation G(i, j, theta)
/// given by its cosine and sine.  Touches only entries with an index in
/// {i, j}; O(d n^(d-1)).
void rotate_all_modes_givens(SymTensor& w, int i, int j, double c, double s);
void rotate_all_modes_givens(SymTensor& w, int i, int j, double theta);

/// Sum of squared diagonal entries.
double diag_sq_norm(const SymTensor& w);

/// Sum of squared off-diagonal entries, summed directly (never negative).
double offdiag_sq_norm(const SymTensor& w);

/// Nonempty collection of symmetric tensors sharing order and dimension.
class TensorSet {
 public:
  explicit TensorSet(std::vector<SymTensor> tensors);

  int order() const noexcept { return tensors_.front().order(); }
  int dim() const noexcept { return tensors_.front().dim(); }
  std::size_t size() const noexcept { return tensors_.size(); }

  const SymTensor& operator[](std::size_t l) const { return tensors_[l]; }
  SymTensor& operator[](std::size_t l) { return tensors_[l]; }

  auto begin() const noexcept { return tensors_.begin(); }
  auto end() const noexcept { return tensors_.end(); }
  auto begin() noexcept { return tensors_.begin(); }
  auto end() noexcept { return tensors_.end(); }

 private:
  std::vector<SymTensor> tensors_;
};

double set_diag_sq_norm(const TensorSet& set);
double set_offdiag_sq_norm(const TensorSet& set);
double set_frobenius_sq(const TensorSet& set);

TensorSet transform_all_modes(const TensorSet& set, const Eigen::MatrixXd& m);

}  // namespace orthodiag
