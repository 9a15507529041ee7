#include "orthodiag/symtensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "orthodiag/errors.hpp"

namespace orthodiag {
namespace {

std::vector<std::size_t> row_major_strides(const std::vector<int>& shape) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (int k = static_cast<int>(shape.size()) - 2; k >= 0; --k) {
    strides[k] = strides[k + 1] * static_cast<std::size_t>(shape[k + 1]);
  }
  return strides;
}

std::size_t product(const std::vector<int>& shape) {
  std::size_t total = 1;
  for (int e : shape) total *= static_cast<std::size_t>(e);
  return total;
}

// Calls fn(flat_offset, permuted_flat_offset) for every entry and every
// permutation of its index positions.
template <class Fn>
void for_each_permuted(const DenseTensor& t, Fn&& fn) {
  const int d = t.order();
  const int n = t.extent(0);
  std::vector<int> idx(d, 0);
  std::vector<int> perm(d);
  std::vector<int> permuted(d);
  for (std::size_t flat = 0; flat < t.size(); ++flat) {
    std::size_t rest = flat;
    for (int k = d - 1; k >= 0; --k) {
      idx[k] = static_cast<int>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
    }
    std::iota(perm.begin(), perm.end(), 0);
    do {
      for (int k = 0; k < d; ++k) permuted[k] = idx[perm[k]];
      fn(flat, t.offset(permuted));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

void require_cubical(const DenseTensor& t, const char* what) {
  if (t.order() < 1 || !t.is_cubical()) {
    throw ContractViolation(std::string(what) + ": tensor must be cubical");
  }
}

void check_order_dim(int order, int dim) {
  if (order < kMinOrder || order > kMaxOrder) {
    throw ContractViolation("symmetric tensor order must be in [2, 4], got " +
                            std::to_string(order));
  }
  if (dim < 2) {
    throw ContractViolation("symmetric tensor dimension must be >= 2, got " +
                            std::to_string(dim));
  }
}

}  // namespace

DenseTensor::DenseTensor(std::vector<int> shape)
    : shape_(std::move(shape)), strides_(row_major_strides(shape_)), values_(product(shape_), 0.0) {
  for (int e : shape_) {
    if (e < 1) throw ContractViolation("tensor extents must be positive");
  }
}

DenseTensor::DenseTensor(std::vector<int> shape, std::vector<double> values)
    : DenseTensor(std::move(shape)) {
  if (values.size() != values_.size()) {
    throw ContractViolation("tensor value count " + std::to_string(values.size()) +
                            " does not match shape size " + std::to_string(values_.size()));
  }
  values_ = std::move(values);
}

DenseTensor DenseTensor::cubical(int order, int dim) {
  return DenseTensor(std::vector<int>(static_cast<std::size_t>(order), dim));
}

bool DenseTensor::is_cubical() const noexcept {
  return std::all_of(shape_.begin(), shape_.end(), [&](int e) { return e == shape_.front(); });
}

std::size_t DenseTensor::offset(std::span<const int> idx) const {
  if (idx.size() != shape_.size()) {
    throw ContractViolation("index arity does not match tensor order");
  }
  std::size_t off = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= shape_[k]) throw ContractViolation("tensor index out of range");
    off += static_cast<std::size_t>(idx[k]) * strides_[k];
  }
  return off;
}

double DenseTensor::frobenius_sq() const noexcept {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return sum;
}

DenseTensor mode_product(const DenseTensor& t, const Eigen::MatrixXd& m, int mode) {
  if (mode < 0 || mode >= t.order()) {
    throw ContractViolation("mode_product: mode " + std::to_string(mode) + " out of range");
  }
  const int cols = t.extent(mode);
  if (m.cols() != cols) {
    throw ContractViolation("mode_product: matrix has " + std::to_string(m.cols()) +
                            " columns, tensor mode has extent " + std::to_string(cols));
  }
  std::vector<int> out_shape = t.shape();
  const int rows = static_cast<int>(m.rows());
  out_shape[mode] = rows;
  DenseTensor out(out_shape);

  const std::size_t inner = t.stride(mode);
  const std::size_t outer = t.size() / (inner * static_cast<std::size_t>(cols));
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t in_base = o * static_cast<std::size_t>(cols) * inner;
    const std::size_t out_base = o * static_cast<std::size_t>(rows) * inner;
    for (int p = 0; p < rows; ++p) {
      for (std::size_t r = 0; r < inner; ++r) {
        double sum = 0.0;
        for (int q = 0; q < cols; ++q) sum += m(p, q) * t[in_base + q * inner + r];
        out[out_base + p * inner + r] = sum;
      }
    }
  }
  return out;
}

DenseTensor symmetrize(const DenseTensor& t) {
  require_cubical(t, "symmetrize");
  // One average per permutation orbit, written back to every member, so the
  // result is exactly symmetric and already-symmetric input is unchanged.
  const int d = t.order();
  const int n = t.extent(0);
  DenseTensor out(t.shape());
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<int> perm(idx.size());
  std::vector<std::size_t> members;
  while (true) {
    members.clear();
    perm = idx;
    do {
      members.push_back(t.offset(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double first = t[members.front()];
    bool uniform = true;
    double sum = 0.0;
    for (std::size_t m : members) {
      sum += t[m];
      uniform = uniform && t[m] == first;
    }
    const double avg = uniform ? first : sum / static_cast<double>(members.size());
    for (std::size_t m : members) out[m] = avg;

    // Next nondecreasing multi-index.
    int k = d - 1;
    while (k >= 0 && idx[k] == n - 1) --k;
    if (k < 0) break;
    ++idx[k];
    for (int r = k + 1; r < d; ++r) idx[r] = idx[k];
  }
  return out;
}

double symmetry_defect(const DenseTensor& t) {
  require_cubical(t, "symmetry_defect");
  double worst = 0.0;
  for_each_permuted(t, [&](std::size_t flat, std::size_t other) {
    worst = std::max(worst, std::abs(t[flat] - t[other]));
  });
  return worst;
}

SymTensor::SymTensor(int order, int dim) : SymTensor(DenseTensor::cubical(order, dim)) {}

SymTensor::SymTensor(DenseTensor t) : tensor_(std::move(t)) {
  require_cubical(tensor_, "SymTensor");
  dim_ = tensor_.extent(0);
  check_order_dim(tensor_.order(), dim_);
  diag_stride_ = 0;
  for (int k = 0; k < tensor_.order(); ++k) diag_stride_ += tensor_.stride(k);
  for (double v : tensor_.values()) {
    if (!std::isfinite(v)) throw ContractViolation("symmetric tensor entries must be finite");
  }
}

SymTensor SymTensor::from_dense(const DenseTensor& t) { return SymTensor(symmetrize(t)); }

SymTensor SymTensor::from_values(int order, int dim, std::vector<double> values, double tol) {
  check_order_dim(order, dim);
  DenseTensor t(std::vector<int>(static_cast<std::size_t>(order), dim), std::move(values));
  const double defect = symmetry_defect(t);
  const double norm = std::sqrt(t.frobenius_sq());
  if (!(defect <= tol * norm)) {
    throw ContractViolation("tensor is not symmetric: defect " + std::to_string(defect) +
                            " exceeds " + std::to_string(tol) + " * ||T||");
  }
  return from_dense(t);
}

SymTensor SymTensor::diagonal(int order, std::span<const double> diag) {
  SymTensor out(order, static_cast<int>(diag.size()));
  for (std::size_t k = 0; k < diag.size(); ++k) {
    out.tensor_[k * out.diag_stride_] = diag[k];
  }
  return out;
}

double SymTensor::near(int a, int b, int count_second) const {
  std::array<int, kMaxOrder> idx{};
  const int d = order();
  for (int k = 0; k < d; ++k) idx[k] = (k < d - count_second) ? a : b;
  return tensor_.at(std::span<const int>(idx.data(), static_cast<std::size_t>(d)));
}

void SymTensor::set_symmetric(std::span<const int> idx, double value) {
  if (static_cast<int>(idx.size()) != order()) {
    throw ContractViolation("set_symmetric: index arity does not match order");
  }
  if (!std::isfinite(value)) throw ContractViolation("set_symmetric: value must be finite");
  std::vector<int> sorted(idx.begin(), idx.end());
  std::sort(sorted.begin(), sorted.end());
  do {
    tensor_.at(sorted) = value;
  } while (std::next_permutation(sorted.begin(), sorted.end()));
}

SymTensor transform_all_modes(const SymTensor& w, const Eigen::MatrixXd& m) {
  if (m.rows() != w.dim() || m.cols() != w.dim()) {
    throw ContractViolation("transform_all_modes: matrix must be n x n");
  }
  DenseTensor t = w.dense();
  for (int k = 0; k < w.order(); ++k) t = mode_product(t, m, k);
  return SymTensor::from_dense(t);
}

void rotate_all_modes_givens(SymTensor& w, int i, int j, double c, double s) {
  const int n = w.dim();
  if (i < 0 || j >= n || i >= j) {
    throw ContractViolation("rotate_all_modes_givens: need 0 <= i < j < n");
  }
  DenseTensor& t = w.tensor_;
  const std::size_t n_sz = static_cast<std::size_t>(n);
  for (int mode = 0; mode < w.order(); ++mode) {
    const std::size_t inner = t.stride(mode);
    const std::size_t block = inner * n_sz;
    const std::size_t outer = t.size() / block;
    const std::size_t off_i = static_cast<std::size_t>(i) * inner;
    const std::size_t off_j = static_cast<std::size_t>(j) * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      double* base = t.values().data() + o * block;
      for (std::size_t r = 0; r < inner; ++r) {
        const double x = base[off_i + r];
        const double y = base[off_j + r];
        base[off_i + r] = c * x + s * y;
        base[off_j + r] = c * y - s * x;
      }
    }
  }
}

void rotate_all_modes_givens(SymTensor& w, int i, int j, double theta) {
  rotate_all_modes_givens(w, i, j, std::cos(theta), std::sin(theta));
}

double diag_sq_norm(const SymTensor& w) {
  double sum = 0.0;
  for (int k = 0; k < w.dim(); ++k) sum += w.diag(k) * w.diag(k);
  return sum;
}

double offdiag_sq_norm(const SymTensor& w) {
  std::size_t diag_stride = 0;
  for (int k = 0; k < w.order(); ++k) diag_stride += w.dense().stride(k);
  const auto values = w.values();
  double sum = 0.0;
  std::size_t next_diag = 0;
  for (std::size_t flat = 0; flat < values.size(); ++flat) {
    if (flat == next_diag) {
      next_diag += diag_stride;
      continue;
    }
    sum += values[flat] * values[flat];
  }
  return std::max(sum, 0.0);
}

TensorSet::TensorSet(std::vector<SymTensor> tensors) : tensors_(std::move(tensors)) {
  if (tensors_.empty()) throw ContractViolation("TensorSet must contain at least one tensor");
  for (const auto& t : tensors_) {
    if (t.order() != tensors_.front().order() || t.dim() != tensors_.front().dim()) {
      throw ContractViolation("TensorSet members must share order and dimension");
    }
  }
}

double set_diag_sq_norm(const TensorSet& set) {
  double sum = 0.0;
  for (const auto& t : set) sum += diag_sq_norm(t);
  return sum;
}

double set_offdiag_sq_norm(const TensorSet& set) {
  double sum = 0.0;
  for (const auto& t : set) sum += offdiag_sq_norm(t);
  return sum;
}

double set_frobenius_sq(const TensorSet& set) {
  double sum = 0.0;
  for (const auto& t : set) sum += t.frobenius_sq();
  return sum;
}

TensorSet transform_all_modes(const TensorSet& set, const Eigen::MatrixXd& m) {
  std::vector<SymTensor> out;
  out.reserve(set.size());
  for (const auto& t : set) out.push_back(transform_all_modes(t, m));
  return TensorSet(std::move(out));
}

}  // namespace orthodiag
