#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "orthodiag/harness.hpp"
#include "orthodiag/rng.hpp"
#include "orthodiag/symtensor.hpp"

namespace testing {

inline orthodiag::SymTensor random_symmetric(int order, int dim, orthodiag::Rng& rng) {
  return orthodiag::SymTensor::from_dense(
      orthodiag::symmetrize(orthodiag::gaussian_tensor(order, dim, 1.0, rng)));
}

inline orthodiag::TensorSet random_set(int order, int dim, int count, std::uint64_t seed) {
  orthodiag::Rng rng(seed);
  std::vector<orthodiag::SymTensor> tensors;
  for (int l = 0; l < count; ++l) tensors.push_back(random_symmetric(order, dim, rng));
  return orthodiag::TensorSet(std::move(tensors));
}

// W x_1 M ... x_d M by repeated single-mode products on the dense tensor.
inline orthodiag::DenseTensor naive_all_modes(const orthodiag::DenseTensor& t,
                                              const Eigen::MatrixXd& m) {
  orthodiag::DenseTensor out = t;
  for (int k = 0; k < t.order(); ++k) out = orthodiag::mode_product(out, m, k);
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

}  // namespace testing
