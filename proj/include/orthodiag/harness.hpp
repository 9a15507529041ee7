#pragma once

// Synthetic problems (rotated diagonal tensor plus symmetrized Gaussian
// noise), benchmark fan-out over algorithm configurations, and the invariant
// checks behind `orthodiag verify`.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orthodiag/algorithms.hpp"
#include "orthodiag/angle_solver.hpp"
#include "orthodiag/rng.hpp"
#include "orthodiag/symtensor.hpp"

namespace orthodiag {

enum class DiagProfile { Equal, Linear, Custom };

DiagProfile parse_profile(const std::string& name);

struct ExperimentSpec {
  int n = 10;
  int d = 3;
  /// Number of tensors (independent noise, shared diagonal and rotation).
  /// Ignored in slice mode, which always yields n slices.
  int m = 1;
  DiagProfile profile = DiagProfile::Equal;
  std::vector<double> custom_diagonal;
  double sigma = 0.0;
  std::uint64_t seed_rot = 1;
  std::uint64_t seed_noise = 2;
  /// Build one order-4 tensor and return its n order-3 slices along the last
  /// index.
  bool slice_mode = false;
};

/// Diagonal entries 1/sqrt(n) (Equal), k/sqrt(sum k^2) for k = 1..n (Linear)
/// or the custom list.  Built-in profiles have unit Frobenius norm.
SymTensor make_diag_tensor(const ExperimentSpec& spec);

/// Tensor with i.i.d. N(0, sigma^2) entries.
DenseTensor gaussian_tensor(int order, int dim, double sigma, Rng& rng);

struct TestProblem {
  TensorSet tensors;
  /// Maximizer in the driver's convention: starting a run from `truth`
  /// yields the (noise-free) diagonal tensor.
  Eigen::MatrixXd truth;
  /// The order-4 tensor the slices were cut from (slice mode only).
  std::optional<SymTensor> full;
};

TestProblem make_test_problem(const ExperimentSpec& spec);

/// Order-3 slices B_l[k, p, s] = A[k, p, s, l] of an order-4 tensor.
TensorSet slices_along_last(const SymTensor& a);

struct AlgorithmConfig {
  std::string name;
  std::string algo;  ///< c, g, gmax, cthresh or pc
  RunConfig run;
};

struct AlgorithmParams {
  std::optional<double> eps;
  std::optional<double> delta0;
  std::optional<double> thresh;
  std::optional<double> tol;
  int max_sweeps = 100;
  int record_every = 1;
};

/// Builds a RunConfig for one of the algorithm codes.  Defaults: eps =
/// 0.1 * 2/n, delta0 = 1e-3 * total_sq_norm, thresh = 1e-10.
RunConfig make_run_config(const std::string& algo, const AlgorithmParams& params, int n,
                          double total_sq_norm);

/// One configuration per non-empty line, `key=value` tokens separated by
/// whitespace; `#` starts a comment.  Keys: name, algo, eps, delta0, thresh,
/// tol, max_sweeps, record_every.
std::vector<AlgorithmConfig> parse_suite(std::istream& in, int n, double total_sq_norm);

struct BenchmarkEntry {
  std::string name;
  std::string algo;
  bool ok = false;
  std::string error;
  double f = 0.0;
  double offdiag_sq = 0.0;
  double lambda_norm = 0.0;
  int sweeps = 0;
  long rotations = 0;
  double wall_ms = 0.0;
  std::string stop_reason;
  std::string csv_path;
  std::vector<IterationRecord> trajectory;
};

struct BenchmarkReport {
  std::vector<BenchmarkEntry> entries;
};

/// Runs every configuration from the same starting point.  A failing
/// configuration is recorded with ok = false and does not stop the others.
/// With `outdir`, writes <name>.csv per run and report.csv.
BenchmarkReport run_benchmark(const TensorSet& tensors, const std::vector<AlgorithmConfig>& configs,
                              const std::optional<std::filesystem::path>& outdir = std::nullopt,
                              const Eigen::MatrixXd* q0 = nullptr);

void write_report_csv(std::ostream& out, const BenchmarkReport& report);

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      ///< worst observed (normalized) error
  double tolerance = 0.0;
  long samples = 0;
  std::string detail;
};

/// Analytic h'(0) against -2 Lambda_ij and a central finite difference of
/// f(Q G(i, j, theta)) (step 1e-5, relative 1e-6, relative to
/// max(|h'(0)|, 1e-3 * total_sq_norm)) at random orthogonal Q.
CheckResult check_gradient(const TensorSet& tensors, int samples, std::uint64_t seed);

/// Closed forms of tau(x) - tau(0) and tau'(x) and the symmetry
/// tau(x) = tau(-1/x) (orders 2 and 3 only).
CheckResult check_identities(const TensorSet& tensors, int samples, std::uint64_t seed);

/// Algebraic angle against brute_force_angle for delta0 in {0, 1e-3, 1e-1}
/// (scaled by the total squared norm).
CheckResult check_oracle_angles(const TensorSet& tensors, int samples, std::uint64_t seed);

/// Frobenius norm invariance and symmetry preservation under rotation.
CheckResult check_rotation_invariants(const TensorSet& tensors, int samples, std::uint64_t seed);

std::vector<CheckResult> verify_invariants(const TensorSet& tensors, int samples = 100,
                                           std::uint64_t seed = 7);

/// Random subproblem view with standard normal block entries.
SubproblemView random_view(int order, int blocks, double delta0, Rng& rng);

}  // namespace orthodiag
