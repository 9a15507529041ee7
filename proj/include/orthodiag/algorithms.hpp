#pragma once

// Jacobi sweep drivers.  All variants share one loop: pick a pair (i, j),
// solve the rotation subproblem for that plane exactly, apply the rotation.
//
//   Jacobi-C           cyclic pair order (0,1), (0,2), ..., (n-2,n-1)
//   Jacobi-G           first pair in cyclic order with 2|Lambda_ij| >= eps ||Lambda||
//   Jacobi-G-max       pair maximizing |Lambda_ij|
//   Jacobi-C-threshold cyclic, rotating only when |Lambda_ij| > delta / n
//   Jacobi-PC          cyclic with proximal weight delta0 > 0

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orthodiag/geometry.hpp"

namespace orthodiag {

struct IndexPair {
  int i = 0;
  int j = 1;

  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

class PairSelector {
 public:
  enum class Kind { Cyclic, GradientEps, GradientMax, CyclicThreshold };

  static PairSelector cyclic() { return PairSelector(Kind::Cyclic, 0.0); }
  /// Requires 0 < eps <= 2/n.
  static PairSelector gradient_eps(double eps, int n);
  static PairSelector gradient_max() { return PairSelector(Kind::GradientMax, 0.0); }
  /// Requires threshold > 0.
  static PairSelector cyclic_threshold(double threshold);

  Kind kind() const noexcept { return kind_; }
  double eps() const noexcept { return kind_ == Kind::GradientEps ? param_ : 0.0; }
  double threshold() const noexcept { return kind_ == Kind::CyclicThreshold ? param_ : 0.0; }

 private:
  PairSelector(Kind kind, double param) : kind_(kind), param_(param) {}
  Kind kind_;
  double param_;
};

struct RunConfig {
  PairSelector selector = PairSelector::cyclic();
  double delta0 = 0.0;
  int max_sweeps = 100;
  /// Absolute ||Lambda|| tolerance; default 1e-10 * sqrt(total squared norm).
  std::optional<double> stationarity_tol;
  std::uint64_t seed = 0;  ///< provenance only
  int record_every = 1;
  bool record_wall_time = true;
  /// Solve every subproblem with brute_force_angle instead of the algebraic
  /// solver.
  bool oracle_angles = false;
};

struct IterationRecord {
  long k = 0;      ///< rotations performed so far (0 = initial state)
  int sweep = 0;
  int i = -1;      ///< -1 for the initial record
  int j = -1;
  double theta = 0.0;
  double f = 0.0;
  double offdiag_sq = 0.0;
  double lambda_norm = 0.0;  ///< ||Lambda|| after this iteration
  bool skipped = false;
  double wall_ms = 0.0;
};

enum class StopReason { Stationary, NoProgress, MaxSweeps };

std::string to_string(StopReason reason);

struct RunResult {
  RotationState state;
  std::vector<IterationRecord> trajectory;
  StopReason reason = StopReason::MaxSweeps;
  int sweeps = 0;  ///< sweeps started
  long rotations = 0;
  double wall_ms = 0.0;

  bool converged() const noexcept { return reason != StopReason::MaxSweeps; }
};

/// Called after every iteration (including skipped ones) with the record and
/// the state after it, independent of record_every.
using RunObserver = std::function<void(const IterationRecord&, const RotationState&)>;

/// Pair visited at position `counter` of the cyclic order (period n(n-1)/2).
IndexPair cyclic_pair(long counter, int n);

/// First pair at or after cyclic position `start` with 2|Lambda_ij| >=
/// eps ||Lambda||, and its cyclic position.  nullopt when Lambda = 0.
std::optional<std::pair<IndexPair, long>> select_pair_gradient(const LambdaMatrix& lambda,
                                                               double eps, long start = 0);

/// argmax |Lambda_ij| over i < j, ties to the smallest (i, j).  nullopt when
/// Lambda = 0.
std::optional<IndexPair> select_pair_max(const LambdaMatrix& lambda);

/// ||Lambda(Q)||, the norm of the Riemannian gradient.
double stationarity_norm(const RotationState& state);

RunResult run(const TensorSet& original, const Eigen::MatrixXd& q0, const RunConfig& config,
              const RunObserver& observer = {});
RunResult run(const TensorSet& original, const RunConfig& config,
              const RunObserver& observer = {});

}  // namespace orthodiag
