#include "orthodiag/algorithms.hpp"

#include <chrono>
#include <cmath>

#include "orthodiag/angle_solver.hpp"
#include "orthodiag/errors.hpp"

namespace orthodiag {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void validate(const RunConfig& config, int n) {
  if (config.max_sweeps < 1) throw ContractViolation("max_sweeps must be >= 1");
  if (config.record_every < 1) throw ContractViolation("record_every must be >= 1");
  if (!(config.delta0 >= 0.0) || !std::isfinite(config.delta0)) {
    throw ContractViolation("delta0 must be finite and >= 0");
  }
  if (config.stationarity_tol && !(*config.stationarity_tol > 0.0)) {
    throw ContractViolation("stationarity_tol must be > 0");
  }
  if (config.selector.kind() == PairSelector::Kind::GradientEps &&
      config.selector.eps() > 2.0 / n * (1.0 + 1e-12)) {
    throw ContractViolation("eps must not exceed 2/n for n = " + std::to_string(n));
  }
}

}  // namespace

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Stationary:
      return "stationary";
    case StopReason::NoProgress:
      return "no_progress";
    case StopReason::MaxSweeps:
      return "max_sweeps";
  }
  return "unknown";
}

PairSelector PairSelector::gradient_eps(double eps, int n) {
  if (n < 2) throw ContractViolation("gradient_eps: n must be >= 2");
  if (!(eps > 0.0) || eps > 2.0 / n * (1.0 + 1e-12)) {
    throw ContractViolation("gradient_eps: need 0 < eps <= 2/n (n = " + std::to_string(n) + ")");
  }
  return PairSelector(Kind::GradientEps, eps);
}

PairSelector PairSelector::cyclic_threshold(double threshold) {
  if (!(threshold > 0.0)) throw ContractViolation("cyclic_threshold: threshold must be > 0");
  return PairSelector(Kind::CyclicThreshold, threshold);
}

IndexPair cyclic_pair(long counter, int n) {
  if (n < 2) throw ContractViolation("cyclic_pair: n must be >= 2");
  const long period = static_cast<long>(n) * (n - 1) / 2;
  long pos = counter % period;
  if (pos < 0) pos += period;
  int i = 0;
  while (pos >= n - 1 - i) {
    pos -= n - 1 - i;
    ++i;
  }
  return {i, i + 1 + static_cast<int>(pos)};
}

std::optional<std::pair<IndexPair, long>> select_pair_gradient(const LambdaMatrix& lambda,
                                                               double eps, long start) {
  const int n = lambda.dim();
  if (!(eps > 0.0) || eps > 2.0 / n * (1.0 + 1e-12)) {
    throw ContractViolation("select_pair_gradient: need 0 < eps <= 2/n");
  }
  const double norm = lambda.norm();
  if (norm == 0.0) return std::nullopt;
  const long period = static_cast<long>(n) * (n - 1) / 2;
  for (long step = 0; step < period; ++step) {
    const long pos = start + step;
    const IndexPair pair = cyclic_pair(pos, n);
    if (2.0 * std::abs(lambda(pair.i, pair.j)) >= eps * norm) return std::make_pair(pair, pos);
  }
  // Unreachable in exact arithmetic (the largest entry always qualifies);
  // fall back to it so rounding can never stall the driver.
  const auto best = select_pair_max(lambda);
  long pos = start;
  while (!(cyclic_pair(pos, n) == *best)) ++pos;
  return std::make_pair(*best, pos);
}

std::optional<IndexPair> select_pair_max(const LambdaMatrix& lambda) {
  const int n = lambda.dim();
  IndexPair best{0, 1};
  double best_abs = -1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double v = std::abs(lambda(i, j));
      if (v > best_abs) {
        best_abs = v;
        best = {i, j};
      }
    }
  }
  if (best_abs <= 0.0) return std::nullopt;
  return best;
}

double stationarity_norm(const RotationState& state) { return lambda_of(state).norm(); }

RunResult run(const TensorSet& original, const RunConfig& config, const RunObserver& observer) {
  return run(original, Eigen::MatrixXd::Identity(original.dim(), original.dim()), config,
             observer);
}

RunResult run(const TensorSet& original, const Eigen::MatrixXd& q0, const RunConfig& config,
              const RunObserver& observer) {
  const int n = original.dim();
  validate(config, n);
  const auto start = Clock::now();

  RunResult result{RotationState(original, q0), {}, StopReason::MaxSweeps, 0, 0, 0.0};
  RotationState& state = result.state;
  const double tol =
      config.stationarity_tol.value_or(1e-10 * std::sqrt(state.total_sq_norm()));
  const PairSelector& selector = config.selector;
  const long pairs_per_sweep = static_cast<long>(n) * (n - 1) / 2;

  LambdaMatrix lambda = lambda_of(state);
  long iteration = 0;
  long cursor = 0;
  bool last_emitted = true;

  auto wall = [&] { return config.record_wall_time ? elapsed_ms(start) : 0.0; };
  auto emit = [&](const IterationRecord& rec, bool force) {
    last_emitted = force || iteration % config.record_every == 0;
    if (last_emitted) result.trajectory.push_back(rec);
    if (observer) observer(rec, state);
  };

  IterationRecord current;
  current.f = state.f();
  current.offdiag_sq = set_offdiag_sq_norm(state.rotated());
  current.lambda_norm = lambda.norm();
  current.wall_ms = wall();
  emit(current, true);

  for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
    result.sweeps = sweep + 1;
    bool progress = false;
    for (long p = 0; p < pairs_per_sweep; ++p) {
      if (lambda.norm() <= tol) {
        result.reason = StopReason::Stationary;
        goto finished;
      }

      IndexPair pair;
      bool skip = false;
      switch (selector.kind()) {
        case PairSelector::Kind::Cyclic:
          pair = cyclic_pair(p, n);
          break;
        case PairSelector::Kind::CyclicThreshold:
          pair = cyclic_pair(p, n);
          skip = !(std::abs(lambda(pair.i, pair.j)) > selector.threshold() / n);
          break;
        case PairSelector::Kind::GradientEps: {
          const auto chosen = select_pair_gradient(lambda, selector.eps(), cursor);
          if (!chosen) {
            result.reason = StopReason::Stationary;
            goto finished;
          }
          pair = chosen->first;
          cursor = chosen->second + 1;
          break;
        }
        case PairSelector::Kind::GradientMax: {
          const auto chosen = select_pair_max(lambda);
          if (!chosen) {
            result.reason = StopReason::Stationary;
            goto finished;
          }
          pair = *chosen;
          break;
        }
      }

      ++iteration;
      current.sweep = sweep;
      current.i = pair.i;
      current.j = pair.j;
      if (skip) {
        current.theta = 0.0;
        current.skipped = true;
        current.wall_ms = wall();
        emit(current, false);
        continue;
      }

      const SubproblemView view =
          SubproblemView::extract(state.rotated(), pair.i, pair.j, config.delta0);
      const AngleResult angle = config.oracle_angles ? brute_force_angle(view) : best_angle(view);
      state.apply(GivensRotation::make(pair.i, pair.j, angle.theta));
      ++result.rotations;
      progress = true;
      lambda = lambda_of(state);

      current.k = result.rotations;
      current.theta = angle.theta;
      current.skipped = false;
      current.f = state.f();
      current.offdiag_sq = set_offdiag_sq_norm(state.rotated());
      current.lambda_norm = lambda.norm();
      current.wall_ms = wall();
      emit(current, false);
    }
    if (selector.kind() == PairSelector::Kind::CyclicThreshold && !progress) {
      result.reason = StopReason::NoProgress;
      break;
    }
  }

finished:
  if (!last_emitted) result.trajectory.push_back(current);
  result.wall_ms = elapsed_ms(start);
  return result;
}

}  // namespace orthodiag
