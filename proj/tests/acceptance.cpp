// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "orthodiag/angle_solver.hpp"
#include "orthodiag/geometry.hpp"
#include "orthodiag/harness.hpp"

using namespace orthodiag;

namespace {

constexpr int kN = 10;

struct Named {
  std::string label;
  std::string algo;
  AlgorithmParams params;
  double eps = 0.0;  // selection threshold for the step inequality, 0 if none
};

// The seven configurations used throughout: C, G (eps = 2/n and 0.02),
// G-max, C-threshold, PC (delta0 = 1e-3 and 1e-1 of the total squared norm).
std::vector<Named> standard_configs(double total, int max_sweeps) {
  std::vector<Named> out;
  auto add = [&](std::string label, std::string algo, AlgorithmParams p, double eps = 0.0) {
    p.max_sweeps = max_sweeps;
    out.push_back({std::move(label), std::move(algo), p, eps});
  };
  add("C", "c", {});
  AlgorithmParams g;
  g.eps = 2.0 / kN;
  add("G(eps=2/n)", "g", g, 2.0 / kN);
  g.eps = 0.02;
  add("G(eps=0.02)", "g", g, 0.02);
  add("G-max", "gmax", {}, 2.0 / kN);
  AlgorithmParams t;
  t.thresh = 1e-10;
  add("C-thresh", "cthresh", t);
  AlgorithmParams pc;
  pc.delta0 = 1e-3 * total;
  add("PC(1e-3)", "pc", pc);
  pc.delta0 = 1e-1 * total;
  add("PC(1e-1)", "pc", pc);
  return out;
}

struct StepAudit {
  long steps = 0;
  double worst_monotone = 0.0;  // max (f_prev - f_k) / scale
  double worst_proximal = 0.0;  // max (delta0 gamma - gain) / scale
  double worst_step = 0.0;      // max (bound - |df|) / scale
  long proximal_steps = 0;
  long gradient_steps = 0;
};

struct PoolRun {
  std::string problem;
  std::string label;
  int order = 0;
  double total = 0.0;
  RunResult result;
  StepAudit audit;
};

PoolRun audited_run(const std::string& problem, const TestProblem& p, const Named& cfg) {
  const double total = set_frobenius_sq(p.tensors);
  const RunConfig config = make_run_config(cfg.algo, cfg.params, p.tensors.dim(), total);
  StepAudit audit;
  double prev_f = 0.0;
  double prev_lambda = 0.0;
  Eigen::MatrixXd prev_q;
  const bool check_step = cfg.eps > 0.0 && p.tensors.order() <= 3;
  RunResult result =
      run(p.tensors, config, [&](const IterationRecord& rec, const RotationState& state) {
        if (rec.i >= 0 && !rec.skipped) {
          ++audit.steps;
          const double df = rec.f - prev_f;
          audit.worst_monotone = std::max(audit.worst_monotone, -df / total);
          if (config.delta0 > 0.0) {
            ++audit.proximal_steps;
            const double bound = config.delta0 * proximal_gamma(rec.theta);
            audit.worst_proximal = std::max(audit.worst_proximal, (bound - df) / total);
          }
          if (check_step) {
            ++audit.gradient_steps;
            const double dq = (state.q() - prev_q).norm();
            const double bound = std::sqrt(2.0) * cfg.eps / 4.0 * prev_lambda * dq;
            audit.worst_step = std::max(audit.worst_step, (bound - std::abs(df)) / total);
          }
        }
        prev_f = rec.f;
        prev_lambda = rec.lambda_norm;
        prev_q = state.q();
      });
  return {problem, cfg.label, p.tensors.order(), total, std::move(result), audit};
}

TestProblem problem(int d, DiagProfile profile, double sigma, bool slice = false) {
  ExperimentSpec spec;
  spec.n = kN;
  spec.d = d;
  spec.profile = profile;
  spec.sigma = sigma;
  spec.slice_mode = slice;
  spec.seed_rot = 1000 + static_cast<std::uint64_t>(d);
  spec.seed_noise = 2000 + static_cast<std::uint64_t>(d);
  return make_test_problem(spec);
}

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("[%s] criterion %2d  %-34s %s\n", pass ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  std::vector<PoolRun> pool;

  // 1. Exact recovery on noise-free equal-diagonal problems.
  {
    bool pass = true;
    double worst_off = 0.0;
    double worst_ms = 0.0;
    for (int d = 2; d <= 4; ++d) {
      const TestProblem p = problem(d, DiagProfile::Equal, 0.0);
      const double total = set_frobenius_sq(p.tensors);
      for (const auto& cfg : standard_configs(total, 50)) {
        PoolRun r = audited_run("equal d=" + std::to_string(d) + " sigma=0", p, cfg);
        const double off = r.result.trajectory.back().offdiag_sq / total;
        worst_off = std::max(worst_off, off);
        worst_ms = std::max(worst_ms, r.result.wall_ms);
        if (!(off < 1e-16) || r.result.wall_ms >= 10000.0) {
          pass = false;
          std::printf("       d=%d %s: offdiag/||A||^2=%.3e wall=%.1f ms\n", d, cfg.label.c_str(),
                      off, r.result.wall_ms);
        }
        pool.push_back(std::move(r));
      }
    }
    report(1, "exact recovery (sigma=0)", pass,
           fmt2("worst offdiag/||A||^2=%.3e, slowest run %.1f ms", worst_off, worst_ms));

    // Same runs on the linear profile, reported for information only.
    for (int d = 2; d <= 4; ++d) {
      const TestProblem p = problem(d, DiagProfile::Linear, 0.0);
      const double total = set_frobenius_sq(p.tensors);
      for (const auto& cfg : standard_configs(total, 50)) {
        PoolRun r = audited_run("linear d=" + std::to_string(d) + " sigma=0", p, cfg);
        const double off = r.result.trajectory.back().offdiag_sq / total;
        if (!(off < 1e-16)) {
          std::printf("       info: linear profile d=%d %s reaches offdiag/||A||^2=%.3e in 50 sweeps\n",
                      d, cfg.label.c_str(), off);
        }
        pool.push_back(std::move(r));
      }
    }
  }

  // 2. Gradient against finite differences.
  {
    bool pass = true;
    std::string detail;
    for (int d = 2; d <= 4; ++d) {
      const TestProblem p = problem(d, DiagProfile::Linear, 0.1);
      const CheckResult c = check_gradient(p.tensors, 200, 300 + static_cast<std::uint64_t>(d));
      pass = pass && c.passed;
      detail += "d=" + std::to_string(d) + " " + c.detail + "; ";
    }
    report(2, "gradient vs finite differences", pass, detail);
  }

  // 3. Algebraic angle against the brute-force oracle.
  {
    const auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    double worst = 0.0;
    long samples = 0;
    for (int d = 2; d <= 4; ++d) {
      // Views taken from rotated test tensors...
      const TestProblem p = problem(d, DiagProfile::Linear, 0.1);
      const CheckResult c = check_oracle_angles(p.tensors, 1000, 400 + static_cast<std::uint64_t>(d));
      pass = pass && c.passed;
      worst = std::max(worst, c.worst * 1e-10);
      samples += c.samples;
      // ...and synthetic views with standard normal blocks.
      Rng rng(500 + static_cast<std::uint64_t>(d));
      for (double factor : {0.0, 1e-3, 1e-1}) {
        for (int s = 0; s < 1000; ++s) {
          SubproblemView v = random_view(d, 1 + s % 4, 0.0, rng);
          double norm_sq = 0.0;
          for (const auto& b : v.blocks)
            for (int k = 0; k <= d; ++k) norm_sq += b[k] * b[k];
          v.delta0 = factor * norm_sq;
          const double ha = v.objective(best_angle(v).theta);
          const double ho = v.objective(brute_force_angle(v).theta);
          const double gap = std::abs(ha - ho) / (1.0 + std::abs(ho));
          worst = std::max(worst, gap);
          pass = pass && gap <= 1e-10;
          ++samples;
        }
      }
    }
    const double secs = seconds_since(t0);
    pass = pass && secs < 60.0;
    report(3, "angle solver vs oracle", pass,
           fmt("worst value gap=%.3e", worst) + " over " + std::to_string(samples) +
               " views" + fmt(", %.1f s", secs));
  }

  // 4. Tangent-substitution identities.
  {
    bool pass = true;
    std::string detail;
    for (int d = 2; d <= 3; ++d) {
      const TestProblem p = problem(d, DiagProfile::Linear, 0.1);
      const CheckResult c = check_identities(p.tensors, 1000, 600 + static_cast<std::uint64_t>(d));
      pass = pass && c.passed;
      detail += "d=" + std::to_string(d) + " " + c.detail + "; ";
    }
    report(4, "tangent identities", pass, detail);
  }

  // 8. Small-noise regime: every algorithm reaches the same objective.
  //    Runs here and below join the pool audited by criteria 5-7 and 10.
  bool regime_pass = true;
  double regime_spread = 0.0;
  for (int d = 3; d <= 4; ++d) {
    const TestProblem p = problem(d, DiagProfile::Equal, 1e-4);
    const double total = set_frobenius_sq(p.tensors);
    std::vector<double> finals;
    for (const auto& cfg : standard_configs(total, 100)) {
      PoolRun r = audited_run("equal d=" + std::to_string(d) + " sigma=1e-4", p, cfg);
      finals.push_back(r.result.state.f());
      pool.push_back(std::move(r));
    }
    const auto [lo, hi] = std::minmax_element(finals.begin(), finals.end());
    const double spread = (*hi - *lo) / std::abs(*hi);
    regime_spread = std::max(regime_spread, spread);
    regime_pass = regime_pass && spread <= 1e-6;
  }
  for (int d = 3; d <= 4; ++d) {
    for (double sigma : {1e-2, 1e-1}) {
      const TestProblem p = problem(d, DiagProfile::Equal, sigma);
      const double total = set_frobenius_sq(p.tensors);
      for (const auto& cfg : standard_configs(total, 100)) {
        pool.push_back(audited_run(
            "equal d=" + std::to_string(d) + " sigma=" + fmt("%g", sigma), p, cfg));
      }
    }
  }

  // 9. Simultaneous diagonalization of the slices of an order-4 tensor.
  bool slice_pass = true;
  double slice_worst = 0.0;
  {
    const TestProblem p = problem(4, DiagProfile::Equal, 1e-2, true);
    const double total = set_frobenius_sq(p.tensors);
    for (const auto& cfg : standard_configs(total, 100)) {
      PoolRun r = audited_run("slices sigma=1e-2", p, cfg);
      if (cfg.algo == "c" || cfg.label == "PC(1e-3)" || cfg.label == "PC(1e-1)") {
        const double rel = r.result.trajectory.back().lambda_norm / std::sqrt(total);
        slice_worst = std::max(slice_worst, rel);
        if (!(rel <= 1e-6)) {
          slice_pass = false;
          std::printf("       slices %s: ||Lambda||/sqrt(total)=%.3e after %d sweeps\n",
                      cfg.label.c_str(), rel, r.result.sweeps);
        }
      }
      pool.push_back(std::move(r));
    }
  }

  // 5-7, 10 over the whole pool.
  double worst_mono = 0.0, worst_prox = 0.0, worst_step = 0.0, worst_stat = 0.0;
  long steps = 0, prox_steps = 0, grad_steps = 0, converged = 0;
  bool stat_pass = true;
  for (const auto& r : pool) {
    worst_mono = std::max(worst_mono, r.audit.worst_monotone);
    worst_prox = std::max(worst_prox, r.audit.worst_proximal);
    worst_step = std::max(worst_step, r.audit.worst_step);
    steps += r.audit.steps;
    prox_steps += r.audit.proximal_steps;
    grad_steps += r.audit.gradient_steps;
    for (std::size_t k = 1; k < r.result.trajectory.size(); ++k) {
      worst_mono = std::max(worst_mono, (r.result.trajectory[k - 1].f - r.result.trajectory[k].f) /
                                            r.total);
    }
    if (r.result.converged()) {
      ++converged;
      const double rel = r.result.trajectory.back().lambda_norm / std::sqrt(r.total);
      worst_stat = std::max(worst_stat, rel);
      if (!(rel <= 1e-8)) {
        stat_pass = false;
        std::printf("       %s %s: stopped (%s) with ||Lambda||/sqrt(total)=%.3e\n",
                    r.problem.c_str(), r.label.c_str(), to_string(r.result.reason).c_str(), rel);
      }
    }
  }
  const std::string pool_size = std::to_string(pool.size()) + " runs";
  report(5, "monotone objective", worst_mono <= 1e-12,
         fmt("worst decrease/scale=%.3e", worst_mono) + " over " + std::to_string(steps) +
             " steps in " + pool_size);

  {
    // Largest violation of gamma >= 8 theta^2 / pi^2 on the grid (<= 0 passes).
    double worst_grid = -1.0;
    for (int k = 0; k < 10000; ++k) {
      const double theta = -std::numbers::pi / 4 + std::numbers::pi / 2 * k / 9999.0;
      if (theta == 0.0) continue;
      worst_grid = std::max(worst_grid, 8 * theta * theta / (std::numbers::pi * std::numbers::pi) -
                                            proximal_gamma(theta));
    }
    report(6, "proximal gain bound", worst_prox <= 1e-10 && worst_grid <= 0.0,
           fmt("worst shortfall/scale=%.3e", worst_prox) + " over " + std::to_string(prox_steps) +
               " PC steps; " + fmt("max(8t^2/pi^2 - gamma) on grid=%.3e", worst_grid));
  }
  report(7, "gradient step inequality (d<=3)", grad_steps > 0 && worst_step <= 1e-10,
         fmt("worst shortfall/scale=%.3e", worst_step) + " over " + std::to_string(grad_steps) +
             " G steps");
  report(8, "small-noise regime agreement", regime_pass,
         fmt("max relative spread of final f=%.3e", regime_spread));
  report(9, "slice-mode convergence", slice_pass,
         fmt("worst ||Lambda||/sqrt(total)=%.3e (C and PC)", slice_worst));
  report(10, "stationarity at termination", stat_pass && converged > 0,
         fmt("worst ||Lambda||/sqrt(total)=%.3e", worst_stat) + " over " +
             std::to_string(converged) + " converged runs");

  std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
