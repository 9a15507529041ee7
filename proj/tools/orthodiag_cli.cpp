// orthodiag: generate test problems, run the Jacobi-type drivers, benchmark
// suites and invariant checks.
//
// Exit codes: 0 success, 2 invalid input, 3 invariant failure.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "orthodiag/errors.hpp"
#include "orthodiag/geometry.hpp"
#include "orthodiag/harness.hpp"
#include "orthodiag/io.hpp"

namespace {

using namespace orthodiag;

constexpr int kInvalidInput = 2;
constexpr int kInvariantFailure = 3;

struct GenOptions {
  ExperimentSpec spec;
  std::string profile = "equal";
  std::string out;
  std::string truth_out;
};

struct RunOptions {
  std::string in;
  std::string algo;
  AlgorithmParams params;
  std::string csv;
  std::string q0;
  std::string q_out;
  bool no_wall_time = false;
};

struct BenchOptions {
  std::string in;
  std::string suite;
  std::string outdir;
  std::string q0;
  bool no_wall_time = false;
};

struct VerifyOptions {
  std::string in;
  int samples = 100;
  std::uint64_t seed = 7;
};

Eigen::MatrixXd start_matrix(const std::string& path, int n) {
  if (path.empty()) return Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd q = load_orthomat(path);
  if (q.rows() != n) throw ContractViolation("starting matrix dimension does not match tensors");
  return q;
}

int cmd_gen(GenOptions& o) {
  o.spec.profile = parse_profile(o.profile);
  const TestProblem problem = make_test_problem(o.spec);
  save_tensor_set(o.out, problem.tensors);
  if (!o.truth_out.empty()) save_orthomat(o.truth_out, problem.truth);
  return 0;
}

int check_trajectory(const std::vector<IterationRecord>& trajectory, double total) {
  // Per-record conservation and monotonicity.
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const auto& r = trajectory[k];
    if (std::abs(r.f + r.offdiag_sq - total) > 1e-9 * total) {
      std::cerr << "invariant failure: f + offdiag_sq drifted at k=" << r.k << '\n';
      return kInvariantFailure;
    }
    if (k > 0 && r.f < trajectory[k - 1].f - 1e-12 * total) {
      std::cerr << "invariant failure: f decreased at k=" << r.k << '\n';
      return kInvariantFailure;
    }
  }
  return 0;
}

int cmd_run(RunOptions& o) {
  const TensorSet tensors = load_tensor_set(o.in);
  const double total = set_frobenius_sq(tensors);
  RunConfig config = make_run_config(o.algo, o.params, tensors.dim(), total);
  config.record_wall_time = !o.no_wall_time;
  const RunResult result = run(tensors, start_matrix(o.q0, tensors.dim()), config);
  save_trajectory_csv(o.csv, result.trajectory);
  if (!o.q_out.empty()) save_orthomat(o.q_out, result.state.q());
  const auto& last = result.trajectory.back();
  std::printf("algo=%s stop=%s sweeps=%d rotations=%ld f=%s offdiag_sq=%s lambda_norm=%s\n",
              o.algo.c_str(), to_string(result.reason).c_str(), result.sweeps, result.rotations,
              format_double(last.f).c_str(), format_double(last.offdiag_sq).c_str(),
              format_double(last.lambda_norm).c_str());
  return check_trajectory(result.trajectory, total);
}

int cmd_bench(BenchOptions& o) {
  const TensorSet tensors = load_tensor_set(o.in);
  const double total = set_frobenius_sq(tensors);
  std::ifstream suite(o.suite);
  if (!suite) throw ParseError("cannot open suite file '" + o.suite + "'");
  auto configs = parse_suite(suite, tensors.dim(), total);
  for (auto& c : configs) c.run.record_wall_time = !o.no_wall_time;
  const Eigen::MatrixXd q0 = start_matrix(o.q0, tensors.dim());
  const BenchmarkReport report = run_benchmark(tensors, configs, o.outdir, &q0);
  write_report_csv(std::cout, report);
  int status = 0;
  for (const auto& e : report.entries) {
    if (!e.ok) {
      std::cerr << e.name << ": " << e.error << '\n';
      status = kInvariantFailure;
    } else if (check_trajectory(e.trajectory, total) != 0) {
      std::cerr << "in run " << e.name << '\n';
      status = kInvariantFailure;
    }
  }
  return status;
}

int cmd_verify(const VerifyOptions& o) {
  const TensorSet tensors = load_tensor_set(o.in);
  if (o.samples < 1) throw ContractViolation("samples must be >= 1");
  bool all = true;
  for (const auto& check : verify_invariants(tensors, o.samples, o.seed)) {
    std::printf("%s %s samples=%ld %s\n", check.passed ? "PASS" : "FAIL", check.name.c_str(),
                check.samples, check.detail.c_str());
    all = all && check.passed;
  }
  return all ? 0 : kInvariantFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jacobi-type orthogonal diagonalization of symmetric tensors"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* g = app.add_subcommand("gen", "Generate a rotated diagonal test problem");
  g->add_option("--n", gen.spec.n, "Dimension")->default_val(10);
  g->add_option("--d", gen.spec.d, "Tensor order (2..4)")->default_val(3);
  g->add_option("--m", gen.spec.m, "Number of tensors")->default_val(1);
  g->add_option("--profile", gen.profile, "Diagonal profile")
      ->check(CLI::IsMember({"equal", "linear"}))
      ->default_val("equal");
  g->add_option("--sigma", gen.spec.sigma, "Noise standard deviation")->default_val(0.0);
  g->add_option("--seed-rot", gen.spec.seed_rot, "Rotation seed")->default_val(1);
  g->add_option("--seed-noise", gen.spec.seed_noise, "Noise seed")->default_val(2);
  g->add_flag("--slice-mode", gen.spec.slice_mode,
              "Emit the n order-3 slices of an order-4 tensor");
  g->add_option("--out", gen.out, "Output tensor file")->required();
  g->add_option("--truth-out", gen.truth_out, "Write the ground-truth rotation here");

  RunOptions ro;
  auto* r = app.add_subcommand("run", "Run one algorithm");
  r->add_option("--in", ro.in, "Input tensor file")->required();
  r->add_option("--algo", ro.algo, "Algorithm")
      ->check(CLI::IsMember({"c", "g", "gmax", "cthresh", "pc"}))
      ->required();
  r->add_option("--eps", ro.params.eps, "Gradient threshold (algo g)");
  r->add_option("--delta0", ro.params.delta0, "Proximal weight (algo pc)");
  r->add_option("--thresh", ro.params.thresh, "Skip threshold (algo cthresh)");
  r->add_option("--max-sweeps", ro.params.max_sweeps, "Sweep limit")->default_val(100);
  r->add_option("--tol", ro.params.tol, "Stationarity tolerance on ||Lambda||");
  r->add_option("--record-every", ro.params.record_every, "Trajectory stride")->default_val(1);
  r->add_option("--csv", ro.csv, "Trajectory CSV output")->required();
  r->add_option("--q0", ro.q0, "Starting orthogonal matrix (orthomat file)");
  r->add_option("--q-out", ro.q_out, "Write the final orthogonal matrix here");
  r->add_flag("--no-wall-time", ro.no_wall_time, "Record wall_ms as 0");

  BenchOptions bo;
  auto* b = app.add_subcommand("bench", "Run a suite of algorithm configurations");
  b->add_option("--in", bo.in, "Input tensor file")->required();
  b->add_option("--suite", bo.suite, "Suite file (key=value per line)")->required();
  b->add_option("--outdir", bo.outdir, "Output directory")->required();
  b->add_option("--q0", bo.q0, "Starting orthogonal matrix (orthomat file)");
  b->add_flag("--no-wall-time", bo.no_wall_time, "Record wall_ms as 0");

  VerifyOptions vo;
  auto* v = app.add_subcommand("verify", "Run the invariant checks on a tensor file");
  v->add_option("--in", vo.in, "Input tensor file")->required();
  v->add_option("--samples", vo.samples, "Samples per check")->default_val(100);
  v->add_option("--seed", vo.seed, "Sampling seed")->default_val(7);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidInput;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (r->parsed()) return cmd_run(ro);
    if (b->parsed()) return cmd_bench(bo);
    if (v->parsed()) return cmd_verify(vo);
  } catch (const ParseError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ContractViolation& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariantFailure;
  }
  return kInvalidInput;
}
