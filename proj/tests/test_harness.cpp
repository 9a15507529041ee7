#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "orthodiag/errors.hpp"
#include "orthodiag/geometry.hpp"
#include "orthodiag/harness.hpp"
#include "orthodiag/io.hpp"
#include "support.hpp"

using namespace orthodiag;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "orthodiag_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("diagonal profiles") {
  ExperimentSpec spec;
  spec.n = 10;
  spec.d = 3;
  const SymTensor equal = make_diag_tensor(spec);
  for (int k = 0; k < 10; ++k) CHECK(equal.diag(k) == doctest::Approx(1 / std::sqrt(10.0)));
  CHECK(equal.frobenius_sq() == doctest::Approx(1.0));
  CHECK(offdiag_sq_norm(equal) == 0.0);

  spec.profile = DiagProfile::Linear;
  const SymTensor linear = make_diag_tensor(spec);
  for (int k = 0; k < 10; ++k) CHECK(linear.diag(k) == doctest::Approx((k + 1) / std::sqrt(385.0)));
  CHECK(linear.frobenius_sq() == doctest::Approx(1.0));

  spec.profile = DiagProfile::Custom;
  spec.custom_diagonal.assign(10, 0.0);
  CHECK_THROWS_AS(make_diag_tensor(spec), ContractViolation);
  spec.custom_diagonal.assign(3, 1.0);
  CHECK_THROWS_AS(make_diag_tensor(spec), ContractViolation);

  CHECK(parse_profile("linear") == DiagProfile::Linear);
  CHECK_THROWS_AS(parse_profile("cubic"), ContractViolation);
}

TEST_CASE("make_test_problem: noise-free ground truth diagonalizes exactly") {
  for (int d = 2; d <= 4; ++d) {
    ExperimentSpec spec;
    spec.n = 7;
    spec.d = d;
    spec.profile = DiagProfile::Linear;
    const TestProblem p = make_test_problem(spec);
    const RotationState at_truth(p.tensors, p.truth);
    CHECK(set_offdiag_sq_norm(at_truth.rotated()) <= 1e-20 * set_frobenius_sq(p.tensors));
    CHECK(p.truth.determinant() == doctest::Approx(1.0));
  }
}

TEST_CASE("make_test_problem: deterministic, seeded, and validated") {
  ExperimentSpec spec;
  spec.n = 5;
  spec.m = 3;
  spec.sigma = 1e-2;
  const TestProblem a = make_test_problem(spec);
  const TestProblem b = make_test_problem(spec);
  REQUIRE(a.tensors.size() == 3);
  for (std::size_t l = 0; l < 3; ++l) {
    CHECK(testing::max_abs_diff(a.tensors[l].values(), b.tensors[l].values()) == 0.0);
  }
  CHECK(testing::max_abs_diff(a.tensors[0].values(), a.tensors[1].values()) > 0.0);
  spec.seed_noise = 99;
  const TestProblem c = make_test_problem(spec);
  CHECK(testing::max_abs_diff(a.tensors[0].values(), c.tensors[0].values()) > 0.0);

  ExperimentSpec bad;
  bad.sigma = -1;
  CHECK_THROWS_AS(make_test_problem(bad), ContractViolation);
  bad = ExperimentSpec{};
  bad.slice_mode = true;
  bad.d = 3;
  CHECK_THROWS_AS(make_test_problem(bad), ContractViolation);
}

TEST_CASE("noise level scales with sigma") {
  for (double sigma : {1e-4, 1e-2}) {
    ExperimentSpec spec;
    spec.n = 10;
    spec.sigma = sigma;
    const TestProblem p = make_test_problem(spec);
    const RotationState at_truth(p.tensors, p.truth);
    const double off = std::sqrt(set_offdiag_sq_norm(at_truth.rotated()));
    CHECK(off > 0.1 * sigma * 10);
    CHECK(off < 10 * sigma * 10 * 3);
  }
}

TEST_CASE("slice mode") {
  ExperimentSpec spec;
  spec.n = 5;
  spec.d = 4;
  spec.sigma = 1e-2;
  spec.slice_mode = true;
  const TestProblem p = make_test_problem(spec);
  REQUIRE(p.full);
  REQUIRE(p.tensors.size() == 5);
  CHECK(p.tensors.order() == 3);
  double sum = 0.0;
  for (const auto& s : p.tensors) {
    sum += s.frobenius_sq();
    CHECK(symmetry_defect(s.dense()) == 0.0);
  }
  CHECK(sum == doctest::Approx(p.full->frobenius_sq()).epsilon(1e-15));
  for (int l = 0; l < 5; ++l) CHECK(p.tensors[l].at({0, 1, 2}) == p.full->at({0, 1, 2, l}));
  CHECK_THROWS_AS(slices_along_last(SymTensor(3, 3)), ContractViolation);
}

TEST_CASE("make_run_config defaults and parameter guards") {
  const RunConfig g = make_run_config("g", {}, 10, 2.0);
  CHECK(g.selector.kind() == PairSelector::Kind::GradientEps);
  CHECK(g.selector.eps() == doctest::Approx(0.02));
  const RunConfig pc = make_run_config("pc", {}, 10, 2.0);
  CHECK(pc.delta0 == doctest::Approx(2e-3));
  const RunConfig t = make_run_config("cthresh", {}, 10, 2.0);
  CHECK(t.selector.threshold() == doctest::Approx(1e-10));
  CHECK(make_run_config("c", {}, 10, 2.0).delta0 == 0.0);

  AlgorithmParams p;
  p.delta0 = 0.1;
  CHECK_THROWS_AS(make_run_config("c", p, 10, 1.0), ContractViolation);
  p = {};
  p.eps = 0.5;
  CHECK_THROWS_AS(make_run_config("g", p, 10, 1.0), ContractViolation);
  CHECK_THROWS_AS(make_run_config("newton", {}, 10, 1.0), ContractViolation);
}

TEST_CASE("parse_suite") {
  std::istringstream ok(
      "# comment\n"
      "algo=c name=cyclic\n"
      "\n"
      "algo=g eps=0.2 max_sweeps=5\n"
      "algo=pc delta0=0.01 tol=1e-9 record_every=2  # trailing comment\n");
  const auto configs = parse_suite(ok, 10, 1.0);
  REQUIRE(configs.size() == 3);
  CHECK(configs[0].name == "cyclic");
  CHECK(configs[1].name == "g_1");
  CHECK(configs[1].run.max_sweeps == 5);
  CHECK(configs[2].run.delta0 == 0.01);
  CHECK(configs[2].run.record_every == 2);
  CHECK(*configs[2].run.stationarity_tol == 1e-9);

  for (const char* bad : {"algo=c foo=1\n", "eps=0.1\n", "algo=g eps=abc\n", "algo=c name=a/b\n",
                          "\n# only comments\n", "algo=c delta0=0.1\n", "algo\n"}) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(parse_suite(in, 10, 1.0), ParseError);
  }
}

TEST_CASE("run_benchmark: report matches trailing rows, files written, errors isolated") {
  ExperimentSpec spec;
  spec.n = 6;
  spec.sigma = 1e-2;
  const TestProblem p = make_test_problem(spec);
  std::istringstream suite("algo=c\nalgo=gmax\nalgo=pc\n");
  auto configs = parse_suite(suite, 6, set_frobenius_sq(p.tensors));
  RunConfig broken;
  broken.max_sweeps = 0;
  configs.push_back({"broken", "c", broken});

  const auto outdir = scratch("bench");
  std::filesystem::remove_all(outdir);
  const BenchmarkReport report = run_benchmark(p.tensors, configs, outdir);
  REQUIRE(report.entries.size() == 4);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& e = report.entries[k];
    CHECK(e.ok);
    CHECK(e.f == e.trajectory.back().f);
    CHECK(e.offdiag_sq == e.trajectory.back().offdiag_sq);
    CHECK(e.lambda_norm == e.trajectory.back().lambda_norm);
    CHECK(std::filesystem::exists(e.csv_path));
  }
  CHECK_FALSE(report.entries[3].ok);
  CHECK_FALSE(report.entries[3].error.empty());
  const std::string text = slurp(outdir / "report.csv");
  CHECK(text.find("name,algo,ok,f,") == 0);
  CHECK(text.find("broken,c,0,") != std::string::npos);
}

TEST_CASE("identical seeds give byte-identical trajectories") {
  ExperimentSpec spec;
  spec.n = 6;
  spec.d = 4;
  spec.sigma = 1e-2;
  std::string first;
  for (int rep = 0; rep < 2; ++rep) {
    const TestProblem p = make_test_problem(spec);
    RunConfig config = make_run_config("pc", {}, 6, set_frobenius_sq(p.tensors));
    config.record_wall_time = false;
    std::ostringstream out;
    write_trajectory_csv(out, run(p.tensors, config).trajectory);
    if (rep == 0) first = out.str();
    else CHECK(out.str() == first);
  }
  CHECK(first.rfind(kTrajectoryHeader, 0) == 0);
}

TEST_CASE("tensor file round trip and parse errors") {
  const TensorSet set = testing::random_set(3, 3, 2, 4);
  std::stringstream ss;
  write_tensor_set(ss, set);
  const TensorSet back = read_tensor_set(ss);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(testing::max_abs_diff(back[l].values(), set[l].values()) == 0.0);
  }

  for (const char* bad : {
           "",
           "symtensor v2 d=2 n=2 m=1\n1 0\n0 1\n",
           "symtensor v1 d=5 n=2 m=1\n",
           "symtensor v1 d=2 n=1 m=1\n1\n",
           "symtensor v1 d=2 n=2 m=0\n",
           "symtensor v1 d=2 n=2 m=1\n1 0\n0\n",
           "symtensor v1 d=2 n=2 m=1\n1 0\n0 x\n",
           "symtensor v1 d=2 n=2 m=1\n1 0\n0 inf\n",
           "symtensor v1 d=2 n=2 m=1\n1 0\n0 1\n7\n",
           "symtensor v1 d=2 n=2 m=1\n1 1\n0 1\n",
           "symtensor v1 n=2 d=2 m=1\n1 0\n0 1\n",
       }) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(read_tensor_set(in), ParseError);
  }
  CHECK_THROWS_AS(load_tensor_set(scratch("does_not_exist.txt")), ParseError);
}

TEST_CASE("orthomat round trip and parse errors") {
  const Eigen::MatrixXd q = random_rotation(4, 3);
  std::stringstream ss;
  write_orthomat(ss, q);
  CHECK((read_orthomat(ss) - q).norm() == 0.0);
  std::istringstream bad("orthomat v1 n=2\n1 0\n0\n");
  CHECK_THROWS_AS(read_orthomat(bad), ParseError);
}

TEST_CASE("invariant checks pass on random data") {
  for (int d = 2; d <= 4; ++d) {
    const TensorSet set = testing::random_set(d, 5, 2, 30 + d);
    for (const auto& check : verify_invariants(set, 30, 1)) {
      INFO(check.name << " " << check.detail);
      CHECK(check.passed);
    }
  }
}
