#include "orthodiag/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "orthodiag/errors.hpp"
#include "orthodiag/geometry.hpp"
#include "orthodiag/io.hpp"

namespace orthodiag {
namespace {

IndexPair random_pair(int n, Rng& rng) {
  const long period = static_cast<long>(n) * (n - 1) / 2;
  return cyclic_pair(static_cast<long>(rng.next_u64() % static_cast<std::uint64_t>(period)), n);
}

// f(Q G(i, j, theta)) by a full recomputation from the original tensors.
double objective_after(const TensorSet& original, const Eigen::MatrixXd& q, IndexPair pair,
                       double theta) {
  const Eigen::MatrixXd rotated_q = q * givens_matrix(original.dim(), pair.i, pair.j, theta);
  return set_diag_sq_norm(transform_all_modes(original, rotated_q.transpose()));
}

std::string describe(const char* label, double value) {
  std::ostringstream os;
  os << label << '=' << format_double(value);
  return os.str();
}

}  // namespace

DiagProfile parse_profile(const std::string& name) {
  if (name == "equal") return DiagProfile::Equal;
  if (name == "linear") return DiagProfile::Linear;
  if (name == "custom") return DiagProfile::Custom;
  throw ContractViolation("unknown diagonal profile '" + name + "'");
}

SymTensor make_diag_tensor(const ExperimentSpec& spec) {
  const int order = spec.slice_mode ? 4 : spec.d;
  std::vector<double> diag(static_cast<std::size_t>(spec.n));
  switch (spec.profile) {
    case DiagProfile::Equal:
      std::fill(diag.begin(), diag.end(), 1.0 / std::sqrt(static_cast<double>(spec.n)));
      break;
    case DiagProfile::Linear: {
      double sum_sq = 0.0;
      for (int k = 1; k <= spec.n; ++k) sum_sq += static_cast<double>(k) * k;
      for (int k = 1; k <= spec.n; ++k) diag[k - 1] = k / std::sqrt(sum_sq);
      break;
    }
    case DiagProfile::Custom: {
      if (static_cast<int>(spec.custom_diagonal.size()) != spec.n) {
        throw ContractViolation("custom diagonal must have n entries");
      }
      diag = spec.custom_diagonal;
      double sum_sq = 0.0;
      for (double v : diag) sum_sq += v * v;
      if (sum_sq == 0.0) throw ContractViolation("custom diagonal has zero norm");
      break;
    }
  }
  return SymTensor::diagonal(order, diag);
}

DenseTensor gaussian_tensor(int order, int dim, double sigma, Rng& rng) {
  DenseTensor t = DenseTensor::cubical(order, dim);
  for (double& v : t.values()) v = sigma * rng.normal();
  return t;
}

TensorSet slices_along_last(const SymTensor& a) {
  if (a.order() != 4) throw ContractViolation("slices_along_last: need an order-4 tensor");
  const int n = a.dim();
  std::vector<SymTensor> slices;
  slices.reserve(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) {
    DenseTensor slice = DenseTensor::cubical(3, n);
    for (int k = 0; k < n; ++k) {
      for (int p = 0; p < n; ++p) {
        for (int s = 0; s < n; ++s) slice.at({k, p, s}) = a.at({k, p, s, l});
      }
    }
    slices.push_back(SymTensor::from_dense(slice));
  }
  return TensorSet(std::move(slices));
}

TestProblem make_test_problem(const ExperimentSpec& spec) {
  if (spec.n < 2) throw ContractViolation("n must be >= 2");
  if (!(spec.sigma >= 0.0)) throw ContractViolation("sigma must be >= 0");
  if (spec.slice_mode && spec.d != 4) throw ContractViolation("slice mode requires d = 4");
  if (!spec.slice_mode && spec.m < 1) throw ContractViolation("m must be >= 1");

  const SymTensor diag = make_diag_tensor(spec);
  const Eigen::MatrixXd q = random_rotation(spec.n, spec.seed_rot);
  const SymTensor clean = transform_all_modes(diag, q.transpose());

  Rng noise(spec.seed_noise);
  auto noisy = [&] {
    if (spec.sigma == 0.0) return clean;
    const DenseTensor e = symmetrize(gaussian_tensor(clean.order(), spec.n, spec.sigma, noise));
    DenseTensor sum = clean.dense();
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += e[k];
    return SymTensor::from_dense(sum);
  };

  if (spec.slice_mode) {
    SymTensor full = noisy();
    TensorSet slices = slices_along_last(full);
    return TestProblem{std::move(slices), q.transpose(), std::move(full)};
  }
  std::vector<SymTensor> tensors;
  for (int l = 0; l < spec.m; ++l) tensors.push_back(noisy());
  return TestProblem{TensorSet(std::move(tensors)), q.transpose(), std::nullopt};
}

RunConfig make_run_config(const std::string& algo, const AlgorithmParams& params, int n,
                          double total_sq_norm) {
  RunConfig config;
  if (algo == "c") {
    config.selector = PairSelector::cyclic();
  } else if (algo == "g") {
    config.selector = PairSelector::gradient_eps(params.eps.value_or(0.1 * 2.0 / n), n);
  } else if (algo == "gmax") {
    config.selector = PairSelector::gradient_max();
  } else if (algo == "cthresh") {
    config.selector = PairSelector::cyclic_threshold(params.thresh.value_or(1e-10));
  } else if (algo == "pc") {
    config.selector = PairSelector::cyclic();
    config.delta0 = params.delta0.value_or(1e-3 * total_sq_norm);
    if (!(config.delta0 >= 0.0)) throw ContractViolation("delta0 must be >= 0");
  } else {
    throw ContractViolation("unknown algorithm '" + algo + "' (expected c, g, gmax, cthresh, pc)");
  }
  if (params.eps && algo != "g") throw ContractViolation("eps only applies to algorithm g");
  if (params.thresh && algo != "cthresh") {
    throw ContractViolation("thresh only applies to algorithm cthresh");
  }
  if (params.delta0 && algo != "pc") throw ContractViolation("delta0 only applies to algorithm pc");
  config.max_sweeps = params.max_sweeps;
  config.record_every = params.record_every;
  config.stationarity_tol = params.tol;
  return config;
}

std::vector<AlgorithmConfig> parse_suite(std::istream& in, int n, double total_sq_norm) {
  std::vector<AlgorithmConfig> configs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string token;
    std::string name;
    std::string algo;
    AlgorithmParams params;
    bool any = false;
    while (tokens >> token) {
      any = true;
      const auto eq = token.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ParseError("line " + std::to_string(line_no) + ": expected key=value, got '" +
                         token + "'");
      }
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      auto number = [&]() {
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (value.empty() || *end != '\0' || !std::isfinite(v)) {
          throw ParseError("line " + std::to_string(line_no) + ": bad number for " + key);
        }
        return v;
      };
      if (key == "name") {
        name = value;
      } else if (key == "algo") {
        algo = value;
      } else if (key == "eps") {
        params.eps = number();
      } else if (key == "delta0") {
        params.delta0 = number();
      } else if (key == "thresh") {
        params.thresh = number();
      } else if (key == "tol") {
        params.tol = number();
      } else if (key == "max_sweeps") {
        params.max_sweeps = static_cast<int>(number());
      } else if (key == "record_every") {
        params.record_every = static_cast<int>(number());
      } else {
        throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      }
    }
    if (!any) continue;
    if (algo.empty()) throw ParseError("line " + std::to_string(line_no) + ": missing algo=");
    if (name.empty()) name = algo + "_" + std::to_string(configs.size());
    if (name.find_first_of("/\\") != std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": name must not contain a path separator");
    }
    try {
      configs.push_back({name, algo, make_run_config(algo, params, n, total_sq_norm)});
    } catch (const ContractViolation& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (configs.empty()) throw ParseError("suite contains no algorithm configurations");
  return configs;
}

BenchmarkReport run_benchmark(const TensorSet& tensors, const std::vector<AlgorithmConfig>& configs,
                              const std::optional<std::filesystem::path>& outdir,
                              const Eigen::MatrixXd* q0) {
  if (outdir) std::filesystem::create_directories(*outdir);
  const Eigen::MatrixXd start =
      q0 ? *q0 : Eigen::MatrixXd::Identity(tensors.dim(), tensors.dim());

  BenchmarkReport report;
  for (const auto& config : configs) {
    BenchmarkEntry entry;
    entry.name = config.name;
    entry.algo = config.algo;
    try {
      RunResult result = run(tensors, start, config.run);
      const IterationRecord& last = result.trajectory.back();
      entry.ok = true;
      entry.f = last.f;
      entry.offdiag_sq = last.offdiag_sq;
      entry.lambda_norm = last.lambda_norm;
      entry.wall_ms = last.wall_ms;
      entry.sweeps = result.sweeps;
      entry.rotations = result.rotations;
      entry.stop_reason = to_string(result.reason);
      entry.trajectory = std::move(result.trajectory);
      if (outdir) {
        const auto path = *outdir / (config.name + ".csv");
        save_trajectory_csv(path, entry.trajectory);
        entry.csv_path = path.string();
      }
    } catch (const std::exception& e) {
      entry.ok = false;
      entry.error = e.what();
    }
    report.entries.push_back(std::move(entry));
  }
  if (outdir) {
    std::ofstream out(*outdir / "report.csv");
    write_report_csv(out, report);
  }
  return report;
}

void write_report_csv(std::ostream& out, const BenchmarkReport& report) {
  out << "name,algo,ok,f,offdiag_sq,lambda_norm,sweeps,rotations,wall_ms,stop_reason,csv,error\n";
  for (const auto& e : report.entries) {
    std::string error = e.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << e.name << ',' << e.algo << ',' << (e.ok ? 1 : 0) << ',' << format_double(e.f) << ','
        << format_double(e.offdiag_sq) << ',' << format_double(e.lambda_norm) << ',' << e.sweeps
        << ',' << e.rotations << ',' << format_double(e.wall_ms) << ',' << e.stop_reason << ','
        << e.csv_path << ',' << error << '\n';
  }
}

SubproblemView random_view(int order, int blocks, double delta0, Rng& rng) {
  SubproblemView view;
  view.order = order;
  view.delta0 = delta0;
  for (int b = 0; b < blocks; ++b) {
    SubproblemView::Block block{};
    for (int k = 0; k <= order; ++k) block[k] = rng.normal();
    view.blocks.push_back(block);
  }
  return view;
}

CheckResult check_gradient(const TensorSet& tensors, int samples, std::uint64_t seed) {
  constexpr double kStep = 1e-5;
  constexpr double kFdTol = 1e-6;
  constexpr double kLambdaTol = 1e-10;
  CheckResult out{"gradient", true, 0.0, 1.0, samples, ""};
  Rng rng(seed);
  const int n = tensors.dim();
  const double scale = set_frobenius_sq(tensors);
  double worst_fd = 0.0;
  double worst_lambda = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::MatrixXd q = random_rotation(n, rng.next_u64());
    const RotationState state(tensors, q);
    const IndexPair pair = random_pair(n, rng);
    const double analytic =
        h_derivatives_at_zero(SubproblemView::extract(state.rotated(), pair.i, pair.j)).first;
    const double from_lambda = -2.0 * lambda_of(state)(pair.i, pair.j);
    const double fd = (objective_after(tensors, q, pair, kStep) -
                       objective_after(tensors, q, pair, -kStep)) /
                      (2.0 * kStep);
    const double denom = std::max(std::abs(analytic), 1e-3 * scale);
    worst_fd = std::max(worst_fd, std::abs(fd - analytic) / denom);
    worst_lambda = std::max(worst_lambda,
                            std::abs(from_lambda - analytic) / std::max(std::abs(analytic), 1e-300));
  }
  out.worst = std::max(worst_fd / kFdTol, worst_lambda / kLambdaTol);
  out.passed = out.worst <= 1.0;
  out.detail = describe("max_rel_fd", worst_fd) + " " + describe("max_rel_lambda", worst_lambda);
  return out;
}

CheckResult check_identities(const TensorSet& tensors, int samples, std::uint64_t seed) {
  constexpr double kTol = 1e-10;
  CheckResult out{"tau_identities", true, 0.0, 1.0, 0, ""};
  if (tensors.order() > 3) {
    out.detail = "not applicable for order 4";
    return out;
  }
  Rng rng(seed);
  const int n = tensors.dim();
  double worst_identity = 0.0;
  double worst_symmetry = 0.0;
  for (int s = 0; s < samples; ++s) {
    const RotationState state(tensors, random_rotation(n, rng.next_u64()));
    const IndexPair pair = random_pair(n, rng);
    const SubproblemView view = SubproblemView::extract(state.rotated(), pair.i, pair.j);
    const double x = rng.uniform(-1.0, 1.0);
    const double offset = state.f() - view.objective(0.0);
    const double tau = offset + view.objective(std::atan(x));
    const IdentityResidual r = tau_identity_check(view, x);
    worst_identity =
        std::max(worst_identity, std::max(r.value, r.derivative) / (1.0 + std::abs(tau)));
    if (x != 0.0) {
      const double mirrored = offset + view.objective(std::atan(-1.0 / x));
      worst_symmetry = std::max(worst_symmetry,
                                std::abs(mirrored - tau) / std::max(std::abs(tau), 1e-300));
    }
  }
  out.samples = samples;
  out.worst = std::max(worst_identity, worst_symmetry) / kTol;
  out.passed = out.worst <= 1.0;
  out.detail = describe("max_identity_residual", worst_identity) + " " +
               describe("max_mirror_residual", worst_symmetry);
  return out;
}

CheckResult check_oracle_angles(const TensorSet& tensors, int samples, std::uint64_t seed) {
  constexpr double kTol = 1e-10;
  CheckResult out{"oracle_angles", true, 0.0, 1.0, 0, ""};
  Rng rng(seed);
  const int n = tensors.dim();
  const double scale = set_frobenius_sq(tensors);
  double worst = 0.0;
  for (double factor : {0.0, 1e-3, 1e-1}) {
    for (int s = 0; s < samples; ++s) {
      const RotationState state(tensors, random_rotation(n, rng.next_u64()));
      const IndexPair pair = random_pair(n, rng);
      const SubproblemView view =
          SubproblemView::extract(state.rotated(), pair.i, pair.j, factor * scale);
      const double algebraic = view.objective(best_angle(view).theta);
      const double oracle = view.objective(brute_force_angle(view).theta);
      worst = std::max(worst, std::abs(algebraic - oracle) / (1.0 + std::abs(oracle)));
      ++out.samples;
    }
  }
  out.worst = worst / kTol;
  out.passed = out.worst <= 1.0;
  out.detail = describe("max_value_gap", worst);
  return out;
}

CheckResult check_rotation_invariants(const TensorSet& tensors, int samples, std::uint64_t seed) {
  CheckResult out{"rotation_invariants", true, 0.0, 1.0, samples, ""};
  Rng rng(seed);
  const int n = tensors.dim();
  const double norm_sq = set_frobenius_sq(tensors);
  double worst_norm = 0.0;
  double worst_symmetry = 0.0;
  for (int s = 0; s < samples; ++s) {
    RotationState state(tensors, random_rotation(n, rng.next_u64()));
    worst_norm = std::max(worst_norm, std::abs(set_frobenius_sq(state.rotated()) - norm_sq) /
                                          std::max(norm_sq, 1e-300));
    for (int r = 0; r < 10; ++r) {
      const IndexPair pair = random_pair(n, rng);
      state.apply(GivensRotation::make(pair.i, pair.j,
                                       rng.uniform(-std::numbers::pi, std::numbers::pi)));
    }
    for (const auto& w : state.rotated()) {
      worst_symmetry = std::max(worst_symmetry,
                                symmetry_defect(w.dense()) / std::max(std::sqrt(norm_sq), 1e-300));
    }
  }
  out.worst = std::max(worst_norm / 1e-10, worst_symmetry / 1e-12);
  out.passed = out.worst <= 1.0;
  out.detail = describe("max_rel_norm_change", worst_norm) + " " +
               describe("max_rel_symmetry_defect", worst_symmetry);
  return out;
}

std::vector<CheckResult> verify_invariants(const TensorSet& tensors, int samples,
                                           std::uint64_t seed) {
  return {
      check_rotation_invariants(tensors, std::max(samples / 10, 1), seed),
      check_gradient(tensors, samples, seed + 1),
      check_identities(tensors, samples, seed + 2),
      check_oracle_angles(tensors, samples, seed + 3),
  };
}

}  // namespace orthodiag
