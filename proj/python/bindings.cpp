// Python bindings.  Tensors cross the boundary as C-contiguous float64 numpy
// arrays of shape (n,) * d; a tensor set is a list of such arrays.

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "orthodiag/errors.hpp"
#include "orthodiag/geometry.hpp"
#include "orthodiag/harness.hpp"
#include "orthodiag/io.hpp"

namespace py = pybind11;
using namespace orthodiag;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseTensor to_dense(const Array& a) {
  std::vector<int> shape;
  for (py::ssize_t k = 0; k < a.ndim(); ++k) shape.push_back(static_cast<int>(a.shape(k)));
  return DenseTensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const DenseTensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

TensorSet to_set(const std::vector<Array>& arrays, double tol) {
  std::vector<SymTensor> tensors;
  for (const auto& a : arrays) {
    const DenseTensor t = to_dense(a);
    if (!t.is_cubical()) throw ContractViolation("tensors must be cubical");
    tensors.push_back(SymTensor::from_values(t.order(), t.extent(0),
                                             std::vector<double>(t.values().begin(), t.values().end()),
                                             tol));
  }
  return TensorSet(std::move(tensors));
}

std::vector<Array> to_list(const TensorSet& set) {
  std::vector<Array> out;
  for (const auto& t : set) out.push_back(to_array(t.dense()));
  return out;
}

SubproblemView view_from(const std::vector<std::vector<double>>& blocks, double delta0) {
  if (blocks.empty()) throw ContractViolation("need at least one block");
  SubproblemView v;
  v.order = static_cast<int>(blocks.front().size()) - 1;
  v.delta0 = delta0;
  for (const auto& b : blocks) {
    if (static_cast<int>(b.size()) != v.order + 1) throw ContractViolation("blocks differ in length");
    if (v.order < kMinOrder || v.order > kMaxOrder) throw ContractViolation("block length must be 3..5");
    SubproblemView::Block block{};
    std::copy(b.begin(), b.end(), block.begin());
    v.blocks.push_back(block);
  }
  return v;
}

py::dict run_py(const std::vector<Array>& tensors, const std::string& algo,
                std::optional<double> eps, std::optional<double> delta0,
                std::optional<double> thresh, std::optional<double> tol, int max_sweeps,
                std::optional<Eigen::MatrixXd> q0, bool wall_time) {
  const TensorSet set = to_set(tensors, 1e-9);
  AlgorithmParams params;
  params.eps = eps;
  params.delta0 = delta0;
  params.thresh = thresh;
  params.tol = tol;
  params.max_sweeps = max_sweeps;
  RunConfig config = make_run_config(algo, params, set.dim(), set_frobenius_sq(set));
  config.record_wall_time = wall_time;
  std::optional<RunResult> result;
  {
    py::gil_scoped_release release;
    result.emplace(q0 ? run(set, *q0, config) : run(set, config));
  }
  const RunResult& r = *result;
  py::dict traj;
  auto column = [&](auto get) {
    py::array_t<double> col(static_cast<py::ssize_t>(r.trajectory.size()));
    double* out = col.mutable_data();
    for (const auto& rec : r.trajectory) *out++ = static_cast<double>(get(rec));
    return col;
  };
  traj["k"] = column([](const IterationRecord& x) { return x.k; });
  traj["sweep"] = column([](const IterationRecord& x) { return x.sweep; });
  traj["i"] = column([](const IterationRecord& x) { return x.i; });
  traj["j"] = column([](const IterationRecord& x) { return x.j; });
  traj["theta"] = column([](const IterationRecord& x) { return x.theta; });
  traj["f"] = column([](const IterationRecord& x) { return x.f; });
  traj["offdiag_sq"] = column([](const IterationRecord& x) { return x.offdiag_sq; });
  traj["lambda_norm"] = column([](const IterationRecord& x) { return x.lambda_norm; });
  traj["skipped"] = column([](const IterationRecord& x) { return x.skipped ? 1 : 0; });
  traj["wall_ms"] = column([](const IterationRecord& x) { return x.wall_ms; });

  py::dict out;
  out["q"] = r.state.q();
  out["rotated"] = to_list(r.state.rotated());
  out["f"] = r.state.f();
  out["stop_reason"] = to_string(r.reason);
  out["sweeps"] = r.sweeps;
  out["rotations"] = r.rotations;
  out["trajectory"] = traj;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Jacobi-type orthogonal diagonalization of symmetric tensors";

  py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  m.def("symmetrize", [](const Array& a) { return to_array(symmetrize(to_dense(a))); },
        py::arg("tensor"), "Average over all index permutations.");
  m.def("diag_sq_norm",
        [](const Array& a) { return set_diag_sq_norm(to_set({a}, 1e-9)); }, py::arg("tensor"));
  m.def("offdiag_sq_norm",
        [](const Array& a) { return set_offdiag_sq_norm(to_set({a}, 1e-9)); }, py::arg("tensor"));
  m.def("rotate",
        [](const Array& a, const Eigen::MatrixXd& q) {
          return to_array(transform_all_modes(to_set({a}, 1e-9)[0], q.transpose()).dense());
        },
        py::arg("tensor"), py::arg("q"), "Rotated tensor A x_1 Q^T ... x_d Q^T.");
  m.def("random_rotation", &random_rotation, py::arg("n"), py::arg("seed"));
  m.def("lambda_matrix",
        [](const std::vector<Array>& tensors) { return lambda_of(to_set(tensors, 1e-9)).matrix(); },
        py::arg("tensors"), "Projected-gradient matrix of the (already rotated) tensors.");

  m.def("make_test_problem",
        [](int n, int d, int m_count, const std::string& profile, double sigma,
           std::uint64_t seed_rot, std::uint64_t seed_noise, bool slice_mode) {
          ExperimentSpec spec;
          spec.n = n;
          spec.d = d;
          spec.m = m_count;
          spec.profile = parse_profile(profile);
          spec.sigma = sigma;
          spec.seed_rot = seed_rot;
          spec.seed_noise = seed_noise;
          spec.slice_mode = slice_mode;
          const TestProblem p = make_test_problem(spec);
          return py::make_tuple(to_list(p.tensors), p.truth);
        },
        py::arg("n") = 10, py::arg("d") = 3, py::arg("m") = 1, py::arg("profile") = "equal",
        py::arg("sigma") = 0.0, py::arg("seed_rot") = 1, py::arg("seed_noise") = 2,
        py::arg("slice_mode") = false,
        "Returns (tensors, truth) where starting a run from truth diagonalizes the noise-free part.");

  m.def("run", &run_py, py::arg("tensors"), py::arg("algo") = "c", py::arg("eps") = py::none(),
        py::arg("delta0") = py::none(), py::arg("thresh") = py::none(),
        py::arg("tol") = py::none(), py::arg("max_sweeps") = 100, py::arg("q0") = py::none(),
        py::arg("wall_time") = true);

  m.def("best_angle",
        [](const std::vector<std::vector<double>>& blocks, double delta0) {
          const AngleResult r = best_angle(view_from(blocks, delta0));
          return py::make_tuple(r.theta, r.gain);
        },
        py::arg("blocks"), py::arg("delta0") = 0.0,
        "Optimal angle for blocks [t_0, ..., t_d] (t_k has k indices equal to j).");
  m.def("brute_force_angle",
        [](const std::vector<std::vector<double>>& blocks, double delta0, int grid) {
          const AngleResult r = brute_force_angle(view_from(blocks, delta0), grid);
          return py::make_tuple(r.theta, r.gain);
        },
        py::arg("blocks"), py::arg("delta0") = 0.0, py::arg("grid_points") = 2000);

  m.def("verify",
        [](const std::vector<Array>& tensors, int samples, std::uint64_t seed) {
          py::list out;
          for (const auto& c : verify_invariants(to_set(tensors, 1e-9), samples, seed)) {
            py::dict d;
            d["name"] = c.name;
            d["passed"] = c.passed;
            d["samples"] = c.samples;
            d["detail"] = c.detail;
            out.append(d);
          }
          return out;
        },
        py::arg("tensors"), py::arg("samples") = 100, py::arg("seed") = 7);

  m.def("load_tensors",
        [](const std::string& path) { return to_list(load_tensor_set(path)); }, py::arg("path"));
  m.def("save_tensors",
        [](const std::string& path, const std::vector<Array>& tensors) {
          save_tensor_set(path, to_set(tensors, 1e-9));
        },
        py::arg("path"), py::arg("tensors"));
}
