#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ccinv/diagnostics.hpp"
#include "ccinv/errors.hpp"
#include "ccinv/experiment.hpp"
#include "ccinv/generators.hpp"
#include "ccinv/iter_solvers.hpp"
#include "ccinv/matrix_market.hpp"

namespace py = pybind11;
using namespace ccinv;

namespace {

/// Immutable handle; experiments share the matrix without copying it.
struct Matrix {
  std::shared_ptr<const AnyMatrix> m;
};

template <Scalar T>
Matrix from_coo_typed(index_t n, py::array_t<index_t> rows, py::array_t<index_t> cols,
                      py::array_t<T> vals) {
  const auto r = rows.unchecked<1>();
  const auto c = cols.unchecked<1>();
  const auto v = vals.template unchecked<1>();
  if (r.shape(0) != c.shape(0) || r.shape(0) != v.shape(0)) {
    throw InvalidArgument("rows, cols and values must have the same length");
  }
  std::vector<Triplet<T>> t;
  t.reserve(static_cast<std::size_t>(r.shape(0)));
  for (py::ssize_t k = 0; k < r.shape(0); ++k) {
    t.push_back({r(k), c(k), v(k)});
  }
  return {std::make_shared<const AnyMatrix>(SparseMatrix<T>::build(n, t))};
}

Matrix from_coo(index_t n, py::array_t<index_t> rows, py::array_t<index_t> cols, py::array values) {
  if (values.dtype().kind() == 'c') {
    return from_coo_typed<cdouble>(n, rows, cols, values.cast<py::array_t<cdouble>>());
  }
  return from_coo_typed<double>(n, rows, cols, values.cast<py::array_t<double>>());
}

py::tuple to_coo(const Matrix& a) {
  return std::visit(
      [](const auto& c) {
        using T = typename std::decay_t<decltype(c)>::value_type;
        const auto t = c.triplets();
        std::vector<index_t> rv, cv;
        std::vector<T> vv;
        for (const auto& e : t) {
          rv.push_back(e.row);
          cv.push_back(e.col);
          vv.push_back(e.value);
        }
        const auto size = static_cast<py::ssize_t>(t.size());
        py::array_t<index_t> r(size, rv.data());
        py::array_t<index_t> col(size, cv.data());
        py::array_t<T> v(size, vv.data());
        return py::tuple(py::make_tuple(r, col, v));
      },
      *a.m);
}

std::string run_json(const Matrix& a, const std::string& method, std::optional<std::vector<index_t>> diag,
                     const EntryList& entries, const std::string& noise, std::uint64_t seed,
                     double tol, double abs_tol, std::uint64_t max_cycles,
                     std::uint64_t check_interval, int replicates, int jobs, double burn_in_tol,
                     std::uint64_t burn_in_max, const std::string& inner, double inner_tol,
                     int inner_max, bool force, bool precheck_gate, const std::string& label) {
  ExperimentConfig cfg;
  cfg.matrix = a.m;
  cfg.matrix_label = label;
  cfg.method = parse_method(method);
  if (diag) {
    cfg.query = TraceQuery::diagonal_indicator(*diag);
  }
  cfg.entries = entries;
  cfg.noise = parse_noise_family(noise);
  cfg.seed = seed;
  cfg.stop.relative_tolerance = tol;
  cfg.stop.absolute_tolerance = abs_tol;
  cfg.stop.max_cycles = max_cycles;
  cfg.stop.check_interval = check_interval;
  cfg.stop.keep_series = false;
  cfg.replicates = replicates;
  cfg.jobs = jobs;
  cfg.burn_in_tolerance = burn_in_tol;
  cfg.burn_in_max_cycles = burn_in_max;
  cfg.inner = parse_inner_solver(inner);
  cfg.inner_tolerance = inner_tol;
  cfg.inner_max_iterations = inner_max;
  cfg.force = force;
  cfg.precheck = precheck_gate;
  RunReport rep;
  {
    py::gil_scoped_release release;
    rep = run_experiment(cfg);
  }
  return to_json_string(rep, -1);
}

}  // namespace

PYBIND11_MODULE(_ccinv, m) {
  m.doc() = "Sparse matrix inversion by correlated Markov chains";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ZeroDiagonalError>(m, "ZeroDiagonalError", base.ptr());
  py::register_exception<NegativeDiagonalError>(m, "NegativeDiagonalError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<BreakdownError>(m, "BreakdownError", base.ptr());
  py::register_exception<SingularMatrixError>(m, "SingularMatrixError", base.ptr());
  py::register_exception<InsufficientSamples>(m, "InsufficientSamples", base.ptr());

  py::class_<Matrix>(m, "Matrix")
      .def_static("from_coo", &from_coo, py::arg("n"), py::arg("rows"), py::arg("cols"),
                  py::arg("values"), "Square matrix from 0-based triplets; duplicates are summed")
      .def_static(
          "read", [](const std::string& path) {
            return Matrix{std::make_shared<const AnyMatrix>(read_matrix_market(std::filesystem::path(path)))};
          },
          py::arg("path"))
      .def("write", [](const Matrix& a, const std::string& path) {
        write_matrix_market(*a.m, std::filesystem::path(path));
      })
      .def_property_readonly("order", [](const Matrix& a) {
        return std::visit([](const auto& c) { return c.order(); }, *a.m);
      })
      .def_property_readonly("nnz", [](const Matrix& a) {
        return std::visit([](const auto& c) { return c.nnz(); }, *a.m);
      })
      .def_property_readonly("is_complex", [](const Matrix& a) {
        return std::holds_alternative<ComplexMatrix>(*a.m);
      })
      .def_property_readonly("is_hermitian", [](const Matrix& a) {
        return std::visit([](const auto& c) { return c.is_hermitian(); }, *a.m);
      })
      .def("to_coo", &to_coo, "(rows, cols, values) arrays in row-major order");

  m.def(
      "dirac",
      [](index_t n0, index_t n1, index_t n2, index_t n3, double hopping) {
        LatticeSpec s;
        s.extents = {n0, n1, n2, n3};
        s.hopping = hopping;
        return Matrix{std::make_shared<const AnyMatrix>(build_dirac_matrix(s))};
      },
      py::arg("n0") = 4, py::arg("n1") = 4, py::arg("n2") = 4, py::arg("n3") = 4,
      py::arg("hopping") = 0.1, "Free Wilson-Dirac operator with periodic boundaries");

  m.def(
      "wu_schaeffer",
      [](index_t animals, index_t herds, index_t generations, double unknown_fraction,
         double lam, double ratio, std::uint64_t seed) {
        PedigreeOptions o;
        o.n_animals = animals;
        o.n_herds = herds;
        o.generations = generations;
        o.unknown_parent_fraction = unknown_fraction;
        o.seed = seed;
        return Matrix{std::make_shared<const AnyMatrix>(
            build_mixed_model_matrix(simulate_pedigree(o), MixedModelSpec{ratio, lam}))};
      },
      py::arg("animals"), py::arg("herds"), py::arg("generations") = 10,
      py::arg("unknown_fraction") = 0.0, py::arg("lam") = 0.2, py::arg("ratio") = 3.0,
      py::arg("seed") = 0, "Mixed model matrix over a simulated pedigree, herds first");

  m.def(
      "exact_trace",
      [](const Matrix& a) {
        return std::visit([](const auto& c) { return cdouble(dense_lu_inverse(c).trace()); }, *a.m);
      },
      "tr C^-1 by dense LU (small matrices only)");

  m.def("precheck", [](const Matrix& a) {
    const PrecheckInfo p = precheck(*a.m);
    py::dict d;
    d["sp_t"] = p.sp_t;
    d["sp_s"] = p.sp_s;
    d["passed"] = p.passed;
    return d;
  });

  m.def("_run", &run_json, py::arg("matrix"), py::arg("method"), py::arg("diag"),
        py::arg("entries"), py::arg("noise"), py::arg("seed"), py::arg("tol"), py::arg("abs_tol"),
        py::arg("max_cycles"), py::arg("check_interval"), py::arg("replicates"), py::arg("jobs"),
        py::arg("burn_in_tol"), py::arg("burn_in_max"), py::arg("inner"), py::arg("inner_tol"),
        py::arg("inner_max"), py::arg("force"), py::arg("precheck"), py::arg("label"));

  m.def("effective_length",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> x) {
          return effective_length(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
        });
  m.def("mc_std_error", [](py::array_t<double, py::array::c_style | py::array::forcecast> x) {
    return mc_std_error(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  });
}
