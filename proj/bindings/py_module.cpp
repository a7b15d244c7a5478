// Python bindings for the sketching core: numpy-facing wrappers over the
// FD sketch, the baseline sketchers, the error metrics and the synthetic
// generator.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fdsketch/baselines.hpp"
#include "fdsketch/fd.hpp"
#include "fdsketch/freq_items.hpp"
#include "fdsketch/io.hpp"
#include "fdsketch/linalg.hpp"
#include "fdsketch/metrics.hpp"
#include "fdsketch/synthetic.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

fdsk::DenseMatrix to_matrix(const Array& arr) {
  if (arr.ndim() != 2) {
    throw py::value_error("expected a 2-d float array");
  }
  const auto rows = static_cast<std::size_t>(arr.shape(0));
  const auto cols = static_cast<std::size_t>(arr.shape(1));
  std::vector<double> data(arr.data(), arr.data() + rows * cols);
  return fdsk::DenseMatrix::from_data(rows, cols, std::move(data));
}

py::array from_matrix(const fdsk::DenseMatrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data(), m.data() + m.size(), out.mutable_data());
  return out;
}

fdsk::FdVariant parse_variant(const std::string& name) {
  if (name == "simple") return fdsk::FdVariant::kSimple;
  if (name == "fast") return fdsk::FdVariant::kFast;
  if (name == "bounded") return fdsk::FdVariant::kBoundedStep;
  throw py::value_error("variant must be simple|fast|bounded");
}

void append_array(fdsk::FdSketch& s, const Array& arr) {
  if (arr.ndim() == 1) {
    s.append(std::span<const double>(arr.data(),
                                     static_cast<std::size_t>(arr.shape(0))));
    return;
  }
  if (arr.ndim() != 2) throw py::value_error("expected 1-d or 2-d array");
  const auto rows = static_cast<std::size_t>(arr.shape(0));
  const auto cols = static_cast<std::size_t>(arr.shape(1));
  for (std::size_t r = 0; r < rows; ++r) {
    s.append(std::span<const double>(arr.data() + r * cols, cols));
  }
}

}  // namespace

PYBIND11_MODULE(fdsketch, m) {
  m.doc() = "Streaming matrix sketching: frequent directions, baselines, "
            "error metrics and synthetic data";

  py::class_<fdsk::FdSketch>(m, "FdSketch")
      .def(py::init([](std::size_t ell, std::size_t d,
                       const std::string& variant) {
             return fdsk::FdSketch(ell, d, parse_variant(variant));
           }),
           py::arg("ell"), py::arg("d"), py::arg("variant") = "fast")
      .def("append", &append_array, py::arg("rows"),
           "Append one row (1-d) or a block of rows (2-d)")
      .def("finalize",
           [](const fdsk::FdSketch& s) {
             auto fin = s.finalize();
             return py::make_tuple(from_matrix(fin.b), fin.delta);
           },
           "Returns (B, delta) where B is the ell x d sketch matrix")
      .def_property_readonly("ell", &fdsk::FdSketch::ell)
      .def_property_readonly("d", &fdsk::FdSketch::d)
      .def_property_readonly("delta", &fdsk::FdSketch::delta)
      .def_property_readonly("rows_seen", &fdsk::FdSketch::rows_seen)
      .def_property_readonly("input_frob_sq", &fdsk::FdSketch::input_frob_sq)
      .def("save",
           [](const fdsk::FdSketch& s, const std::string& path) {
             fdsk::save_sketch(path, s);
           },
           py::arg("path"))
      .def_static("load", [](const std::string& path) {
        return fdsk::load_fd_sketch(path);
      });

  m.def("merge",
        [](const fdsk::FdSketch& a, const fdsk::FdSketch& b) {
          return fdsk::fd_merge(a, b);
        },
        py::arg("s1"), py::arg("s2"),
        "Merge two sketches; the result keeps the combined guarantees");

  py::class_<fdsk::FiSummary>(m, "FiSummary")
      .def(py::init<std::size_t>(), py::arg("ell"))
      .def("update", &fdsk::FiSummary::update, py::arg("item"))
      .def("estimate", &fdsk::FiSummary::estimate, py::arg("item"))
      .def_property_readonly("ell", &fdsk::FiSummary::ell)
      .def_property_readonly("n", &fdsk::FiSummary::n);

  m.def("sketch",
        [](const Array& a, const std::string& algo, std::size_t ell,
           std::uint64_t seed) {
          const auto mat = to_matrix(a);
          auto sketcher = fdsk::make_sketcher(algo, ell, mat.cols(), seed);
          for (std::size_t r = 0; r < mat.rows(); ++r) {
            sketcher->update(mat.row(r));
          }
          return from_matrix(sketcher->finalize());
        },
        py::arg("a"), py::arg("algo"), py::arg("ell"), py::arg("seed") = 0,
        "One-shot sketch of a matrix with any algorithm id "
        "(fd|fd-fast|fd-bounded|sample|hash|project|brute|naive)");

  m.def("thin_svd",
        [](const Array& a, bool complete_basis) {
          const auto svd = fdsk::thin_svd(to_matrix(a), complete_basis);
          return py::make_tuple(from_matrix(svd.u),
                                py::cast(svd.sigma),
                                from_matrix(svd.vt));
        },
        py::arg("a"), py::arg("complete_basis") = false,
        "Thin SVD (U, sigma, Vt) of a rows<=cols matrix");

  m.def("covariance_error",
        [](const Array& a, const Array& b) {
          return fdsk::covariance_error(to_matrix(a), to_matrix(b));
        },
        py::arg("a"), py::arg("b"));
  m.def("projection_error",
        [](const Array& a, const Array& b, std::size_t k) {
          return fdsk::projection_error(to_matrix(a), to_matrix(b), k);
        },
        py::arg("a"), py::arg("b"), py::arg("k"));
  m.def("tail_energy",
        [](const Array& a, std::size_t k) {
          return fdsk::tail_energy(to_matrix(a), k);
        },
        py::arg("a"), py::arg("k"));
  m.def("fd_bound_covar", &fdsk::fd_bound_covar, py::arg("ell"));
  m.def("fd_bound_proj", &fdsk::fd_bound_proj, py::arg("ell"), py::arg("k"));

  m.def("gen_synthetic",
        [](std::size_t n, std::size_t d, std::size_t m_dim, double zeta,
           std::uint64_t seed) {
          fdsk::SyntheticSpec spec{n, d, m_dim, zeta, seed};
          auto stream = fdsk::gen_synthetic(spec);
          return from_matrix(fdsk::materialize(*stream));
        },
        py::arg("n") = 10000, py::arg("d") = 1000, py::arg("m") = 10,
        py::arg("zeta") = 10.0, py::arg("seed") = 0,
        "Signal-plus-noise synthetic matrix (returned dense)");

  m.def("write_matrix",
        [](const std::string& path, const Array& a, const std::string& fmt) {
          fdsk::write_matrix(path, to_matrix(a),
                             fmt == "csv" ? fdsk::MatrixFormat::kCsv
                                          : fdsk::MatrixFormat::kFdmx);
        },
        py::arg("path"), py::arg("a"), py::arg("format") = "fdmx");
  m.def("read_matrix",
        [](const std::string& path, bool csv_header) {
          return from_matrix(
              fdsk::read_matrix(path, std::nullopt, csv_header));
        },
        py::arg("path"), py::arg("csv_header") = false);
}
