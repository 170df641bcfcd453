#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "mecho/baselines.hpp"
#include "mecho/io.hpp"
#include "mecho/lcurve.hpp"
#include "mecho/methods.hpp"
#include "mecho/operators.hpp"
#include "mecho/parallel.hpp"
#include "mecho/phantom.hpp"
#include "mecho/solvers.hpp"

namespace py = pybind11;
using namespace mecho;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Images cross the boundary as (echoes, height, width) float64 arrays, which
// is exactly the in-memory layout of MultiEchoImage.
MultiEchoImage to_image(const Array& a) {
  if (a.ndim() != 3) throw InvalidArgument("image array must have shape (echoes, height, width)");
  const auto e = static_cast<int>(a.shape(0));
  const auto h = static_cast<int>(a.shape(1));
  const auto w = static_cast<int>(a.shape(2));
  return MultiEchoImage(h, w, e, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const MultiEchoImage& x) {
  Array out({x.echoes(), x.height(), x.width()});
  std::copy(x.data().begin(), x.data().end(), out.mutable_data());
  return out;
}

Method method_or_throw(const std::string& name) {
  const auto m = parse_method(name);
  if (!m) throw InvalidArgument("unknown method '" + name + "'; valid methods: " + method_names());
  return *m;
}

ReconParams params_from_dict(Method m, const py::dict& overrides) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : overrides) {
    const auto key = py::cast<std::string>(k);
    if (py::isinstance<py::bool_>(v)) throw InvalidArgument("params." + key + " has the wrong type");
    if (py::isinstance<py::int_>(v)) j[key] = py::cast<long long>(v);
    else if (py::isinstance<py::float_>(v)) j[key] = py::cast<double>(v);
    else if (py::isinstance<py::str>(v)) j[key] = py::cast<std::string>(v);
    else throw InvalidArgument("params." + key + " has the wrong type");
  }
  return io::params_from_json(j, default_params(m));
}

py::dict params_to_dict(const ReconParams& p) {
  py::dict d;
  const nlohmann::json j = io::params_to_json(p);
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) d[py::str(k)] = v.get<std::string>();
    else if (v.is_number_integer()) d[py::str(k)] = v.get<long long>();
    else d[py::str(k)] = v.get<double>();
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_mecho, m) {
  m.doc() = "Multi-echo MRI reconstruction from partial k-space";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::class_<SamplingMask>(m, "SamplingMask")
      .def(py::init<int, int, std::vector<std::vector<int>>>(), py::arg("height"), py::arg("width"),
           py::arg("lines"))
      .def_property_readonly("height", &SamplingMask::height)
      .def_property_readonly("width", &SamplingMask::width)
      .def_property_readonly("echoes", &SamplingMask::echoes)
      .def_property_readonly("lines", &SamplingMask::all_lines)
      .def_property_readonly("sampling_ratio", &SamplingMask::sampling_ratio)
      .def("__eq__", [](const SamplingMask& a, const SamplingMask& b) { return a == b; });

  py::class_<KSpaceData>(m, "KSpaceData")
      .def_property_readonly("mask", &KSpaceData::mask)
      .def_property_readonly("samples", [](const KSpaceData& k) {
        py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(k.samples().size()));
        std::copy(k.samples().begin(), k.samples().end(), out.mutable_data());
        return out;
      });

  m.def("method_names", [] {
    std::vector<std::string> out;
    for (Method x : kAllMethods) out.emplace_back(method_name(x));
    return out;
  });
  m.def("default_params", [](const std::string& name) { return params_to_dict(default_params(method_or_throw(name))); },
        py::arg("method"));

  m.def("generate_phantom",
        [](int height, int width, int echoes, int supersample) {
          auto spec = default_phantom_spec(height, width, echoes);
          spec.supersample = supersample;
          return to_array(generate_phantom(spec));
        },
        py::arg("height") = 64, py::arg("width") = 64, py::arg("echoes") = 8, py::arg("supersample") = 4);

  m.def("generate_mask", &generate_mask, py::arg("height"), py::arg("width"), py::arg("lines"),
        py::arg("echoes"), py::arg("dense_fraction") = 1.0 / 3.0, py::arg("per_echo_distinct") = false,
        py::arg("seed") = 0);

  m.def("simulate_acquisition",
        [](const Array& truth, const SamplingMask& mask, double sigma, std::uint64_t seed) {
          return simulate_acquisition(to_image(truth), mask, sigma, seed);
        },
        py::arg("truth"), py::arg("mask"), py::arg("sigma"), py::arg("seed") = 0);

  m.def("adjoint", [](const KSpaceData& y) { return to_array(apply_adjoint(y)); }, py::arg("kspace"));

  m.def("reconstruct",
        [](const KSpaceData& y, const std::string& method, const py::dict& params) {
          const Method meth = method_or_throw(method);
          const ReconParams p = params_from_dict(meth, params);
          ReconOutput out;
          {
            py::gil_scoped_release release;
            out = run_method(meth, y, p);
          }
          py::dict d;
          d["image"] = to_array(out.image);
          d["cost_history"] = out.cost_history;
          d["iterations"] = out.iterations;
          d["data_residual"] = out.data_residual;
          d["sparsity_penalty"] = out.sparsity_penalty;
          d["zero_row_fraction"] = out.zero_row_fraction;
          d["zero_entry_fraction"] = out.zero_entry_fraction;
          d["params"] = params_to_dict(p);
          return d;
        },
        py::arg("kspace"), py::arg("method"), py::arg("params") = py::dict());

  m.def("snr_db", [](const Array& ref, const Array& rec) { return snr_db(to_image(ref), to_image(rec)); },
        py::arg("reference"), py::arg("reconstruction"));

  m.def("row_soft_threshold", [](const Matrix& x, double tau) { return row_soft_threshold(x, tau); },
        py::arg("x"), py::arg("tau"));
  m.def("soft_threshold", [](const Matrix& x, double tau) { return soft_threshold(x, tau); },
        py::arg("x"), py::arg("tau"));
  m.def("haar_dwt2", [](const RealPlane& x, int levels) { return haar_dwt2(x, levels); }, py::arg("plane"),
        py::arg("levels"));
  m.def("haar_idwt2", [](const RealPlane& x, int levels) { return haar_idwt2(x, levels); }, py::arg("coeffs"),
        py::arg("levels"));
  m.def("fft2_unitary", [](const ComplexPlane& x) { return fft2_unitary(x); }, py::arg("plane"));
  m.def("select_corner",
        [](const std::vector<double>& r, const std::vector<double>& p) { return select_corner(r, p); },
        py::arg("residuals"), py::arg("penalties"));

  m.def("save_mef", [](const std::string& base, const Array& x) { io::save_mef(base, to_image(x)); },
        py::arg("base"), py::arg("image"));
  m.def("load_mef", [](const std::string& base) { return to_array(io::load_mef(base)); }, py::arg("base"));

  m.def("set_thread_count", &set_thread_count, py::arg("n"));
}
