// Python bindings for the main operations: exact exterior algebra, the model
// catalog, scenario runs, and the pointwise residual checks.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <json.hpp>

#include "vsub/models.hpp"
#include "vsub/orbifold.hpp"
#include "vsub/rayleigh.hpp"
#include "vsub/sampling.hpp"
#include "vsub/scenario.hpp"

namespace py = pybind11;
using namespace vsub;

namespace {

// forms cross the boundary as dicts keyed by increasing index tuples
MultiIndexForm to_form(int degree, int dim, const py::dict& coeffs) {
  MultiIndexForm f(degree, dim);
  for (auto item : coeffs)
    f.set(tuple_to_mask(item.first.cast<std::vector<int>>(), dim), item.second.cast<double>());
  return f;
}

py::dict from_form(const MultiIndexForm& f) {
  py::dict out;
  for (const auto& [mask, v] : f.coeffs()) {
    auto tup = mask_to_tuple(mask);
    py::tuple key(tup.size());
    for (std::size_t i = 0; i < tup.size(); ++i) key[i] = tup[i];
    out[key] = v;
  }
  return out;
}

py::object json_to_py(const nlohmann::json& j) {
  switch (j.type()) {
    case nlohmann::json::value_t::null:
      return py::none();
    case nlohmann::json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case nlohmann::json::value_t::number_integer:
      return py::int_(j.get<long long>());
    case nlohmann::json::value_t::number_unsigned:
      return py::int_(j.get<unsigned long long>());
    case nlohmann::json::value_t::number_float:
      return py::float_(j.get<double>());
    case nlohmann::json::value_t::string:
      return py::str(j.get<std::string>());
    case nlohmann::json::value_t::array: {
      py::list out;
      for (const auto& e : j) out.append(json_to_py(e));
      return out;
    }
    case nlohmann::json::value_t::object: {
      py::dict out;
      for (auto it = j.begin(); it != j.end(); ++it)
        out[py::str(it.key())] = json_to_py(it.value());
      return out;
    }
    default:
      return py::none();
  }
}

nlohmann::json py_to_json(const py::handle& obj) {
  if (obj.is_none()) return nullptr;
  if (py::isinstance<py::bool_>(obj)) return obj.cast<bool>();
  if (py::isinstance<py::int_>(obj)) return obj.cast<long long>();
  if (py::isinstance<py::float_>(obj)) return obj.cast<double>();
  if (py::isinstance<py::str>(obj)) return obj.cast<std::string>();
  if (py::isinstance<py::list>(obj) || py::isinstance<py::tuple>(obj)) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : obj) arr.push_back(py_to_json(e));
    return arr;
  }
  if (py::isinstance<py::dict>(obj)) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& item : obj.cast<py::dict>())
      out[item.first.cast<std::string>()] = py_to_json(item.second);
    return out;
  }
  throw std::invalid_argument("unsupported python value in scenario");
}

py::dict run_scenario_json(const nlohmann::json& j) {
  Scenario s = parse_scenario(j);
  VerificationReport rep = run_scenario(s);
  return json_to_py(rep.to_json()).cast<py::dict>();
}

}  // namespace

PYBIND11_MODULE(_vsub, m) {
  m.doc() = "pointwise verification of Riemannian-submersion eigenform identities";

  // exterior algebra on coefficient dictionaries keyed by increasing tuples
  m.def(
      "wedge",
      [](int dim, int pa, const py::dict& a, int pb, const py::dict& b) {
        return from_form(wedge(to_form(pa, dim, a), to_form(pb, dim, b)));
      },
      py::arg("dim"), py::arg("degree_a"), py::arg("a"), py::arg("degree_b"), py::arg("b"));

  m.def(
      "ext",
      [](int dim, int p, const std::vector<double>& xi, const py::dict& a) {
        Covector c;
        c.comp = xi;
        return from_form(ext_mul(c, to_form(p, dim, a)));
      },
      py::arg("dim"), py::arg("degree"), py::arg("xi"), py::arg("a"));

  m.def(
      "interior",
      [](int dim, int p, const std::vector<double>& xi, const py::dict& a) {
        Covector c;
        c.comp = xi;
        return from_form(int_mul(c, to_form(p, dim, a)));
      },
      py::arg("dim"), py::arg("degree"), py::arg("xi"), py::arg("a"));

  m.def(
      "inner",
      [](int dim, int p, const py::dict& a, const py::dict& b) {
        return inner(to_form(p, dim, a), to_form(p, dim, b));
      },
      py::arg("dim"), py::arg("degree"), py::arg("a"), py::arg("b"));

  m.def(
      "pullback",
      [](const std::vector<std::vector<double>>& A, int dim, int p, const py::dict& a) {
        return from_form(pullback_linear(A, to_form(p, dim, a)));
      },
      py::arg("matrix"), py::arg("dim"), py::arg("degree"), py::arg("a"),
      "pullback along the linear map whose rows are the images of the target basis vectors");

  // orbifold helpers
  m.def("bezout", [](long p, long q) { return bezout(p, q); }, py::arg("p"), py::arg("q"));

  m.def(
      "cyclic_action_matrices",
      [](int n, const std::vector<int>& weights, int dim) {
        auto act = cyclic_action(n, weights, ambient_chart(dim));
        std::vector<std::vector<std::vector<double>>> out;
        for (const auto& g : act.elements) {
          std::vector<std::vector<double>> rows(g.rows, std::vector<double>(g.cols));
          for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) rows[i][j] = g(i, j);
          out.push_back(std::move(rows));
        }
        return out;
      },
      py::arg("n"), py::arg("weights"), py::arg("dim"));

  m.def(
      "fixed_point_data",
      [](const std::vector<std::vector<double>>& gamma) {
        const int n = static_cast<int>(gamma.size());
        Matd g(n, n);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) g(i, j) = gamma[i][j];
        auto fpd = fixed_point_data(g);
        py::dict out;
        out["fixed-dim"] = fpd.fixed_dim;
        out["codim"] = fpd.codim;
        out["element-order"] = fpd.element_order;
        return out;
      },
      py::arg("gamma"));

  // catalog and models
  m.def("catalog", [] { return json_to_py(catalog_json()); });
  m.def("model_names", &model_names);

  m.def(
      "sample_points",
      [](const std::string& model, int n, std::uint64_t seed) {
        auto mp = get_model(model);
        return sample_points(*mp->total(), n, seed,
                             [&](const Point& z) { return mp->admissible(z); });
      },
      py::arg("model"), py::arg("n"), py::arg("seed"));

  m.def(
      "theta_omega",
      [](const std::string& model, const Point& z) {
        auto mp = get_model(model);
        auto t = theta_omega(*mp, z);
        py::dict out;
        out["theta-frame"] = t.theta_frame;
        out["theta-coords"] = t.theta_coords;
        out["theta-norm"] = t.theta_norm();
        out["omega-norm"] = t.omega_norm();
        return out;
      },
      py::arg("model"), py::arg("point"));

  m.def(
      "eigen_residual",
      [](const std::string& model, const std::string& form, double eigenvalue,
         const std::string& space, int samples, std::uint64_t seed) {
        nlohmann::json j = {{"model", model},   {"check", "eigen-residual"},
                            {"form", form},     {"eigenvalue", eigenvalue},
                            {"space", space},   {"samples", samples},
                            {"seed", seed},     {"tolerance", 1.0}};
        return run_scenario_json(j);
      },
      py::arg("model"), py::arg("form"), py::arg("eigenvalue"), py::arg("space") = "total",
      py::arg("samples") = 25, py::arg("seed") = 42);

  // scenario interface
  m.def(
      "run_scenario",
      [](const py::dict& scenario) { return run_scenario_json(py_to_json(scenario)); },
      py::arg("scenario"));

  m.def(
      "run_scenario_file",
      [](const std::string& path) {
        std::ifstream in(path);
        if (!in.good()) throw std::invalid_argument("cannot read scenario file " + path);
        return run_scenario_json(nlohmann::json::parse(in));
      },
      py::arg("path"));

  m.def(
      "monte_carlo_rayleigh",
      [](const std::string& model, const std::string& form, const std::string& space, long n,
         std::uint64_t seed) {
        auto mp = get_model(model);
        FormField phi = named_base_form(mp, form);
        RayleighEstimate est = space == "base"
                                   ? monte_carlo_rayleigh(phi, n, seed)
                                   : monte_carlo_rayleigh_pullback(mp, phi, n, seed);
        py::dict out;
        out["estimate"] = est.estimate;
        out["stderr"] = est.stderror;
        out["samples"] = est.samples;
        out["used"] = est.used;
        return out;
      },
      py::arg("model"), py::arg("form"), py::arg("space") = "total", py::arg("n") = 100000,
      py::arg("seed") = 42);
}
