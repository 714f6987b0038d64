#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "nbsym/averaging.hpp"
#include "nbsym/catalog.hpp"
#include "nbsym/group.hpp"
#include "nbsym/io.hpp"
#include "nbsym/loops.hpp"
#include "nbsym/minimize.hpp"

namespace py = pybind11;
using namespace nbsym;

namespace {

py::object json_to_py(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

py::dict minimize_to_dict(const MultiSeedResult& ms) {
    py::dict d;
    const MinimizeResult& r = ms.best;
    d["converged"] = r.converged;
    d["message"] = r.message;
    d["iterations"] = r.iterations;
    d["gradient_norm"] = r.gradient_norm;
    d["equivariance"] = r.equivariance;
    d["action"] = r.report.action;
    d["report"] = json_to_py(report_to_json(r.report));
    d["loop"] = r.loop;
    py::list clusters;
    for (const auto& c : ms.clusters) {
        py::dict dc;
        dc["action"] = c.action;
        dc["count"] = c.count;
        dc["seeds"] = c.seeds;
        clusters.append(dc);
    }
    d["clusters"] = clusters;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "symmetric n-body loop analysis and minimization";

    py::class_<GroupAction>(m, "GroupAction")
        .def_readonly("n", &GroupAction::n)
        .def_readonly("d", &GroupAction::d)
        .def_readonly("alpha", &GroupAction::alpha)
        .def_readonly("period", &GroupAction::period)
        .def_readonly("masses", &GroupAction::masses)
        .def("order", &GroupAction::order)
        .def("__repr__", [](const GroupAction& a) {
            return "<GroupAction order " + std::to_string(a.order()) + " on " +
                   std::to_string(a.n) + " bodies in R^" + std::to_string(a.d) +
                   ">";
        });

    py::class_<Loop>(m, "Loop")
        .def_readonly("n", &Loop::n)
        .def_readonly("d", &Loop::d)
        .def_readonly("M", &Loop::M)
        .def_readonly("T", &Loop::T)
        .def_readonly("masses", &Loop::masses)
        .def_readwrite("x", &Loop::x)
        .def("positions",
             [](const Loop& lp) {
                 py::array_t<double> out({lp.M, lp.n, lp.d});
                 std::copy(lp.x.data(), lp.x.data() + lp.size(),
                           out.mutable_data());
                 return out;
             },
             "samples as an (M, n, d) array")
        .def("__repr__", [](const Loop& lp) {
            return "<Loop " + std::to_string(lp.n) + " bodies, " +
                   std::to_string(lp.M) + " samples>";
        });

    m.def("catalog_names", [] {
        std::vector<std::string> names;
        for (const auto& e : catalog_entries()) names.push_back(e.name);
        return names;
    });
    m.def("catalog_build", &catalog_build, py::arg("name"),
          py::arg("params") = std::map<std::string, double>{});
    m.def("load_action", &load_action, py::arg("path"));
    m.def("load_action_json",
          [](const std::string& text) {
              return action_from_json(nlohmann::json::parse(text));
          },
          py::arg("text"));
    m.def("analyze",
          [](const GroupAction& a) { return json_to_py(analysis_to_json(a)); },
          py::arg("action"));

    m.def("minimize",
          [](const GroupAction& action, int samples, std::uint64_t seed,
             double tol, int count, int max_iterations) {
              MinimizeConfig cfg;
              cfg.samples = samples;
              cfg.seed = seed;
              cfg.gradient_tolerance = tol;
              cfg.max_iterations = max_iterations;
              return minimize_to_dict(multi_seed(action, cfg, count));
          },
          py::arg("action"), py::arg("samples") = 256, py::arg("seed") = 1,
          py::arg("tol") = 1e-8, py::arg("count") = 1,
          py::arg("max_iterations") = 20000);

    m.def("action_report",
          [](const Loop& lp, double alpha) {
              return json_to_py(report_to_json(action_report(lp, alpha)));
          },
          py::arg("loop"), py::arg("alpha"));
    m.def("newton_residual", &newton_residual, py::arg("loop"), py::arg("alpha"));
    m.def("equivariance_residual", &equivariance_residual, py::arg("loop"),
          py::arg("action"));

    m.def("eval_S", &eval_S_quadrature, py::arg("xi"), py::arg("delta"),
          py::arg("alpha"));
    m.def("stilde_series",
          [](double alpha, int truncation) {
              auto r = eval_Stilde_series(alpha, truncation);
              py::dict d;
              d["value"] = r.value_series;
              d["truncation_bound"] = r.truncation_bound;
              d["truncation_order"] = r.truncation_order;
              return d;
          },
          py::arg("alpha"), py::arg("truncation") = 100000);
    m.def("stilde_upper_bound", &stilde_upper_bound, py::arg("alpha"));
    m.def("stilde_quadrature",
          [](const Eigen::VectorXd& xi, const Eigen::VectorXd& e1,
             const Eigen::VectorXd& e2, double radius, double alpha, double tol) {
              CircleSpec circle;
              circle.e1 = e1;
              circle.e2 = e2;
              circle.radius = radius;
              return eval_Stilde_quadrature(xi, circle, alpha, tol);
          },
          py::arg("xi"), py::arg("e1"), py::arg("e2"), py::arg("radius"),
          py::arg("alpha"), py::arg("tol") = 1e-9);
    m.def("gamma_profile", &gamma_profile, py::arg("alpha"), py::arg("gammas"));

    m.def("write_trajectory",
          [](const std::string& path, const Loop& lp, const GroupAction& action) {
              write_trajectory(path, lp, action, action_report(lp, action.alpha));
          },
          py::arg("path"), py::arg("loop"), py::arg("action"));
    m.def("verify_trajectory",
          [](const std::string& path) {
              VerifyOutcome out = verify_trajectory(path);
              py::dict d;
              d["pass"] = out.pass;
              d["failures"] = out.failures;
              d["equivariance"] = out.equivariance;
              d["centering"] = out.centering;
              d["report"] = json_to_py(report_to_json(out.report));
              return d;
          },
          py::arg("path"));

    m.def("lagrange_reference", &lagrange_reference, py::arg("k"),
          py::arg("alpha"), py::arg("samples") = 512);
    m.def("lagrange_reference_p", &lagrange_reference_p, py::arg("p"),
          py::arg("k"), py::arg("alpha"), py::arg("samples") = 512);
    m.def("vertical_variation", &vertical_variation, py::arg("k"),
          py::arg("samples"));
    m.def("hessian_quadratic_form", &hessian_quadratic_form, py::arg("loop"),
          py::arg("direction"), py::arg("alpha"), py::arg("h") = 1e-3);
}
