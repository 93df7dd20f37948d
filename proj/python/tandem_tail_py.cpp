// SPDX-License-Identifier: Apache-2.0
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tandem_tail/config.hpp"
#include "tandem_tail/errors.hpp"
#include "tandem_tail/kernel.hpp"
#include "tandem_tail/model.hpp"
#include "tandem_tail/pipeline.hpp"
#include "tandem_tail/report.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace tandem;

namespace {

StabilityMode mode_arg(const std::string& name) { return stability_mode_from_string(name); }

ModelParams make_params(const Vec3& lambda, const Vec3& c, const Vec3& sigma) {
    ModelParams p;
    p.lambda = lambda;
    p.c = c;
    p.sigma = sigma;
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Tail asymptotics of a three-node Brownian tandem queue";
    m.attr("__version__") = config::kToolVersion;

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidParameter>(m, "InvalidParameter", error.ptr());
    py::register_exception<UnstableModel>(m, "UnstableModel", error.ptr());
    py::register_exception<DegenerateK1>(m, "DegenerateK1", error.ptr());
    py::register_exception<UnsupportedModel>(m, "UnsupportedModel", error.ptr());
    py::register_exception<OutsideBranchCut>(m, "OutsideBranchCut", error.ptr());
    py::register_exception<EmptyWindow>(m, "EmptyWindow", error.ptr());
    py::register_exception<InsufficientTail>(m, "InsufficientTail", error.ptr());
    py::register_exception<InsufficientBlocks>(m, "InsufficientBlocks", error.ptr());
    py::register_exception<GridMismatch>(m, "GridMismatch", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init(&make_params), "lambda_"_a, "c"_a, "sigma"_a)
        .def_readwrite("lambda_", &ModelParams::lambda)
        .def_readwrite("c", &ModelParams::c)
        .def_readwrite("sigma", &ModelParams::sigma)
        .def(py::self == py::self)
        .def("__repr__", [](const ModelParams& p) {
            return py::str("ModelParams(lambda_={}, c={}, sigma={})")
                .format(p.lambda, p.c, p.sigma);
        });

    py::enum_<kernel::Regime>(m, "Regime")
        .value("SimplePole", kernel::Regime::SimplePole)
        .value("PoleAtBranch", kernel::Regime::PoleAtBranch)
        .value("BranchPoint", kernel::Regime::BranchPoint);

    py::class_<kernel::AsymptoticPrediction>(m, "AsymptoticPrediction")
        .def_readonly("node", &kernel::AsymptoticPrediction::node)
        .def_readonly("alpha", &kernel::AsymptoticPrediction::alpha)
        .def_readonly("mu", &kernel::AsymptoticPrediction::mu)
        .def_readonly("regime", &kernel::AsymptoticPrediction::regime);

    py::class_<kernel::KernelGeometry>(m, "KernelGeometry")
        .def_readonly("z_min", &kernel::KernelGeometry::z_min)
        .def_readonly("z_max", &kernel::KernelGeometry::z_max)
        .def_readonly("z_max_closed_form", &kernel::KernelGeometry::z_max_closed_form)
        .def_readonly("y_min", &kernel::KernelGeometry::y_min)
        .def_readonly("y_max", &kernel::KernelGeometry::y_max)
        .def_readonly("y_tilde_m", &kernel::KernelGeometry::y_tilde_m)
        .def_readonly("z_star", &kernel::KernelGeometry::z_star);

    py::class_<kernel::KernelReport>(m, "KernelReport")
        .def_readonly("geometry", &kernel::KernelReport::geometry)
        .def_readonly("marginals", &kernel::KernelReport::marginals)
        .def_readonly("regulator_rates", &kernel::KernelReport::regulator_rates)
        .def_readonly("warnings", &kernel::KernelReport::warnings)
        .def_property_readonly("phi2", [](const kernel::KernelReport& r) { return r.boundary.phi2_value; })
        .def_property_readonly("z0", [](const kernel::KernelReport& r) { return r.boundary.z0; })
        .def("to_json", [](const kernel::KernelReport& r, const std::string& hash) {
            return report::kernel_report_json(r, hash);
        }, "manifest_hash"_a = "")
        .def("to_csv", [](const kernel::KernelReport& r, const std::string& hash) {
            return report::kernel_report_csv(r, hash);
        }, "manifest_hash"_a = "");

    m.def("validate", [](const ModelParams& p, const std::string& mode) {
        const auto v = validate(p, mode_arg(mode));
        py::dict out;
        out["drift"] = v.derived().drift;
        out["k1"] = v.derived().k1;
        out["refined_stable"] = v.refined_stable();
        return out;
    }, "params"_a, "mode"_a = "refined", "Check the parameters and return the derived constants.");

    m.def("analyze", [](const ModelParams& p, const std::string& mode) {
        return kernel::analyze(validate(p, mode_arg(mode)));
    }, "params"_a, "mode"_a = "refined");

    m.def("tauberian_exponent", [](kernel::Regime r) {
        const auto t = kernel::tauberian_exponent(r);
        return py::make_tuple(t.lambda_exponent, t.prefactor_exponent);
    });

    py::class_<config::RunManifest>(m, "RunManifest")
        .def(py::init<>())
        .def_static("parse", &config::parse, "text"_a)
        .def_static("load", &config::load, "path"_a)
        .def_static("set_a", &config::set_a)
        .def_static("set_b", &config::set_b)
        .def_readwrite("model", &config::RunManifest::model)
        .def_property("mode",
                      [](const config::RunManifest& r) { return to_string(r.mode); },
                      [](config::RunManifest& r, const std::string& s) { r.mode = mode_arg(s); })
        .def_readwrite("output_dir", &config::RunManifest::output_dir)
        .def("set", [](config::RunManifest& r, const std::string& a) {
            config::apply_override(r, a);
            return &r;
        }, "assignment"_a, py::return_value_policy::reference_internal,
        "Apply a 'section.key=value' override.")
        .def("to_text", &config::to_text)
        .def("save", &config::save, "path"_a)
        .def_property_readonly("hash", &config::manifest_hash_hex)
        .def(py::self == py::self)
        .def("__repr__", [](const config::RunManifest& r) {
            return "<RunManifest " + config::manifest_hash_hex(r) + ">";
        });

    py::class_<tails::TailFit>(m, "TailFit")
        .def_readonly("node", &tails::TailFit::node)
        .def_readonly("alpha_hat", &tails::TailFit::alpha_hat)
        .def_readonly("intercept", &tails::TailFit::intercept)
        .def_readonly("stderr_alpha", &tails::TailFit::stderr_alpha)
        .def_readonly("mu_hat", &tails::TailFit::mu_hat)
        .def_readonly("n_levels", &tails::TailFit::n_levels)
        .def_property_readonly("window", [](const tails::TailFit& f) {
            return py::make_tuple(f.window.lo, f.window.hi);
        });

    py::class_<pipeline::Products>(m, "Products")
        .def_readonly("manifest", &pipeline::Products::manifest)
        .def_readonly("kernel", &pipeline::Products::kernel)
        .def_readonly("fits", &pipeline::Products::fits)
        .def_readonly("boundary_transform", &pipeline::Products::boundary_transform)
        .def_readonly("gumbel_distance", &pipeline::Products::gumbel_distance)
        .def_readonly("sim_seconds", &pipeline::Products::sim_seconds)
        .def_property_readonly("regulator_rates",
                               [](const pipeline::Products& p) { return p.rates.rate; })
        .def("ccdf", [](const pipeline::Products& p, int node) {
            if (node < 1 || node > 3) throw py::index_error("node must be 1, 2 or 3");
            const auto& c = p.ccdf[static_cast<std::size_t>(node - 1)];
            return py::make_tuple(c.levels, c.probabilities);
        }, "node"_a, "(levels, exceedance probabilities) of one node.")
        .def("simulation_json", &report::simulation_json);

    m.def("simulate", [](const config::RunManifest& manifest, bool gumbel) {
        py::gil_scoped_release release;
        return pipeline::simulate(manifest, gumbel);
    }, "manifest"_a, "gumbel"_a = false);

    py::class_<pipeline::Row>(m, "Row")
        .def_readonly("quantity", &pipeline::Row::quantity)
        .def_readonly("predicted", &pipeline::Row::predicted)
        .def_readonly("estimated", &pipeline::Row::estimated)
        .def_readonly("tolerance", &pipeline::Row::tolerance)
        .def_readonly("passed", &pipeline::Row::pass)
        .def("__repr__", [](const pipeline::Row& r) {
            return (r.pass ? "<PASS " : "<FAIL ") + r.quantity + ">";
        });

    py::class_<pipeline::VerificationReport>(m, "VerificationReport")
        .def_readonly("manifest_hash", &pipeline::VerificationReport::manifest_hash)
        .def_readonly("rows", &pipeline::VerificationReport::rows)
        .def("all_pass", &pipeline::VerificationReport::all_pass)
        .def("find", [](const pipeline::VerificationReport& r, const std::string& q)
                 -> std::optional<pipeline::Row> {
            const auto* row = r.find(q);
            if (!row) return std::nullopt;
            return *row;
        }, "quantity"_a)
        .def("to_csv", &report::verification_csv)
        .def("to_json", &report::verification_json);

    m.def("evaluate", [](const pipeline::Products& p, double alpha3_scale) {
        pipeline::VerifyOptions opts;
        opts.alpha3_scale = alpha3_scale;
        return pipeline::evaluate(p, opts);
    }, "products"_a, "alpha3_scale"_a = 1.0);
}
