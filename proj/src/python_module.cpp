#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rstoda/backlund.hpp"
#include "rstoda/errors.hpp"
#include "rstoda/flow.hpp"
#include "rstoda/harness.hpp"
#include "rstoda/random_state.hpp"
#include "rstoda/tau.hpp"
#include "rstoda/wave.hpp"

namespace py = pybind11;
using namespace rstoda;

namespace {

py::array_t<cplx> to_numpy(const ComplexMatrix& m) {
    py::array_t<cplx> out({m.n(), m.n()});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < m.n(); ++i)
        for (std::size_t j = 0; j < m.n(); ++j) v(i, j) = m(i, j);
    return out;
}

py::array_t<cplx> to_numpy(const std::vector<CVector>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    py::array_t<cplx> out({rows.size(), cols});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) v(i, j) = rows[i][j];
    return out;
}

ModelParams make_params(std::size_t n, cplx gamma, cplx eta) {
    ModelParams p;
    p.n = n;
    p.gamma = gamma;
    p.eta = eta;
    p.validate();
    return p;
}

PhaseState make_state(const CVector& x, const CVector& p) { return PhaseState{x, p}; }

py::object json_to_python(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json python_to_json(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_rstoda, m) {
    m.doc() = "Ruijsenaars-Schneider pole dynamics and determinant tau-functions of the 2D Toda hierarchy";

    py::register_exception<Error>(m, "RstodaError", PyExc_RuntimeError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init(&make_params), py::arg("n") = 3, py::arg("gamma") = cplx(0.5), py::arg("eta") = cplx(1.0))
        .def_readwrite("n", &ModelParams::n)
        .def_readwrite("gamma", &ModelParams::gamma)
        .def_readwrite("eta", &ModelParams::eta)
        .def_readwrite("collision_eps", &ModelParams::collision_eps)
        .def_property_readonly("q", &ModelParams::q)
        .def("kappa", &ModelParams::kappa);

    py::class_<PhaseState>(m, "PhaseState")
        .def(py::init(&make_state), py::arg("x"), py::arg("p"))
        .def_readwrite("x", &PhaseState::x)
        .def_readwrite("p", &PhaseState::p);

    m.def(
        "random_state",
        [](const ModelParams& params, std::uint64_t seed) {
            SplitMix64 rng(seed);
            return random_state(params, rng);
        },
        py::arg("params"), py::arg("seed"), "Seeded admissible random state (splitmix64 stream).");

    m.def("velocity_map", &velocity_map);
    m.def("negative_velocities", &negative_velocities);
    m.def("rs_accelerations", py::overload_cast<const ModelParams&, const PhaseState&>(&rs_accelerations));
    m.def("lax_matrix", [](const ModelParams& p, const PhaseState& s) { return to_numpy(lax_matrix(p, s)); });
    m.def("lax_bar_matrix", [](const ModelParams& p, const PhaseState& s) { return to_numpy(lax_bar_matrix(p, s)); });
    m.def("hamiltonian", &hamiltonian, py::arg("params"), py::arg("state"), py::arg("m"));
    m.def("poisson_bracket", &poisson_bracket);
    m.def("conserved_spectrum", &conserved_spectrum);
    m.def("commutation_residual", &commutation_residual);
    m.def("lax_equation_residual", &lax_equation_residual);
    m.def("similarity_residual", &similarity_residual);

    m.def(
        "integrate_flow",
        [](const ModelParams& params, const PhaseState& state, int m_index, cplx duration, std::size_t samples,
           double rtol) {
            FlowSpec spec;
            spec.m = m_index;
            spec.duration = duration;
            spec.samples = samples;
            spec.rtol = rtol;
            const Trajectory t = integrate_flow(params, state, spec);
            std::vector<cplx> times;
            std::vector<CVector> xs, ps, inv;
            for (const auto& smp : t.samples) {
                times.push_back(smp.time);
                xs.push_back(smp.state.x);
                ps.push_back(smp.state.p);
                inv.push_back(smp.invariants);
            }
            py::dict out;
            out["time"] = times;
            out["x"] = to_numpy(xs);
            out["p"] = to_numpy(ps);
            out["invariants"] = to_numpy(inv);
            out["max_relative_drift"] = t.max_relative_drift();
            return out;
        },
        py::arg("params"), py::arg("state"), py::arg("m"), py::arg("duration"), py::arg("samples") = 11,
        py::arg("rtol") = 1e-10);

    m.def(
        "tau_zeros_along",
        [](const ModelParams& params, const PhaseState& state, int m_index, cplx duration, std::size_t samples) {
            const TauContext ctx(params, state);
            std::vector<CVector> xs;
            for (const auto& z : track_zeros_along(ctx, m_index, duration, samples)) xs.push_back(z.x);
            return to_numpy(xs);
        },
        py::arg("params"), py::arg("state"), py::arg("m"), py::arg("duration"), py::arg("samples") = 11,
        "Branch-tracked zeros x of tau' along t_m (m > 0) or tbar_|m| (m < 0).");

    m.def(
        "backlund",
        [](const ModelParams& params, const PhaseState& state, cplx mu) {
            const TauContext ctx(params, state);
            const BacklundPair pair = backlund_partner(ctx, {}, mu);
            py::dict out;
            out["y"] = pair.y;
            out["ydot"] = pair.ydot;
            out["residual"] = backlund_residual(params, pair);
            out["discrete_residual"] = discrete_time_residual(ctx, {}, mu);
            return out;
        },
        py::arg("params"), py::arg("state"), py::arg("mu"));

    m.def(
        "residue_velocities",
        [](const ModelParams& params, const PhaseState& state, int m_index) {
            const ResidueVelocities r = residue_velocity_identity(params, state, m_index);
            return py::make_tuple(r.contour, r.trace);
        },
        py::arg("params"), py::arg("state"), py::arg("m"));

    m.def("check_names", [] {
        std::vector<std::string> names;
        for (const auto& c : check_registry()) names.push_back(c.name);
        return names;
    });

    m.def(
        "verify",
        [](const py::object& config, unsigned threads) {
            const ScenarioConfig c = config.is_none() ? default_config() : parse_config(python_to_json(config));
            VerificationReport report;
            {
                py::gil_scoped_release release;
                report = run_verify(c, threads);
            }
            return json_to_python(report.to_json());
        },
        py::arg("config") = py::none(), py::arg("threads") = 0,
        "Run the check registry on a config given as a dict (None: defaults); returns the report dict.");
}
