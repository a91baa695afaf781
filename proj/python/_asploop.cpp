#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "asploop/gateway.hpp"
#include "asploop/match.hpp"
#include "asploop/puzzle.hpp"
#include "asploop/verdict.hpp"

namespace py = pybind11;
using namespace asploop;

namespace {

// Everything crosses the boundary as plain dicts and lists; JSON-shaped data
// goes as text and is decoded on the python side.
py::dict verdict_dict(const SolverVerdict& v) {
    py::list models;
    for (const auto& m : v.models()) {
        py::list atoms;
        for (const auto& a : m.atoms) atoms.append(asp::to_string(a));
        models.append(atoms);
    }
    auto r = reward(v);
    py::dict d;
    d["models"] = models;
    d["count"] = v.model_count();
    d["error"] = v.has_error();
    d["unsat"] = v.is_unsat();
    d["cap_exceeded"] = v.cap_exceeded();
    d["diagnostics"] = v.diagnostics();
    d["backend"] = v.backend();
    d["reward"] = r.value();
    d["reward_exact"] = to_string(r);
    return d;
}

const SolverGateway& gateway() {
    static SolverGateway gw;
    return gw;
}

}  // namespace

PYBIND11_MODULE(_asploop, m) {
    m.doc() = "ASP solving, answer matching and rewards";

    m.def(
        "solve",
        [](const std::string& program, std::size_t cap, const std::string& backend, std::size_t keep) {
            auto b = backend_from_string(backend);
            SolverVerdict v = [&] {
                py::gil_scoped_release release;
                return gateway().solve(program, cap, b, keep);
            }();
            return verdict_dict(v);
        },
        py::arg("program"), py::arg("cap") = default_cap, py::arg("backend") = "internal", py::arg("keep") = 1000);

    m.def("has_external_solver", [] { return gateway().has_external(); });
    m.def("normalize_surface", [](const std::string& s) { return normalize_surface(s); });
    m.def("edit_distance", [](const std::string& a, const std::string& b) { return edit_distance(a, b); });
    m.def("expected_model_count", py::overload_cast<std::size_t, std::size_t>(&expected_model_count), py::arg("m"),
          py::arg("n"));

    m.def("choice_rule_reward", [](std::size_t count, std::size_t cap, std::uint64_t expected) {
        return choice_rule_reward(SolverVerdict::enumerated({}, count, cap), expected).value();
    });

    m.def(
        "match_rows",
        [](const std::vector<std::vector<std::string>>& rows, const std::string& instance_json, bool allow_exact) {
            auto p = instance_from_json(nlohmann::json::parse(instance_json));
            auto r = match_tuples(rows, p, allow_exact);
            py::dict d;
            d["matched"] = r.matched;
            d["method"] = to_string(r.method);
            d["assignment_map"] = r.assignment_map;
            d["position_category"] = r.position_category;
            d["diagnostics"] = r.diagnostics;
            return d;
        },
        py::arg("rows"), py::arg("instance_json"), py::arg("allow_exact") = true);

    m.def("load_dataset", [](const std::string& path) {
        auto d = load_dataset(path);
        nlohmann::json out = nlohmann::json::array();
        for (const auto& p : d.instances) out.push_back(to_json(p));
        return py::make_tuple(out.dump(), d.rejected.size());
    });

    py::register_exception<DatasetError>(m, "DatasetError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_RuntimeError);
}
