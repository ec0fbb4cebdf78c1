// Python bindings for the model checker and repair engine. Formulas cross the
// boundary as strings (parsed on entry, printed on exit); structured results
// — diffs, traces, repair candidates — cross as plain dicts and lists built
// from their JSON form, so Python callers get native containers rather than
// wrapped handles.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ctlrepair/checker.hpp"
#include "ctlrepair/cli.hpp"
#include "ctlrepair/diff.hpp"
#include "ctlrepair/formula.hpp"
#include "ctlrepair/kripke.hpp"
#include "ctlrepair/update.hpp"
#include "json.hpp"

namespace py = pybind11;
using namespace ctlrepair;

namespace {

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
      for (const auto& [k, v] : j.items()) out[py::str(k)] = json_to_py(v);
      return out;
    }
    default:
      return py::none();
  }
}

py::dict candidate_to_py(const UpdateCandidate& c) {
  py::dict out;
  out["model"] = json_to_py(model_to_json(c.model));
  out["start"] = c.start;
  out["trace"] = json_to_py(trace_to_json(c.trace));
  out["diff"] = json_to_py(diff_to_json(c.diff));
  out["unchanged_reachable"] = c.unchanged_reachable;
  out["admissible"] = c.admissible;
  out["committed"] = c.committed;
  return out;
}

UpdateConfig make_config(std::size_t max_candidates, std::size_t max_new_states, bool committed,
                         const std::vector<std::string>& constraints) {
  UpdateConfig cfg;
  cfg.max_candidates = max_candidates;
  cfg.max_new_states = max_new_states;
  cfg.committed = committed;
  for (const auto& text : constraints) cfg.constraints.push_back(parse_formula(text));
  return cfg;
}

}  // namespace

PYBIND11_MODULE(ctlrepair, mod) {
  mod.doc() =
      "CTL model checking and minimal-change model repair: parse Kripke "
      "models, decide CTL formulas, and enumerate the closest repaired "
      "models when a formula fails.";

  py::register_exception<ParseError>(mod, "FormulaParseError", PyExc_ValueError);
  py::register_exception<ModelError>(mod, "ModelFormatError", PyExc_ValueError);
  py::register_exception<CheckError>(mod, "CheckError", PyExc_ValueError);
  py::register_exception<UpdateError>(mod, "UpdateError", PyExc_ValueError);

  py::class_<KripkeModel>(mod, "Model", "A finite state-transition model with labeled states.")
      .def_property_readonly("atoms",
                             [](const KripkeModel& m) { return m.atoms; })
      .def_property_readonly("states",
                             [](const KripkeModel& m) {
                               std::set<std::string> names;
                               for (const auto& [s, label] : m.labels) names.insert(s);
                               return names;
                             })
      .def_property_readonly("init", [](const KripkeModel& m) { return m.init; })
      .def_property_readonly(
          "transitions", [](const KripkeModel& m) { return m.trans; })
      .def("label", [](const KripkeModel& m, const std::string& s) { return m.labels.at(s); },
           py::arg("state"), "Atoms true at the given state.")
      .def("to_dict", [](const KripkeModel& m) { return json_to_py(model_to_json(m)); },
           "The model as a plain dict (atoms, states, init, trans).")
      .def("__repr__", [](const KripkeModel& m) {
        std::ostringstream out;
        out << "Model(" << m.labels.size() << " states, " << m.trans.size() << " transitions)";
        return out.str();
      });

  mod.def("parse_model", &parse_model, py::arg("text"),
          "Parse the line-oriented model format (atoms/state/init/trans).");
  mod.def("parse_model_json", &parse_model_json, py::arg("text"),
          "Parse a model from its JSON form.");
  mod.def("serialize_model", &serialize_model, py::arg("model"),
          "Canonical text document; parse_model round-trips it.");
  mod.def("canonical_key", &canonical_key, py::arg("model"),
          "Deterministic fingerprint string; equal keys mean equal models.");
  mod.def("export_dot",
          [](const KripkeModel& m) { return export_dot(m, nullptr); }, py::arg("model"),
          "Graphviz DOT rendering of the model.");

  mod.def("parse_formula",
          [](const std::string& text) { return print_formula(parse_formula(text)); },
          py::arg("text"),
          "Parse a CTL formula and return its normalized printed form.");

  mod.def(
      "check",
      [](const KripkeModel& m, const std::string& state, const std::string& formula) {
        return check(m, state, parse_formula(formula));
      },
      py::arg("model"), py::arg("state"), py::arg("formula"),
      "Decide whether the formula holds at the given state.");

  mod.def(
      "sat_states",
      [](const KripkeModel& m, const std::string& formula) {
        return sat_states(m, parse_formula(formula));
      },
      py::arg("model"), py::arg("formula"), "All states at which the formula holds.");

  mod.def(
      "compute_diff",
      [](const KripkeModel& base, const KripkeModel& other) {
        return json_to_py(diff_to_json(compute_diff(base, other)));
      },
      py::arg("base"), py::arg("other"),
      "Change sets between two models (edges, labels, states), as a dict.");

  mod.def(
      "update",
      [](const KripkeModel& m, const std::string& start, const std::string& formula,
         std::size_t max_candidates, std::size_t max_new_states, bool committed,
         const std::vector<std::string>& constraints) {
        UpdateResult r = ctl_update({m, start}, parse_formula(formula),
                                    make_config(max_candidates, max_new_states, committed,
                                                constraints));
        py::list out;
        for (const auto& c : r.candidates) out.append(candidate_to_py(c));
        return py::make_tuple(out, r.budget_exhausted);
      },
      py::arg("model"), py::arg("start"), py::arg("formula"), py::arg("max_candidates") = 256,
      py::arg("max_new_states") = 2, py::arg("committed") = false,
      py::arg("constraints") = std::vector<std::string>{},
      "Repair the model so the formula holds at `start`. Returns\n"
      "(candidates, budget_exhausted): each candidate is a dict with the\n"
      "repaired model, the primitive-operation trace, the diff against the\n"
      "base, and its admissible/committed flags.");

  mod.def(
      "update_all",
      [](const KripkeModel& m, const std::string& formula, std::size_t max_candidates,
         std::size_t max_new_states, bool committed,
         const std::vector<std::string>& constraints) {
        UpdateResult r = update_model(m, parse_formula(formula),
                                      make_config(max_candidates, max_new_states, committed,
                                                  constraints));
        py::list out;
        for (const auto& c : r.candidates) out.append(candidate_to_py(c));
        return py::make_tuple(out, r.budget_exhausted);
      },
      py::arg("model"), py::arg("formula"), py::arg("max_candidates") = 256,
      py::arg("max_new_states") = 2, py::arg("committed") = false,
      py::arg("constraints") = std::vector<std::string>{},
      "Repair the model at every initial state (see `update`).");

  mod.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"),
      "Invoke the command-line interface in-process; returns (exit_code, stdout, stderr).");
}
