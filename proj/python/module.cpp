#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "couplecheck/corpus.hpp"
#include "couplecheck/parser.hpp"
#include "couplecheck/properties.hpp"
#include "couplecheck/report.hpp"
#include "couplecheck/semantics.hpp"
#include "couplecheck/transform.hpp"

namespace py = pybind11;
using namespace couplecheck;
using json = nlohmann::ordered_json;

namespace {

using ProgramPtr = std::shared_ptr<const TypedProgram>;

// pybind11 holders cannot point to const objects
struct ProgramHandle {
  ProgramPtr tp;
};

CheckOptions options(std::uint32_t fuel, const std::string& tol, bool seed_enum) {
  CheckOptions o;
  o.fuel = fuel;
  o.tol = parse_rational(tol);
  o.seed_enum = seed_enum;
  return o;
}

PropertyKind parse_kind(const std::string& k) {
  if (k == "uniform") return PropertyKind::Uniform;
  if (k == "indep") return PropertyKind::Indep;
  if (k == "indep-via-uniform") return PropertyKind::IndepViaUniform;
  if (k == "cond-indep") return PropertyKind::CondIndep;
  throw std::invalid_argument("unknown property " + k);
}

std::string run_json(const ProgramHandle& prog, std::uint32_t fuel) {
  const auto& tp = prog.tp;
  StateDist mu;
  {
    py::gil_scoped_release nogil;
    mu = run_program(*tp, fuel);
  }
  json j;
  j["program"] = tp->name;
  j["fuel"] = fuel;
  j["outcomes"] = json::array();
  for (const auto& [s, p] : mu.mass) {
    json st;
    for (std::size_t i = 0; i < s.vals.size(); ++i)
      st[tp->layout->vars[i].name] = format_value(s.vals[i], *tp->layout->vars[i].type);
    j["outcomes"].push_back({{"state", st}, {"mass", to_string(p)}});
  }
  j["residual"] = to_string(mu.residual);
  j["error"] = to_string(mu.error);
  return j.dump();
}

std::string lossless_json(const ProgramHandle& prog, std::uint32_t fuel, const std::string& tol, bool seed_enum) {
  auto r = check_lossless(*prog.tp, fuel, parse_rational(tol), seed_enum);
  json j;
  j["kind"] = r.kind == LosslessKind::Exact ? "exact" : r.kind == LosslessKind::Within ? "within" : "not-lossless";
  j["residual"] = to_string(r.residual);
  j["deficit"] = to_string(r.deficit);
  return j.dump();
}

std::string property_json(const ProgramHandle& prog, const std::vector<std::string>& vars, const std::string& kind,
                          const std::string& event, const std::string& route, const std::string& proof,
                          std::uint32_t fuel, const std::string& tol, std::optional<std::size_t> sample,
                          std::uint64_t seed, unsigned jobs, bool seed_enum) {
  PropertyQuery q;
  q.program = prog.tp;
  q.vars = vars;
  q.kind = parse_kind(kind);
  q.event = event;
  q.route = parse_route(route);
  q.proof_path = proof;
  q.opt = options(fuel, tol, seed_enum);
  q.sample = sample;
  q.seed = seed;
  q.jobs = jobs;
  py::gil_scoped_release nogil;
  return to_json(check_property(q)).dump();
}

std::string prove_json(const ProgramHandle& prog, const std::string& proof, const Bindings& b, std::uint32_t fuel,
                       const std::string& tol, bool conclude, bool seed_enum) {
  auto script = load_proof_file(proof);
  if (!script.header) throw UsageError(proof + ": no (judgment ...) header");
  const auto& tp = prog.tp;
  auto j = judgment_from_header(*script.header, tp, script.dir, b);
  auto opt = options(fuel, tol, seed_enum);
  json out;
  out["program"] = tp->name;
  out["instances"] = json::array();
  bool all = true;
  py::gil_scoped_release nogil;
  for (const auto& env : instantiate_family(j)) {
    auto r = check_proof(j, env, script, opt);
    all = all && r.accepted;
    json x;
    x["instance"] = format_env(env);
    x["accepted"] = r.accepted;
    x["result"] = r.to_string();
    if (!r.accepted) {
      x["rule"] = r.rule;
      x["path"] = r.path;
      x["reason"] = r.reason;
    }
    if (conclude && r.accepted) {
      auto c = conclude_probability(j, env, &r, opt);
      x["conclusion"] = {{"certified", c.certified}, {"lhs", to_string(c.lhs)}, {"rhs", to_string(c.rhs)},
                         {"slack", to_string(c.slack)}, {"text", c.text}};
    }
    out["instances"].push_back(x);
  }
  out["accepted"] = all;
  return out.dump();
}

std::string corpus_json(const std::string& path, const std::string& filter, const std::vector<std::string>& routes,
                        std::optional<std::uint32_t> fuel, unsigned jobs) {
  CorpusOptions o;
  o.filter = filter;
  o.fuel = fuel;
  o.jobs = std::max(1u, jobs);
  if (!routes.empty()) {
    o.routes.clear();
    for (const auto& r : routes) o.routes.insert(parse_route(r));
  }
  py::gil_scoped_release nogil;
  return summary_to_json(run_corpus(path, o)).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "exact coupling checks for a finite probabilistic while-language";

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<SyntaxError>(m, "ProgramSyntaxError", PyExc_ValueError);
  py::register_exception<SExprError>(m, "ScriptSyntaxError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const TypeError& e) {
      std::string msg;
      for (const auto& s : e.messages) msg += (msg.empty() ? "" : "\n") + s;
      PyErr_SetString(PyExc_TypeError, msg.c_str());
    }
  });

  py::class_<ProgramHandle>(m, "Program")
      .def_property_readonly("name", [](const ProgramHandle& p) { return p.tp->name; })
      .def_property_readonly("variables",
                             [](const ProgramHandle& p) {
                               std::vector<std::pair<std::string, std::string>> out;
                               for (const auto& v : p.tp->layout->vars) out.emplace_back(v.name, type_to_string(*v.type));
                               return out;
                             })
      .def_property_readonly("bindings", [](const ProgramHandle& p) { return p.tp->bindings; })
      .def("source", [](const ProgramHandle& p) { return print_program(p.tp->source); })
      .def("self_compose",
           [](const ProgramHandle& p, int n) {
             if (n < 1) throw UsageError("n must be at least 1");
             return ProgramHandle{std::make_shared<const TypedProgram>(self_compose(*p.tp, n))};
           },
           py::arg("n"))
      .def("__repr__", [](const ProgramHandle& p) { return "<couplecheck.Program " + p.tp->name + ">"; });

  m.def("load_program",
        [](const std::string& text, const Bindings& b) {
          return ProgramHandle{std::make_shared<const TypedProgram>(load_program(text, b))};
        },
        py::arg("text"), py::arg("bindings") = Bindings{});
  m.def("load_program_file",
        [](const std::string& path, const Bindings& b) {
          return ProgramHandle{std::make_shared<const TypedProgram>(load_program_file(path, b))};
        },
        py::arg("path"), py::arg("bindings") = Bindings{});
  m.def("run", &run_json, py::arg("program"), py::arg("fuel") = 64);
  m.def("lossless", &lossless_json, py::arg("program"), py::arg("fuel") = 64, py::arg("tol") = "1/1073741824",
        py::arg("seed_enum") = false);
  m.def("check_property", &property_json, py::arg("program"), py::arg("vars"), py::arg("kind") = "uniform",
        py::arg("event") = "", py::arg("route") = "oracle", py::arg("proof") = "", py::arg("fuel") = 64,
        py::arg("tol") = "1/1073741824", py::arg("sample") = std::nullopt, py::arg("seed") = 0, py::arg("jobs") = 1,
        py::arg("seed_enum") = false);
  m.def("prove", &prove_json, py::arg("program"), py::arg("proof"), py::arg("bindings") = Bindings{},
        py::arg("fuel") = 64, py::arg("tol") = "1/1073741824", py::arg("conclude") = false,
        py::arg("seed_enum") = false);
  m.def("run_corpus", &corpus_json, py::arg("path"), py::arg("filter") = "*",
        py::arg("routes") = std::vector<std::string>{}, py::arg("fuel") = std::nullopt, py::arg("jobs") = 1);
  m.def("format_report",
        [](const std::string& report_json, bool as_json) {
          return format_report({report_from_json(json::parse(report_json))}, as_json);
        },
        py::arg("report"), py::arg("json") = false);
}
