#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hamlet/analysis.hpp"
#include "hamlet/error.hpp"
#include "hamlet/experiment.hpp"
#include "hamlet/json_io.hpp"
#include "hamlet/learning_curve.hpp"
#include "hamlet/policies.hpp"
#include "hamlet/simulator.hpp"
#include "hamlet/trace.hpp"

namespace py = pybind11;
using namespace hamlet;
using nlohmann::json;

namespace {

py::object to_python(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

json from_python(const py::handle& obj) {
    return json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

std::vector<TraceEvent> to_events(const std::vector<std::pair<double, double>>& pts) {
    std::vector<TraceEvent> out;
    out.reserve(pts.size());
    for (const auto& [t, y] : pts) out.push_back({t, y});
    return out;
}

std::vector<std::pair<double, double>> to_pairs(const std::vector<EnvelopePoint>& pts) {
    std::vector<std::pair<double, double>> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.emplace_back(p.x, p.y);
    return out;
}

// Exit code plus everything the command logged.
std::pair<int, std::string> with_log(const std::function<int(std::ostream&)>& f) {
    std::ostringstream log;
    const int code = f(log);
    return {code, log.str()};
}

RunOverrides overrides(std::vector<double> budgets, std::vector<std::uint64_t> seeds, std::optional<unsigned> workers,
                       std::optional<std::filesystem::path> output) {
    return {std::move(budgets), std::move(seeds), workers, std::move(output)};
}

} // namespace

PYBIND11_MODULE(_hamlet, m) {
    m.doc() = "Learning-curve extrapolating bandit for AutoML tuner selection";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    py::class_<TuningTrace>(m, "TuningTrace")
        .def(py::init([](std::string arm_id, std::string dataset_id, const std::vector<std::pair<double, double>>& events) {
                 TuningTrace t{std::move(arm_id), std::move(dataset_id), to_events(events)};
                 validate_trace(t);
                 return t;
             }),
             py::arg("arm_id"), py::arg("dataset_id"), py::arg("events"))
        .def_readonly("arm_id", &TuningTrace::arm_id)
        .def_readonly("dataset_id", &TuningTrace::dataset_id)
        .def_property_readonly("events",
                               [](const TuningTrace& t) {
                                   std::vector<std::pair<double, double>> out;
                                   for (const auto& e : t.events) out.emplace_back(e.t, e.accuracy);
                                   return out;
                               })
        .def("__repr__", [](const TuningTrace& t) {
            return "TuningTrace('" + t.arm_id + "', '" + t.dataset_id + "', " + std::to_string(t.events.size()) +
                   " events)";
        });

    py::class_<FittedCurve>(m, "FittedCurve")
        .def_property_readonly("a", [](const FittedCurve& c) { return c.params.a; })
        .def_property_readonly("b", [](const FittedCurve& c) { return c.params.b; })
        .def_property_readonly("c", [](const FittedCurve& c) { return c.params.c; })
        .def_property_readonly("d", [](const FittedCurve& c) { return c.params.d; })
        .def_readonly("fallback", &FittedCurve::fallback)
        .def_readonly("level", &FittedCurve::level)
        .def_readonly("residual", &FittedCurve::residual)
        .def_readonly("n_points", &FittedCurve::n_points)
        .def("predict", [](const FittedCurve& c, double x) { return predict(c, x); }, py::arg("x"));

    m.def(
        "monotone_envelope",
        [](const std::vector<std::pair<double, double>>& events) {
            const auto ev = to_events(events);
            return to_pairs(monotone_envelope(ev));
        },
        py::arg("events"), "Strict running maximum of (t, accuracy) pairs.");

    m.def(
        "fit_arctan",
        [](const std::vector<std::pair<double, double>>& points, std::size_t min_points) {
            std::vector<EnvelopePoint> env;
            for (const auto& [x, y] : points) env.push_back({x, y});
            FitOptions opts;
            opts.min_points = min_points;
            return fit_arctan(env, opts);
        },
        py::arg("points"), py::arg("min_points") = 4);

    m.def("ucb_bonus", &ucb_bonus, py::arg("r"), py::arg("n"), py::arg("n_i"), py::arg("rho"));
    m.def(
        "canonical_policy_name", [](const std::string& name) { return policy_from_name(name).name(); },
        py::arg("name"));

    m.def(
        "generate_traces", [](const py::dict& spec) { return generate_traces(from_python(spec).get<SyntheticSpec>()); },
        py::arg("spec"), "Synthetic traces from a spec dict (dataset_id, horizon, mean_gap, noise, seed, arms).");
    m.def(
        "load_traces",
        [](const std::filesystem::path& path) {
            auto grouped = load_traces(path, trace_format_from_path(path));
            return std::map<std::string, std::vector<TuningTrace>>(grouped.begin(), grouped.end());
        },
        py::arg("path"));

    m.def(
        "simulate",
        [](const std::vector<TuningTrace>& traces, double budget, double dt, const std::string& policy,
           std::uint64_t seed, double overhead, bool with_curves) {
            RunConfig cfg;
            cfg.budget = budget;
            cfg.dt = dt;
            cfg.policy = policy_from_name(policy);
            cfg.seed = seed;
            if (overhead > 0.0) cfg.overhead = {OverheadMode::fixed, overhead};
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run(traces, cfg);
            }
            return to_python(to_json(r, with_curves));
        },
        py::arg("traces"), py::arg("budget"), py::arg("dt") = 10.0, py::arg("policy") = "MasterLC-UCB-0.05",
        py::arg("seed") = 0, py::arg("overhead") = 0.0, py::arg("with_curves") = false,
        "Replays one dataset under a budget; returns the run result as a dict.");

    m.def(
        "average_ranks", [](const std::vector<double>& scores) { return average_ranks(scores); }, py::arg("scores"));
    m.def(
        "mean_rank_ci",
        [](const std::vector<double>& ranks) {
            const auto ci = mean_rank_ci(ranks);
            return py::make_tuple(ci.mean, ci.low, ci.high);
        },
        py::arg("ranks"), "(mean, low, high) of the normal-approximation 95% interval.");
    m.def(
        "rank_results",
        [](const py::list& results) {
            std::vector<RunResult> rs;
            for (const auto& r : results) rs.push_back(from_python(r).get<RunResult>());
            const auto table = rank_runs(rs);
            py::dict out;
            for (const auto& ci : all_mean_rank_cis(table)) out[py::str(ci.policy)] = py::make_tuple(ci.mean, ci.low, ci.high);
            return out;
        },
        py::arg("results"), "Mean rank and CI per policy for a list of run-result dicts.");

    m.def(
        "run_experiment",
        [](const std::filesystem::path& config, std::vector<double> budgets, std::vector<std::uint64_t> seeds,
           std::optional<unsigned> workers, std::optional<std::filesystem::path> output) {
            const auto o = overrides(std::move(budgets), std::move(seeds), workers, std::move(output));
            py::gil_scoped_release release;
            return with_log([&](std::ostream& log) { return cmd_run(config, o, log); });
        },
        py::arg("config"), py::arg("budgets") = std::vector<double>{}, py::arg("seeds") = std::vector<std::uint64_t>{},
        py::arg("workers") = py::none(), py::arg("output") = py::none());
    m.def(
        "sweep",
        [](const std::filesystem::path& config, std::vector<double> budgets, std::vector<std::uint64_t> seeds,
           std::optional<unsigned> workers, std::optional<std::filesystem::path> output) {
            const auto o = overrides(std::move(budgets), std::move(seeds), workers, std::move(output));
            py::gil_scoped_release release;
            return with_log([&](std::ostream& log) { return cmd_sweep(config, o, log); });
        },
        py::arg("config"), py::arg("budgets") = std::vector<double>{}, py::arg("seeds") = std::vector<std::uint64_t>{},
        py::arg("workers") = py::none(), py::arg("output") = py::none());
    m.def(
        "analyze",
        [](const std::filesystem::path& results, const std::filesystem::path& out) {
            py::gil_scoped_release release;
            return with_log([&](std::ostream& log) { return cmd_analyze(results, out, log); });
        },
        py::arg("results"), py::arg("out"));
}
