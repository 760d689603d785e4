#include "dpbench/errors.hpp"
#include "dpbench/llm_agent.hpp"
#include "dpbench/metrics.hpp"
#include "dpbench/report.hpp"
#include "dpbench/runner.hpp"
#include "dpbench/transcript.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace dpbench;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o)
{
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

std::vector<Decision> decisions_of(const std::vector<Action>& actions)
{
    std::vector<Decision> out;
    for (Action a : actions) out.push_back(Decision::of(a));
    return out;
}

py::dict events_dict(const StepEvents& events)
{
    py::list per;
    for (std::size_t p = 0; p < events.philosophers.size(); ++p) per.append(to_python(to_json(events.philosophers[p], p)));
    py::dict d;
    d["philosophers"] = per;
    return d;
}

py::dict report_dict(const ConditionReport& r)
{
    py::dict d;
    d["condition"] = r.condition_code;
    d["episodes"] = r.episodes;
    d["DL"] = r.deadlock_rate;
    d["TP"] = r.throughput_mean;
    d["TP_std"] = r.throughput_std;
    d["FR"] = r.fairness_mean;
    d["FR_std"] = r.fairness_std;
    d["TTD"] = r.time_to_deadlock;
    d["SC"] = r.starvation_mean;
    d["MAC"] = r.message_action_consistency;
    d["zero_meal_episodes"] = r.zero_meal_episodes;
    return d;
}

ConditionReport report_from_dict(const py::dict& d)
{
    ConditionReport r;
    r.condition_code = d["condition"].cast<std::string>();
    r.episodes = d["episodes"].cast<std::size_t>();
    r.deadlock_rate = d["DL"].cast<double>();
    r.throughput_mean = d["TP"].cast<double>();
    r.throughput_std = d.contains("TP_std") ? d["TP_std"].cast<double>() : 0.0;
    r.fairness_mean = d["FR"].cast<double>();
    r.fairness_std = d.contains("FR_std") ? d["FR_std"].cast<double>() : 0.0;
    if (d.contains("TTD")) r.time_to_deadlock = d["TTD"].cast<std::optional<double>>();
    r.starvation_mean = d.contains("SC") ? d["SC"].cast<double>() : 0.0;
    if (d.contains("MAC")) r.message_action_consistency = d["MAC"].cast<std::optional<double>>();
    r.zero_meal_episodes = d.contains("zero_meal_episodes") ? d["zero_meal_episodes"].cast<std::size_t>() : 0;
    return r;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Dining philosophers coordination benchmark core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<TransportError>(m, "TransportError", PyExc_RuntimeError);
    py::register_exception<RunError>(m, "RunError", PyExc_RuntimeError);

    py::enum_<Action>(m, "Action")
        .value("GRAB_LEFT", Action::GrabLeft)
        .value("GRAB_RIGHT", Action::GrabRight)
        .value("RELEASE", Action::Release)
        .value("WAIT", Action::Wait);
    py::enum_<PhilosopherStatus>(m, "Status")
        .value("HUNGRY", PhilosopherStatus::Hungry)
        .value("EATING", PhilosopherStatus::Eating);
    py::enum_<Mode>(m, "Mode").value("SIMULTANEOUS", Mode::Simultaneous).value("SEQUENTIAL", Mode::Sequential);

    py::class_<Observation>(m, "Observation")
        .def_readonly("self_id", &Observation::self_id)
        .def_readonly("status", &Observation::status)
        .def_readonly("meals_eaten", &Observation::meals_eaten)
        .def_readonly("holds_left", &Observation::holds_left)
        .def_readonly("holds_right", &Observation::holds_right)
        .def_readonly("left_fork_available", &Observation::left_fork_available)
        .def_readonly("right_fork_available", &Observation::right_fork_available)
        .def_readonly("left_message", &Observation::left_message)
        .def_readonly("right_message", &Observation::right_message)
        .def("to_dict", [](const Observation& o) { return to_python(to_json(o)); });

    py::class_<Decision>(m, "Decision")
        .def_readonly("action", &Decision::action)
        .def_readonly("message", &Decision::message)
        .def_readonly("thinking", &Decision::thinking)
        .def_readonly("parse_ok", &Decision::parse_ok);

    py::class_<TableState>(m, "TableState")
        .def(py::init<std::size_t>(), py::arg("n"))
        .def_property_readonly("size", &TableState::size)
        .def_property_readonly("timestep", &TableState::timestep)
        .def_property_readonly("fork_owners",
                               [](const TableState& t) {
                                   return std::vector<std::optional<PhilosopherId>>(t.fork_owners().begin(),
                                                                                    t.fork_owners().end());
                               })
        .def_property_readonly("statuses",
                               [](const TableState& t) {
                                   return std::vector<PhilosopherStatus>(t.statuses().begin(), t.statuses().end());
                               })
        .def_property_readonly("meals",
                               [](const TableState& t) { return std::vector<unsigned>(t.meals().begin(), t.meals().end()); })
        .def("next_sequential", &TableState::next_sequential)
        .def("to_dict", [](const TableState& t) { return to_python(to_json(t)); });

    m.def("new_table", &new_table, py::arg("n"));
    m.def(
        "observe", [](const TableState& t, PhilosopherId pid) { return observe(t, pid); }, py::arg("table"), py::arg("pid"));
    m.def(
        "apply_simultaneous",
        [](const TableState& t, const std::vector<Action>& actions) {
            auto r = apply_simultaneous(t, decisions_of(actions));
            return py::make_tuple(r.state, events_dict(r.events));
        },
        py::arg("table"), py::arg("actions"), "Returns (next_state, events).");
    m.def(
        "apply_sequential",
        [](const TableState& t, PhilosopherId pid, Action a) {
            auto r = apply_sequential(t, pid, Decision::of(a));
            return py::make_tuple(r.state, events_dict(r.events));
        },
        py::arg("table"), py::arg("pid"), py::arg("action"));
    m.def("detect_deadlock", &detect_deadlock, py::arg("table"));

    m.def("scripted_policy_names", &scripted_policy_names);
    m.def(
        "scripted_decide",
        [](const std::string& name, const Observation& obs, std::size_t n, std::uint64_t seed) {
            auto policy = make_scripted_policy(name);
            PolicyContext ctx({Mode::Simultaneous, n, false}, seed, obs.self_id);
            return policy->decide(obs, ctx).action;
        },
        py::arg("name"), py::arg("obs"), py::arg("n"), py::arg("seed") = 42);

    m.def("gini", [](const std::vector<unsigned>& meals) { return gini(meals).value; }, py::arg("meals"));
    m.def("fairness", [](const std::vector<unsigned>& meals) { return fairness(meals).value; }, py::arg("meals"));
    m.def("extract_intent", &extract_intent, py::arg("message"));

    m.def("parse_response", &parse_response, py::arg("text"));
    m.def(
        "render_system_prompt",
        [](Mode mode, std::size_t n, bool comms, PhilosopherId pid) { return render_system_prompt({mode, n, comms}, pid); },
        py::arg("mode"), py::arg("n"), py::arg("comms"), py::arg("pid"));
    m.def("render_decision_prompt", &render_decision_prompt, py::arg("obs"), py::arg("comms"));

    m.def("standard_condition_codes", &standard_condition_codes);
    m.def(
        "run_condition",
        [](const std::string& condition, const std::vector<std::string>& policies, std::size_t episodes,
           unsigned max_timesteps, std::uint64_t seed, const std::string& output_dir) {
            RunConfig config;
            config.condition = parse_condition(condition);
            config.policies = policies;
            config.episodes = episodes;
            config.max_timesteps = max_timesteps;
            config.seed = seed;
            config.output_dir = output_dir;
            ConditionRun run;
            {
                py::gil_scoped_release release;
                run = run_condition(config);
            }
            py::list transcripts;
            for (const auto& ep : run.episodes) transcripts.append(to_python(ep.transcript));
            py::dict out;
            out["report"] = report_dict(run.report);
            out["transcripts"] = transcripts;
            return out;
        },
        py::arg("condition"), py::arg("policies") = std::vector<std::string>{"greedy-left"}, py::arg("episodes") = 20,
        py::arg("max_timesteps") = 30, py::arg("seed") = 42, py::arg("output_dir") = std::string{},
        "Runs one condition with scripted policies. Returns {'report', 'transcripts'}.");

    m.def(
        "replay_transcript",
        [](const py::object& records) {
            const auto j = from_python(records);
            const auto report = replay_transcript(parse_transcript(j.get<std::vector<nlohmann::json>>()));
            py::dict d;
            d["ok"] = report.ok;
            d["steps_checked"] = report.steps_checked;
            d["mismatches"] = report.mismatches;
            return d;
        },
        py::arg("records"));
    m.def(
        "render_report",
        [](const std::vector<py::dict>& reports, const std::string& format) {
            std::vector<ConditionReport> rs;
            for (const auto& d : reports) rs.push_back(report_from_dict(d));
            return render_report(rs, report_format_from_string(format));
        },
        py::arg("reports"), py::arg("format") = "md");
    m.def(
        "report_from_directory",
        [](const std::filesystem::path& dir) {
            py::list out;
            for (const auto& r : report_from_directory(dir).reports) out.append(report_dict(r));
            return out;
        },
        py::arg("dir"));
}
