// Python bindings for the main operations. The interface deliberately trades
// rich wrapper classes for JSON strings: every artifact already has a
// versioned JSON schema, so Python callers parse with the stdlib.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <memory>

#include "formnav/benchmark_gen.hpp"
#include "formnav/errors.hpp"
#include "formnav/evaluator.hpp"
#include "formnav/form_explorer.hpp"
#include "formnav/form_script.hpp"
#include "formnav/jsonio.hpp"
#include "formnav/llm.hpp"
#include "formnav/nav_scenario.hpp"
#include "formnav/pipeline.hpp"
#include "formnav/simulator.hpp"
#include "formnav/site_graph.hpp"

namespace py = pybind11;
using namespace formnav;

namespace {

dom::ElementRef parse_ref(const std::string& text) {
    size_t eq = text.find('=');
    if (eq != std::string::npos) {
        std::string strat = text.substr(0, eq);
        std::string value = text.substr(eq + 1);
        if (strat == "id") return {dom::RefStrategy::id, value};
        if (strat == "css") return {dom::RefStrategy::css, value};
        if (strat == "name") return {dom::RefStrategy::name, value};
        if (strat == "xpath") return {dom::RefStrategy::xpath, value};
    }
    return {dom::RefStrategy::css, text};
}

std::unique_ptr<Session> open_bundle(const std::string& bundle_dir) {
    auto bundle = std::make_shared<const sim::SiteBundle>(
        sim::SiteBundle::load_dir(bundle_dir));
    return std::make_unique<sim::SimulatorSession>(std::move(bundle));
}

std::map<std::string, sim::ReactionManifest> manifests_from_json(
    const std::string& text) {
    std::map<std::string, sim::ReactionManifest> out;
    if (text.empty()) return out;
    nlohmann::json j = nlohmann::json::parse(text);
    const nlohmann::json forms =
        j.contains("forms") ? j["forms"] : j;
    for (const auto& [form_id, m] : forms.items()) {
        out[form_id] = sim::manifest_from_json(m.dump());
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_formnav, m) {
    m.doc() = "Screen-transition-graph web test generation";

    m.def(
        "generate_benchmark",
        [](const std::string& dir, int simple, int dynamic_forms,
           uint64_t seed) {
            bench::BenchmarkConfig c;
            c.simple_count = simple;
            c.dynamic_count = dynamic_forms;
            c.seed = seed;
            bench::generate_benchmark(dir, c);
        },
        py::arg("dir"), py::arg("simple") = 1000, py::arg("dynamic") = 1000,
        py::arg("seed") = 20240601,
        "Write the synthetic form benchmark into dir.");

    m.def(
        "save_single_form_bundle",
        [](const std::string& dir, const std::string& html,
           const std::string& manifest_json) {
            sim::ReactionManifest manifest;
            if (!manifest_json.empty()) {
                manifest = sim::manifest_from_json(manifest_json);
            }
            sim::SiteBundle::single_form(html, manifest).save_dir(dir);
            return std::string(sim::kSingleFormUrl);
        },
        py::arg("dir"), py::arg("html"), py::arg("manifest_json") = "",
        "Create a one-page simulator bundle; returns its page URL.");

    m.def(
        "crawl",
        [](const std::string& bundle_dir, const std::string& start_url,
           int max_pages, int max_depth) {
            auto session = open_bundle(bundle_dir);
            graph::CrawlLimits limits;
            limits.max_pages = max_pages;
            limits.max_depth = max_depth;
            return graph::graph_to_json(
                graph::crawl(*session, start_url, limits));
        },
        py::arg("bundle_dir"), py::arg("start_url"),
        py::arg("max_pages") = 100, py::arg("max_depth") = 3,
        "Crawl a simulator bundle; returns the transition graph as JSON.");

    m.def(
        "generate_scenario",
        [](const std::string& graph_json, const std::string& from,
           const std::string& to) {
            graph::TransitionGraph g = graph::graph_from_json(graph_json);
            return nav::scenario_to_json(nav::generate_scenario(g, {from, to}));
        },
        py::arg("graph_json"), py::arg("from_node"), py::arg("to_node"),
        "Navigation scenario between two nodes (ids or URLs) as JSON.");

    m.def(
        "scenario_markdown",
        [](const std::string& scenario_json) {
            return nav::render_markdown(nav::scenario_from_json(scenario_json));
        },
        py::arg("scenario_json"));

    m.def(
        "explore_form",
        [](const std::string& bundle_dir, const std::string& url,
           const std::string& form_ref) {
            auto session = open_bundle(bundle_dir);
            return explore::stategraph_to_json(
                explore::explore(*session, url, parse_ref(form_ref)));
        },
        py::arg("bundle_dir"), py::arg("url"), py::arg("form_ref") = "form",
        "Explore a form's state graph; returns it as JSON.");

    m.def(
        "plan_scripts",
        [](const std::string& stategraph_json) {
            explore::StateGraph g =
                explore::stategraph_from_json(stategraph_json);
            std::vector<std::string> out;
            for (const auto& s :
                 script::plan_state_scripts(g, g.page_url, {})) {
                out.push_back(script::render_script(s));
            }
            return out;
        },
        py::arg("stategraph_json"),
        "One fill-and-submit script (JSON) per reachable state.");

    m.def(
        "run_scripts",
        [](const std::string& bundle_dir,
           const std::vector<std::string>& script_jsons) {
            auto session = open_bundle(bundle_dir);
            std::vector<script::RunResult> results;
            for (const auto& text : script_jsons) {
                script::TestScript s = script::script_from_json(text);
                script::RunResult r;
                r.script_id = s.id;
                r.form_id = s.form_source;
                r.records = script::run_script(s, *session);
                results.push_back(std::move(r));
            }
            return script::results_to_json(results);
        },
        py::arg("bundle_dir"), py::arg("script_jsons"),
        "Execute scripts against a simulator bundle; returns results JSON.");

    m.def(
        "compute_metrics",
        [](const std::string& results_json,
           const std::string& ground_truth_json) {
            return eval::report_to_json(eval::compute_metrics(
                script::results_from_json(results_json),
                manifests_from_json(ground_truth_json)));
        },
        py::arg("results_json"), py::arg("ground_truth_json") = "",
        "Micro/macro accuracy, coverage, and per-type counts as JSON.");

    m.def(
        "judge_offline",
        [](const std::map<std::string, double>& scores,
           const std::string& rubric_path) {
            eval::JudgeScore s = eval::score_from_values(
                scores, eval::load_rubric(rubric_path));
            return eval::judge_to_json(s);
        },
        py::arg("scores"), py::arg("rubric_path"),
        "Aggregate per-criterion scores against a rubric; returns JSON.");

    m.def(
        "run_pipeline",
        [](const std::string& config_json) {
            pipeline::PipelineResult r =
                pipeline::run_pipeline(pipeline::config_from_json(config_json));
            nlohmann::json j;
            j["run_dir"] = r.run_dir;
            j["findings"] = r.findings;
            j["report"] = nlohmann::json::parse(
                eval::report_to_json(r.report));
            return j.dump(2);
        },
        py::arg("config_json"),
        "crawl -> explore -> generate -> run -> evaluate; returns a summary "
        "JSON with run_dir, findings, and the metrics report.");
}
