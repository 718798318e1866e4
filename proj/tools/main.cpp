// formnav command-line interface.
//
// Exit codes: 0 success, 1 findings (unreachable destination or failed
// interactions), 2 usage/config error, 3 backend failure.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
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
#include "formnav/webdriver.hpp"

namespace fs = std::filesystem;
using namespace formnav;

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kUsage = 2;
constexpr int kBackend = 3;

// "id=f", "css=#signup", "name=email", "xpath=//form"; bare text is css
dom::ElementRef parse_ref(const std::string& text) {
    dom::ElementRef r;
    size_t eq = text.find('=');
    if (eq != std::string::npos) {
        std::string strat = text.substr(0, eq);
        std::string value = text.substr(eq + 1);
        if (strat == "id") return {dom::RefStrategy::id, value};
        if (strat == "css") return {dom::RefStrategy::css, value};
        if (strat == "name") return {dom::RefStrategy::name, value};
        if (strat == "xpath") return {dom::RefStrategy::xpath, value};
    }
    r.strategy = dom::RefStrategy::css;
    r.value = text;
    return r;
}

struct BackendOpts {
    std::string backend = "simulator";
    std::string bundle_dir;
    std::string endpoint;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--backend", backend, "simulator or webdriver")
            ->check(CLI::IsMember({"simulator", "webdriver"}));
        cmd->add_option("--bundle", bundle_dir,
                        "site bundle directory (simulator backend)");
        cmd->add_option("--endpoint", endpoint,
                        "remote driver URL (webdriver backend)");
    }

    std::unique_ptr<Session> open() const {
        pipeline::PipelineConfig c;
        c.backend = backend;
        c.bundle_dir = bundle_dir;
        c.endpoint = endpoint;
        return pipeline::make_session(c);
    }
};

int classify(const Error& e) {
    if (dynamic_cast<const InvalidSpec*>(&e) ||
        dynamic_cast<const SchemaViolation*>(&e) ||
        dynamic_cast<const IoError*>(&e) ||
        dynamic_cast<const UnknownDialect*>(&e) ||
        dynamic_cast<const UnknownNode*>(&e) ||
        dynamic_cast<const UnsupportedField*>(&e) ||
        dynamic_cast<const LengthMismatch*>(&e) ||
        dynamic_cast<const ScopeNotFound*>(&e) ||
        dynamic_cast<const FormNotFound*>(&e)) {
        return kUsage;
    }
    return kBackend;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
}

llm::LlmConfig llm_config_or_stub(const std::string& path) {
    if (path.empty()) return llm::LlmConfig{};
    return llm::load_llm_config(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"formnav: graph-based web navigation and form test "
                 "generation"};
    app.require_subcommand(1);
    int exit_code = kOk;

    // ---- crawl ----------------------------------------------------------
    auto* crawl = app.add_subcommand(
        "crawl", "Build the screen transition graph of a site");
    {
        auto opts = std::make_shared<BackendOpts>();
        auto start = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("graph.json");
        auto limits = std::make_shared<graph::CrawlLimits>();
        opts->add_to(crawl);
        crawl->add_option("--start", *start, "start URL")->required();
        crawl->add_option("--out", *out, "output graph file");
        crawl->add_option("--max-pages", limits->max_pages);
        crawl->add_option("--max-depth", limits->max_depth);
        crawl->add_flag("--all-origins",
                        [limits](size_t) { limits->same_origin = false; },
                        "follow links to other origins");
        crawl->callback([=, &exit_code] {
            exit_code = guarded([&] {
                auto session = opts->open();
                graph::TransitionGraph g =
                    graph::crawl(*session, *start, *limits);
                graph::save_graph(g, *out);
                std::cout << "crawled " << g.nodes.size() << " pages, "
                          << g.edges.size() << " transitions -> " << *out
                          << "\n";
                return kOk;
            });
        });
    }

    // ---- nav-test -------------------------------------------------------
    auto* nav_test = app.add_subcommand(
        "nav-test", "Generate a navigation test scenario between two pages");
    {
        auto graph_path = std::make_shared<std::string>();
        auto from = std::make_shared<std::string>();
        auto to = std::make_shared<std::string>();
        auto llm_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("scenario.json");
        auto md = std::make_shared<std::string>();
        nav_test->add_option("--graph", *graph_path, "transition graph file")
            ->required();
        nav_test->add_option("--from", *from, "start node id or URL")
            ->required();
        nav_test->add_option("--to", *to, "destination node id or URL")
            ->required();
        nav_test->add_option("--llm", *llm_path,
                             "LLM config for action phrasing (omit for "
                             "deterministic templates)");
        nav_test->add_option("--out", *out, "scenario output file");
        nav_test->add_option("--markdown", *md, "also render markdown here");
        nav_test->callback([=, &exit_code] {
            exit_code = guarded([&] {
                graph::TransitionGraph g = graph::load_graph(*graph_path);
                std::unique_ptr<llm::LlmClient> client;
                if (!llm_path->empty()) {
                    client = std::make_unique<llm::LlmClient>(
                        llm::load_llm_config(*llm_path));
                }
                nav::NavigationScenario s =
                    nav::generate_scenario(g, {*from, *to}, client.get());
                nav::save_scenario(s, *out);
                if (!md->empty()) {
                    std::ofstream o(*md, std::ios::binary);
                    if (!o) throw IoError("cannot write " + *md);
                    o << nav::render_markdown(s);
                }
                if (s.unreachable) {
                    std::cout << "finding: " << s.finding << "\n";
                    return kFindings;
                }
                std::cout << "scenario with " << s.steps.size()
                          << " steps -> " << *out << "\n";
                return kOk;
            });
        });
    }

    // ---- form-explore ---------------------------------------------------
    auto* form_explore = app.add_subcommand(
        "form-explore", "Explore a form's state graph");
    {
        auto opts = std::make_shared<BackendOpts>();
        auto url = std::make_shared<std::string>();
        auto form = std::make_shared<std::string>("css=form");
        auto out = std::make_shared<std::string>("states.json");
        auto limits = std::make_shared<explore::ExploreLimits>();
        opts->add_to(form_explore);
        form_explore->add_option("--url", *url, "page URL")->required();
        form_explore->add_option(
            "--form", *form, "form scope, e.g. id=f or css=form#signup");
        form_explore->add_option("--out", *out, "state graph output file");
        form_explore->add_option("--max-states", limits->max_states);
        form_explore->add_option("--max-depth", limits->max_depth);
        form_explore->add_flag("--debug-restores",
                               limits->debug_check_restores,
                               "verify fingerprints after every backtrack");
        form_explore->callback([=, &exit_code] {
            exit_code = guarded([&] {
                auto session = opts->open();
                explore::ExploreStats stats;
                explore::StateGraph g = explore::explore(
                    *session, *url, parse_ref(*form), *limits, &stats);
                explore::save_stategraph(g, *out);
                std::cout << g.states.size() << " states, "
                          << g.edges.size() << " transitions ("
                          << stats.probes << " probes) -> " << *out << "\n";
                for (const auto& w : g.warnings) {
                    std::cerr << "warning: " << w << "\n";
                }
                if (limits->debug_check_restores &&
                    stats.restore_mismatches > 0) {
                    std::cout << "finding: " << stats.restore_mismatches
                              << " restore mismatches\n";
                    return kFindings;
                }
                return kOk;
            });
        });
    }

    // ---- form-test ------------------------------------------------------
    auto* form_test = app.add_subcommand(
        "form-test", "Generate fill-and-submit scripts from a state graph");
    {
        auto states = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("scripts");
        auto fill = std::make_shared<std::string>("rules");
        auto llm_path = std::make_shared<std::string>();
        auto dialect = std::make_shared<std::string>("native-json");
        auto include_file = std::make_shared<bool>(false);
        form_test->add_option("--states", *states, "state graph file")
            ->required();
        form_test->add_option("--out", *out, "output directory");
        form_test->add_option("--fill", *fill, "rules or llm")
            ->check(CLI::IsMember({"rules", "llm"}));
        form_test->add_option("--llm", *llm_path, "LLM config for llm fill");
        form_test->add_option("--dialect", *dialect,
                              "native-json or webdriver-text");
        form_test->add_flag("--include-file", *include_file,
                            "also fill file inputs");
        form_test->callback([=, &exit_code] {
            exit_code = guarded([&] {
                explore::StateGraph g = explore::load_stategraph(*states);
                llm::LlmClient client(llm_config_or_stub(*llm_path));
                script::FillOptions options;
                options.mode = *fill == "llm" ? script::FillMode::llm
                                              : script::FillMode::rules;
                options.llm =
                    options.mode == script::FillMode::llm ? &client : nullptr;
                options.include_file_fields = *include_file;
                auto scripts =
                    script::plan_state_scripts(g, g.page_url, options);
                fs::create_directories(*out);
                for (const auto& s : scripts) {
                    script::save_script(
                        s, (fs::path(*out) / (s.id + ".json")).string());
                    if (*dialect != "native-json") {
                        std::ofstream o(fs::path(*out) / (s.id + ".txt"),
                                        std::ios::binary);
                        o << script::render_script(s, *dialect);
                    }
                }
                std::cout << scripts.size() << " scripts -> " << *out << "\n";
                return kOk;
            });
        });
    }

    // ---- run ------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Execute test scripts");
    {
        auto opts = std::make_shared<BackendOpts>();
        auto scripts_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("results.json");
        opts->add_to(run);
        run->add_option("--scripts", *scripts_path,
                        "script file or directory")
            ->required();
        run->add_option("--out", *out, "results output file");
        run->callback([=, &exit_code] {
            exit_code = guarded([&] {
                std::vector<std::string> files;
                if (fs::is_directory(*scripts_path)) {
                    for (const auto& e :
                         fs::directory_iterator(*scripts_path)) {
                        if (e.path().extension() == ".json") {
                            files.push_back(e.path().string());
                        }
                    }
                    std::sort(files.begin(), files.end());
                } else {
                    files.push_back(*scripts_path);
                }
                if (files.empty()) throw InvalidSpec("no scripts found");
                auto session = opts->open();
                std::vector<script::RunResult> results;
                int failures = 0;
                for (const auto& f : files) {
                    script::TestScript s = script::load_script(f);
                    script::RunResult r;
                    r.script_id = s.id;
                    r.form_id = s.form_source;
                    r.records = script::run_script(s, *session);
                    for (const auto& rec : r.records) {
                        if (!rec.success) ++failures;
                    }
                    results.push_back(std::move(r));
                }
                script::save_results(results, *out);
                std::cout << results.size() << " scripts, " << failures
                          << " failed interactions -> " << *out << "\n";
                return failures > 0 ? kFindings : kOk;
            });
        });
    }

    // ---- bench-gen ------------------------------------------------------
    auto* bench = app.add_subcommand(
        "bench-gen", "Generate the synthetic form benchmark");
    {
        auto out = std::make_shared<std::string>();
        auto config = std::make_shared<bench::BenchmarkConfig>();
        bench->add_option("--out", *out, "output directory")->required();
        bench->add_option("--simple", config->simple_count,
                          "number of simple forms");
        bench->add_option("--dynamic", config->dynamic_count,
                          "number of dynamic forms");
        bench->add_option("--seed", config->seed);
        bench->callback([=, &exit_code] {
            exit_code = guarded([&] {
                bench::generate_benchmark(*out, *config);
                std::cout << config->simple_count << " simple + "
                          << config->dynamic_count << " dynamic forms -> "
                          << *out << "\n";
                return kOk;
            });
        });
    }

    // ---- eval -----------------------------------------------------------
    auto* eval_cmd = app.add_subcommand(
        "eval", "Compute metrics from run results");
    {
        auto results_path = std::make_shared<std::string>();
        auto manifests_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>("report.json");
        auto md = std::make_shared<std::string>();
        auto csv = std::make_shared<std::string>();
        auto options = std::make_shared<eval::MetricsOptions>();
        eval_cmd->add_option("--results", *results_path, "results.json")
            ->required();
        eval_cmd->add_option(
            "--manifests", *manifests_path,
            "ground_truth.json or a directory of manifest files");
        eval_cmd->add_option("--out", *out, "report output file");
        eval_cmd->add_option("--md", *md, "also render markdown here");
        eval_cmd->add_option("--csv", *csv, "also write per-type csv here");
        eval_cmd->add_flag("--include-hidden", options->include_hidden,
                           "count hidden fields in coverage");
        eval_cmd->add_flag("--include-file", options->include_file,
                           "count file fields in coverage");
        eval_cmd->callback([=, &exit_code] {
            exit_code = guarded([&] {
                auto results = script::load_results(*results_path);
                std::map<std::string, sim::ReactionManifest> manifests;
                if (!manifests_path->empty()) {
                    if (fs::is_directory(*manifests_path)) {
                        for (const auto& e :
                             fs::directory_iterator(*manifests_path)) {
                            if (e.path().extension() != ".json") continue;
                            std::ifstream in(e.path(), std::ios::binary);
                            std::stringstream ss;
                            ss << in.rdbuf();
                            manifests[e.path().stem().string()] =
                                sim::manifest_from_json(ss.str());
                        }
                    } else {
                        std::ifstream in(*manifests_path, std::ios::binary);
                        if (!in) {
                            throw IoError("cannot read " + *manifests_path);
                        }
                        std::stringstream ss;
                        ss << in.rdbuf();
                        nlohmann::json j = nlohmann::json::parse(ss.str());
                        for (const auto& [form_id, m] :
                             j.at("forms").items()) {
                            manifests[form_id] =
                                sim::manifest_from_json(m.dump());
                        }
                    }
                }
                eval::MetricsReport report =
                    eval::compute_metrics(results, manifests, *options);
                std::ofstream o(*out, std::ios::binary);
                if (!o) throw IoError("cannot write " + *out);
                o << eval::report_to_json(report);
                if (!md->empty()) {
                    std::ofstream f(*md, std::ios::binary);
                    f << eval::render_report_markdown(report);
                }
                if (!csv->empty()) {
                    std::ofstream f(*csv, std::ios::binary);
                    f << eval::per_type_csv(report);
                }
                if (report.micro_accuracy && report.macro_accuracy &&
                    report.coverage) {
                    std::cout << eval::format_metrics_row(
                                     *report.micro_accuracy,
                                     *report.macro_accuracy,
                                     *report.coverage)
                              << "\n";
                } else {
                    std::cout << "no complete metrics (empty input or no "
                                 "ground truth)\n";
                }
                return kOk;
            });
        });
    }

    // ---- judge ----------------------------------------------------------
    auto* judge = app.add_subcommand(
        "judge", "Score a navigation scenario against the rubric");
    {
        auto scenario_path = std::make_shared<std::string>();
        auto rubric_path = std::make_shared<std::string>("rubric/v1.json");
        auto llm_path = std::make_shared<std::string>();
        auto offline_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        judge->add_option("--scenario", *scenario_path, "scenario.json")
            ->required();
        judge->add_option("--rubric", *rubric_path, "rubric file");
        auto* llm_opt =
            judge->add_option("--llm", *llm_path, "LLM judge config");
        judge->add_option("--offline", *offline_path,
                          "criterion scores json (no network)")
            ->excludes(llm_opt);
        judge->add_option("--out", *out, "score output file");
        judge->callback([=, &exit_code] {
            exit_code = guarded([&] {
                eval::Rubric rubric = eval::load_rubric(*rubric_path);
                eval::JudgeScore score;
                if (!offline_path->empty()) {
                    score = eval::load_offline_scores(*offline_path, rubric);
                } else if (!llm_path->empty()) {
                    nav::NavigationScenario s =
                        nav::load_scenario(*scenario_path);
                    llm::LlmClient client(llm::load_llm_config(*llm_path));
                    score = eval::judge_scenario(s, client, rubric);
                } else {
                    throw InvalidSpec("judge needs --llm or --offline");
                }
                if (!out->empty()) {
                    std::ofstream o(*out, std::ios::binary);
                    if (!o) throw IoError("cannot write " + *out);
                    o << eval::judge_to_json(score);
                }
                if (score.scored) {
                    std::cout << "final: " << eval::render_final(score)
                              << "\n";
                    return kOk;
                }
                std::cout << "unscored: " << score.warning << "\n";
                return kFindings;
            });
        });
    }

    // ---- pipeline -------------------------------------------------------
    auto* pipe = app.add_subcommand(
        "pipeline", "Run crawl, explore, generate, run, and evaluate");
    {
        auto config_path = std::make_shared<std::string>();
        auto c = std::make_shared<pipeline::PipelineConfig>();
        auto overrides = std::make_shared<pipeline::PipelineConfig>();
        pipe->add_option("--config", *config_path, "pipeline config json");
        auto* b = pipe->add_option("--backend", overrides->backend);
        auto* bd = pipe->add_option("--bundle", overrides->bundle_dir);
        auto* ep = pipe->add_option("--endpoint", overrides->endpoint);
        auto* su = pipe->add_option("--start", overrides->start_url);
        auto* od = pipe->add_option("--out", overrides->out_dir);
        auto* fm = pipe->add_option("--fill", overrides->fill_mode);
        auto* sd = pipe->add_option("--seed", overrides->seed);
        pipe->callback([=, &exit_code] {
            exit_code = guarded([&] {
                if (!config_path->empty()) {
                    *c = pipeline::load_config(*config_path);
                }
                // precedence: command line > config file > defaults
                if (b->count()) c->backend = overrides->backend;
                if (bd->count()) c->bundle_dir = overrides->bundle_dir;
                if (ep->count()) c->endpoint = overrides->endpoint;
                if (su->count()) c->start_url = overrides->start_url;
                if (od->count()) c->out_dir = overrides->out_dir;
                if (fm->count()) c->fill_mode = overrides->fill_mode;
                if (sd->count()) c->seed = overrides->seed;
                pipeline::PipelineResult r = pipeline::run_pipeline(*c);
                for (const auto& st : r.stages) {
                    std::cout << st.name << ": "
                              << (st.ok ? "ok" : "errors") << "\n";
                    if (!st.ok) std::cerr << "  " << st.error << "\n";
                }
                if (r.report.micro_accuracy && r.report.macro_accuracy &&
                    r.report.coverage) {
                    std::cout << eval::format_metrics_row(
                                     *r.report.micro_accuracy,
                                     *r.report.macro_accuracy,
                                     *r.report.coverage)
                              << "\n";
                }
                std::cout << "run dir: " << r.run_dir << "\n";
                bool stage_failed = std::any_of(
                    r.stages.begin(), r.stages.end(),
                    [](const pipeline::StageStatus& s) { return !s.ok; });
                if (stage_failed) return kBackend;
                if (r.findings > 0) {
                    std::cout << "findings: " << r.findings
                              << " failed interactions\n";
                    return kFindings;
                }
                return kOk;
            });
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    return exit_code;
}
