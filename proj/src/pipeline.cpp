#include "formnav/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "formnav/errors.hpp"
#include "formnav/jsonio.hpp"
#include "formnav/simulator.hpp"
#include "formnav/webdriver.hpp"

namespace formnav::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

std::string form_id_of(const std::string& page_url,
                       const dom::ElementRef& scope) {
    return page_url + "#" + dom::to_string(scope);
}

std::string slug_of(const std::string& s) {
    std::string out;
    for (char c : s) {
        out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    }
    if (out.size() > 80) out.resize(80);
    return out;
}

}  // namespace

std::string config_to_json(const PipelineConfig& c) {
    json j;
    j["version"] = 1;
    j["backend"] = c.backend;
    j["bundle_dir"] = c.bundle_dir;
    j["endpoint"] = c.endpoint;
    j["start_url"] = c.start_url;
    j["out_dir"] = c.out_dir;
    j["fill_mode"] = c.fill_mode;
    j["llm"] = json::parse(llm::llm_config_to_json(c.llm));
    j["crawl"] = {{"max_depth", c.crawl.max_depth},
                  {"max_pages", c.crawl.max_pages},
                  {"same_origin", c.crawl.same_origin}};
    j["explore"] = {{"max_states", c.explore.max_states},
                    {"max_depth", c.explore.max_depth},
                    {"debug_check_restores", c.explore.debug_check_restores}};
    j["metrics"] = {{"include_hidden", c.metrics.include_hidden},
                    {"include_file", c.metrics.include_file}};
    j["include_file_fields"] = c.include_file_fields;
    j["seed"] = c.seed;
    j["rubric_path"] = c.rubric_path;
    return j.dump(2);
}

PipelineConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("pipeline config: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported pipeline config version");
    }
    PipelineConfig c;
    c.backend = j.value("backend", "simulator");
    c.bundle_dir = j.value("bundle_dir", "");
    c.endpoint = j.value("endpoint", "");
    c.start_url = j.value("start_url", "");
    c.out_dir = j.value("out_dir", "run");
    c.fill_mode = j.value("fill_mode", "rules");
    if (j.contains("llm")) c.llm = llm::llm_config_from_json(j["llm"].dump());
    if (j.contains("crawl")) {
        c.crawl.max_depth = j["crawl"].value("max_depth", c.crawl.max_depth);
        c.crawl.max_pages = j["crawl"].value("max_pages", c.crawl.max_pages);
        c.crawl.same_origin =
            j["crawl"].value("same_origin", c.crawl.same_origin);
    }
    if (j.contains("explore")) {
        c.explore.max_states =
            j["explore"].value("max_states", c.explore.max_states);
        c.explore.max_depth =
            j["explore"].value("max_depth", c.explore.max_depth);
        c.explore.debug_check_restores = j["explore"].value(
            "debug_check_restores", c.explore.debug_check_restores);
    }
    if (j.contains("metrics")) {
        c.metrics.include_hidden =
            j["metrics"].value("include_hidden", false);
        c.metrics.include_file = j["metrics"].value("include_file", false);
    }
    c.include_file_fields = j.value("include_file_fields", false);
    c.seed = j.value("seed", 0ULL);
    c.rubric_path = j.value("rubric_path", "");
    return c;
}

PipelineConfig load_config(const std::string& path) {
    return config_from_json(read_file(path));
}

void validate_config(const PipelineConfig& c) {
    if (c.backend != "simulator" && c.backend != "webdriver") {
        throw InvalidSpec("unknown backend: " + c.backend);
    }
    if (c.fill_mode != "rules" && c.fill_mode != "llm") {
        throw InvalidSpec("unknown fill mode: " + c.fill_mode);
    }
    if (c.backend == "simulator" && c.bundle_dir.empty()) {
        throw InvalidSpec("simulator backend needs bundle_dir");
    }
    if (c.backend == "webdriver" && c.endpoint.empty()) {
        throw InvalidSpec("webdriver backend needs endpoint");
    }
    if (c.out_dir.empty()) throw InvalidSpec("out_dir must not be empty");
}

std::unique_ptr<Session> make_session(const PipelineConfig& c) {
    validate_config(c);
    if (c.backend == "simulator") {
        auto bundle = std::make_shared<const sim::SiteBundle>(
            sim::SiteBundle::load_dir(c.bundle_dir));
        return std::make_unique<sim::SimulatorSession>(std::move(bundle));
    }
    SessionConfig sc;
    sc.endpoint = c.endpoint;
    return std::make_unique<wd::WebDriverSession>(sc);
}

PipelineResult run_pipeline(const PipelineConfig& c) {
    validate_config(c);  // before any stage runs or any file is written

    PipelineResult result;
    result.run_dir = c.out_dir;
    fs::create_directories(fs::path(c.out_dir) / "states");
    fs::create_directories(fs::path(c.out_dir) / "scripts");

    std::string start_url = c.start_url;
    std::map<std::string, sim::ReactionManifest> ground_truth_by_page;
    if (c.backend == "simulator") {
        sim::SiteBundle bundle = sim::SiteBundle::load_dir(c.bundle_dir);
        if (start_url.empty() && !bundle.pages.empty()) {
            start_url = bundle.pages.begin()->first;
        }
        ground_truth_by_page = bundle.manifests;
    }
    if (start_url.empty()) throw InvalidSpec("no start_url and empty bundle");

    auto session = make_session(c);
    llm::LlmClient llm_client(c.llm);
    script::FillOptions fill;
    fill.mode = c.fill_mode == "llm" ? script::FillMode::llm
                                     : script::FillMode::rules;
    fill.llm = fill.mode == script::FillMode::llm ? &llm_client : nullptr;
    fill.include_file_fields = c.include_file_fields;

    // stage: crawl
    graph::TransitionGraph site;
    {
        StageStatus st{"crawl"};
        try {
            site = graph::crawl(*session, start_url, c.crawl);
            graph::save_graph(site,
                              (fs::path(c.out_dir) / "graph.json").string());
        } catch (const Error& e) {
            st.ok = false;
            st.error = e.what();
            result.stages.push_back(st);
            return result;  // nothing downstream has an input
        }
        result.stages.push_back(st);
    }

    // stage: explore every form on every crawled page
    struct ExploredForm {
        std::string form_id;
        std::string page_url;
        explore::StateGraph graph;
    };
    std::vector<ExploredForm> forms;
    {
        StageStatus st{"explore"};
        for (const auto& node : site.nodes) {
            if (!node.has_forms) continue;
            std::vector<dom::ElementRef> scopes;
            try {
                session->navigate(node.url);
                dom::HtmlDocument doc =
                    dom::parse_document(session->page_source());
                for (const auto& form : dom::extract_forms(doc)) {
                    scopes.push_back(form.root);
                }
            } catch (const Error& e) {
                st.ok = false;
                st.error += node.url + ": " + e.what() + "; ";
                continue;
            }
            for (const auto& scope : scopes) {
                ExploredForm f;
                f.page_url = node.url;
                f.form_id = form_id_of(node.url, scope);
                try {
                    f.graph = explore::explore(*session, node.url, scope,
                                               c.explore);
                } catch (const Error& e) {
                    st.ok = false;
                    st.error += f.form_id + ": " + e.what() + "; ";
                    continue;
                }
                explore::save_stategraph(
                    f.graph, (fs::path(c.out_dir) / "states" /
                              (slug_of(f.form_id) + ".json"))
                                 .string());
                forms.push_back(std::move(f));
            }
        }
        result.stages.push_back(st);
    }

    // stage: generate scripts per reachable state
    struct PlannedScript {
        std::string form_id;
        script::TestScript script;
    };
    std::vector<PlannedScript> scripts;
    {
        StageStatus st{"generate"};
        for (const auto& f : forms) {
            std::vector<script::TestScript> planned;
            try {
                planned = script::plan_state_scripts(f.graph, f.page_url,
                                                     fill);
            } catch (const Error& e) {
                st.ok = false;
                st.error += f.form_id + ": " + e.what() + "; ";
                continue;
            }
            for (auto& s : planned) {
                s.id = slug_of(f.form_id) + "-" + s.id;
                script::save_script(
                    s, (fs::path(c.out_dir) / "scripts" / (s.id + ".json"))
                           .string());
                scripts.push_back({f.form_id, std::move(s)});
            }
        }
        result.stages.push_back(st);
    }

    // stage: run
    std::vector<script::RunResult> runs;
    {
        StageStatus st{"run"};
        for (const auto& p : scripts) {
            script::RunResult r;
            r.script_id = p.script.id;
            r.form_id = p.form_id;
            try {
                r.records = script::run_script(p.script, *session);
            } catch (const Error& e) {
                st.ok = false;
                st.error += p.script.id + ": " + e.what() + "; ";
                continue;
            }
            for (const auto& rec : r.records) {
                if (!rec.success) ++result.findings;
            }
            runs.push_back(std::move(r));
        }
        script::save_results(
            runs, (fs::path(c.out_dir) / "results.json").string());
        result.stages.push_back(st);
    }

    // stage: evaluate
    {
        StageStatus st{"evaluate"};
        std::map<std::string, sim::ReactionManifest> ground_truth;
        json gt_json;
        gt_json["version"] = 1;
        gt_json["forms"] = json::object();
        for (const auto& f : forms) {
            auto it = ground_truth_by_page.find(f.page_url);
            if (it == ground_truth_by_page.end()) continue;
            ground_truth[f.form_id] = it->second;
            gt_json["forms"][f.form_id] =
                json::parse(sim::manifest_to_json(it->second));
        }
        write_file(fs::path(c.out_dir) / "ground_truth.json",
                   gt_json.dump(2));
        result.report = eval::compute_metrics(runs, ground_truth, c.metrics);
        write_file(fs::path(c.out_dir) / "report.json",
                   eval::report_to_json(result.report));
        write_file(fs::path(c.out_dir) / "report.md",
                   eval::render_report_markdown(result.report));
        write_file(fs::path(c.out_dir) / "per_type.csv",
                   eval::per_type_csv(result.report));
        result.stages.push_back(st);
    }

    // run manifest: enough to re-execute and to re-evaluate
    json manifest;
    manifest["version"] = 1;
    manifest["config"] = json::parse(config_to_json(c));
    manifest["start_url"] = start_url;
    manifest["n_forms"] = forms.size();
    manifest["n_scripts"] = scripts.size();
    manifest["findings"] = result.findings;
    manifest["stages"] = json::array();
    for (const auto& st : result.stages) {
        manifest["stages"].push_back(
            {{"name", st.name}, {"ok", st.ok}, {"error", st.error}});
    }
    write_file(fs::path(c.out_dir) / "manifest.json", manifest.dump(2));
    return result;
}

}  // namespace formnav::pipeline
