#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "formnav/errors.hpp"
#include "formnav/pipeline.hpp"
#include "formnav/simulator.hpp"

using namespace formnav;
using namespace formnav::pipeline;
using formnav::sim::ConditionKind;
using formnav::sim::EffectOp;
using formnav::sim::ReactionManifest;
using formnav::sim::ReactionRule;
using formnav::sim::SiteBundle;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

sim::GroundTruthField gt_field(const std::string& name, dom::ControlType t,
                               bool visible = true) {
    sim::GroundTruthField f;
    f.name = name;
    f.control = t;
    f.visible_initially = visible;
    return f;
}

// two linked pages; the second carries a three-state dynamic form
SiteBundle mini_site() {
    SiteBundle b;
    b.pages["http://pipe.test/"] =
        "<html><head><title>Home</title></head><body>"
        "<a href='http://pipe.test/form'>Open form</a></body></html>";
    std::string form_html =
        "<html><head><title>Apply</title></head><body><form id=f>"
        "<select id=mode name=mode>"
        "<option value='none'>None</option>"
        "<option value='a'>A</option>"
        "<option value='b'>B</option>"
        "</select>"
        "<div id=suba style='display:none'><input name=a1></div>"
        "<div id=subb style='display:none'><input name=b1><input name=b2>"
        "</div></form></body></html>";
    b.pages["http://pipe.test/form"] = form_html;

    ReactionManifest m;
    auto rule = [](const std::string& v,
                   std::vector<std::pair<std::string, EffectOp>> fx) {
        ReactionRule r;
        r.trigger = {dom::RefStrategy::id, "mode"};
        r.condition = ConditionKind::value_equals;
        r.condition_value = v;
        r.effects = std::move(fx);
        return r;
    };
    m.rules.push_back(rule("a", {{"suba", EffectOp::show},
                                 {"subb", EffectOp::hide}}));
    m.rules.push_back(rule("b", {{"subb", EffectOp::show},
                                 {"suba", EffectOp::hide}}));
    m.rules.push_back(rule("none", {{"suba", EffectOp::hide},
                                    {"subb", EffectOp::hide}}));
    m.fields = {gt_field("mode", dom::ControlType::select_one),
                gt_field("a1", dom::ControlType::text, false),
                gt_field("b1", dom::ControlType::text, false),
                gt_field("b2", dom::ControlType::text, false)};
    m.state_count = sim::enumerate_states(form_html, m);
    b.manifests["http://pipe.test/form"] = m;
    return b;
}

// single page whose form has an unfillable required file input
SiteBundle findings_site() {
    SiteBundle b;
    b.pages["http://pipe.test/"] =
        "<html><head><title>Upload</title></head><body><form id=f>"
        "<input name=doc type=file required><input name=nm>"
        "</form></body></html>";
    ReactionManifest m;
    m.fields = {gt_field("doc", dom::ControlType::file),
                gt_field("nm", dom::ControlType::text)};
    b.manifests["http://pipe.test/"] = m;
    return b;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("formnav_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

PipelineConfig config_for(const SiteBundle& site, const TempDir& dir) {
    site.save_dir((dir.path / "bundle").string());
    PipelineConfig c;
    c.backend = "simulator";
    c.bundle_dir = (dir.path / "bundle").string();
    c.start_url = "http://pipe.test/";
    c.out_dir = (dir.path / "run").string();
    return c;
}

}  // namespace

TEST_CASE("pipeline config round trips through json") {
    PipelineConfig c;
    c.backend = "webdriver";
    c.endpoint = "http://driver:4444";
    c.fill_mode = "llm";
    c.crawl.max_pages = 7;
    c.explore.max_states = 5;
    c.metrics.include_hidden = true;
    c.include_file_fields = true;
    c.seed = 99;
    c.rubric_path = "rubric/v1.json";
    PipelineConfig back = config_from_json(config_to_json(c));
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(back.backend == "webdriver");
    CHECK(back.crawl.max_pages == 7);
    CHECK(back.explore.max_states == 5);
    CHECK(back.metrics.include_hidden);
    CHECK(back.seed == 99);
    CHECK_THROWS_AS(config_from_json("{"), SchemaViolation);
    CHECK_THROWS_AS(config_from_json(R"({"version": 2})"), SchemaViolation);
}

TEST_CASE("unknown backend fails validation before any stage") {
    TempDir dir("pl_badbackend");
    PipelineConfig c;
    c.backend = "selenium-grid";
    c.out_dir = (dir.path / "never").string();
    CHECK_THROWS_AS(run_pipeline(c), InvalidSpec);
    CHECK_FALSE(fs::exists(dir.path / "never"));

    PipelineConfig f;
    f.backend = "simulator";
    f.bundle_dir = "x";
    f.fill_mode = "dice";
    CHECK_THROWS_AS(validate_config(f), InvalidSpec);
    PipelineConfig missing;
    missing.backend = "simulator";
    CHECK_THROWS_AS(validate_config(missing), InvalidSpec);
}

TEST_CASE("full pipeline over the mini site writes a complete run dir") {
    TempDir dir("pl_full");
    PipelineConfig c = config_for(mini_site(), dir);
    PipelineResult r = run_pipeline(c);

    CHECK(r.stages.size() == 5);
    for (const auto& st : r.stages) CHECK(st.ok);
    CHECK(r.findings == 0);

    fs::path run(c.out_dir);
    for (const char* f : {"manifest.json", "graph.json", "results.json",
                          "report.json", "report.md", "per_type.csv",
                          "ground_truth.json"}) {
        CHECK(fs::exists(run / f));
    }
    CHECK_FALSE(fs::is_empty(run / "states"));
    // three reachable states -> three scripts
    int scripts = 0;
    for (const auto& e : fs::directory_iterator(run / "scripts")) {
        (void)e;
        ++scripts;
    }
    CHECK(scripts == 3);

    REQUIRE(r.report.micro_accuracy.has_value());
    CHECK(*r.report.micro_accuracy == 1.0);
    REQUIRE(r.report.coverage.has_value());
    CHECK(*r.report.coverage == 1.0);
}

TEST_CASE("rerunning with the same config reproduces report.json bytes") {
    TempDir dir("pl_det");
    PipelineConfig c = config_for(mini_site(), dir);
    run_pipeline(c);
    std::string first = slurp(fs::path(c.out_dir) / "report.json");
    std::string first_results = slurp(fs::path(c.out_dir) / "results.json");
    fs::remove_all(c.out_dir);
    run_pipeline(c);
    CHECK(slurp(fs::path(c.out_dir) / "report.json") == first);
    CHECK(slurp(fs::path(c.out_dir) / "results.json") == first_results);
}

TEST_CASE("re-running eval on a run's results reproduces its report") {
    TempDir dir("pl_reeval");
    PipelineConfig c = config_for(mini_site(), dir);
    run_pipeline(c);
    fs::path run(c.out_dir);
    auto results = script::load_results((run / "results.json").string());
    nlohmann::json gtruth =
        nlohmann::json::parse(slurp(run / "ground_truth.json"));
    std::map<std::string, sim::ReactionManifest> manifests;
    for (const auto& [form_id, m] : gtruth.at("forms").items()) {
        manifests[form_id] = sim::manifest_from_json(m.dump());
    }
    eval::MetricsReport again =
        eval::compute_metrics(results, manifests, c.metrics);
    CHECK(eval::report_to_json(again) == slurp(run / "report.json"));
}

TEST_CASE("failed interactions surface as findings, not crashes") {
    TempDir dir("pl_findings");
    PipelineConfig c = config_for(findings_site(), dir);
    PipelineResult r = run_pipeline(c);
    CHECK(r.findings == 1);  // required file field left unfilled
    for (const auto& st : r.stages) CHECK(st.ok);
    // the file field is excluded from the coverage denominator by default
    REQUIRE(r.report.coverage.has_value());
    CHECK(*r.report.coverage == 1.0);
    REQUIRE(r.report.micro_accuracy.has_value());
    CHECK(*r.report.micro_accuracy < 1.0);
}

TEST_CASE("make_session rejects unknown backends") {
    PipelineConfig c;
    c.backend = "puppeteer";
    CHECK_THROWS_AS(make_session(c), InvalidSpec);
}
