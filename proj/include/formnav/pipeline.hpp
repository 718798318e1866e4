#pragma once

#include <memory>
#include <string>
#include <vector>

#include "formnav/backend.hpp"
#include "formnav/evaluator.hpp"
#include "formnav/form_explorer.hpp"
#include "formnav/form_script.hpp"
#include "formnav/llm.hpp"
#include "formnav/site_graph.hpp"

namespace formnav::pipeline {

struct PipelineConfig {
    std::string backend = "simulator";  // "simulator" | "webdriver"
    std::string bundle_dir;             // simulator: SiteBundle directory
    std::string endpoint;               // webdriver: remote driver URL
    std::string start_url;              // empty: first page of the bundle
    std::string out_dir = "run";
    std::string fill_mode = "rules";    // "rules" | "llm"
    llm::LlmConfig llm;                 // stub by default
    graph::CrawlLimits crawl;
    explore::ExploreLimits explore;
    eval::MetricsOptions metrics;
    bool include_file_fields = false;
    unsigned long long seed = 0;
    std::string rubric_path;            // optional, recorded in the manifest
};

std::string config_to_json(const PipelineConfig& c);
PipelineConfig config_from_json(const std::string& text);
PipelineConfig load_config(const std::string& path);

// Validates choices that no stage can recover from (unknown backend or fill
// mode, missing bundle/endpoint). Throws InvalidSpec.
void validate_config(const PipelineConfig& c);

struct StageStatus {
    std::string name;
    bool ok = true;
    std::string error;  // failed inputs recorded here, run continues
};

struct PipelineResult {
    std::string run_dir;
    std::vector<StageStatus> stages;
    int findings = 0;  // failed interactions across all executed scripts
    eval::MetricsReport report;
};

// crawl -> explore -> generate -> run -> evaluate. Writes into c.out_dir:
// manifest.json, graph.json, states/, scripts/, results.json, report.json,
// report.md, per_type.csv, ground_truth.json.
PipelineResult run_pipeline(const PipelineConfig& c);

// Session factory shared with the CLI; throws InvalidSpec on unknown backend.
std::unique_ptr<Session> make_session(const PipelineConfig& c);

}  // namespace formnav::pipeline
