#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "formnav/form_script.hpp"
#include "formnav/llm.hpp"
#include "formnav/nav_scenario.hpp"
#include "formnav/simulator.hpp"

namespace formnav::eval {

struct TypeCounts {
    int success = 0;
    int fail = 0;

    bool operator==(const TypeCounts&) const = default;
};

struct MetricsReport {
    // null when there is nothing to divide by, never NaN
    std::optional<double> micro_accuracy;
    std::optional<double> macro_accuracy;
    std::optional<double> coverage;
    std::map<std::string, TypeCounts> per_type;  // control name -> counts
    int n_test_cases = 0;
    int n_interactions = 0;
};

struct MetricsOptions {
    // coverage denominator flags: hidden and file fields are excluded from
    // the per-form field count unless switched on
    bool include_hidden = false;
    bool include_file = false;
};

// results: one entry per executed test case; ground_truth: form_id -> manifest
MetricsReport compute_metrics(
    const std::vector<script::RunResult>& results,
    const std::map<std::string, sim::ReactionManifest>& ground_truth,
    const MetricsOptions& options = {});

std::map<std::string, TypeCounts> per_type_breakdown(
    const std::vector<script::RunResult>& results);

// "95.17 / 94.74 / 69.49%"  (micro / macro / coverage as percentages)
std::string format_metrics_row(double micro, double macro, double coverage);
// inverse of format_metrics_row; throws SchemaViolation on malformed input
void parse_metrics_row(const std::string& row, double& micro, double& macro,
                       double& coverage);

std::string report_to_json(const MetricsReport& r);
MetricsReport report_from_json(const std::string& text);
std::string render_report_markdown(const MetricsReport& r);
std::string per_type_csv(const MetricsReport& r);  // plot-data file

// ---- scenario judging -------------------------------------------------

struct RubricCriterion {
    std::string id;
    std::string title;
    std::string description;
};

struct Rubric {
    int version = 1;
    double min_score = 0.0;
    double max_score = 10.0;
    std::vector<RubricCriterion> criteria;
};

Rubric rubric_from_json(const std::string& text);
Rubric load_rubric(const std::string& path);

struct JudgeScore {
    std::map<std::string, double> criteria;  // criterion id -> score
    double final_score = 0.0;                // arithmetic mean
    std::string judge_model;
    int rubric_version = 1;
    bool scored = false;
    std::string warning;  // set when unscored
};

// Two-decimal rendering of the final score, e.g. 7.602 -> "7.60".
std::string render_final(const JudgeScore& s);

std::string judge_prompt(const nav::NavigationScenario& scenario,
                         const Rubric& rubric);

// Parse retry on malformed output happens once; a second failure yields an
// unscored result with a warning instead of an exception.
JudgeScore judge_scenario(const nav::NavigationScenario& scenario,
                          llm::LlmClient& client, const Rubric& rubric);

// Offline mode: criterion scores supplied directly or from a JSON file.
JudgeScore score_from_values(const std::map<std::string, double>& values,
                             const Rubric& rubric,
                             const std::string& judge_model = "offline");
JudgeScore load_offline_scores(const std::string& path, const Rubric& rubric);

std::string judge_to_json(const JudgeScore& s);
JudgeScore judge_from_json(const std::string& text);

}  // namespace formnav::eval
