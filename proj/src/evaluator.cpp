#include "formnav/evaluator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "formnav/errors.hpp"
#include "formnav/jsonio.hpp"

namespace formnav::eval {

using json = nlohmann::json;

namespace {

std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int coverage_denominator(const sim::ReactionManifest& m,
                         const MetricsOptions& options,
                         std::set<std::string>* eligible) {
    int n = 0;
    for (const auto& f : m.fields) {
        if (f.control == dom::ControlType::hidden && !options.include_hidden) {
            continue;
        }
        if (f.control == dom::ControlType::file && !options.include_file) {
            continue;
        }
        ++n;
        if (eligible) eligible->insert(f.name);
    }
    return n;
}

bool parse_score_line(const std::string& line, const std::string& id,
                      double& out) {
    size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) return false;
    if (line.compare(b, id.size(), id) != 0) return false;
    size_t after = b + id.size();
    after = line.find_first_not_of(" \t", after);
    if (after == std::string::npos || line[after] != ':') return false;
    try {
        size_t used = 0;
        out = std::stod(line.substr(after + 1), &used);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

bool parse_judge_reply(const std::string& reply, const Rubric& rubric,
                       std::map<std::string, double>& scores) {
    scores.clear();
    std::istringstream lines(reply);
    std::string line;
    while (std::getline(lines, line)) {
        for (const auto& c : rubric.criteria) {
            double v;
            if (!scores.count(c.id) && parse_score_line(line, c.id, v)) {
                if (v < rubric.min_score || v > rubric.max_score) return false;
                scores[c.id] = v;
            }
        }
    }
    return scores.size() == rubric.criteria.size();
}

double mean_of(const std::map<std::string, double>& scores) {
    double sum = 0;
    for (const auto& [_, v] : scores) sum += v;
    return scores.empty() ? 0.0 : sum / static_cast<double>(scores.size());
}

}  // namespace

MetricsReport compute_metrics(
    const std::vector<script::RunResult>& results,
    const std::map<std::string, sim::ReactionManifest>& ground_truth,
    const MetricsOptions& options) {
    MetricsReport r;
    r.n_test_cases = static_cast<int>(results.size());

    long total = 0;
    long successes = 0;
    double per_case_sum = 0;
    int cases_with_records = 0;
    std::map<std::string, std::set<std::string>> touched_by_form;

    for (const auto& res : results) {
        long case_total = static_cast<long>(res.records.size());
        long case_ok = 0;
        for (const auto& rec : res.records) {
            std::string control = dom::control_name(rec.control);
            if (rec.success) {
                ++case_ok;
                ++r.per_type[control].success;
                if (!rec.field_name.empty()) {
                    touched_by_form[res.form_id].insert(rec.field_name);
                }
            } else {
                ++r.per_type[control].fail;
            }
        }
        total += case_total;
        successes += case_ok;
        if (case_total > 0) {
            per_case_sum += static_cast<double>(case_ok) /
                            static_cast<double>(case_total);
            ++cases_with_records;
        }
    }

    r.n_interactions = static_cast<int>(total);
    if (total > 0) {
        r.micro_accuracy = static_cast<double>(successes) /
                           static_cast<double>(total);
    }
    if (cases_with_records > 0) {
        r.macro_accuracy = per_case_sum / cases_with_records;
    }

    long denom = 0;
    long covered = 0;
    std::set<std::string> forms_seen;
    for (const auto& res : results) forms_seen.insert(res.form_id);
    for (const auto& form_id : forms_seen) {
        auto it = ground_truth.find(form_id);
        if (it == ground_truth.end()) continue;
        std::set<std::string> eligible;
        denom += coverage_denominator(it->second, options, &eligible);
        auto touched = touched_by_form.find(form_id);
        if (touched != touched_by_form.end()) {
            for (const auto& name : touched->second) {
                if (eligible.count(name)) ++covered;
            }
        }
    }
    if (denom > 0) {
        r.coverage = static_cast<double>(covered) /
                     static_cast<double>(denom);
    }
    return r;
}

std::map<std::string, TypeCounts> per_type_breakdown(
    const std::vector<script::RunResult>& results) {
    std::map<std::string, TypeCounts> out;
    for (const auto& res : results) {
        for (const auto& rec : res.records) {
            TypeCounts& t = out[dom::control_name(rec.control)];
            if (rec.success) ++t.success; else ++t.fail;
        }
    }
    return out;
}

std::string format_metrics_row(double micro, double macro, double coverage) {
    return two_decimals(micro * 100) + " / " + two_decimals(macro * 100) +
           " / " + two_decimals(coverage * 100) + "%";
}

void parse_metrics_row(const std::string& row, double& micro, double& macro,
                       double& coverage) {
    double a, b, c;
    char pct = 0;
    int tail = -1;
    if (std::sscanf(row.c_str(), "%lf / %lf / %lf%c%n", &a, &b, &c, &pct,
                    &tail) != 4 ||
        pct != '%' || tail != static_cast<int>(row.size())) {
        throw SchemaViolation("metrics row: " + row);
    }
    micro = a / 100.0;
    macro = b / 100.0;
    coverage = c / 100.0;
}

std::string report_to_json(const MetricsReport& r) {
    json j;
    j["version"] = 1;
    j["n_test_cases"] = r.n_test_cases;
    j["n_interactions"] = r.n_interactions;
    auto frac = [](const std::optional<double>& v) {
        return v ? json(*v) : json(nullptr);
    };
    j["micro_accuracy"] = frac(r.micro_accuracy);
    j["macro_accuracy"] = frac(r.macro_accuracy);
    j["coverage"] = frac(r.coverage);
    j["per_type"] = json::object();
    for (const auto& [control, t] : r.per_type) {
        j["per_type"][control] = {{"success", t.success}, {"fail", t.fail}};
    }
    return j.dump(2);
}

MetricsReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("report parse: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported report schema version");
    }
    MetricsReport r;
    r.n_test_cases = j.value("n_test_cases", 0);
    r.n_interactions = j.value("n_interactions", 0);
    auto frac = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        return j[key].get<double>();
    };
    r.micro_accuracy = frac("micro_accuracy");
    r.macro_accuracy = frac("macro_accuracy");
    r.coverage = frac("coverage");
    const json per_type = j.value("per_type", json::object());
    for (const auto& [control, t] : per_type.items()) {
        r.per_type[control] = {t.value("success", 0), t.value("fail", 0)};
    }
    return r;
}

std::string render_report_markdown(const MetricsReport& r) {
    std::ostringstream out;
    out << "# Run report\n\n";
    out << "Test cases: " << r.n_test_cases
        << "  \nInteractions: " << r.n_interactions << "\n\n";
    out << "| micro / macro / coverage |\n|---|\n";
    if (r.micro_accuracy && r.macro_accuracy && r.coverage) {
        out << "| "
            << format_metrics_row(*r.micro_accuracy, *r.macro_accuracy,
                                  *r.coverage)
            << " |\n";
    } else {
        out << "| n/a |\n";
    }
    if (!r.per_type.empty()) {
        out << "\n| control | success | fail |\n|---|---|---|\n";
        for (const auto& [control, t] : r.per_type) {
            out << "| " << control << " | " << t.success << " | " << t.fail
                << " |\n";
        }
    }
    return out.str();
}

std::string per_type_csv(const MetricsReport& r) {
    std::string out = "control,success,fail\n";
    for (const auto& [control, t] : r.per_type) {
        out += control + "," + std::to_string(t.success) + "," +
               std::to_string(t.fail) + "\n";
    }
    return out;
}

Rubric rubric_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("rubric parse: ") + e.what());
    }
    Rubric r;
    r.version = j.value("version", 1);
    if (j.contains("scale")) {
        r.min_score = j["scale"].value("min", 0.0);
        r.max_score = j["scale"].value("max", 10.0);
    }
    std::set<std::string> ids;
    for (const auto& jc : j.value("criteria", json::array())) {
        RubricCriterion c;
        c.id = jc.at("id").get<std::string>();
        c.title = jc.value("title", c.id);
        c.description = jc.at("description").get<std::string>();
        if (!ids.insert(c.id).second) {
            throw SchemaViolation("duplicate rubric criterion: " + c.id);
        }
        r.criteria.push_back(std::move(c));
    }
    if (r.criteria.empty()) throw SchemaViolation("rubric has no criteria");
    if (r.min_score >= r.max_score) throw SchemaViolation("rubric scale");
    return r;
}

Rubric load_rubric(const std::string& path) {
    return rubric_from_json(read_file(path));
}

std::string render_final(const JudgeScore& s) {
    return two_decimals(s.final_score);
}

std::string judge_prompt(const nav::NavigationScenario& scenario,
                         const Rubric& rubric) {
    std::ostringstream p;
    p << "Score the following manual web navigation test scenario against "
         "each criterion on a scale from "
      << rubric.min_score << " to " << rubric.max_score << ".\n\nCriteria:\n";
    for (const auto& c : rubric.criteria) {
        p << "- " << c.id << " (" << c.title << "): " << c.description
          << "\n";
    }
    p << "\nScenario:\n" << nav::render_markdown(scenario);
    p << "\nReply with exactly " << rubric.criteria.size()
      << " lines, one per criterion, each of the form\n"
         "<criterion id>: <numeric score>\n"
         "and nothing else.\n";
    return p.str();
}

JudgeScore judge_scenario(const nav::NavigationScenario& scenario,
                          llm::LlmClient& client, const Rubric& rubric) {
    JudgeScore s;
    s.judge_model = client.config().model;
    s.rubric_version = rubric.version;

    std::vector<llm::Message> messages = {
        {"system", "You are a strict, consistent test-quality judge."},
        {"user", judge_prompt(scenario, rubric)}};
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string reply;
        try {
            reply = client.complete(messages);
        } catch (const Error& e) {
            s.warning = e.what();
            return s;
        }
        std::map<std::string, double> scores;
        if (parse_judge_reply(reply, rubric, scores)) {
            s.criteria = std::move(scores);
            s.final_score = mean_of(s.criteria);
            s.scored = true;
            return s;
        }
        messages.push_back({"assistant", reply});
        messages.push_back(
            {"user", "That reply could not be parsed. Reply again with one "
                     "line per criterion in the exact form "
                     "<criterion id>: <numeric score>."});
    }
    s.warning = JudgeUnparseable("no well-formed scores after retry").what();
    return s;
}

JudgeScore score_from_values(const std::map<std::string, double>& values,
                             const Rubric& rubric,
                             const std::string& judge_model) {
    JudgeScore s;
    s.judge_model = judge_model;
    s.rubric_version = rubric.version;
    for (const auto& c : rubric.criteria) {
        auto it = values.find(c.id);
        if (it == values.end()) {
            throw SchemaViolation("missing score for criterion: " + c.id);
        }
        if (it->second < rubric.min_score || it->second > rubric.max_score) {
            throw SchemaViolation("score out of range for " + c.id);
        }
        s.criteria[c.id] = it->second;
    }
    s.final_score = mean_of(s.criteria);
    s.scored = true;
    return s;
}

JudgeScore load_offline_scores(const std::string& path, const Rubric& rubric) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw SchemaViolation(std::string("scores parse: ") + e.what());
    }
    std::map<std::string, double> values;
    for (const auto& [id, v] : j.items()) values[id] = v.get<double>();
    return score_from_values(values, rubric);
}

std::string judge_to_json(const JudgeScore& s) {
    json j;
    j["version"] = 1;
    j["scored"] = s.scored;
    j["judge_model"] = s.judge_model;
    j["rubric_version"] = s.rubric_version;
    if (s.scored) {
        j["criteria"] = s.criteria;
        j["final"] = s.final_score;
        j["final_rendered"] = render_final(s);
    } else {
        j["warning"] = s.warning;
    }
    return j.dump(2);
}

JudgeScore judge_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("judge parse: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported judge schema version");
    }
    JudgeScore s;
    s.scored = j.value("scored", false);
    s.judge_model = j.value("judge_model", "");
    s.rubric_version = j.value("rubric_version", 1);
    if (s.scored) {
        const json criteria = j.value("criteria", json::object());
        for (const auto& [id, v] : criteria.items()) {
            s.criteria[id] = v.get<double>();
        }
        s.final_score = j.value("final", 0.0);
    } else {
        s.warning = j.value("warning", "");
    }
    return s;
}

}  // namespace formnav::eval
