#pragma once

#include <string>
#include <vector>

#include "formnav/backend.hpp"
#include "formnav/dom.hpp"
#include "formnav/form_explorer.hpp"
#include "formnav/llm.hpp"

namespace formnav::script {

enum class Op {
    navigate,
    click,
    set_value,
    select_option,
    toggle,
    assert_visible,
    submit,
    assert_no_validation_error
};

const char* op_name(Op op);

struct TestCommand {
    Op op = Op::click;
    dom::ElementRef ref;
    std::string value;  // set_value / select_option payload
    std::string url;    // navigate only
    // descriptor snapshot for result records; empty for non-field targets
    std::string field_name;
    dom::ControlType control = dom::ControlType::text;
};

struct TestScript {
    std::string id;
    int target_state = 0;
    std::vector<TestCommand> commands;
    std::string form_source;     // page url the form lives on
    std::string generator_mode;  // "rules" | "llm" | "llm_fallback"
};

enum class FailReason {
    none,
    not_found,
    not_interactable,
    value_rejected,
    validation_error,
    backend_error
};

const char* fail_reason_name(FailReason r);

struct InteractionRecord {
    int command_index = 0;
    dom::ElementRef ref;
    std::string field_name;
    dom::ControlType control = dom::ControlType::text;
    bool success = true;
    FailReason reason = FailReason::none;
    std::string detail;
};

struct RunResult {
    std::string script_id;
    std::string form_id;  // groups scripts of one form for coverage
    std::vector<InteractionRecord> records;
};

enum class FillMode { rules, llm };

struct FillOptions {
    FillMode mode = FillMode::rules;
    llm::LlmClient* llm = nullptr;  // llm mode only
    // file inputs are skipped by default: the simulator rejects paths and
    // real drivers need an existing file
    bool include_file_fields = false;
};

// True when value satisfies the field's declared type format and constraints.
bool validate_fill_value(const dom::FieldDescriptor& field,
                         const std::string& value);

// Constraint-satisfying value for a fillable field. Throws UnsupportedField
// for hidden inputs, file inputs, optionless choice fields, and patterns
// outside the known set.
std::string generate_fill_value(const dom::FieldDescriptor& field,
                                const FillOptions& options = {});

// One script per state: navigate, replay path_from_root, fill every visible
// fillable non-trigger field, submit, assert no validation errors.
std::vector<TestScript> plan_state_scripts(const explore::StateGraph& g,
                                           const std::string& page_url,
                                           const FillOptions& options = {});

std::vector<InteractionRecord> run_script(const TestScript& script,
                                          Session& session);

// dialect "native-json" (canonical, parseable) or "webdriver-text"
std::string render_script(const TestScript& script,
                          const std::string& dialect = "native-json");
TestScript script_from_json(const std::string& text);
void save_script(const TestScript& script, const std::string& path);
TestScript load_script(const std::string& path);

std::string results_to_json(const std::vector<RunResult>& results);
std::vector<RunResult> results_from_json(const std::string& text);
void save_results(const std::vector<RunResult>& results,
                  const std::string& path);
std::vector<RunResult> load_results(const std::string& path);

}  // namespace formnav::script
