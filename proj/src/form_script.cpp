#include "formnav/form_script.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "formnav/errors.hpp"
#include "formnav/jsonio.hpp"

namespace formnav::script {

using json = nlohmann::json;
using dom::ControlType;
using dom::ElementRef;
using dom::FieldDescriptor;

namespace {

// the only pattern constraints the fill synthesizer understands
const std::map<std::string, std::string> kKnownPatterns = {
    {"[0-9]{5}", "12345"},
    {"[A-Z0-9]{6}", "ABC123"},
};

bool matches_known_pattern(const std::string& pattern,
                           const std::string& value) {
    if (pattern == "[0-9]{5}") {
        return value.size() == 5 &&
               value.find_first_not_of("0123456789") == std::string::npos;
    }
    if (pattern == "[A-Z0-9]{6}") {
        return value.size() == 6 &&
               value.find_first_not_of(
                   "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789") ==
                   std::string::npos;
    }
    return false;
}

bool is_number(const std::string& s) {
    if (s.empty()) return false;
    size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    bool dot = false;
    for (; i < s.size(); ++i) {
        if (s[i] == '.' && !dot) { dot = true; continue; }
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

bool digits_shape(const std::string& s, std::initializer_list<int> groups,
                  char sep) {
    size_t pos = 0;
    bool first = true;
    for (int len : groups) {
        if (!first) {
            if (pos >= s.size() || s[pos] != sep) return false;
            ++pos;
        }
        first = false;
        for (int i = 0; i < len; ++i, ++pos) {
            if (pos >= s.size() ||
                !std::isdigit(static_cast<unsigned char>(s[pos]))) {
                return false;
            }
        }
    }
    return pos == s.size();
}

std::string clamp_iso(const std::string& value,
                      const dom::FieldConstraints& c) {
    // ISO date/month/week/time strings compare lexicographically
    std::string v = value;
    if (c.min && v < *c.min) v = *c.min;
    if (c.max && v > *c.max) v = *c.max;
    return v;
}

std::string fit_length(std::string v, const dom::FieldConstraints& c) {
    if (c.maxlength && static_cast<int>(v.size()) > *c.maxlength) {
        v.resize(*c.maxlength);
    }
    return v;
}

std::string rules_value(const FieldDescriptor& field) {
    const auto& c = field.constraints;
    switch (field.control) {
        case ControlType::text:
        case ControlType::search:
        case ControlType::textarea: {
            if (c.pattern) {
                auto it = kKnownPatterns.find(*c.pattern);
                if (it == kKnownPatterns.end()) {
                    throw UnsupportedField(field.name + ": pattern " +
                                           *c.pattern);
                }
                return it->second;
            }
            return fit_length("Sample text", c);
        }
        case ControlType::email: return "alex@example.com";
        case ControlType::password: return fit_length("S3cure-pass!", c);
        case ControlType::url: return "https://example.com/";
        case ControlType::tel: return "+1 555 0100";
        case ControlType::color: return "#336699";
        case ControlType::number:
        case ControlType::range: {
            if (c.min) return *c.min;
            if (c.max) return *c.max;
            return "1";
        }
        case ControlType::date: return clamp_iso("2024-06-15", c);
        case ControlType::month: return clamp_iso("2024-06", c);
        case ControlType::week: return clamp_iso("2024-W24", c);
        case ControlType::time: return clamp_iso("12:30", c);
        case ControlType::select_one:
        case ControlType::radio: {
            if (field.options.empty()) {
                throw UnsupportedField(field.name + ": no options");
            }
            return field.options.front();
        }
        case ControlType::checkbox: return "on";
        case ControlType::file:
            throw UnsupportedField(field.name + ": file input");
        case ControlType::hidden:
            throw UnsupportedField(field.name + ": hidden input");
    }
    throw UnsupportedField(field.name);
}

std::string llm_fill_prompt(const FieldDescriptor& field) {
    std::string p = "Provide one realistic value for a web form field.\n";
    p += "Field name: " + field.name + "\n";
    p += "Control type: " + std::string(dom::control_name(field.control)) +
         "\n";
    const auto& c = field.constraints;
    if (c.min) p += "Minimum: " + *c.min + "\n";
    if (c.max) p += "Maximum: " + *c.max + "\n";
    if (c.pattern) p += "Pattern: " + *c.pattern + "\n";
    if (c.maxlength) p += "Max length: " + std::to_string(*c.maxlength) + "\n";
    if (!field.options.empty()) {
        p += "Allowed options:";
        for (const auto& o : field.options) p += " " + o;
        p += "\n";
    }
    p += "Reply with a single line starting with the word VALUE followed by "
         "a colon and the value.\n";
    return p;
}

bool parse_llm_value(const std::string& reply, std::string& out) {
    std::istringstream lines(reply);
    std::string line;
    while (std::getline(lines, line)) {
        size_t at = line.find("VALUE:");
        if (at != std::string::npos) {
            std::string v = line.substr(at + 6);
            size_t b = v.find_first_not_of(" \t");
            size_t e = v.find_last_not_of(" \t\r");
            if (b == std::string::npos) return false;
            out = v.substr(b, e - b + 1);
            return true;
        }
    }
    return false;
}

std::string generate_with_flag(const FieldDescriptor& field,
                               const FillOptions& options, bool& fell_back) {
    if (options.mode == FillMode::llm && options.llm) {
        try {
            std::string reply = options.llm->complete(
                {{"system", "You produce terse, valid form inputs."},
                 {"user", llm_fill_prompt(field)}});
            std::string value;
            if (parse_llm_value(reply, value) &&
                validate_fill_value(field, value)) {
                return value;
            }
        } catch (const Error&) {
            // fall through to the rule synthesizer
        }
        fell_back = true;
    }
    return rules_value(field);
}

Op op_for_action(ActionType t) {
    switch (t) {
        case ActionType::click: return Op::click;
        case ActionType::set_value: return Op::set_value;
        case ActionType::select_option: return Op::select_option;
        case ActionType::toggle: return Op::toggle;
    }
    return Op::click;
}

// descriptor for a ref, searched across every state's visible field list
const FieldDescriptor* field_for_ref(const explore::StateGraph& g,
                                     const ElementRef& ref) {
    for (const auto& s : g.states) {
        for (const auto& f : s.visible_fields) {
            if (f.ref == ref) return &f;
        }
    }
    return nullptr;
}

FailReason reason_for(const Error& e) {
    if (dynamic_cast<const ElementNotFound*>(&e)) return FailReason::not_found;
    if (dynamic_cast<const ElementNotInteractable*>(&e)) {
        return FailReason::not_interactable;
    }
    if (dynamic_cast<const ValueRejected*>(&e)) {
        return FailReason::value_rejected;
    }
    return FailReason::backend_error;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string locator_text(const ElementRef& ref) {
    if (ref.strategy == dom::RefStrategy::xpath) {
        return "By.XPATH, " + quote(ref.value);
    }
    std::string css;
    switch (ref.strategy) {
        case dom::RefStrategy::id: css = "[id=\"" + ref.value + "\"]"; break;
        case dom::RefStrategy::name:
            css = "[name=\"" + ref.value + "\"]";
            break;
        default: css = ref.value;
    }
    return "By.CSS_SELECTOR, " + quote(css);
}

json command_to_json(const TestCommand& c) {
    json j;
    j["op"] = op_name(c.op);
    if (c.op == Op::navigate) {
        j["url"] = c.url;
        return j;
    }
    if (c.op == Op::assert_no_validation_error) return j;
    j["ref"] = jsonio::ref_to_json(c.ref);
    if (c.op == Op::set_value || c.op == Op::select_option) {
        j["value"] = c.value;
    }
    if (!c.field_name.empty()) {
        j["field_name"] = c.field_name;
        j["control"] = dom::control_name(c.control);
    }
    return j;
}

TestCommand command_from_json(const json& j) {
    TestCommand c;
    std::string op = j.at("op").get<std::string>();
    const char* all[] = {"navigate", "click", "set_value", "select_option",
                         "toggle", "assert_visible", "submit",
                         "assert_no_validation_error"};
    bool found = false;
    for (int i = 0; i < 8; ++i) {
        if (op == all[i]) {
            c.op = static_cast<Op>(i);
            found = true;
            break;
        }
    }
    if (!found) throw SchemaViolation("unknown op: " + op);
    c.url = j.value("url", "");
    if (j.contains("ref")) c.ref = jsonio::ref_from_json(j["ref"]);
    c.value = j.value("value", "");
    c.field_name = j.value("field_name", "");
    if (j.contains("control")) {
        c.control = dom::control_from_name(j["control"].get<std::string>())
                        .value_or(ControlType::text);
    }
    return c;
}

}  // namespace

const char* op_name(Op op) {
    switch (op) {
        case Op::navigate: return "navigate";
        case Op::click: return "click";
        case Op::set_value: return "set_value";
        case Op::select_option: return "select_option";
        case Op::toggle: return "toggle";
        case Op::assert_visible: return "assert_visible";
        case Op::submit: return "submit";
        case Op::assert_no_validation_error:
            return "assert_no_validation_error";
    }
    return "click";
}

const char* fail_reason_name(FailReason r) {
    switch (r) {
        case FailReason::none: return "none";
        case FailReason::not_found: return "not_found";
        case FailReason::not_interactable: return "not_interactable";
        case FailReason::value_rejected: return "value_rejected";
        case FailReason::validation_error: return "validation_error";
        case FailReason::backend_error: return "backend_error";
    }
    return "backend_error";
}

bool validate_fill_value(const FieldDescriptor& field,
                         const std::string& value) {
    const auto& c = field.constraints;
    if (c.maxlength && static_cast<int>(value.size()) > *c.maxlength) {
        return false;
    }
    switch (field.control) {
        case ControlType::email: {
            size_t at = value.find('@');
            return at != std::string::npos && at > 0 &&
                   value.find('.', at) != std::string::npos;
        }
        case ControlType::number:
        case ControlType::range: {
            if (!is_number(value)) return false;
            double v = std::stod(value);
            if (c.min && v < std::stod(*c.min)) return false;
            if (c.max && v > std::stod(*c.max)) return false;
            return true;
        }
        case ControlType::date:
            if (!digits_shape(value, {4, 2, 2}, '-')) return false;
            break;
        case ControlType::month:
            if (!digits_shape(value, {4, 2}, '-')) return false;
            break;
        case ControlType::week:
            if (value.size() != 8 || value.substr(4, 2) != "-W" ||
                !digits_shape(value.substr(0, 4), {4}, '-') ||
                !digits_shape(value.substr(6), {2}, '-')) {
                return false;
            }
            break;
        case ControlType::time:
            if (!digits_shape(value, {2, 2}, ':')) return false;
            break;
        case ControlType::url:
            return value.rfind("http://", 0) == 0 ||
                   value.rfind("https://", 0) == 0;
        case ControlType::color:
            return value.size() == 7 && value[0] == '#' &&
                   value.find_first_not_of("0123456789abcdefABCDEF", 1) ==
                       std::string::npos;
        case ControlType::select_one:
        case ControlType::radio:
            return std::find(field.options.begin(), field.options.end(),
                             value) != field.options.end();
        case ControlType::hidden:
        case ControlType::file:
            return false;
        default: break;
    }
    if (c.pattern && !matches_known_pattern(*c.pattern, value)) return false;
    if (field.control == ControlType::date || field.control == ControlType::month ||
        field.control == ControlType::week || field.control == ControlType::time) {
        if (c.min && value < *c.min) return false;
        if (c.max && value > *c.max) return false;
    }
    return !value.empty();
}

std::string generate_fill_value(const FieldDescriptor& field,
                                const FillOptions& options) {
    bool fell_back = false;
    return generate_with_flag(field, options, fell_back);
}

std::vector<TestScript> plan_state_scripts(const explore::StateGraph& g,
                                           const std::string& page_url,
                                           const FillOptions& options) {
    // any element that drives a state change is off-limits while filling
    std::set<std::string> trigger_keys;
    auto key_of = [](const ElementRef& r) {
        return std::to_string(static_cast<int>(r.strategy)) + "\x1f" + r.value;
    };
    for (const auto& e : g.edges) trigger_keys.insert(key_of(e.via.ref));
    for (const auto& s : g.states) {
        for (const auto& i : s.path_from_root) {
            trigger_keys.insert(key_of(i.ref));
        }
    }

    std::vector<TestScript> scripts;
    for (const auto& state : g.states) {
        TestScript sc;
        sc.id = "state-" + std::to_string(state.id);
        sc.target_state = state.id;
        sc.form_source = page_url;
        bool fell_back = false;

        TestCommand nav;
        nav.op = Op::navigate;
        nav.url = page_url;
        sc.commands.push_back(nav);

        for (const auto& step : state.path_from_root) {
            TestCommand c;
            c.op = op_for_action(step.action.type);
            c.ref = step.ref;
            c.value = step.action.value;
            if (const FieldDescriptor* f = field_for_ref(g, step.ref)) {
                c.field_name = f->name;
                c.control = f->control;
            }
            sc.commands.push_back(c);
        }

        for (const auto& field : state.visible_fields) {
            if (!field.visible) continue;
            if (field.control == ControlType::hidden) continue;
            if (field.control == ControlType::file &&
                !options.include_file_fields) {
                continue;
            }
            if (trigger_keys.count(key_of(field.ref))) continue;

            TestCommand c;
            c.ref = field.ref;
            c.field_name = field.name;
            c.control = field.control;
            if (field.control == ControlType::checkbox) {
                c.op = Op::toggle;
            } else if (field.control == ControlType::radio) {
                c.op = Op::click;
            } else if (field.control == ControlType::file) {
                c.op = Op::set_value;
                c.value = "/tmp/formnav-upload.txt";
            } else {
                c.op = field.control == ControlType::select_one
                           ? Op::select_option
                           : Op::set_value;
                try {
                    c.value = generate_with_flag(field, options, fell_back);
                } catch (const UnsupportedField&) {
                    continue;  // recorded as uncovered by the evaluator
                }
            }
            sc.commands.push_back(c);
        }

        TestCommand submit;
        submit.op = Op::submit;
        submit.ref = g.form_scope;
        sc.commands.push_back(submit);
        sc.commands.push_back({Op::assert_no_validation_error});
        if (options.mode == FillMode::llm) {
            sc.generator_mode = fell_back ? "llm_fallback" : "llm";
        } else {
            sc.generator_mode = "rules";
        }
        scripts.push_back(std::move(sc));
    }
    return scripts;
}

std::vector<InteractionRecord> run_script(const TestScript& script,
                                          Session& session) {
    std::vector<InteractionRecord> records;
    for (size_t i = 0; i < script.commands.size(); ++i) {
        const TestCommand& c = script.commands[i];
        const int index = static_cast<int>(i);
        switch (c.op) {
            case Op::navigate: {
                try {
                    session.navigate(c.url);
                } catch (const Error& e) {
                    InteractionRecord r;
                    r.command_index = index;
                    r.success = false;
                    r.reason = FailReason::backend_error;
                    r.detail = e.what();
                    records.push_back(r);
                    return records;  // nothing downstream can run
                }
                break;
            }
            case Op::click:
            case Op::set_value:
            case Op::select_option:
            case Op::toggle: {
                InteractionRecord r;
                r.command_index = index;
                r.ref = c.ref;
                r.field_name = c.field_name;
                r.control = c.control;
                Action action;
                if (c.op == Op::click) action = Action::click();
                else if (c.op == Op::set_value) action = Action::set_value(c.value);
                else if (c.op == Op::select_option) {
                    action = Action::select_option(c.value);
                } else {
                    action = Action::toggle();
                }
                try {
                    session.interact(c.ref, action);
                } catch (const Error& e) {
                    r.success = false;
                    r.reason = reason_for(e);
                    r.detail = e.what();
                }
                records.push_back(std::move(r));
                break;
            }
            case Op::assert_visible: {
                dom::HtmlDocument doc =
                    dom::parse_document(session.page_source());
                auto els = dom::resolve(doc, c.ref);
                if (els.size() != 1 || !dom::is_visible(*els[0])) {
                    InteractionRecord r;
                    r.command_index = index;
                    r.ref = c.ref;
                    r.success = false;
                    r.reason = FailReason::backend_error;
                    r.detail = "element not visible: " + dom::to_string(c.ref);
                    records.push_back(r);
                }
                break;
            }
            case Op::submit: {
                // validation check: all visible required fields carry a value
                dom::HtmlDocument doc =
                    dom::parse_document(session.page_source());
                auto scopes = dom::resolve(doc, c.ref);
                if (scopes.size() != 1) {
                    InteractionRecord r;
                    r.command_index = index;
                    r.ref = c.ref;
                    r.success = false;
                    r.reason = FailReason::not_found;
                    r.detail = "submit scope: " + dom::to_string(c.ref);
                    records.push_back(r);
                    break;
                }
                for (const auto& form : dom::extract_forms(doc)) {
                    auto roots = dom::resolve(doc, form.root);
                    if (roots.size() != 1 || roots.front() != scopes.front()) {
                        continue;
                    }
                    for (const auto& f : form.fields) {
                        if (!f.visible || f.required == dom::RequiredKind::no) {
                            continue;
                        }
                        bool filled;
                        if (f.control == ControlType::checkbox ||
                            f.control == ControlType::radio) {
                            filled = session.get_property(f.ref, "checked") ==
                                     "true";
                        } else {
                            filled =
                                !session.get_property(f.ref, "value").empty();
                        }
                        if (!filled) {
                            InteractionRecord r;
                            r.command_index = index;
                            r.ref = f.ref;
                            r.field_name = f.name;
                            r.control = f.control;
                            r.success = false;
                            r.reason = FailReason::validation_error;
                            r.detail = "required field empty at submit";
                            records.push_back(r);
                        }
                    }
                }
                break;
            }
            case Op::assert_no_validation_error:
                // asserted through the absence of validation_error records
                break;
        }
    }
    return records;
}

std::string render_script(const TestScript& script,
                          const std::string& dialect) {
    if (dialect == "native-json") {
        json j;
        j["version"] = 1;
        j["id"] = script.id;
        j["target_state"] = script.target_state;
        j["provenance"] = {{"form_source", script.form_source},
                           {"mode", script.generator_mode}};
        j["commands"] = json::array();
        for (const auto& c : script.commands) {
            j["commands"].push_back(command_to_json(c));
        }
        return j.dump(2);
    }
    if (dialect == "webdriver-text") {
        std::ostringstream out;
        out << "# script " << script.id << " (state " << script.target_state
            << ", mode " << script.generator_mode << ")\n";
        for (const auto& c : script.commands) {
            switch (c.op) {
                case Op::navigate:
                    out << "driver.get(" << quote(c.url) << ")\n";
                    break;
                case Op::click:
                    out << "driver.find_element(" << locator_text(c.ref)
                        << ").click()\n";
                    break;
                case Op::set_value:
                    out << "field = driver.find_element(" << locator_text(c.ref)
                        << ")\nfield.clear()\nfield.send_keys("
                        << quote(c.value) << ")\n";
                    break;
                case Op::select_option:
                    out << "Select(driver.find_element(" << locator_text(c.ref)
                        << ")).select_by_value(" << quote(c.value) << ")\n";
                    break;
                case Op::toggle:
                    out << "driver.find_element(" << locator_text(c.ref)
                        << ").click()\n";
                    break;
                case Op::assert_visible:
                    out << "assert driver.find_element(" << locator_text(c.ref)
                        << ").is_displayed()\n";
                    break;
                case Op::submit:
                    out << "driver.find_element(" << locator_text(c.ref)
                        << ").submit()\n";
                    break;
                case Op::assert_no_validation_error:
                    out << "assert not driver.find_elements(By.CSS_SELECTOR, "
                           "\":invalid\")\n";
                    break;
            }
        }
        return out.str();
    }
    throw UnknownDialect(dialect);
}

TestScript script_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("script parse: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported script schema version");
    }
    TestScript s;
    s.id = j.value("id", "");
    s.target_state = j.value("target_state", 0);
    if (j.contains("provenance")) {
        s.form_source = j["provenance"].value("form_source", "");
        s.generator_mode = j["provenance"].value("mode", "rules");
    }
    for (const auto& jc : j.value("commands", json::array())) {
        s.commands.push_back(command_from_json(jc));
    }
    return s;
}

void save_script(const TestScript& script, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << render_script(script, "native-json");
}

TestScript load_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return script_from_json(ss.str());
}

std::string results_to_json(const std::vector<RunResult>& results) {
    json j;
    j["version"] = 1;
    j["cases"] = json::array();
    for (const auto& res : results) {
        json jc;
        jc["script_id"] = res.script_id;
        jc["form_id"] = res.form_id;
        jc["records"] = json::array();
        for (const auto& r : res.records) {
            json jr;
            jr["command_index"] = r.command_index;
            jr["ref"] = jsonio::ref_to_json(r.ref);
            jr["field_name"] = r.field_name;
            jr["control"] = dom::control_name(r.control);
            jr["success"] = r.success;
            if (!r.success) {
                jr["reason"] = fail_reason_name(r.reason);
                jr["detail"] = r.detail;
            }
            jc["records"].push_back(jr);
        }
        j["cases"].push_back(jc);
    }
    return j.dump(2);
}

std::vector<RunResult> results_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("results parse: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported results schema version");
    }
    std::vector<RunResult> out;
    for (const auto& jc : j.value("cases", json::array())) {
        RunResult res;
        res.script_id = jc.value("script_id", "");
        res.form_id = jc.value("form_id", "");
        for (const auto& jr : jc.value("records", json::array())) {
            InteractionRecord r;
            r.command_index = jr.value("command_index", 0);
            if (jr.contains("ref")) r.ref = jsonio::ref_from_json(jr["ref"]);
            r.field_name = jr.value("field_name", "");
            r.control =
                dom::control_from_name(jr.value("control", "text"))
                    .value_or(ControlType::text);
            r.success = jr.value("success", true);
            if (!r.success) {
                std::string reason = jr.value("reason", "backend_error");
                const char* names[] = {"none", "not_found", "not_interactable",
                                       "value_rejected", "validation_error",
                                       "backend_error"};
                for (int i = 0; i < 6; ++i) {
                    if (reason == names[i]) {
                        r.reason = static_cast<FailReason>(i);
                        break;
                    }
                }
                r.detail = jr.value("detail", "");
            }
            res.records.push_back(std::move(r));
        }
        out.push_back(std::move(res));
    }
    return out;
}

void save_results(const std::vector<RunResult>& results,
                  const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << results_to_json(results);
}

std::vector<RunResult> load_results(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return results_from_json(ss.str());
}

}  // namespace formnav::script
