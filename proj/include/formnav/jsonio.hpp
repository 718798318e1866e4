#pragma once

// JSON mappings for the domain types shared across file schemas.

#include <json.hpp>

#include "formnav/backend.hpp"
#include "formnav/dom.hpp"
#include "formnav/errors.hpp"

namespace formnav::jsonio {

using nlohmann::json;

inline json ref_to_json(const dom::ElementRef& ref) {
    const char* strat = "css";
    switch (ref.strategy) {
        case dom::RefStrategy::css: strat = "css"; break;
        case dom::RefStrategy::id: strat = "id"; break;
        case dom::RefStrategy::name: strat = "name"; break;
        case dom::RefStrategy::xpath: strat = "xpath"; break;
    }
    return json{{"strategy", strat}, {"value", ref.value}};
}

inline dom::ElementRef ref_from_json(const json& j) {
    dom::ElementRef r;
    std::string s = j.at("strategy").get<std::string>();
    if (s == "css") r.strategy = dom::RefStrategy::css;
    else if (s == "id") r.strategy = dom::RefStrategy::id;
    else if (s == "name") r.strategy = dom::RefStrategy::name;
    else if (s == "xpath") r.strategy = dom::RefStrategy::xpath;
    else throw SchemaViolation("unknown ref strategy: " + s);
    r.value = j.at("value").get<std::string>();
    return r;
}

inline const char* required_name(dom::RequiredKind k) {
    switch (k) {
        case dom::RequiredKind::no: return "no";
        case dom::RequiredKind::direct: return "direct";
        case dom::RequiredKind::indirect: return "indirect";
    }
    return "no";
}

inline dom::RequiredKind required_from_name(const std::string& s) {
    if (s == "direct") return dom::RequiredKind::direct;
    if (s == "indirect") return dom::RequiredKind::indirect;
    if (s == "no") return dom::RequiredKind::no;
    throw SchemaViolation("unknown required kind: " + s);
}

inline json field_to_json(const dom::FieldDescriptor& f) {
    json j;
    j["ref"] = ref_to_json(f.ref);
    j["control"] = dom::control_name(f.control);
    j["name"] = f.name;
    j["required"] = required_name(f.required);
    j["visible"] = f.visible;
    if (!f.options.empty()) j["options"] = f.options;
    json c = json::object();
    if (f.constraints.min) c["min"] = *f.constraints.min;
    if (f.constraints.max) c["max"] = *f.constraints.max;
    if (f.constraints.pattern) c["pattern"] = *f.constraints.pattern;
    if (f.constraints.maxlength) c["maxlength"] = *f.constraints.maxlength;
    if (!c.empty()) j["constraints"] = c;
    return j;
}

inline dom::FieldDescriptor field_from_json(const json& j) {
    dom::FieldDescriptor f;
    f.ref = ref_from_json(j.at("ref"));
    f.control = dom::control_from_name(j.at("control").get<std::string>())
                    .value_or(dom::ControlType::text);
    f.name = j.value("name", "");
    f.required = required_from_name(j.value("required", "no"));
    f.visible = j.value("visible", true);
    f.options = j.value("options", std::vector<std::string>{});
    if (j.contains("constraints")) {
        const json& c = j["constraints"];
        if (c.contains("min")) f.constraints.min = c["min"].get<std::string>();
        if (c.contains("max")) f.constraints.max = c["max"].get<std::string>();
        if (c.contains("pattern")) {
            f.constraints.pattern = c["pattern"].get<std::string>();
        }
        if (c.contains("maxlength")) {
            f.constraints.maxlength = c["maxlength"].get<int>();
        }
    }
    return f;
}

inline json action_to_json(const Action& a) {
    json j;
    j["type"] = action_name(a.type);
    if (a.type == ActionType::set_value ||
        a.type == ActionType::select_option) {
        j["value"] = a.value;
    }
    return j;
}

inline Action action_from_json(const json& j) {
    std::string t = j.at("type").get<std::string>();
    Action a;
    if (t == "click") a.type = ActionType::click;
    else if (t == "set_value") a.type = ActionType::set_value;
    else if (t == "select_option") a.type = ActionType::select_option;
    else if (t == "toggle") a.type = ActionType::toggle;
    else throw SchemaViolation("unknown action type: " + t);
    a.value = j.value("value", "");
    return a;
}

}  // namespace formnav::jsonio
