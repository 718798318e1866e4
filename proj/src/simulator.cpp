#include "formnav/simulator.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "formnav/errors.hpp"
#include "formnav/url.hpp"

namespace formnav::sim {

namespace fs = std::filesystem;
using json = nlohmann::json;
using dom::Element;
using dom::ElementRef;
using dom::RefStrategy;

namespace {

std::string input_type(const Element& el) {
    const std::string* t = el.attr("type");
    if (!t) return "text";
    std::string s = *t;
    for (auto& c : s) c = static_cast<char>(::tolower(c));
    return s;
}

bool is_text_entry(const Element& el) {
    if (el.tag == "textarea") return true;
    if (el.tag != "input") return false;
    std::string t = input_type(el);
    return t != "checkbox" && t != "radio" && t != "hidden" && t != "file" &&
           t != "submit" && t != "button" && t != "reset" && t != "image";
}

// Replace the display declaration in an inline style attribute, keeping any
// other declarations.
void set_display(Element& el, const std::string& value) {
    std::string style;
    if (const std::string* s = el.attr("style")) style = *s;
    std::string out;
    std::stringstream ss(style);
    std::string decl;
    while (std::getline(ss, decl, ';')) {
        size_t colon = decl.find(':');
        if (colon == std::string::npos) continue;
        std::string key = decl.substr(0, colon);
        key.erase(remove_if(key.begin(), key.end(), ::isspace), key.end());
        if (key == "display") continue;
        if (!out.empty()) out += "; ";
        std::string d = decl;
        while (!d.empty() && ::isspace(static_cast<unsigned char>(d.front()))) {
            d.erase(d.begin());
        }
        out += d;
    }
    if (!out.empty()) out += "; ";
    out += "display:" + value;
    el.set_attr("style", out);
}

json ref_to_json(const ElementRef& ref) {
    const char* strat = "css";
    switch (ref.strategy) {
        case RefStrategy::css: strat = "css"; break;
        case RefStrategy::id: strat = "id"; break;
        case RefStrategy::name: strat = "name"; break;
        case RefStrategy::xpath: strat = "xpath"; break;
    }
    return json{{"strategy", strat}, {"value", ref.value}};
}

ElementRef ref_from_json(const json& j) {
    ElementRef r;
    std::string s = j.at("strategy").get<std::string>();
    if (s == "css") r.strategy = RefStrategy::css;
    else if (s == "id") r.strategy = RefStrategy::id;
    else if (s == "name") r.strategy = RefStrategy::name;
    else if (s == "xpath") r.strategy = RefStrategy::xpath;
    else throw SchemaViolation("unknown ref strategy: " + s);
    r.value = j.at("value").get<std::string>();
    return r;
}

const char* required_name(dom::RequiredKind k) {
    switch (k) {
        case dom::RequiredKind::no: return "no";
        case dom::RequiredKind::direct: return "direct";
        case dom::RequiredKind::indirect: return "indirect";
    }
    return "no";
}

dom::RequiredKind required_from_name(const std::string& s) {
    if (s == "direct") return dom::RequiredKind::direct;
    if (s == "indirect") return dom::RequiredKind::indirect;
    return dom::RequiredKind::no;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << content;
}

}  // namespace

std::string manifest_to_json(const ReactionManifest& m) {
    json j;
    j["version"] = 1;
    j["rules"] = json::array();
    for (const auto& r : m.rules) {
        json jr;
        jr["trigger"] = ref_to_json(r.trigger);
        switch (r.condition) {
            case ConditionKind::value_equals:
                jr["condition"] = {{"kind", "value_equals"},
                                   {"value", r.condition_value}};
                break;
            case ConditionKind::checked:
                jr["condition"] = {{"kind", "checked"}};
                break;
            case ConditionKind::clicked:
                jr["condition"] = {{"kind", "clicked"}};
                break;
        }
        jr["effects"] = json::array();
        for (const auto& [target, op] : r.effects) {
            jr["effects"].push_back(
                {{"target", target},
                 {"op", op == EffectOp::show ? "show" : "hide"}});
        }
        j["rules"].push_back(jr);
    }
    j["initial_visible"] = m.initial_visible;
    json gt;
    gt["state_count"] = m.state_count;
    gt["fields"] = json::array();
    for (const auto& f : m.fields) {
        gt["fields"].push_back({{"name", f.name},
                                {"control", dom::control_name(f.control)},
                                {"required", required_name(f.required)},
                                {"visible_initially", f.visible_initially},
                                {"sub_form", f.sub_form}});
    }
    j["ground_truth"] = gt;
    return j.dump(2);
}

ReactionManifest manifest_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("manifest parse: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported manifest version");
    }
    ReactionManifest m;
    for (const auto& jr : j.value("rules", json::array())) {
        ReactionRule r;
        r.trigger = ref_from_json(jr.at("trigger"));
        const json& c = jr.at("condition");
        std::string kind = c.at("kind").get<std::string>();
        if (kind == "value_equals") {
            r.condition = ConditionKind::value_equals;
            r.condition_value = c.at("value").get<std::string>();
        } else if (kind == "checked") {
            r.condition = ConditionKind::checked;
        } else if (kind == "clicked") {
            r.condition = ConditionKind::clicked;
        } else {
            throw SchemaViolation("unknown condition kind: " + kind);
        }
        for (const auto& je : jr.at("effects")) {
            r.effects.emplace_back(je.at("target").get<std::string>(),
                                   je.at("op").get<std::string>() == "show"
                                       ? EffectOp::show
                                       : EffectOp::hide);
        }
        m.rules.push_back(std::move(r));
    }
    m.initial_visible =
        j.value("initial_visible", std::vector<std::string>{});
    if (j.contains("ground_truth")) {
        const json& gt = j["ground_truth"];
        m.state_count = gt.value("state_count", 1);
        for (const auto& jf : gt.value("fields", json::array())) {
            GroundTruthField f;
            f.name = jf.at("name").get<std::string>();
            f.control = dom::control_from_name(jf.at("control").get<std::string>())
                            .value_or(dom::ControlType::text);
            f.required = required_from_name(jf.at("required").get<std::string>());
            f.visible_initially = jf.value("visible_initially", true);
            f.sub_form = jf.value("sub_form", -1);
            m.fields.push_back(std::move(f));
        }
    }
    return m;
}

int enumerate_states(const std::string& html, const ReactionManifest& m) {
    // collect effect targets; a configuration is the shown/hidden vector
    std::vector<std::string> targets;
    std::set<std::string> seen_targets;
    for (const auto& r : m.rules) {
        for (const auto& [t, op] : r.effects) {
            if (seen_targets.insert(t).second) targets.push_back(t);
        }
    }
    dom::HtmlDocument doc = dom::parse_document(html);
    auto config_of = [&]() {
        std::vector<bool> cfg;
        for (const auto& id : targets) {
            Element* el = dom::resolve_unique(doc, {RefStrategy::id, id});
            cfg.push_back(el && dom::is_visible(*el));
        }
        return cfg;
    };
    auto apply_config = [&](const std::vector<bool>& cfg) {
        for (size_t i = 0; i < targets.size(); ++i) {
            Element* el =
                dom::resolve_unique(doc, {RefStrategy::id, targets[i]});
            if (el) set_display(*el, cfg[i] ? "block" : "none");
        }
    };
    std::set<std::vector<bool>> visited;
    std::vector<std::vector<bool>> frontier{config_of()};
    visited.insert(frontier[0]);
    while (!frontier.empty()) {
        std::vector<bool> cfg = frontier.back();
        frontier.pop_back();
        for (const auto& r : m.rules) {
            apply_config(cfg);
            auto triggers = dom::resolve(doc, r.trigger);
            if (triggers.size() != 1 || !dom::is_visible(*triggers[0]) ||
                !dom::is_enabled(*triggers[0])) {
                continue;
            }
            // user can always drive a visible trigger into the rule's
            // condition (select the value, check the box, click it)
            for (const auto& [target, op] : r.effects) {
                Element* el =
                    dom::resolve_unique(doc, {RefStrategy::id, target});
                if (el) {
                    set_display(*el, op == EffectOp::show ? "block" : "none");
                }
            }
            std::vector<bool> next = config_of();
            if (visited.insert(next).second) {
                frontier.push_back(next);
                if (visited.size() > 4096) return static_cast<int>(visited.size());
            }
        }
    }
    return static_cast<int>(visited.size());
}

SiteBundle SiteBundle::single_page(const std::string& url,
                                   const std::string& html) {
    SiteBundle b;
    b.pages[url::canonicalize(url)] = html;
    return b;
}

SiteBundle SiteBundle::single_form(const std::string& html,
                                   const ReactionManifest& manifest) {
    SiteBundle b;
    std::string u = url::canonicalize(kSingleFormUrl);
    b.pages[u] = html;
    b.manifests[u] = manifest;
    return b;
}

SiteBundle SiteBundle::load_dir(const std::string& dir) {
    fs::path root(dir);
    json j;
    try {
        j = json::parse(read_file(root / "bundle.json"));
    } catch (const IoError&) {
        throw;
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("bundle.json: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported bundle version");
    }
    SiteBundle b;
    const json pages = j.value("pages", json::object());
    for (const auto& [u, file] : pages.items()) {
        b.pages[url::canonicalize(u)] =
            read_file(root / file.get<std::string>());
    }
    const json redirects = j.value("redirects", json::object());
    for (const auto& [u, target] : redirects.items()) {
        b.redirects[url::canonicalize(u)] = target.get<std::string>();
    }
    const json manifests = j.value("manifests", json::object());
    for (const auto& [u, file] : manifests.items()) {
        b.manifests[url::canonicalize(u)] =
            manifest_from_json(read_file(root / file.get<std::string>()));
    }
    return b;
}

void SiteBundle::save_dir(const std::string& dir) const {
    fs::path root(dir);
    fs::create_directories(root);
    json j;
    j["version"] = 1;
    j["pages"] = json::object();
    j["redirects"] = json::object();
    j["manifests"] = json::object();
    int i = 0;
    for (const auto& [u, html] : pages) {
        std::string file = "page" + std::to_string(i++) + ".html";
        write_file(root / file, html);
        j["pages"][u] = file;
    }
    for (const auto& [u, target] : redirects) j["redirects"][u] = target;
    i = 0;
    for (const auto& [u, m] : manifests) {
        std::string file = "manifest" + std::to_string(i++) + ".json";
        write_file(root / file, manifest_to_json(m));
        j["manifests"][u] = file;
    }
    write_file(root / "bundle.json", j.dump(2));
}

SimulatorSession::SimulatorSession(std::shared_ptr<const SiteBundle> bundle)
    : bundle_(std::move(bundle)) {}

void SimulatorSession::navigate(const std::string& u) {
    std::string target = url::canonicalize(u);
    for (int hops = 0; hops < 8; ++hops) {
        auto redir = bundle_->redirects.find(target);
        if (redir == bundle_->redirects.end()) break;
        target = url::canonicalize(redir->second);
    }
    auto it = bundle_->pages.find(target);
    if (it == bundle_->pages.end()) throw PageNotFound(u);
    doc_ = dom::parse_document(it->second);
    auto m = bundle_->manifests.find(target);
    manifest_ = (m == bundle_->manifests.end()) ? nullptr : &m->second;
    current_url_ = target;
    loaded_ = true;
}

std::string SimulatorSession::page_source() {
    if (!loaded_) throw SessionLost("no page loaded");
    return dom::serialize(doc_);
}

Element* SimulatorSession::require_interactable(const ElementRef& ref) {
    if (!loaded_) throw SessionLost("no page loaded");
    Element* el = dom::resolve_unique(doc_, ref);
    if (!el) throw ElementNotFound(dom::to_string(ref));
    if (!dom::is_visible(*el) || !dom::is_enabled(*el)) {
        throw ElementNotInteractable(dom::to_string(ref));
    }
    return el;
}

std::string SimulatorSession::effective_value(const Element& el) const {
    if (el.prop_value) return *el.prop_value;
    if (el.tag == "select") {
        std::string first;
        bool have_first = false;
        const Element* selected = nullptr;
        std::function<void(const Element&)> rec = [&](const Element& e) {
            if (e.tag == "option") {
                if (!have_first) {
                    have_first = true;
                    const std::string* v = e.attr("value");
                    first = v ? *v : "";
                }
                if (e.has_attr("selected") && !selected) selected = &e;
            }
            for (const auto& c : e.children) rec(*c);
        };
        rec(el);
        if (selected) {
            const std::string* v = selected->attr("value");
            return v ? *v : "";
        }
        return first;
    }
    const std::string* v = el.attr("value");
    return v ? *v : "";
}

bool SimulatorSession::effective_checked(const Element& el) const {
    if (el.prop_checked) return *el.prop_checked;
    return el.has_attr("checked");
}

void SimulatorSession::clear_descendant_state(Element& el) {
    el.prop_value.reset();
    el.prop_checked.reset();
    for (auto& c : el.children) clear_descendant_state(*c);
}

void SimulatorSession::apply_rules(const Element* interacted, bool clicked) {
    if (!manifest_) return;
    std::vector<bool> fired(manifest_->rules.size(), false);
    bool progress = true;
    bool first_pass = true;
    while (progress) {
        progress = false;
        for (size_t i = 0; i < manifest_->rules.size(); ++i) {
            if (fired[i]) continue;
            const ReactionRule& r = manifest_->rules[i];
            Element* trig = dom::resolve_unique(doc_, r.trigger);
            if (!trig || !dom::is_visible(*trig)) continue;
            bool hit = false;
            switch (r.condition) {
                case ConditionKind::clicked:
                    hit = first_pass && clicked && trig == interacted;
                    break;
                case ConditionKind::value_equals:
                    hit = effective_value(*trig) == r.condition_value;
                    break;
                case ConditionKind::checked:
                    hit = effective_checked(*trig);
                    break;
            }
            if (!hit) continue;
            fired[i] = true;
            progress = true;
            for (const auto& [target, op] : r.effects) {
                Element* el =
                    dom::resolve_unique(doc_, {RefStrategy::id, target});
                if (!el) continue;
                if (op == EffectOp::show) {
                    set_display(*el, "block");
                } else {
                    set_display(*el, "none");
                    clear_descendant_state(*el);
                }
            }
        }
        first_pass = false;
    }
}

void SimulatorSession::interact(const ElementRef& ref, const Action& action) {
    Element* el = require_interactable(ref);
    bool clicked = false;
    switch (action.type) {
        case ActionType::click: {
            clicked = true;
            if (el->tag == "a") {
                if (const std::string* href = el->attr("href")) {
                    navigate(url::resolve(current_url_, *href));
                    return;
                }
            }
            if (el->tag == "button") {
                if (const std::string* nav = el->attr("data-nav")) {
                    navigate(url::resolve(current_url_, *nav));
                    return;
                }
            }
            if (el->tag == "input") {
                std::string t = input_type(*el);
                if (t == "checkbox") {
                    el->prop_checked = !effective_checked(*el);
                } else if (t == "radio") {
                    const std::string* group = el->attr("name");
                    if (group) {
                        std::function<void(Element&)> rec = [&](Element& e) {
                            if (e.tag == "input" && input_type(e) == "radio" &&
                                e.attr("name") && *e.attr("name") == *group) {
                                e.prop_checked = false;
                            }
                            for (auto& c : e.children) rec(*c);
                        };
                        rec(*doc_.root);
                    }
                    el->prop_checked = true;
                }
            }
            break;
        }
        case ActionType::set_value: {
            if (el->tag == "input" && input_type(*el) == "file") {
                throw ValueRejected("file inputs have no filesystem semantics "
                                    "in the simulator");
            }
            if (!is_text_entry(*el)) {
                throw InvalidAction("set_value on " + el->tag + "/" +
                                    (el->tag == "input" ? input_type(*el) : ""));
            }
            el->prop_value = action.value;
            break;
        }
        case ActionType::select_option: {
            if (el->tag == "select") {
                bool found = false;
                std::function<void(const Element&)> rec =
                    [&](const Element& e) {
                        if (e.tag == "option") {
                            const std::string* v = e.attr("value");
                            std::string val = v ? *v : "";
                            if (val == action.value) found = true;
                        }
                        for (const auto& c : e.children) rec(*c);
                    };
                rec(*el);
                if (!found) {
                    throw ValueRejected("no option '" + action.value + "'");
                }
                el->prop_value = action.value;
            } else if (el->tag == "input" && input_type(*el) == "radio") {
                const std::string* group = el->attr("name");
                Element* hit = nullptr;
                std::function<void(Element&)> rec = [&](Element& e) {
                    if (e.tag == "input" && input_type(e) == "radio" && group &&
                        e.attr("name") && *e.attr("name") == *group) {
                        e.prop_checked = false;
                        const std::string* v = e.attr("value");
                        if ((v ? *v : "on") == action.value) hit = &e;
                    }
                    for (auto& c : e.children) rec(*c);
                };
                rec(*doc_.root);
                if (!hit) {
                    throw ValueRejected("no radio option '" + action.value + "'");
                }
                hit->prop_checked = true;
                el = hit;
            } else {
                throw InvalidAction("select_option on " + el->tag);
            }
            break;
        }
        case ActionType::toggle: {
            if (el->tag != "input" || input_type(*el) != "checkbox") {
                throw InvalidAction("toggle on " + el->tag);
            }
            el->prop_checked = !effective_checked(*el);
            break;
        }
    }
    apply_rules(el, clicked);
}

std::string SimulatorSession::get_property(const ElementRef& ref,
                                           const std::string& name) {
    if (!loaded_) throw SessionLost("no page loaded");
    Element* el = dom::resolve_unique(doc_, ref);
    if (!el) throw ElementNotFound(dom::to_string(ref));
    if (name == "value") return effective_value(*el);
    if (name == "checked") return effective_checked(*el) ? "true" : "false";
    throw InvalidAction("unknown property: " + name);
}

}  // namespace formnav::sim

namespace formnav {

const char* action_name(ActionType t) {
    switch (t) {
        case ActionType::click: return "click";
        case ActionType::set_value: return "set_value";
        case ActionType::select_option: return "select_option";
        case ActionType::toggle: return "toggle";
    }
    return "click";
}

}  // namespace formnav
