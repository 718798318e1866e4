#include "formnav/form_explorer.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "formnav/errors.hpp"
#include "formnav/jsonio.hpp"

namespace formnav::explore {

using json = nlohmann::json;
using dom::ElementRef;
using dom::RefStrategy;

namespace {

// fields of the form identified by scope, empty when absent
std::vector<dom::FieldDescriptor> fields_for_scope(
    const dom::HtmlDocument& doc, const ElementRef& scope) {
    auto scopes = dom::resolve(doc, scope);
    if (scopes.size() != 1) return {};
    const dom::Element* target = scopes.front();
    for (const auto& form : dom::extract_forms(doc)) {
        auto roots = dom::resolve(doc, form.root);
        if (roots.size() == 1 && roots.front() == target) return form.fields;
    }
    return {};
}

std::vector<dom::FieldDescriptor> visible_fields_for_scope(
    const dom::HtmlDocument& doc, const ElementRef& scope) {
    std::vector<dom::FieldDescriptor> out;
    for (auto& f : fields_for_scope(doc, scope)) {
        if (f.visible) out.push_back(std::move(f));
    }
    return out;
}

struct Explorer {
    Session& session;
    std::string page_url;
    ElementRef scope;
    ExploreLimits limits;
    ExploreStats* stats;
    StateGraph graph;
    std::map<std::string, int> seen;  // digest -> state id

    dom::HtmlDocument current_doc() {
        return dom::parse_document(session.page_source());
    }

    dom::StateFingerprint current_fp() {
        dom::HtmlDocument doc = current_doc();
        return dom::fingerprint(doc, scope);
    }

    void bump(int ExploreStats::*field) {
        if (stats) ++(stats->*field);
    }

    // reload + replay; returns false (with a warning) when replay diverges
    bool restore(const std::vector<Interaction>& path,
                 const dom::StateFingerprint& expected) {
        bump(&ExploreStats::restores);
        try {
            restore_state(session, page_url, path, scope, &expected);
        } catch (const ReplayDiverged& e) {
            graph.warnings.push_back(e.what());
            return false;
        } catch (const Error& e) {
            graph.warnings.push_back(std::string("restore failed: ") +
                                     e.what());
            return false;
        }
        return true;
    }

    void run(int state_id, int depth) {
        dom::HtmlDocument doc = current_doc();
        std::vector<Interaction> probes = probe_interactions(doc, scope);
        const dom::StateFingerprint here = graph.state(state_id)->fingerprint;
        const std::vector<Interaction> path =
            graph.state(state_id)->path_from_root;

        for (const Interaction& probe : probes) {
            bump(&ExploreStats::probes);
            try {
                session.interact(probe.ref, probe.action);
            } catch (const Error& e) {
                graph.warnings.push_back("probe '" + probe.label +
                                         "' failed: " + e.what());
                if (!restore(path, here)) return;
                continue;
            }
            if (url_changed()) {
                graph.warnings.push_back("probe '" + probe.label +
                                         "' left the page; branch closed");
                if (!restore(path, here)) return;
                continue;
            }
            dom::StateFingerprint after;
            try {
                after = current_fp();
            } catch (const Error& e) {
                graph.warnings.push_back(std::string("form lost: ") + e.what());
                if (!restore(path, here)) return;
                continue;
            }
            if (after == here) continue;

            auto it = seen.find(after.digest);
            if (it != seen.end()) {
                graph.edges.push_back({state_id, it->second, probe});
                if (!restore(path, here)) return;
                continue;
            }
            if (static_cast<int>(graph.states.size()) >= limits.max_states) {
                graph.truncated = true;
                if (!restore(path, here)) return;
                continue;
            }
            FormState next;
            next.id = static_cast<int>(graph.states.size());
            next.fingerprint = after;
            next.path_from_root = path;
            next.path_from_root.push_back(probe);
            {
                dom::HtmlDocument after_doc = current_doc();
                next.visible_fields = visible_fields_for_scope(after_doc, scope);
            }
            seen[after.digest] = next.id;
            graph.edges.push_back({state_id, next.id, probe});
            int next_id = next.id;
            graph.states.push_back(std::move(next));

            if (depth + 1 < limits.max_depth) {
                run(next_id, depth + 1);
            } else {
                graph.truncated = true;
            }

            if (!restore(path, here)) return;
            if (limits.debug_check_restores) {
                bump(&ExploreStats::restore_checks);
                if (current_fp() != here) {
                    bump(&ExploreStats::restore_mismatches);
                    graph.warnings.push_back(
                        "post-restore fingerprint mismatch at state " +
                        std::to_string(state_id));
                    return;
                }
            }
        }
    }

    bool url_changed() {
        return session.current_url() != page_url;
    }
};

}  // namespace

const FormState* StateGraph::state(int id) const {
    for (const auto& s : states) {
        if (s.id == id) return &s;
    }
    return nullptr;
}

std::vector<Interaction> probe_interactions(const dom::HtmlDocument& doc,
                                            const ElementRef& form_scope) {
    auto scopes = dom::resolve(doc, form_scope);
    if (scopes.empty()) throw FormNotFound(dom::to_string(form_scope));
    const dom::Element* root = scopes.front();
    std::vector<Interaction> out;
    std::function<void(const dom::Element&)> rec = [&](const dom::Element& e) {
        if (!e.is_text() && dom::is_visible(e) && dom::is_enabled(e)) {
            if (e.tag == "select") {
                ElementRef ref = dom::make_ref(doc, e);
                std::function<void(const dom::Element&)> opts =
                    [&](const dom::Element& o) {
                        if (o.tag == "option") {
                            const std::string* v = o.attr("value");
                            std::string val = v ? *v : "";
                            out.push_back({ref, Action::select_option(val),
                                           "select '" + val + "' in " +
                                               dom::to_string(ref)});
                        }
                        for (const auto& c : o.children) opts(*c);
                    };
                opts(e);
                return;  // options handled, skip subtree
            }
            if (e.tag == "input") {
                const std::string* t = e.attr("type");
                std::string type = t ? *t : "text";
                ElementRef ref = dom::make_ref(doc, e);
                if (type == "checkbox") {
                    out.push_back(
                        {ref, Action::toggle(), "toggle " + dom::to_string(ref)});
                } else if (type == "radio") {
                    out.push_back(
                        {ref, Action::click(), "choose " + dom::to_string(ref)});
                }
            }
            if (e.tag == "button") {
                const std::string* t = e.attr("type");
                if (t && *t == "button") {
                    ElementRef ref = dom::make_ref(doc, e);
                    out.push_back(
                        {ref, Action::click(), "click " + dom::to_string(ref)});
                }
            }
        }
        for (const auto& c : e.children) rec(*c);
    };
    for (const auto& c : root->children) rec(*c);
    return out;
}

void restore_state(Session& session, const std::string& page_url,
                   const std::vector<Interaction>& path,
                   const ElementRef& form_scope,
                   const dom::StateFingerprint* expected) {
    session.navigate(page_url);
    for (const Interaction& step : path) {
        session.interact(step.ref, step.action);
    }
    if (expected) {
        dom::HtmlDocument doc = dom::parse_document(session.page_source());
        dom::StateFingerprint got = dom::fingerprint(doc, form_scope);
        if (!(got == *expected)) {
            throw ReplayDiverged("expected " + expected->digest + ", got " +
                                 got.digest + " after replaying " +
                                 std::to_string(path.size()) + " steps");
        }
    }
}

StateGraph explore(Session& session, const std::string& page_url,
                   const ElementRef& form_scope, const ExploreLimits& limits,
                   ExploreStats* stats) {
    Explorer ex{session, page_url, form_scope, limits, stats, {}, {}};
    ex.graph.page_url = page_url;
    ex.graph.form_scope = form_scope;

    session.navigate(page_url);
    ex.page_url = session.current_url();  // post-redirect base for replays
    ex.graph.page_url = ex.page_url;
    dom::HtmlDocument doc = ex.current_doc();
    auto scopes = dom::resolve(doc, form_scope);
    if (scopes.size() != 1) throw FormNotFound(dom::to_string(form_scope));

    FormState root;
    root.id = 0;
    root.fingerprint = dom::fingerprint(doc, form_scope);
    root.visible_fields = visible_fields_for_scope(doc, form_scope);
    ex.seen[root.fingerprint.digest] = 0;
    ex.graph.states.push_back(std::move(root));
    ex.graph.root_id = 0;

    ex.run(0, 0);
    return ex.graph;
}

std::string stategraph_to_json(const StateGraph& g) {
    json j;
    j["version"] = 1;
    j["page_url"] = g.page_url;
    j["form_scope"] = jsonio::ref_to_json(g.form_scope);
    j["root_id"] = g.root_id;
    j["truncated"] = g.truncated;
    j["warnings"] = g.warnings;
    j["states"] = json::array();
    for (const auto& s : g.states) {
        json js;
        js["id"] = s.id;
        js["fingerprint"] = {{"digest", s.fingerprint.digest},
                             {"field_count", s.fingerprint.field_count}};
        js["visible_fields"] = json::array();
        for (const auto& f : s.visible_fields) {
            js["visible_fields"].push_back(jsonio::field_to_json(f));
        }
        js["path_from_root"] = json::array();
        for (const auto& i : s.path_from_root) {
            js["path_from_root"].push_back(
                {{"ref", jsonio::ref_to_json(i.ref)},
                 {"action", jsonio::action_to_json(i.action)},
                 {"label", i.label}});
        }
        j["states"].push_back(js);
    }
    j["edges"] = json::array();
    for (const auto& e : g.edges) {
        j["edges"].push_back({{"from", e.from},
                              {"to", e.to},
                              {"via",
                               {{"ref", jsonio::ref_to_json(e.via.ref)},
                                {"action", jsonio::action_to_json(e.via.action)},
                                {"label", e.via.label}}}});
    }
    return j.dump(2);
}

StateGraph stategraph_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("state graph parse: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported state graph schema version");
    }
    StateGraph g;
    g.page_url = j.value("page_url", "");
    g.form_scope = jsonio::ref_from_json(j.at("form_scope"));
    g.root_id = j.value("root_id", 0);
    g.truncated = j.value("truncated", false);
    g.warnings = j.value("warnings", std::vector<std::string>{});
    auto interaction_from = [](const json& ji) {
        Interaction i;
        i.ref = jsonio::ref_from_json(ji.at("ref"));
        i.action = jsonio::action_from_json(ji.at("action"));
        i.label = ji.value("label", "");
        return i;
    };
    for (const auto& js : j.at("states")) {
        FormState s;
        s.id = js.at("id").get<int>();
        s.fingerprint.digest = js.at("fingerprint").at("digest");
        s.fingerprint.field_count = js.at("fingerprint").at("field_count");
        for (const auto& jf : js.value("visible_fields", json::array())) {
            s.visible_fields.push_back(jsonio::field_from_json(jf));
        }
        for (const auto& ji : js.value("path_from_root", json::array())) {
            s.path_from_root.push_back(interaction_from(ji));
        }
        g.states.push_back(std::move(s));
    }
    for (const auto& je : j.value("edges", json::array())) {
        StateEdge e;
        e.from = je.at("from").get<int>();
        e.to = je.at("to").get<int>();
        e.via = interaction_from(je.at("via"));
        g.edges.push_back(std::move(e));
    }
    return g;
}

void save_stategraph(const StateGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << stategraph_to_json(g);
}

StateGraph load_stategraph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return stategraph_from_json(ss.str());
}

}  // namespace formnav::explore
