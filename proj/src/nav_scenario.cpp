#include "formnav/nav_scenario.hpp"

#include <fstream>
#include <sstream>

#include "formnav/errors.hpp"
#include "formnav/jsonio.hpp"
#include "formnav/url.hpp"

namespace formnav::nav {

using json = nlohmann::json;
using graph::AffordanceKind;
using graph::NavEdge;
using graph::TransitionGraph;

namespace {

const char* kind_name(AffordanceKind k) {
    return k == AffordanceKind::anchor ? "anchor" : "button";
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

ActionText fallback_action(const NavEdge& edge,
                           const std::string& target_title) {
    ActionText out;
    const auto& a = edge.affordance;
    if (!a.label.empty()) {
        out.action = std::string("Click the ") + kind_name(a.kind) +
                     " labeled '" + a.label + "'";
    } else {
        out.action = std::string("Click the ") + kind_name(a.kind) + " at " +
                     dom::to_string(a.ref);
    }
    out.expected = "The page '" + target_title + "' is displayed";
    out.from_llm = false;
    return out;
}

// Reply must carry exactly one line starting with each keyword.
bool parse_llm_reply(const std::string& reply, ActionText& out) {
    std::istringstream lines(reply);
    std::string line, action, expected;
    while (std::getline(lines, line)) {
        std::string t = trim(line);
        if (t.rfind("ACTION:", 0) == 0) action = trim(t.substr(7));
        else if (t.rfind("EXPECTED:", 0) == 0) expected = trim(t.substr(9));
    }
    if (action.empty() || expected.empty()) return false;
    out.action = action;
    out.expected = expected;
    out.from_llm = true;
    return true;
}

json edge_to_json(const NavEdge& e) {
    return json{{"source", e.source},
                {"target", e.target},
                {"weight", e.weight},
                {"affordance",
                 {{"kind", kind_name(e.affordance.kind)},
                  {"ref", jsonio::ref_to_json(e.affordance.ref)},
                  {"label", e.affordance.label}}}};
}

NavEdge edge_from_json(const json& j) {
    NavEdge e;
    e.source = j.at("source").get<int>();
    e.target = j.at("target").get<int>();
    e.weight = j.value("weight", 1.0);
    const json& a = j.at("affordance");
    std::string kind = a.value("kind", "anchor");
    e.affordance.kind = kind == "button" ? AffordanceKind::button
                                         : AffordanceKind::anchor;
    e.affordance.ref = jsonio::ref_from_json(a.at("ref"));
    e.affordance.label = a.value("label", "");
    return e;
}

}  // namespace

int resolve_node(const TransitionGraph& g, const std::string& which) {
    if (!which.empty() &&
        which.find_first_not_of("0123456789") == std::string::npos) {
        int id = std::stoi(which);
        if (g.node(id)) return id;
        throw UnknownNode(which);
    }
    if (const graph::PageNode* n = g.by_url(url::canonicalize(which))) {
        return n->id;
    }
    throw UnknownNode(which);
}

PathResult identify_path(const TransitionGraph& g, const TestRequest& request) {
    PathResult out;
    out.start_id = resolve_node(g, request.start);
    out.dest_id = resolve_node(g, request.destination);
    try {
        out.edges = graph::shortest_path(g, out.start_id, out.dest_id);
    } catch (const NoPath& e) {
        out.unreachable = true;
        out.finding = std::string("destination unreachable: ") + e.what();
    }
    return out;
}

std::string action_prompt(const NavEdge& edge, const std::string& source_title,
                          const std::string& target_title) {
    std::string prompt =
        "You are writing one step of a manual web navigation test.\n"
        "Current page title: " + source_title + "\n"
        "Destination page title: " + target_title + "\n"
        "Element kind: " + kind_name(edge.affordance.kind) + "\n"
        "Element label: " + edge.affordance.label + "\n"
        "Element selector: " + dom::to_string(edge.affordance.ref) + "\n"
        "Write the interaction a tester should perform on the current page\n"
        "and the outcome they should observe afterwards. Reply with exactly\n"
        "two lines: the first starting with the word ACTION followed by a\n"
        "colon, the second starting with the word EXPECTED followed by a\n"
        "colon.\n";
    return prompt;
}

ActionText generate_action(const NavEdge& edge,
                           const std::string& source_title,
                           const std::string& target_title,
                           llm::LlmClient* llm) {
    if (llm) {
        try {
            std::string reply = llm->complete(
                {{"system", "You write precise web UI test steps."},
                 {"user", action_prompt(edge, source_title, target_title)}});
            ActionText out;
            if (parse_llm_reply(reply, out)) return out;
        } catch (const Error&) {
            // fall through to the deterministic template
        }
    }
    return fallback_action(edge, target_title);
}

NavigationScenario construct_scenario(const TestRequest& request,
                                      const std::vector<NavEdge>& path,
                                      const std::vector<ActionText>& actions,
                                      const std::string& llm_model) {
    if (path.size() != actions.size()) {
        throw LengthMismatch(path.size(), actions.size());
    }
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        if (path[i].target != path[i + 1].source) {
            throw InvalidSpec("path breaks the chain at step " +
                              std::to_string(i + 1));
        }
    }
    NavigationScenario s;
    s.request = request;
    s.trivially_satisfied = path.empty();
    bool any_llm = false;
    for (size_t i = 0; i < path.size(); ++i) {
        ScenarioStep step;
        step.index = static_cast<int>(i) + 1;
        step.action = actions[i].action;
        step.expected = actions[i].expected;
        step.edge = path[i];
        if (actions[i].from_llm) any_llm = true;
        s.steps.push_back(std::move(step));
    }
    s.generator = (any_llm && !llm_model.empty()) ? llm_model : "fallback";
    return s;
}

NavigationScenario generate_scenario(const TransitionGraph& g,
                                     const TestRequest& request,
                                     llm::LlmClient* llm) {
    PathResult path = identify_path(g, request);
    if (path.unreachable) {
        NavigationScenario s;
        s.request = request;
        s.generator = "fallback";
        s.unreachable = true;
        s.finding = path.finding;
        return s;
    }
    std::vector<ActionText> actions;
    for (const NavEdge& e : path.edges) {
        const graph::PageNode* src = g.node(e.source);
        const graph::PageNode* dst = g.node(e.target);
        actions.push_back(generate_action(e, src ? src->title : "",
                                          dst ? dst->title : "", llm));
    }
    return construct_scenario(request, path.edges, actions,
                              llm ? llm->config().model : "");
}

std::string scenario_to_json(const NavigationScenario& s) {
    json j;
    j["version"] = 1;
    j["request"] = {{"start", s.request.start},
                    {"destination", s.request.destination}};
    j["generator"] = s.generator;
    j["trivially_satisfied"] = s.trivially_satisfied;
    j["unreachable"] = s.unreachable;
    if (s.unreachable) j["finding"] = s.finding;
    j["steps"] = json::array();
    for (const auto& st : s.steps) {
        j["steps"].push_back({{"index", st.index},
                              {"action", st.action},
                              {"expected", st.expected},
                              {"edge", edge_to_json(st.edge)}});
    }
    return j.dump(2);
}

NavigationScenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("scenario parse: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported scenario schema version");
    }
    NavigationScenario s;
    s.request.start = j.at("request").at("start");
    s.request.destination = j.at("request").at("destination");
    s.generator = j.value("generator", "fallback");
    s.trivially_satisfied = j.value("trivially_satisfied", false);
    s.unreachable = j.value("unreachable", false);
    s.finding = j.value("finding", "");
    for (const auto& js : j.value("steps", json::array())) {
        ScenarioStep st;
        st.index = js.at("index").get<int>();
        st.action = js.at("action");
        st.expected = js.at("expected");
        st.edge = edge_from_json(js.at("edge"));
        s.steps.push_back(std::move(st));
    }
    return s;
}

void save_scenario(const NavigationScenario& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << scenario_to_json(s);
}

NavigationScenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json(ss.str());
}

std::string render_markdown(const NavigationScenario& s) {
    std::ostringstream out;
    out << "# Navigation test scenario\n\n";
    out << "- Start: " << s.request.start << "\n";
    out << "- Destination: " << s.request.destination << "\n";
    out << "- Generator: " << s.generator << "\n\n";
    if (s.unreachable) {
        out << "**Finding:** " << s.finding << "\n";
        return out.str();
    }
    if (s.trivially_satisfied) {
        out << "Start and destination coincide; the scenario is trivially "
               "satisfied.\n";
        return out.str();
    }
    for (const auto& st : s.steps) {
        out << st.index << ". " << st.action << "\n";
        out << "   - Expected: " << st.expected << "\n";
    }
    return out.str();
}

}  // namespace formnav::nav
