#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "formnav/errors.hpp"
#include "formnav/nav_scenario.hpp"

using namespace formnav;
using namespace formnav::nav;
using graph::AffordanceKind;
using graph::NavEdge;
using graph::TransitionGraph;

namespace {

TransitionGraph chain_graph() {
    TransitionGraph g;
    const char* titles[] = {"Home", "Products", "Pricing — Acme"};
    for (int i = 0; i < 3; ++i) {
        graph::PageNode n;
        n.id = i;
        n.url = "http://acme.test/p" + std::to_string(i);
        n.title = titles[i];
        g.nodes.push_back(n);
    }
    auto edge = [](int s, int t, AffordanceKind k, const std::string& label) {
        NavEdge e;
        e.source = s;
        e.target = t;
        e.affordance.kind = k;
        e.affordance.label = label;
        e.affordance.ref = {dom::RefStrategy::css, "a.nav" + std::to_string(t)};
        return e;
    };
    g.edges.push_back(edge(0, 1, AffordanceKind::anchor, "Products"));
    g.edges.push_back(edge(1, 2, AffordanceKind::anchor, "Pricing"));
    g.start_id = 0;
    return g;
}

TransitionGraph disconnected_graph() {
    TransitionGraph g = chain_graph();
    g.edges.clear();
    return g;
}

}  // namespace

TEST_CASE("nodes resolve by id and by canonicalized url") {
    TransitionGraph g = chain_graph();
    CHECK(resolve_node(g, "2") == 2);
    CHECK(resolve_node(g, "http://acme.test/p1") == 1);
    CHECK(resolve_node(g, "HTTP://ACME.test/p1") == 1);
    CHECK_THROWS_AS(resolve_node(g, "7"), UnknownNode);
    CHECK_THROWS_AS(resolve_node(g, "http://other.test/"), UnknownNode);
}

TEST_CASE("identify_path: chain, trivial, and unreachable cases") {
    TransitionGraph g = chain_graph();
    PathResult p = identify_path(g, {"0", "2"});
    CHECK(p.edges.size() == 2);
    CHECK_FALSE(p.unreachable);

    PathResult trivial = identify_path(g, {"1", "1"});
    CHECK(trivial.edges.empty());
    CHECK_FALSE(trivial.unreachable);

    PathResult lost = identify_path(disconnected_graph(), {"0", "2"});
    CHECK(lost.unreachable);
    CHECK(lost.finding.find("unreachable") != std::string::npos);

    CHECK_THROWS_AS(identify_path(g, {"0", "9"}), UnknownNode);
}

TEST_CASE("fallback action text follows the template exactly") {
    NavEdge e;
    e.affordance.kind = AffordanceKind::anchor;
    e.affordance.label = "Pricing";
    ActionText t = generate_action(e, "Products", "Pricing — Acme");
    CHECK(t.action == "Click the anchor labeled 'Pricing'");
    CHECK(t.expected == "The page 'Pricing — Acme' is displayed");
    CHECK_FALSE(t.from_llm);
}

TEST_CASE("unlabeled edges fall back to the selector text") {
    NavEdge e;
    e.affordance.kind = AffordanceKind::button;
    e.affordance.ref = {dom::RefStrategy::css, "#go"};
    ActionText t = generate_action(e, "A", "B");
    CHECK(t.action.find("button") != std::string::npos);
    CHECK(t.action.find(dom::to_string(e.affordance.ref)) !=
          std::string::npos);
}

TEST_CASE("canned llm reply is used verbatim") {
    llm::LlmConfig cfg;
    cfg.model = "nav-model";
    cfg.stub_responses = {"ACTION: Press the shiny thing.\n"
                          "EXPECTED: Sparks appear."};
    llm::LlmClient client(cfg);
    NavEdge e;
    e.affordance.label = "Go";
    ActionText t = generate_action(e, "A", "B", &client);
    CHECK(t.from_llm);
    CHECK(t.action == "Press the shiny thing.");
    CHECK(t.expected == "Sparks appear.");
}

TEST_CASE("unparseable llm output falls back automatically") {
    llm::LlmClient client{llm::LlmConfig{}};  // default echo stub
    NavEdge e;
    e.affordance.kind = AffordanceKind::anchor;
    e.affordance.label = "Docs";
    ActionText t = generate_action(e, "A", "Documentation", &client);
    CHECK_FALSE(t.from_llm);
    CHECK(t.action == "Click the anchor labeled 'Docs'");
}

TEST_CASE("construct_scenario numbers steps and keeps the chain") {
    TransitionGraph g = chain_graph();
    std::vector<ActionText> actions{{"a1", "e1", false}, {"a2", "e2", false}};
    NavigationScenario s =
        construct_scenario({"0", "2"}, g.edges, actions, "");
    REQUIRE(s.steps.size() == 2);
    CHECK(s.steps[0].index == 1);
    CHECK(s.steps[1].index == 2);
    CHECK(s.steps[0].edge.target == s.steps[1].edge.source);
    CHECK(s.generator == "fallback");
    CHECK_FALSE(s.trivially_satisfied);
}

TEST_CASE("length and chain violations are rejected") {
    TransitionGraph g = chain_graph();
    CHECK_THROWS_AS(construct_scenario({"0", "2"}, g.edges, {}, ""),
                    LengthMismatch);
    std::vector<NavEdge> shuffled{g.edges[1], g.edges[0]};
    std::vector<ActionText> actions{{"a", "e", false}, {"a", "e", false}};
    CHECK_THROWS_AS(construct_scenario({"0", "2"}, shuffled, actions, ""),
                    InvalidSpec);
}

TEST_CASE("generate_scenario ends at the destination and is deterministic") {
    TransitionGraph g = chain_graph();
    NavigationScenario s = generate_scenario(g, {"0", "2"});
    REQUIRE(s.steps.size() == 2);
    CHECK(s.steps.back().edge.target == 2);
    CHECK(s.steps[0].expected == "The page 'Products' is displayed");
    CHECK(scenario_to_json(s) == scenario_to_json(generate_scenario(g, {"0", "2"})));
}

TEST_CASE("start equal to destination is trivially satisfied") {
    NavigationScenario s = generate_scenario(chain_graph(), {"1", "1"});
    CHECK(s.steps.empty());
    CHECK(s.trivially_satisfied);
    CHECK_FALSE(s.unreachable);
}

TEST_CASE("unreachable destination becomes a finding, not a crash") {
    NavigationScenario s =
        generate_scenario(disconnected_graph(), {"0", "2"});
    CHECK(s.unreachable);
    CHECK(s.steps.empty());
    CHECK_FALSE(s.finding.empty());
    CHECK(render_markdown(s).find("Finding") != std::string::npos);
}

TEST_CASE("scenario json round trip and schema guard") {
    NavigationScenario s = generate_scenario(chain_graph(), {"0", "2"});
    NavigationScenario back = scenario_from_json(scenario_to_json(s));
    CHECK(scenario_to_json(back) == scenario_to_json(s));
    CHECK(back.steps.size() == 2);
    CHECK(back.steps[1].edge.target == 2);
    CHECK_THROWS_AS(scenario_from_json("nope"), SchemaViolation);
    CHECK_THROWS_AS(scenario_from_json(R"({"version": 3})"), SchemaViolation);
}

TEST_CASE("markdown lists every step with its expectation") {
    NavigationScenario s = generate_scenario(chain_graph(), {"0", "2"});
    std::string md = render_markdown(s);
    CHECK(md.find("1. Click the anchor labeled 'Products'") !=
          std::string::npos);
    CHECK(md.find("2. Click the anchor labeled 'Pricing'") !=
          std::string::npos);
    CHECK(md.find("Expected: The page 'Pricing — Acme' is displayed") !=
          std::string::npos);
}
