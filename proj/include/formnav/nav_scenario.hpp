#pragma once

#include <string>
#include <vector>

#include "formnav/llm.hpp"
#include "formnav/site_graph.hpp"

namespace formnav::nav {

struct TestRequest {
    std::string start;        // node id (decimal) or URL
    std::string destination;  // node id (decimal) or URL
};

struct ScenarioStep {
    int index = 0;  // 1-based
    std::string action;
    std::string expected;
    graph::NavEdge edge;
};

struct NavigationScenario {
    TestRequest request;
    std::vector<ScenarioStep> steps;
    std::string generator;  // llm model id or "fallback"
    bool trivially_satisfied = false;  // start == destination
    bool unreachable = false;
    std::string finding;  // set when unreachable
};

struct PathResult {
    int start_id = 0;
    int dest_id = 0;
    std::vector<graph::NavEdge> edges;
    bool unreachable = false;
    std::string finding;
};

struct ActionText {
    std::string action;
    std::string expected;
    bool from_llm = false;
};

// Decimal node id, or a URL matched canonically. Throws UnknownNode.
int resolve_node(const graph::TransitionGraph& g, const std::string& which);

// Shortest path for the request; an unreachable destination becomes a
// finding, not an exception.
PathResult identify_path(const graph::TransitionGraph& g,
                         const TestRequest& request);

// Instruction and expected-outcome text for one edge. A null or failing
// llm falls back to the deterministic template.
ActionText generate_action(const graph::NavEdge& edge,
                           const std::string& source_title,
                           const std::string& target_title,
                           llm::LlmClient* llm = nullptr);

// Throws LengthMismatch when |actions| != |path| and InvalidSpec when the
// path breaks the source/target chain.
NavigationScenario construct_scenario(const TestRequest& request,
                                      const std::vector<graph::NavEdge>& path,
                                      const std::vector<ActionText>& actions,
                                      const std::string& llm_model = "");

// identify_path + per-edge generate_action + construct_scenario.
NavigationScenario generate_scenario(const graph::TransitionGraph& g,
                                     const TestRequest& request,
                                     llm::LlmClient* llm = nullptr);

// The documented prompt template (the copy shipped in prompts/nav-action.txt).
std::string action_prompt(const graph::NavEdge& edge,
                          const std::string& source_title,
                          const std::string& target_title);

std::string scenario_to_json(const NavigationScenario& s);
NavigationScenario scenario_from_json(const std::string& text);
void save_scenario(const NavigationScenario& s, const std::string& path);
NavigationScenario load_scenario(const std::string& path);

std::string render_markdown(const NavigationScenario& s);

}  // namespace formnav::nav
