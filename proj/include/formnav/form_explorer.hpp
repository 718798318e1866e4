#pragma once

#include <string>
#include <vector>

#include "formnav/backend.hpp"
#include "formnav/dom.hpp"

namespace formnav::explore {

// A state-probing interaction. Free-text typing never probes: under the
// fingerprint normalization it cannot reveal conditional structure.
struct Interaction {
    dom::ElementRef ref;
    Action action;
    std::string label;
};

struct FormState {
    int id = 0;
    dom::StateFingerprint fingerprint;
    std::vector<dom::FieldDescriptor> visible_fields;
    std::vector<Interaction> path_from_root;
};

struct StateEdge {
    int from = 0;
    int to = 0;
    Interaction via;
};

struct StateGraph {
    std::vector<FormState> states;
    std::vector<StateEdge> edges;
    int root_id = 0;
    bool truncated = false;
    std::vector<std::string> warnings;
    std::string page_url;
    dom::ElementRef form_scope;

    const FormState* state(int id) const;
};

struct ExploreLimits {
    int max_states = 64;
    int max_depth = 8;
    // verify after every backtrack that the restored fingerprint equals the
    // one recorded before descending
    bool debug_check_restores = false;
};

struct ExploreStats {
    int probes = 0;
    int restores = 0;
    int restore_checks = 0;
    int restore_mismatches = 0;
};

// Depth-first exploration of a form's conditional states: probe, diff the
// fingerprint, recurse on unseen states, backtrack by reload + replay.
StateGraph explore(Session& session, const std::string& page_url,
                   const dom::ElementRef& form_scope,
                   const ExploreLimits& limits = {},
                   ExploreStats* stats = nullptr);

// Reload page_url and replay path. When expected is non-null, a fingerprint
// mismatch after replay raises ReplayDiverged.
void restore_state(Session& session, const std::string& page_url,
                   const std::vector<Interaction>& path,
                   const dom::ElementRef& form_scope,
                   const dom::StateFingerprint* expected = nullptr);

// Probe interactions available in the current document, document order.
std::vector<Interaction> probe_interactions(const dom::HtmlDocument& doc,
                                            const dom::ElementRef& form_scope);

std::string stategraph_to_json(const StateGraph& g);
StateGraph stategraph_from_json(const std::string& text);
void save_stategraph(const StateGraph& g, const std::string& path);
StateGraph load_stategraph(const std::string& path);

}  // namespace formnav::explore
