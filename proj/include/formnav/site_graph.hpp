#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "formnav/backend.hpp"
#include "formnav/dom.hpp"

namespace formnav::graph {

struct PageNode {
    int id = 0;
    std::string url;  // canonical
    dom::StateFingerprint fingerprint;
    std::string title;
    bool has_forms = false;
    std::map<std::string, std::string> metadata;
};

enum class AffordanceKind { anchor, button };

struct Affordance {
    AffordanceKind kind = AffordanceKind::anchor;
    dom::ElementRef ref;
    std::string label;  // visible text
};

struct NavEdge {
    int source = 0;
    int target = 0;
    Affordance affordance;
    double weight = 1.0;
};

struct TransitionGraph {
    std::vector<PageNode> nodes;
    std::vector<NavEdge> edges;
    int start_id = 0;

    const PageNode* node(int id) const;
    const PageNode* by_url(const std::string& canonical_url) const;
};

struct CrawlLimits {
    int max_depth = 3;
    int max_pages = 100;
    bool same_origin = true;
};

// Breadth-first crawl from start_url; nodes deduplicated by canonical URL,
// targets beyond the limits kept as unexpanded leaf nodes. Per-page failures
// are recorded in node metadata ("error"); only an unreachable start throws.
TransitionGraph crawl(Session& session, const std::string& start_url,
                      const CrawlLimits& limits);

// Dijkstra; empty path when start == dest, NoPath when dest is unreachable.
std::vector<NavEdge> shortest_path(const TransitionGraph& g, int start,
                                   int dest);

std::string graph_to_json(const TransitionGraph& g);
TransitionGraph graph_from_json(const std::string& text);
void save_graph(const TransitionGraph& g, const std::string& path);
TransitionGraph load_graph(const std::string& path);

bool graph_equal(const TransitionGraph& a, const TransitionGraph& b);

}  // namespace formnav::graph
