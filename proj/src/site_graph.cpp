#include "formnav/site_graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "formnav/errors.hpp"
#include "formnav/url.hpp"

namespace formnav::graph {

using json = nlohmann::json;
using dom::Element;
using dom::ElementRef;
using dom::RefStrategy;

namespace {

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool ws = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            ws = true;
        } else {
            if (ws && !out.empty()) out += ' ';
            ws = false;
            out += c;
        }
    }
    return out;
}

std::string visible_text(const Element& el) {
    std::string out;
    std::function<void(const Element&)> rec = [&](const Element& e) {
        if (e.is_text()) out += e.text;
        for (const auto& c : e.children) rec(*c);
    };
    rec(el);
    return collapse_ws(out);
}

bool inside_form(const Element& el) {
    for (const Element* p = el.parent; p; p = p->parent) {
        if (p->tag == "form") return true;
    }
    return false;
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

}  // namespace

const PageNode* TransitionGraph::node(int id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

const PageNode* TransitionGraph::by_url(const std::string& canonical) const {
    for (const auto& n : nodes) {
        if (n.url == canonical) return &n;
    }
    return nullptr;
}

TransitionGraph crawl(Session& session, const std::string& start_url,
                      const CrawlLimits& limits) {
    TransitionGraph g;
    std::map<std::string, int> url_to_id;
    auto node_for = [&](const std::string& canonical) {
        auto it = url_to_id.find(canonical);
        if (it != url_to_id.end()) return it->second;
        PageNode n;
        n.id = static_cast<int>(g.nodes.size());
        n.url = canonical;
        url_to_id[canonical] = n.id;
        g.nodes.push_back(std::move(n));
        return g.nodes.back().id;
    };

    std::string start = url::canonicalize(start_url);
    std::string start_origin = url::origin(start);
    g.start_id = node_for(start);

    struct Item {
        int id;
        int depth;
    };
    std::deque<Item> queue{{g.start_id, 0}};
    std::set<int> expanded;

    while (!queue.empty()) {
        Item item = queue.front();
        queue.pop_front();
        if (expanded.count(item.id)) continue;
        if (static_cast<int>(expanded.size()) >= limits.max_pages) break;
        if (item.depth > limits.max_depth) continue;
        std::string page_url = g.nodes[item.id].url;
        if (limits.same_origin && url::origin(page_url) != start_origin) {
            continue;
        }
        try {
            session.navigate(page_url);
        } catch (const Error& e) {
            if (item.id == g.start_id) throw StartUnreachable(page_url);
            g.nodes[item.id].metadata["error"] = e.what();
            continue;
        }
        expanded.insert(item.id);
        dom::HtmlDocument doc = dom::parse_document(session.page_source());
        g.nodes[item.id].fingerprint = dom::fingerprint_element(*doc.root);
        g.nodes[item.id].has_forms = !dom::extract_forms(doc).empty();
        auto titles = dom::resolve(doc, {RefStrategy::css, "title"});
        if (!titles.empty()) {
            g.nodes[item.id].title = visible_text(*titles.front());
        }

        // anchors
        std::vector<const Element*> anchors;
        std::vector<const Element*> buttons;
        std::function<void(const Element&)> rec = [&](const Element& e) {
            if (e.tag == "a" && e.has_attr("href") && dom::is_visible(e)) {
                anchors.push_back(&e);
            }
            if (e.tag == "button" && dom::is_visible(e) && dom::is_enabled(e)) {
                const std::string* t = e.attr("type");
                bool submit_like =
                    inside_form(e) && (!t || *t == "submit");
                if (!submit_like) buttons.push_back(&e);
            }
            for (const auto& c : e.children) rec(*c);
        };
        rec(*doc.root);

        for (const Element* a : anchors) {
            std::string target =
                url::canonicalize(url::resolve(page_url, *a->attr("href")));
            if (url::origin(target).empty()) continue;
            NavEdge e;
            e.source = item.id;
            e.target = node_for(target);
            e.affordance = {AffordanceKind::anchor, dom::make_ref(doc, *a),
                            visible_text(*a)};
            g.edges.push_back(e);
            bool within_origin =
                !limits.same_origin || url::origin(target) == start_origin;
            if (within_origin && item.depth < limits.max_depth) {
                queue.push_back({e.target, item.depth + 1});
            }
        }

        // probe buttons: only those observed to change the url become edges
        for (const Element* b : buttons) {
            ElementRef ref = dom::make_ref(doc, *b);
            try {
                session.interact(ref, Action::click());
            } catch (const Error&) {
                continue;
            }
            std::string after = url::canonicalize(session.current_url());
            if (after != page_url) {
                NavEdge e;
                e.source = item.id;
                e.target = node_for(after);
                e.affordance = {AffordanceKind::button, ref, visible_text(*b)};
                g.edges.push_back(e);
                bool within_origin = !limits.same_origin ||
                                     url::origin(after) == start_origin;
                if (within_origin && item.depth < limits.max_depth) {
                    queue.push_back({e.target, item.depth + 1});
                }
                session.navigate(page_url);
            }
        }
    }
    return g;
}

std::vector<NavEdge> shortest_path(const TransitionGraph& g, int start,
                                   int dest) {
    if (!g.node(start)) throw UnknownNode(std::to_string(start));
    if (!g.node(dest)) throw UnknownNode(std::to_string(dest));
    if (start == dest) return {};

    size_t n = g.nodes.size();
    std::vector<std::vector<size_t>> out(n);  // edge indices by source
    for (size_t i = 0; i < g.edges.size(); ++i) {
        out[g.edges[i].source].push_back(i);
    }
    // edges relaxed in (target id, edge order): equal-weight alternatives
    // resolve to the smallest target node id
    for (auto& lst : out) {
        std::stable_sort(lst.begin(), lst.end(), [&](size_t a, size_t b) {
            return g.edges[a].target < g.edges[b].target;
        });
    }

    const double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, kInf);
    std::vector<int> pred_edge(n, -1);
    using QItem = std::pair<double, int>;
    std::priority_queue<QItem, std::vector<QItem>, std::greater<>> pq;
    dist[start] = 0;
    pq.push({0, start});
    while (!pq.empty()) {
        auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (size_t ei : out[u]) {
            const NavEdge& e = g.edges[ei];
            if (e.weight <= 0) continue;
            double nd = d + e.weight;
            if (nd < dist[e.target]) {
                dist[e.target] = nd;
                pred_edge[e.target] = static_cast<int>(ei);
                pq.push({nd, e.target});
            }
        }
    }
    if (dist[dest] == kInf) throw NoPath(start, dest);
    std::vector<NavEdge> path;
    for (int v = dest; v != start;) {
        const NavEdge& e = g.edges[pred_edge[v]];
        path.push_back(e);
        v = e.source;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

std::string graph_to_json(const TransitionGraph& g) {
    json j;
    j["version"] = 1;
    j["start_id"] = g.start_id;
    j["nodes"] = json::array();
    for (const auto& n : g.nodes) {
        j["nodes"].push_back({{"id", n.id},
                              {"url", n.url},
                              {"fingerprint",
                               {{"digest", n.fingerprint.digest},
                                {"field_count", n.fingerprint.field_count}}},
                              {"title", n.title},
                              {"has_forms", n.has_forms},
                              {"metadata", n.metadata}});
    }
    j["edges"] = json::array();
    for (const auto& e : g.edges) {
        j["edges"].push_back(
            {{"source", e.source},
             {"target", e.target},
             {"affordance",
              {{"kind", e.affordance.kind == AffordanceKind::anchor
                            ? "anchor"
                            : "button"},
               {"ref", ref_to_json(e.affordance.ref)},
               {"label", e.affordance.label}}},
             {"weight", e.weight}});
    }
    return j.dump(2);
}

TransitionGraph graph_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw SchemaViolation(std::string("graph parse: ") + e.what());
    }
    if (!j.contains("version") || j["version"].get<int>() != 1) {
        throw SchemaViolation("unsupported graph schema version");
    }
    TransitionGraph g;
    g.start_id = j.at("start_id").get<int>();
    for (const auto& jn : j.at("nodes")) {
        PageNode n;
        n.id = jn.at("id").get<int>();
        n.url = jn.at("url").get<std::string>();
        n.fingerprint.digest = jn.at("fingerprint").at("digest");
        n.fingerprint.field_count = jn.at("fingerprint").at("field_count");
        n.title = jn.value("title", "");
        n.has_forms = jn.value("has_forms", false);
        n.metadata =
            jn.value("metadata", std::map<std::string, std::string>{});
        g.nodes.push_back(std::move(n));
    }
    for (const auto& je : j.at("edges")) {
        NavEdge e;
        e.source = je.at("source").get<int>();
        e.target = je.at("target").get<int>();
        const json& ja = je.at("affordance");
        e.affordance.kind = ja.at("kind").get<std::string>() == "anchor"
                                ? AffordanceKind::anchor
                                : AffordanceKind::button;
        e.affordance.ref = ref_from_json(ja.at("ref"));
        e.affordance.label = ja.value("label", "");
        e.weight = je.value("weight", 1.0);
        if (!g.node(e.source) || !g.node(e.target)) {
            throw SchemaViolation("edge endpoint does not exist");
        }
        g.edges.push_back(std::move(e));
    }
    if (!g.nodes.empty() && !g.node(g.start_id)) {
        throw SchemaViolation("start_id does not exist");
    }
    return g;
}

void save_graph(const TransitionGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << graph_to_json(g);
}

TransitionGraph load_graph(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return graph_from_json(ss.str());
}

bool graph_equal(const TransitionGraph& a, const TransitionGraph& b) {
    if (a.start_id != b.start_id || a.nodes.size() != b.nodes.size() ||
        a.edges.size() != b.edges.size()) {
        return false;
    }
    for (size_t i = 0; i < a.nodes.size(); ++i) {
        const PageNode &x = a.nodes[i], &y = b.nodes[i];
        if (x.id != y.id || x.url != y.url ||
            x.fingerprint != y.fingerprint || x.title != y.title ||
            x.has_forms != y.has_forms || x.metadata != y.metadata) {
            return false;
        }
    }
    for (size_t i = 0; i < a.edges.size(); ++i) {
        const NavEdge &x = a.edges[i], &y = b.edges[i];
        if (x.source != y.source || x.target != y.target ||
            x.weight != y.weight ||
            x.affordance.kind != y.affordance.kind ||
            x.affordance.ref != y.affordance.ref ||
            x.affordance.label != y.affordance.label) {
            return false;
        }
    }
    return true;
}

}  // namespace formnav::graph
