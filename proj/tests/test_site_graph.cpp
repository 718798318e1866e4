#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <filesystem>
#include <memory>
#include <random>

#include "formnav/errors.hpp"
#include "formnav/simulator.hpp"
#include "formnav/site_graph.hpp"
#include "formnav/url.hpp"

using namespace formnav;
using namespace formnav::graph;

namespace {

TransitionGraph make_graph(int n, const std::vector<std::pair<int, int>>& edges,
                           int start = 0) {
    TransitionGraph g;
    for (int i = 0; i < n; ++i) {
        PageNode node;
        node.id = i;
        node.url = "http://x.test/p" + std::to_string(i);
        g.nodes.push_back(node);
    }
    for (auto [s, t] : edges) {
        NavEdge e;
        e.source = s;
        e.target = t;
        e.affordance.label = std::to_string(s) + "->" + std::to_string(t);
        g.edges.push_back(e);
    }
    g.start_id = start;
    return g;
}

// independent oracle: breadth-first search hop count, -1 if unreachable
int bfs_hops(const TransitionGraph& g, int start, int dest) {
    if (start == dest) return 0;
    std::vector<int> dist(g.nodes.size(), -1);
    std::deque<int> q{start};
    dist[start] = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (const auto& e : g.edges) {
            if (e.source != u || dist[e.target] >= 0) continue;
            dist[e.target] = dist[u] + 1;
            q.push_back(e.target);
        }
    }
    return dist[dest];
}

// independent oracle: exhaustive simple-path enumeration, minimum total weight
double enumerate_min_weight(const TransitionGraph& g, int start, int dest) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<bool> visited(g.nodes.size(), false);
    std::function<void(int, double)> rec = [&](int u, double w) {
        if (u == dest) {
            best = std::min(best, w);
            return;
        }
        visited[u] = true;
        for (const auto& e : g.edges) {
            if (e.source == u && !visited[e.target]) {
                rec(e.target, w + e.weight);
            }
        }
        visited[u] = false;
    };
    rec(start, 0);
    return best;
}

std::shared_ptr<const sim::SiteBundle> demo_site() {
    auto b = std::make_shared<sim::SiteBundle>();
    auto page = [&](const std::string& path, const std::string& body) {
        b->pages[url::canonicalize("http://site.test" + path)] = body;
    };
    page("/", "<title>Home</title><a href='/a'>A</a><a href='/b'>B</a>");
    page("/a", "<title>A</title><a href='/b'>B</a>");
    page("/b", "<title>B</title><form><input name=q></form>");
    return b;
}

}  // namespace

TEST_CASE("single page with no links crawls to one node, zero edges") {
    auto b = std::make_shared<sim::SiteBundle>(
        sim::SiteBundle::single_page("http://x.test/", "<p>alone</p>"));
    sim::SimulatorSession s(b);
    TransitionGraph g = crawl(s, "http://x.test/", {});
    CHECK(g.nodes.size() == 1);
    CHECK(g.edges.empty());
    CHECK_FALSE(g.nodes[0].has_forms);
}

TEST_CASE("three-page bundle: home -> {a,b}, a -> {b}") {
    sim::SimulatorSession s(demo_site());
    TransitionGraph g = crawl(s, "http://site.test/", {});
    CHECK(g.nodes.size() == 3);
    CHECK(g.edges.size() == 3);
    const PageNode* b = g.by_url("http://site.test/b");
    REQUIRE(b != nullptr);
    CHECK(b->has_forms);
    CHECK(b->title == "B");
}

TEST_CASE("max_pages bounds the number of expanded nodes") {
    auto bundle = std::make_shared<sim::SiteBundle>();
    for (int i = 0; i < 5; ++i) {
        std::string body;
        for (int j = 0; j < 5; ++j) {
            body += "<a href='/p" + std::to_string(j) + "'>p</a>";
        }
        bundle->pages[url::canonicalize("http://x.test/p" +
                                        std::to_string(i))] = body;
    }
    sim::SimulatorSession s(bundle);
    CrawlLimits limits;
    limits.max_pages = 2;
    TransitionGraph g = crawl(s, "http://x.test/p0", limits);
    int expanded = 0;
    for (const auto& n : g.nodes) {
        if (!n.fingerprint.digest.empty()) ++expanded;
    }
    CHECK(expanded == 2);
}

TEST_CASE("crawling the same bundle twice yields equal graphs") {
    sim::SimulatorSession s1(demo_site());
    sim::SimulatorSession s2(demo_site());
    TransitionGraph a = crawl(s1, "http://site.test/", {});
    TransitionGraph b = crawl(s2, "http://site.test/", {});
    CHECK(graph_equal(a, b));
}

TEST_CASE("crawl throws only when the start itself is unreachable") {
    auto b = std::make_shared<sim::SiteBundle>(sim::SiteBundle::single_page(
        "http://x.test/", "<a href='/dead'>dead</a>"));
    sim::SimulatorSession s(b);
    TransitionGraph g = crawl(s, "http://x.test/", {});
    CHECK(g.nodes.size() == 2);
    CHECK(g.nodes[1].metadata.count("error") == 1);

    sim::SimulatorSession s2(b);
    CHECK_THROWS_AS(crawl(s2, "http://x.test/nope", {}), StartUnreachable);
}

TEST_CASE("shortest_path trivial and error cases") {
    TransitionGraph g = make_graph(3, {{0, 1}, {1, 2}});
    CHECK(shortest_path(g, 0, 0).empty());
    CHECK(shortest_path(g, 0, 2).size() == 2);
    TransitionGraph disconnected = make_graph(3, {{0, 1}});
    CHECK_THROWS_AS(shortest_path(disconnected, 0, 2), NoPath);
    CHECK_THROWS_AS(shortest_path(g, 0, 99), UnknownNode);
}

TEST_CASE("direct edge beats longer chain under uniform weights") {
    TransitionGraph g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto path = shortest_path(g, 0, 2);
    REQUIRE(path.size() == 1);
    CHECK(path[0].source == 0);
    CHECK(path[0].target == 2);
}

TEST_CASE("property: Dijkstra equals BFS hops on 100 random graphs") {
    std::mt19937_64 rng(42);
    for (int iter = 0; iter < 100; ++iter) {
        int n = 2 + static_cast<int>(rng() % 199);
        std::vector<std::pair<int, int>> edges;
        int m = static_cast<int>(rng() % (3 * n));
        for (int i = 0; i < m; ++i) {
            edges.emplace_back(static_cast<int>(rng() % n),
                               static_cast<int>(rng() % n));
        }
        TransitionGraph g = make_graph(n, edges);
        int dest = static_cast<int>(rng() % n);
        int oracle = bfs_hops(g, 0, dest);
        CAPTURE(iter);
        if (oracle < 0) {
            if (dest != 0) CHECK_THROWS_AS(shortest_path(g, 0, dest), NoPath);
        } else {
            CHECK(shortest_path(g, 0, dest).size() ==
                  static_cast<size_t>(oracle));
        }
    }
}

TEST_CASE("property: path weight matches exhaustive enumeration (<=8 nodes)") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 60; ++iter) {
        int n = 2 + static_cast<int>(rng() % 7);
        std::vector<std::pair<int, int>> edges;
        int m = static_cast<int>(rng() % (2 * n + 1));
        for (int i = 0; i < m; ++i) {
            edges.emplace_back(static_cast<int>(rng() % n),
                               static_cast<int>(rng() % n));
        }
        TransitionGraph g = make_graph(n, edges);
        for (auto& e : g.edges) {
            e.weight = 1.0 + static_cast<double>(rng() % 9);
        }
        int dest = n - 1;
        double oracle = enumerate_min_weight(g, 0, dest);
        CAPTURE(iter);
        if (std::isinf(oracle)) {
            if (dest != 0) CHECK_THROWS_AS(shortest_path(g, 0, dest), NoPath);
        } else {
            auto path = shortest_path(g, 0, dest);
            double w = 0;
            for (const auto& e : path) w += e.weight;
            CHECK(w == doctest::Approx(oracle));
        }
    }
}

TEST_CASE("deterministic tie-break prefers the smallest node id") {
    // two equal-cost routes 0->1->3 and 0->2->3, inserted in reverse order
    TransitionGraph g = make_graph(4, {{0, 2}, {2, 3}, {0, 1}, {1, 3}});
    auto path = shortest_path(g, 0, 3);
    REQUIRE(path.size() == 2);
    CHECK(path[0].target == 1);
}

TEST_CASE("graph json round trip is structurally equal") {
    TransitionGraph g = make_graph(0, {});
    CHECK(graph_equal(graph_from_json(graph_to_json(g)), g));

    sim::SimulatorSession s(demo_site());
    TransitionGraph crawled = crawl(s, "http://site.test/", {});
    CHECK(graph_equal(graph_from_json(graph_to_json(crawled)), crawled));
}

TEST_CASE("unknown schema version raises SchemaViolation") {
    CHECK_THROWS_AS(
        graph_from_json(R"({"version": 99, "start_id": 0, "nodes": [],
                            "edges": []})"),
        SchemaViolation);
    CHECK_THROWS_AS(graph_from_json("not json"), SchemaViolation);
}

TEST_CASE("save/load through the filesystem") {
    namespace fs = std::filesystem;
    sim::SimulatorSession s(demo_site());
    TransitionGraph g = crawl(s, "http://site.test/", {});
    fs::path p = fs::temp_directory_path() / "formnav_graph_test.json";
    save_graph(g, p.string());
    CHECK(graph_equal(load_graph(p.string()), g));
    fs::remove(p);
    CHECK_THROWS_AS(load_graph((p / "nope").string()), IoError);
}
