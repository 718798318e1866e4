#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <set>

#include "formnav/errors.hpp"
#include "formnav/form_explorer.hpp"
#include "formnav/simulator.hpp"

using namespace formnav;
using namespace formnav::dom;
using namespace formnav::explore;
using formnav::sim::ConditionKind;
using formnav::sim::EffectOp;
using formnav::sim::ReactionManifest;
using formnav::sim::ReactionRule;
using formnav::sim::SiteBundle;

namespace {

std::shared_ptr<const SiteBundle> bundle_of(SiteBundle b) {
    return std::make_shared<const SiteBundle>(std::move(b));
}

ReactionRule value_rule(const std::string& trigger_id, const std::string& value,
                        std::vector<std::pair<std::string, EffectOp>> effects) {
    ReactionRule r;
    r.trigger = {RefStrategy::id, trigger_id};
    r.condition = ConditionKind::value_equals;
    r.condition_value = value;
    r.effects = std::move(effects);
    return r;
}

ReactionRule checked_rule(const std::string& trigger_id,
                          std::vector<std::pair<std::string, EffectOp>> effects) {
    ReactionRule r;
    r.trigger = {RefStrategy::id, trigger_id};
    r.condition = ConditionKind::checked;
    r.effects = std::move(effects);
    return r;
}

// no rules: nothing the explorer does may create a second state
SiteBundle simple_bundle() {
    std::string html =
        "<form id=f>"
        "<input name=first><input name=last type=email>"
        "<select id=color name=color>"
        "<option value='red'>Red</option><option value='blue'>Blue</option>"
        "</select>"
        "<input type=checkbox id=news name=news>"
        "<input type=radio name=plan value=a id=pa>"
        "<input type=radio name=plan value=b id=pb>"
        "<button type=submit>Send</button>"
        "</form>";
    return SiteBundle::single_form(html, ReactionManifest{});
}

// one trigger select, three options, three visibility configurations
SiteBundle three_option_bundle() {
    std::string html =
        "<form id=f>"
        "<select id=mode name=mode>"
        "<option value='none'>None</option>"
        "<option value='a'>A</option>"
        "<option value='b'>B</option>"
        "</select>"
        "<div id=suba style='display:none'><input name=a1></div>"
        "<div id=subb style='display:none'><input name=b1><input name=b2></div>"
        "</form>";
    ReactionManifest m;
    m.rules.push_back(value_rule(
        "mode", "a", {{"suba", EffectOp::show}, {"subb", EffectOp::hide}}));
    m.rules.push_back(value_rule(
        "mode", "b", {{"subb", EffectOp::show}, {"suba", EffectOp::hide}}));
    m.rules.push_back(value_rule(
        "mode", "none", {{"suba", EffectOp::hide}, {"subb", EffectOp::hide}}));
    m.state_count = sim::enumerate_states(html, m);
    return SiteBundle::single_form(html, m);
}

// two independent triggers: a two-option select and a reveal checkbox
SiteBundle nested_bundle() {
    std::string html =
        "<form id=f>"
        "<select id=kind name=kind>"
        "<option value='p'>Person</option><option value='c'>Company</option>"
        "</select>"
        "<div id=subp style='display:block'><input name=first></div>"
        "<div id=subc style='display:none'><input name=org></div>"
        "<input type=checkbox id=more name=more>"
        "<div id=extra style='display:none'><textarea name=notes></textarea>"
        "</div>"
        "</form>";
    ReactionManifest m;
    m.rules.push_back(value_rule(
        "kind", "p", {{"subp", EffectOp::show}, {"subc", EffectOp::hide}}));
    m.rules.push_back(value_rule(
        "kind", "c", {{"subc", EffectOp::show}, {"subp", EffectOp::hide}}));
    m.rules.push_back(checked_rule("more", {{"extra", EffectOp::show}}));
    m.initial_visible = {"subp"};
    m.state_count = sim::enumerate_states(html, m);
    return SiteBundle::single_form(html, m);
}

// chain: checking c1 reveals c2's section, checking c2 reveals a third
SiteBundle chain_bundle() {
    std::string html =
        "<form id=f>"
        "<input type=checkbox id=c1 name=c1>"
        "<div id=d1 style='display:none'>"
        "<input type=checkbox id=c2 name=c2></div>"
        "<div id=d2 style='display:none'><input name=deep></div>"
        "</form>";
    ReactionManifest m;
    m.rules.push_back(checked_rule("c1", {{"d1", EffectOp::show}}));
    m.rules.push_back(checked_rule("c2", {{"d2", EffectOp::show}}));
    m.state_count = sim::enumerate_states(html, m);
    return SiteBundle::single_form(html, m);
}

const ElementRef kForm{RefStrategy::id, "f"};

StateGraph explore_bundle(SiteBundle b, const ExploreLimits& limits = {},
                          ExploreStats* stats = nullptr) {
    sim::SimulatorSession s(bundle_of(std::move(b)));
    return explore::explore(s, sim::kSingleFormUrl, kForm, limits, stats);
}

}  // namespace

TEST_CASE("probe set: selects per option, radios, checkboxes, buttons") {
    HtmlDocument doc = parse_document(
        "<form id=f>"
        "<input name=t><input type=email name=e>"
        "<select id=s name=s><option value='1'>1</option>"
        "<option value='2'>2</option></select>"
        "<input type=radio id=r1 name=r value=x>"
        "<input type=checkbox id=c name=c>"
        "<button id=b type=button>More</button>"
        "<button type=submit>Send</button>"
        "<input type=checkbox id=hid name=hid style='display:none'>"
        "<input type=checkbox id=dis name=dis disabled>"
        "</form>");
    auto probes = probe_interactions(doc, kForm);
    REQUIRE(probes.size() == 5);
    CHECK(probes[0].action.type == ActionType::select_option);
    CHECK(probes[0].action.value == "1");
    CHECK(probes[1].action.value == "2");
    CHECK(probes[2].action.type == ActionType::click);   // radio
    CHECK(probes[3].action.type == ActionType::toggle);  // checkbox
    CHECK(probes[4].action.type == ActionType::click);   // type=button
    CHECK(probes[4].ref == ElementRef{RefStrategy::id, "b"});
}

TEST_CASE("missing form scope raises FormNotFound") {
    HtmlDocument doc = parse_document("<p>no form here</p>");
    CHECK_THROWS_AS(probe_interactions(doc, kForm), FormNotFound);

    sim::SimulatorSession s(bundle_of(
        SiteBundle::single_page("http://x.test/", "<p>bare</p>")));
    CHECK_THROWS_AS(explore::explore(s, "http://x.test/", kForm),
                    FormNotFound);
}

TEST_CASE("a form without reaction rules explores to exactly one state") {
    StateGraph g = explore_bundle(simple_bundle());
    CHECK(g.states.size() == 1);
    CHECK(g.edges.empty());
    CHECK_FALSE(g.truncated);
    CHECK(g.warnings.empty());
    CHECK(g.state(0)->path_from_root.empty());
    CHECK(g.state(0)->visible_fields.size() == 5);  // radios collapse to one
}

TEST_CASE("three-option trigger yields three states matching the manifest") {
    SiteBundle b = three_option_bundle();
    int truth = b.manifests.begin()->second.state_count;
    CHECK(truth == 3);
    StateGraph g = explore_bundle(b);
    CHECK(static_cast<int>(g.states.size()) == truth);
    CHECK_FALSE(g.truncated);

    // root shows only the select; branch states add their sub-form fields
    CHECK(g.state(0)->visible_fields.size() == 1);
    std::multiset<size_t> branch_sizes;
    for (const auto& s : g.states) {
        if (s.id != 0) branch_sizes.insert(s.visible_fields.size());
    }
    CHECK(branch_sizes == std::multiset<size_t>{2, 3});
}

TEST_CASE("independent triggers: explored states equal the enumeration") {
    SiteBundle b = nested_bundle();
    int truth = b.manifests.begin()->second.state_count;
    CHECK(truth == 4);
    ExploreStats stats;
    StateGraph g = explore_bundle(b, {}, &stats);
    CHECK(static_cast<int>(g.states.size()) == truth);
    CHECK(stats.probes > 0);
    CHECK(stats.restores > 0);
}

TEST_CASE("chained reveals are reached through recursion") {
    SiteBundle b = chain_bundle();
    int truth = b.manifests.begin()->second.state_count;
    CHECK(truth == 3);
    StateGraph g = explore_bundle(b);
    CHECK(static_cast<int>(g.states.size()) == truth);
    // the deepest state needs two interactions from the root
    size_t longest = 0;
    for (const auto& s : g.states) {
        longest = std::max(longest, s.path_from_root.size());
    }
    CHECK(longest == 2);
}

TEST_CASE("state fingerprints are pairwise distinct") {
    for (SiteBundle b : {three_option_bundle(), nested_bundle()}) {
        StateGraph g = explore_bundle(std::move(b));
        std::set<std::string> digests;
        for (const auto& s : g.states) digests.insert(s.fingerprint.digest);
        CHECK(digests.size() == g.states.size());
    }
}

TEST_CASE("edges connect known states via recorded interactions") {
    StateGraph g = explore_bundle(three_option_bundle());
    CHECK_FALSE(g.edges.empty());
    for (const auto& e : g.edges) {
        REQUIRE(g.state(e.from) != nullptr);
        REQUIRE(g.state(e.to) != nullptr);
        CHECK(e.from != e.to);
    }
    // returning to the root configuration is an edge, not a new state
    bool back_edge = false;
    for (const auto& e : g.edges) {
        if (e.to == 0) back_edge = true;
    }
    CHECK(back_edge);
}

TEST_CASE("max_states truncates instead of growing the graph") {
    ExploreLimits limits;
    limits.max_states = 2;
    StateGraph g = explore_bundle(three_option_bundle(), limits);
    CHECK(g.states.size() == 2);
    CHECK(g.truncated);
}

TEST_CASE("max_depth stops recursion and flags truncation") {
    ExploreLimits limits;
    limits.max_depth = 1;
    StateGraph g = explore_bundle(chain_bundle(), limits);
    CHECK(g.states.size() == 2);
    CHECK(g.truncated);
}

TEST_CASE("debug restore checks pass with zero mismatches") {
    ExploreLimits limits;
    limits.debug_check_restores = true;
    ExploreStats stats;
    StateGraph g = explore_bundle(nested_bundle(), limits, &stats);
    CHECK(g.states.size() == 4);
    CHECK(stats.restore_checks > 0);
    CHECK(stats.restore_mismatches == 0);
    CHECK(g.warnings.empty());
}

TEST_CASE("restore_state with an empty path reproduces the root") {
    auto b = bundle_of(three_option_bundle());
    sim::SimulatorSession s(b);
    s.navigate(sim::kSingleFormUrl);
    StateFingerprint root = fingerprint(
        parse_document(s.page_source()), kForm);
    s.interact({RefStrategy::id, "mode"}, Action::select_option("a"));
    restore_state(s, sim::kSingleFormUrl, {}, kForm, &root);
    CHECK(fingerprint(parse_document(s.page_source()), kForm) == root);
}

TEST_CASE("restore_state replays a recorded path to the same fingerprint") {
    auto b = bundle_of(three_option_bundle());
    sim::SimulatorSession s(b);
    s.navigate(sim::kSingleFormUrl);
    Interaction step{{RefStrategy::id, "mode"}, Action::select_option("b"),
                     "pick b"};
    s.interact(step.ref, step.action);
    StateFingerprint want = fingerprint(parse_document(s.page_source()), kForm);

    sim::SimulatorSession fresh(b);
    restore_state(fresh, sim::kSingleFormUrl, {step}, kForm, &want);
    CHECK(fingerprint(parse_document(fresh.page_source()), kForm) == want);
}

TEST_CASE("replay against a changed page raises ReplayDiverged") {
    auto b = bundle_of(three_option_bundle());
    sim::SimulatorSession s(b);
    s.navigate(sim::kSingleFormUrl);
    StateFingerprint root = fingerprint(parse_document(s.page_source()), kForm);

    // the expected fingerprint belongs to a different configuration
    Interaction step{{RefStrategy::id, "mode"}, Action::select_option("a"),
                     "pick a"};
    CHECK_THROWS_AS(
        restore_state(s, sim::kSingleFormUrl, {step}, kForm, &root),
        ReplayDiverged);

    // same path against a bundle whose page changed underneath
    SiteBundle mutated = three_option_bundle();
    mutated.pages.begin()->second =
        "<form id=f><select id=mode name=mode>"
        "<option value='none'>None</option></select></form>";
    sim::SimulatorSession m(bundle_of(std::move(mutated)));
    m.navigate(sim::kSingleFormUrl);
    StateFingerprint want = fingerprint(parse_document(s.page_source()), kForm);
    CHECK_THROWS_AS(restore_state(m, sim::kSingleFormUrl, {}, kForm, &want),
                    ReplayDiverged);
}

TEST_CASE("exploring the same bundle twice is deterministic") {
    StateGraph a = explore_bundle(nested_bundle());
    StateGraph b = explore_bundle(nested_bundle());
    CHECK(stategraph_to_json(a) == stategraph_to_json(b));
}

TEST_CASE("state graph json round trip") {
    StateGraph g = explore_bundle(nested_bundle());
    StateGraph back = stategraph_from_json(stategraph_to_json(g));
    CHECK(stategraph_to_json(back) == stategraph_to_json(g));
    CHECK(back.states.size() == g.states.size());
    CHECK(back.edges.size() == g.edges.size());
    CHECK(back.state(0)->fingerprint == g.state(0)->fingerprint);
}

TEST_CASE("state graph schema violations") {
    CHECK_THROWS_AS(stategraph_from_json("not json"), SchemaViolation);
    CHECK_THROWS_AS(stategraph_from_json(
                        R"({"version": 9, "form_scope":
                            {"strategy": "id", "value": "f"}, "states": []})"),
                    SchemaViolation);
}
