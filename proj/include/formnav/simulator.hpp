#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "formnav/backend.hpp"
#include "formnav/dom.hpp"

namespace formnav::sim {

enum class ConditionKind { value_equals, checked, clicked };
enum class EffectOp { show, hide };

struct ReactionRule {
    dom::ElementRef trigger;
    ConditionKind condition = ConditionKind::clicked;
    std::string condition_value;  // value_equals only
    std::vector<std::pair<std::string, EffectOp>> effects;  // target id -> op
};

struct GroundTruthField {
    std::string name;
    dom::ControlType control = dom::ControlType::text;
    dom::RequiredKind required = dom::RequiredKind::no;
    bool visible_initially = true;
    int sub_form = -1;  // -1: common section
};

struct ReactionManifest {
    std::vector<ReactionRule> rules;
    std::vector<std::string> initial_visible;  // element ids
    std::vector<GroundTruthField> fields;
    int state_count = 1;
};

std::string manifest_to_json(const ReactionManifest& m);
ReactionManifest manifest_from_json(const std::string& text);

// Ground-truth oracle: distinct reachable visibility configurations under
// the rules, by breadth-first enumeration from the initial configuration.
// Independent of the session implementation.
int enumerate_states(const std::string& html, const ReactionManifest& m);

struct SiteBundle {
    // keys are canonical urls
    std::map<std::string, std::string> pages;
    std::map<std::string, std::string> redirects;
    std::map<std::string, ReactionManifest> manifests;

    static SiteBundle single_page(const std::string& url,
                                  const std::string& html);
    static SiteBundle single_form(const std::string& html,
                                  const ReactionManifest& manifest);
    // Directory layout: bundle.json + referenced html/manifest files.
    static SiteBundle load_dir(const std::string& dir);
    void save_dir(const std::string& dir) const;
};

inline const char* kSingleFormUrl = "http://sim.local/form";

// Deterministic in-process backend. Reflects interactions into DOM
// properties (never attributes), applies reaction rules to inline display
// styles until fixpoint, one firing per rule per interaction.
class SimulatorSession : public Session {
public:
    explicit SimulatorSession(std::shared_ptr<const SiteBundle> bundle);

    void navigate(const std::string& url) override;
    void interact(const dom::ElementRef& ref, const Action& action) override;
    std::string page_source() override;
    std::string current_url() const override { return current_url_; }
    std::string get_property(const dom::ElementRef& ref,
                             const std::string& name) override;

private:
    dom::Element* require_interactable(const dom::ElementRef& ref);
    void apply_rules(const dom::Element* interacted, bool clicked);
    void clear_descendant_state(dom::Element& el);
    std::string effective_value(const dom::Element& el) const;
    bool effective_checked(const dom::Element& el) const;

    std::shared_ptr<const SiteBundle> bundle_;
    dom::HtmlDocument doc_;
    const ReactionManifest* manifest_ = nullptr;
    std::string current_url_;
    bool loaded_ = false;
};

}  // namespace formnav::sim
