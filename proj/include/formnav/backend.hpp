#pragma once

#include <string>

#include "formnav/dom.hpp"

namespace formnav {

enum class ActionType { click, set_value, select_option, toggle };

struct Action {
    ActionType type = ActionType::click;
    std::string value;  // set_value / select_option payload

    static Action click() { return {ActionType::click, ""}; }
    static Action set_value(std::string v) {
        return {ActionType::set_value, std::move(v)};
    }
    static Action select_option(std::string v) {
        return {ActionType::select_option, std::move(v)};
    }
    static Action toggle() { return {ActionType::toggle, ""}; }
};

const char* action_name(ActionType t);

struct SessionConfig {
    std::string endpoint;          // remote driver URL (webdriver backend)
    int timeout_ms = 10000;        // per command
    int politeness_delay_ms = 0;   // between navigations
};

// One browsing session. A session is single-threaded; independent sessions
// may run concurrently.
class Session {
public:
    virtual ~Session() = default;

    virtual void navigate(const std::string& url) = 0;
    virtual void interact(const dom::ElementRef& ref, const Action& action) = 0;
    virtual std::string page_source() = 0;
    virtual std::string current_url() const = 0;

    // Current DOM property of an element: name is "value" or "checked"
    // ("true"/"false"). Mirrors the wire protocol's Get Element Property.
    virtual std::string get_property(const dom::ElementRef& ref,
                                     const std::string& name) = 0;
};

}  // namespace formnav
