#pragma once

#include <memory>
#include <string>

#include "formnav/backend.hpp"

namespace formnav::wd {

// W3C WebDriver client over JSON/HTTP. Only the endpoints listed in
// docs/webdriver-subset.md are used: new session, navigate, get current url,
// find element, click, clear, send keys, get page source, get element
// property, delete session.
class WebDriverSession : public Session {
public:
    explicit WebDriverSession(const SessionConfig& config);
    ~WebDriverSession() override;

    WebDriverSession(const WebDriverSession&) = delete;
    WebDriverSession& operator=(const WebDriverSession&) = delete;

    void navigate(const std::string& url) override;
    void interact(const dom::ElementRef& ref, const Action& action) override;
    std::string page_source() override;
    std::string current_url() const override;
    std::string get_property(const dom::ElementRef& ref,
                             const std::string& name) override;

    const std::string& session_id() const { return session_id_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string session_id_;
    mutable std::string current_url_;
};

// Locator translation used on the wire; exposed for tests.
std::pair<std::string, std::string> to_locator(const dom::ElementRef& ref);

}  // namespace formnav::wd
