#include "formnav/webdriver.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "formnav/errors.hpp"

namespace formnav::wd {

using json = nlohmann::json;
using dom::ElementRef;
using dom::RefStrategy;

namespace {

constexpr const char* kElementKey = "element-6066-11e4-a52e-4f735466cecf";

std::string css_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

[[noreturn]] void throw_wd_error(int status, const json& body,
                                 const std::string& context) {
    std::string code, message;
    if (body.is_object() && body.contains("value") &&
        body["value"].is_object()) {
        code = body["value"].value("error", "");
        message = body["value"].value("message", "");
    }
    std::string what = context + ": " + code + " " + message;
    if (code == "no such element") throw ElementNotFound(what);
    if (code == "element not interactable") throw ElementNotInteractable(what);
    if (code == "invalid session id") throw SessionLost(what);
    if (code == "timeout" || code == "script timeout") throw Timeout(what);
    if (status == 404 && code.empty()) throw SessionLost(what);
    throw Error("webdriver " + std::to_string(status) + " " + what);
}

}  // namespace

std::pair<std::string, std::string> to_locator(const ElementRef& ref) {
    switch (ref.strategy) {
        case RefStrategy::id:
            return {"css selector", "[id=\"" + css_escape(ref.value) + "\"]"};
        case RefStrategy::name:
            return {"css selector", "[name=\"" + css_escape(ref.value) + "\"]"};
        case RefStrategy::css:
            return {"css selector", ref.value};
        case RefStrategy::xpath:
            return {"xpath", ref.value};
    }
    return {"css selector", ref.value};
}

struct WebDriverSession::Impl {
    httplib::Client client;
    SessionConfig config;

    explicit Impl(const SessionConfig& cfg)
        : client(cfg.endpoint), config(cfg) {
        client.set_connection_timeout(0, cfg.timeout_ms * 1000LL);
        client.set_read_timeout(cfg.timeout_ms / 1000,
                                (cfg.timeout_ms % 1000) * 1000);
    }

    json request(const std::string& method, const std::string& path,
                 const json& body) {
        httplib::Result res;
        if (method == "GET") {
            res = client.Get(path);
        } else if (method == "POST") {
            res = client.Post(path, body.dump(), "application/json");
        } else {
            res = client.Delete(path);
        }
        if (!res) {
            if (res.error() == httplib::Error::ConnectionTimeout ||
                res.error() == httplib::Error::Read) {
                throw Timeout(method + " " + path);
            }
            throw SessionLost(method + " " + path + ": " +
                              httplib::to_string(res.error()));
        }
        json parsed = json::object();
        if (!res->body.empty()) {
            try {
                parsed = json::parse(res->body);
            } catch (const std::exception&) {
                parsed = json::object();
            }
        }
        if (res->status >= 400) throw_wd_error(res->status, parsed, path);
        return parsed;
    }

    std::string find_element(const std::string& session,
                             const ElementRef& ref) {
        auto [strategy, value] = to_locator(ref);
        json body = {{"using", strategy}, {"value", value}};
        json res = request("POST", "/session/" + session + "/element", body);
        return res.at("value").at(kElementKey).get<std::string>();
    }
};

WebDriverSession::WebDriverSession(const SessionConfig& config)
    : impl_(std::make_unique<Impl>(config)) {
    json caps = {{"capabilities", {{"alwaysMatch", json::object()}}}};
    json res = impl_->request("POST", "/session", caps);
    const json& value = res.at("value");
    session_id_ = value.contains("sessionId")
                      ? value["sessionId"].get<std::string>()
                      : value.at("value").at("sessionId").get<std::string>();
}

WebDriverSession::~WebDriverSession() {
    try {
        impl_->request("DELETE", "/session/" + session_id_, json::object());
    } catch (...) {
        // session teardown failures are not actionable here
    }
}

void WebDriverSession::navigate(const std::string& url) {
    if (impl_->config.politeness_delay_ms > 0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(impl_->config.politeness_delay_ms));
    }
    impl_->request("POST", "/session/" + session_id_ + "/url",
                   json{{"url", url}});
    current_url_.clear();
}

std::string WebDriverSession::current_url() const {
    json res = impl_->request("GET", "/session/" + session_id_ + "/url",
                              json::object());
    current_url_ = res.at("value").get<std::string>();
    return current_url_;
}

std::string WebDriverSession::page_source() {
    json res = impl_->request("GET", "/session/" + session_id_ + "/source",
                              json::object());
    return res.at("value").get<std::string>();
}

void WebDriverSession::interact(const ElementRef& ref, const Action& action) {
    const std::string base = "/session/" + session_id_;
    switch (action.type) {
        case ActionType::click:
        case ActionType::toggle: {
            std::string el = impl_->find_element(session_id_, ref);
            impl_->request("POST", base + "/element/" + el + "/click",
                           json::object());
            break;
        }
        case ActionType::set_value: {
            std::string el = impl_->find_element(session_id_, ref);
            impl_->request("POST", base + "/element/" + el + "/clear",
                           json::object());
            impl_->request("POST", base + "/element/" + el + "/value",
                           json{{"text", action.value}});
            break;
        }
        case ActionType::select_option: {
            // click the matching option (or radio group member)
            auto [strategy, value] = to_locator(ref);
            if (strategy != "css selector") {
                throw InvalidAction("select_option requires a css locator");
            }
            std::string esc = css_escape(action.value);
            ElementRef option{RefStrategy::css,
                              value + " option[value=\"" + esc + "\"]"};
            std::string el;
            try {
                el = impl_->find_element(session_id_, option);
            } catch (const ElementNotFound&) {
                // radio group: value selects the sibling with that value
                ElementRef radio{RefStrategy::css,
                                 "input[type=\"radio\"][value=\"" + esc +
                                     "\"]"};
                el = impl_->find_element(session_id_, radio);
            }
            impl_->request("POST", base + "/element/" + el + "/click",
                           json::object());
            break;
        }
    }
}

std::string WebDriverSession::get_property(const ElementRef& ref,
                                           const std::string& name) {
    std::string el = impl_->find_element(session_id_, ref);
    json res = impl_->request(
        "GET",
        "/session/" + session_id_ + "/element/" + el + "/property/" + name,
        json::object());
    const json& v = res.at("value");
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

}  // namespace formnav::wd
