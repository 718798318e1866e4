#pragma once

#include <stdexcept>
#include <string>

namespace formnav {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// dom_model
class ScopeNotFound : public Error {
public:
    explicit ScopeNotFound(const std::string& sel)
        : Error("scope not found: " + sel) {}
};

// browser backend
class PageNotFound : public Error {
public:
    explicit PageNotFound(const std::string& url)
        : Error("page not found: " + url) {}
};
class Timeout : public Error {
public:
    explicit Timeout(const std::string& what) : Error("timeout: " + what) {}
};
class SessionLost : public Error {
public:
    explicit SessionLost(const std::string& what) : Error("session lost: " + what) {}
};
class ElementNotFound : public Error {
public:
    explicit ElementNotFound(const std::string& sel)
        : Error("element not found: " + sel) {}
};
class ElementNotInteractable : public Error {
public:
    explicit ElementNotInteractable(const std::string& sel)
        : Error("element not interactable: " + sel) {}
};
class InvalidAction : public Error {
public:
    explicit InvalidAction(const std::string& what)
        : Error("invalid action: " + what) {}
};
class ValueRejected : public Error {
public:
    explicit ValueRejected(const std::string& what)
        : Error("value rejected: " + what) {}
};

// graphs
class StartUnreachable : public Error {
public:
    explicit StartUnreachable(const std::string& url)
        : Error("start unreachable: " + url) {}
};
class NoPath : public Error {
public:
    NoPath(int start, int dest)
        : Error("no path from node " + std::to_string(start) + " to node " +
                std::to_string(dest)) {}
};
class UnknownNode : public Error {
public:
    explicit UnknownNode(const std::string& which)
        : Error("unknown node: " + which) {}
};

// form exploration
class FormNotFound : public Error {
public:
    explicit FormNotFound(const std::string& sel)
        : Error("form not found: " + sel) {}
};
class ReplayDiverged : public Error {
public:
    explicit ReplayDiverged(const std::string& what)
        : Error("replay diverged: " + what) {}
};

// scenario construction
class LengthMismatch : public Error {
public:
    LengthMismatch(size_t path, size_t actions)
        : Error("path has " + std::to_string(path) + " edges but " +
                std::to_string(actions) + " actions") {}
};

// serialization
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("io error: " + what) {}
};
class SchemaViolation : public Error {
public:
    explicit SchemaViolation(const std::string& what)
        : Error("schema violation: " + what) {}
};
class InvalidSpec : public Error {
public:
    explicit InvalidSpec(const std::string& what)
        : Error("invalid spec: " + what) {}
};
class UnsupportedField : public Error {
public:
    explicit UnsupportedField(const std::string& what)
        : Error("unsupported field: " + what) {}
};
class UnknownDialect : public Error {
public:
    explicit UnknownDialect(const std::string& d)
        : Error("unknown dialect: " + d) {}
};

// llm
class AuthMissing : public Error {
public:
    explicit AuthMissing(const std::string& var)
        : Error("auth missing: environment variable " + var + " is not set") {}
};
class ProviderError : public Error {
public:
    ProviderError(int status, const std::string& what)
        : Error("provider error " + std::to_string(status) + ": " + what),
          status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};
class LlmUnavailable : public Error {
public:
    explicit LlmUnavailable(const std::string& what)
        : Error("llm unavailable: " + what) {}
};
class JudgeUnparseable : public Error {
public:
    explicit JudgeUnparseable(const std::string& what)
        : Error("judge response unparseable: " + what) {}
};

}  // namespace formnav
