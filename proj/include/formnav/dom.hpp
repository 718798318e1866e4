#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace formnav::dom {

// Element tree node. tag is empty for text nodes; text holds decoded
// character data. Attributes keep document order; duplicate names keep the
// first occurrence, matching browser behavior.
struct Element {
    std::string tag;
    std::string text;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<std::unique_ptr<Element>> children;
    Element* parent = nullptr;

    // Session-local interaction state (typed value, checked/selected).
    // Never serialized; page_source mirrors browser outerHTML semantics
    // where DOM properties do not reflect back into attributes.
    std::optional<std::string> prop_value;
    std::optional<bool> prop_checked;

    bool is_text() const { return tag.empty(); }
    const std::string* attr(const std::string& name) const;
    bool has_attr(const std::string& name) const { return attr(name) != nullptr; }
    void set_attr(const std::string& name, const std::string& value);
    void remove_attr(const std::string& name);
};

struct HtmlDocument {
    std::unique_ptr<Element> root;  // synthetic container, tag "#document"
    size_t source_length = 0;
};

// Total function: any input yields a tree via tag-soup error recovery.
HtmlDocument parse_document(const std::string& html);

std::string serialize(const Element& el);
std::string serialize(const HtmlDocument& doc);

// Deep structural copy (interaction state included).
std::unique_ptr<Element> clone(const Element& el);
HtmlDocument clone(const HtmlDocument& doc);
bool tree_equal(const Element& a, const Element& b);

enum class RefStrategy { css, id, name, xpath };

struct ElementRef {
    RefStrategy strategy = RefStrategy::css;
    std::string value;

    bool operator==(const ElementRef&) const = default;
};

std::string to_string(const ElementRef& ref);

// All elements matching ref, document order.
std::vector<Element*> resolve(HtmlDocument& doc, const ElementRef& ref);
std::vector<const Element*> resolve(const HtmlDocument& doc, const ElementRef& ref);

// Exactly-one resolution; throws ElementNotFound / ScopeNotFound semantics
// are the caller's concern, this returns nullptr on zero-or-many.
Element* resolve_unique(HtmlDocument& doc, const ElementRef& ref);

// Preferred locator for an element: id, else unique name, else a structural
// css path of :nth-child steps. Always resolves back to exactly this element.
ElementRef make_ref(const HtmlDocument& doc, const Element& el);

enum class ControlType {
    text, email, password, number, date, month, week, time, url, tel,
    checkbox, radio, select_one, textarea, file, hidden, color, range, search
};

const char* control_name(ControlType t);
std::optional<ControlType> control_from_name(const std::string& name);

enum class RequiredKind { no, direct, indirect };

struct FieldConstraints {
    std::optional<std::string> min, max, pattern;
    std::optional<int> maxlength;

    bool empty() const { return !min && !max && !pattern && !maxlength; }
};

struct FieldDescriptor {
    ElementRef ref;
    ControlType control = ControlType::text;
    std::string name;
    RequiredKind required = RequiredKind::no;
    std::vector<std::string> options;  // select/radio only
    FieldConstraints constraints;
    bool visible = true;
};

struct FormModel {
    ElementRef root;
    std::vector<FieldDescriptor> fields;
};

// Visibility from inline style display:none / visibility:hidden, the hidden
// attribute, and input type=hidden. Stylesheets are not evaluated.
bool is_visible(const Element& el);
bool is_enabled(const Element& el);

std::vector<FormModel> extract_forms(const HtmlDocument& doc);

// Visible, enabled controls and clickable elements inside scope, document
// order. Throws ScopeNotFound when scope resolves to zero elements.
std::vector<ElementRef> find_interactable_elements(const HtmlDocument& doc,
                                                   const ElementRef& scope);

struct StateFingerprint {
    std::string digest;  // 16 hex chars, FNV-1a 64 of the normalized form
    int field_count = 0;

    bool operator==(const StateFingerprint&) const = default;
};

// Normalization: attributes sorted, inter-tag whitespace collapsed, current
// values of text-like controls omitted, checked/selected attributes kept.
StateFingerprint fingerprint(const HtmlDocument& doc, const ElementRef& scope);
StateFingerprint fingerprint_element(const Element& el);

uint64_t fnv1a64(const std::string& data);

}  // namespace formnav::dom
