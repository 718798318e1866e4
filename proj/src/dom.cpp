#include "formnav/dom.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "formnav/errors.hpp"

namespace formnav::dom {

namespace {

const std::set<std::string> kVoidElements = {
    "area", "base", "br",     "col",  "embed", "hr",    "img", "input",
    "link", "meta", "param",  "source", "track", "wbr"};

const std::set<std::string> kRawText = {"script", "style"};
const std::set<std::string> kRcdata = {"textarea", "title"};

// p is implicitly closed by these openers
const std::set<std::string> kBlockish = {
    "p",   "div",  "form",    "ul",   "ol",    "table", "section",
    "h1",  "h2",   "h3",      "h4",   "h5",    "h6",    "fieldset",
    "header", "footer", "nav", "main", "article"};

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

std::string decode_entities(const std::string& in) {
    std::string out;
    out.reserve(in.size());
    for (size_t i = 0; i < in.size();) {
        if (in[i] != '&') {
            out += in[i++];
            continue;
        }
        size_t semi = in.find(';', i + 1);
        if (semi == std::string::npos || semi - i > 10) {
            out += in[i++];
            continue;
        }
        std::string ent = in.substr(i + 1, semi - i - 1);
        if (ent == "amp") out += '&';
        else if (ent == "lt") out += '<';
        else if (ent == "gt") out += '>';
        else if (ent == "quot") out += '"';
        else if (ent == "apos") out += '\'';
        else if (ent == "nbsp") out += ' ';
        else if (!ent.empty() && ent[0] == '#') {
            long code = 0;
            try {
                code = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                           ? std::stol(ent.substr(2), nullptr, 16)
                           : std::stol(ent.substr(1));
            } catch (...) {
                out += in[i++];
                continue;
            }
            // UTF-8 encode
            if (code < 0x80) out += static_cast<char>(code);
            else if (code < 0x800) {
                out += static_cast<char>(0xC0 | (code >> 6));
                out += static_cast<char>(0x80 | (code & 0x3F));
            } else {
                out += static_cast<char>(0xE0 | (code >> 12));
                out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
                out += static_cast<char>(0x80 | (code & 0x3F));
            }
        } else {
            out += in[i++];
            continue;
        }
        i = semi + 1;
    }
    return out;
}

std::string escape_text(const std::string& in) {
    std::string out;
    out.reserve(in.size());
    for (char c : in) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

std::string escape_attr(const std::string& in) {
    std::string out;
    out.reserve(in.size());
    for (char c : in) {
        if (c == '&') out += "&amp;";
        else if (c == '"') out += "&quot;";
        else if (c == '<') out += "&lt;";
        else out += c;
    }
    return out;
}

void append_text(Element* parent, std::string text) {
    if (text.empty()) return;
    if (!parent->children.empty() && parent->children.back()->is_text()) {
        parent->children.back()->text += text;
        return;
    }
    auto node = std::make_unique<Element>();
    node->text = std::move(text);
    node->parent = parent;
    parent->children.push_back(std::move(node));
}

struct Parser {
    const std::string& src;
    size_t pos = 0;
    std::vector<Element*> stack;

    explicit Parser(const std::string& s) : src(s) {}

    bool eof() const { return pos >= src.size(); }
    char peek(size_t off = 0) const {
        return pos + off < src.size() ? src[pos + off] : '\0';
    }

    Element* top() { return stack.back(); }

    void open(std::unique_ptr<Element> el, bool push) {
        el->parent = top();
        Element* raw = el.get();
        top()->children.push_back(std::move(el));
        if (push) stack.push_back(raw);
    }

    void close_if_open(const std::string& tag) {
        for (size_t i = stack.size(); i-- > 1;) {
            if (stack[i]->tag == tag) {
                stack.resize(i);
                return;
            }
        }
    }

    void imply_end_tags(const std::string& opening) {
        if (opening == "option" || opening == "optgroup") {
            if (top()->tag == "option") stack.pop_back();
            if (opening == "optgroup" && top()->tag == "optgroup") stack.pop_back();
        } else if (opening == "li") {
            if (top()->tag == "li") stack.pop_back();
        } else if (kBlockish.count(opening)) {
            if (top()->tag == "p") stack.pop_back();
        } else if (opening == "tr" || opening == "td" || opening == "th") {
            while (top()->tag == "td" || top()->tag == "th" ||
                   (opening == "tr" && top()->tag == "tr")) {
                stack.pop_back();
            }
        }
    }

    void parse_attrs(Element& el) {
        while (!eof()) {
            while (!eof() && is_space(peek())) ++pos;
            if (eof() || peek() == '>' ||
                (peek() == '/' && peek(1) == '>')) {
                return;
            }
            std::string name;
            while (!eof() && !is_space(peek()) && peek() != '=' &&
                   peek() != '>' && peek() != '/') {
                name += src[pos++];
            }
            if (name.empty()) {  // stray '/', skip
                ++pos;
                continue;
            }
            name = to_lower(name);
            std::string value;
            while (!eof() && is_space(peek())) ++pos;
            if (peek() == '=') {
                ++pos;
                while (!eof() && is_space(peek())) ++pos;
                if (peek() == '"' || peek() == '\'') {
                    char q = src[pos++];
                    while (!eof() && peek() != q) value += src[pos++];
                    if (!eof()) ++pos;
                } else {
                    while (!eof() && !is_space(peek()) && peek() != '>') {
                        value += src[pos++];
                    }
                }
                value = decode_entities(value);
            }
            if (!el.has_attr(name)) el.attrs.emplace_back(name, value);
        }
    }

    void consume_raw_text(const std::string& tag, bool decode) {
        std::string end = "</" + tag;
        std::string content;
        while (!eof()) {
            size_t lt = src.find('<', pos);
            if (lt == std::string::npos) {
                content += src.substr(pos);
                pos = src.size();
                break;
            }
            std::string cand = to_lower(src.substr(lt, end.size()));
            if (cand == end) {
                content += src.substr(pos, lt - pos);
                pos = src.find('>', lt);
                pos = (pos == std::string::npos) ? src.size() : pos + 1;
                break;
            }
            content += src.substr(pos, lt - pos + 1);
            pos = lt + 1;
        }
        append_text(top(), decode ? decode_entities(content) : content);
        stack.pop_back();
    }

    void run() {
        while (!eof()) {
            if (peek() != '<') {
                size_t lt = src.find('<', pos);
                if (lt == std::string::npos) lt = src.size();
                append_text(top(), decode_entities(src.substr(pos, lt - pos)));
                pos = lt;
                continue;
            }
            if (peek(1) == '!') {
                if (src.compare(pos, 4, "<!--") == 0) {
                    size_t end = src.find("-->", pos + 4);
                    pos = (end == std::string::npos) ? src.size() : end + 3;
                } else {
                    size_t end = src.find('>', pos);
                    pos = (end == std::string::npos) ? src.size() : end + 1;
                }
                continue;
            }
            if (peek(1) == '/') {
                size_t end = src.find('>', pos);
                if (end == std::string::npos) {
                    pos = src.size();
                    break;
                }
                std::string tag = to_lower(trim(src.substr(pos + 2, end - pos - 2)));
                if (tag == "select") {
                    close_if_open("option");
                    close_if_open("optgroup");
                }
                close_if_open(tag);
                pos = end + 1;
                continue;
            }
            if (!std::isalpha(static_cast<unsigned char>(peek(1)))) {
                // stray '<': literal text
                append_text(top(), "<");
                ++pos;
                continue;
            }
            ++pos;  // consume '<'
            std::string tag;
            while (!eof() && !is_space(peek()) && peek() != '>' && peek() != '/') {
                tag += src[pos++];
            }
            tag = to_lower(tag);
            auto el = std::make_unique<Element>();
            el->tag = tag;
            parse_attrs(*el);
            bool self_closed = false;
            if (peek() == '/' && peek(1) == '>') {
                self_closed = true;
                pos += 2;
            } else if (peek() == '>') {
                ++pos;
            } else {
                pos = src.size();  // truncated tag at eof: keep element
            }
            imply_end_tags(tag);
            bool is_void = kVoidElements.count(tag) > 0;
            bool raw = kRawText.count(tag) > 0;
            bool rcdata = kRcdata.count(tag) > 0;
            open(std::move(el), !is_void && !self_closed);
            if (!is_void && !self_closed && (raw || rcdata)) {
                consume_raw_text(tag, rcdata);
            }
        }
    }
};

void serialize_into(const Element& el, std::string& out) {
    if (el.is_text()) {
        out += escape_text(el.text);
        return;
    }
    out += '<';
    out += el.tag;
    for (const auto& [k, v] : el.attrs) {
        out += ' ';
        out += k;
        out += "=\"";
        out += escape_attr(v);
        out += '"';
    }
    out += '>';
    if (kVoidElements.count(el.tag)) return;
    if (kRawText.count(el.tag)) {
        for (const auto& c : el.children) out += c->text;
    } else {
        for (const auto& c : el.children) serialize_into(*c, out);
    }
    out += "</";
    out += el.tag;
    out += '>';
}

template <typename Fn>
void walk(Element& el, Fn&& fn) {
    fn(el);
    for (auto& c : el.children) walk(*c, fn);
}

template <typename Fn>
void walk(const Element& el, Fn&& fn) {
    fn(el);
    for (const auto& c : el.children) walk(*c, fn);
}

// ---- css selector subset ----------------------------------------------

struct SimpleSelector {
    std::string tag;
    std::string id;
    std::vector<std::string> classes;
    std::vector<std::pair<std::string, std::optional<std::string>>> attr_tests;
    std::optional<int> nth_child;
};

struct CompoundSelector {
    std::vector<SimpleSelector> parts;
    std::vector<char> combinators;  // between parts: '>' child, ' ' descendant
};

SimpleSelector parse_simple(const std::string& s) {
    SimpleSelector out;
    size_t i = 0;
    while (i < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-' ||
            s[i] == '_' || s[i] == '*')) {
        out.tag += s[i++];
    }
    if (out.tag == "*") out.tag.clear();
    while (i < s.size()) {
        if (s[i] == '#') {
            ++i;
            std::string v;
            while (i < s.size() && s[i] != '.' && s[i] != '[' && s[i] != ':') {
                v += s[i++];
            }
            out.id = v;
        } else if (s[i] == '.') {
            ++i;
            std::string v;
            while (i < s.size() && s[i] != '.' && s[i] != '[' && s[i] != ':' &&
                   s[i] != '#') {
                v += s[i++];
            }
            out.classes.push_back(v);
        } else if (s[i] == '[') {
            size_t end = s.find(']', i);
            if (end == std::string::npos) break;
            std::string body = s.substr(i + 1, end - i - 1);
            i = end + 1;
            size_t eq = body.find('=');
            if (eq == std::string::npos) {
                out.attr_tests.emplace_back(trim(body), std::nullopt);
            } else {
                std::string k = trim(body.substr(0, eq));
                std::string v = trim(body.substr(eq + 1));
                if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
                    v = v.substr(1, v.size() - 2);
                }
                out.attr_tests.emplace_back(k, v);
            }
        } else if (s.compare(i, 11, ":nth-child(") == 0) {
            size_t end = s.find(')', i);
            if (end == std::string::npos) break;
            out.nth_child = std::stoi(s.substr(i + 11, end - i - 11));
            i = end + 1;
        } else {
            ++i;
        }
    }
    return out;
}

CompoundSelector parse_selector(const std::string& sel) {
    CompoundSelector out;
    size_t i = 0;
    char next_comb = 0;
    while (i < sel.size()) {
        while (i < sel.size() && is_space(sel[i])) ++i;
        if (i < sel.size() && sel[i] == '>') {
            next_comb = '>';
            ++i;
            continue;
        }
        std::string tok;
        bool in_br = false;
        char q = 0;
        while (i < sel.size()) {
            char c = sel[i];
            if (q) {
                tok += c;
                if (c == q) q = 0;
                ++i;
                continue;
            }
            if (in_br && (c == '"' || c == '\'')) {
                q = c;
                tok += c;
                ++i;
                continue;
            }
            if (c == '[') in_br = true;
            if (c == ']') in_br = false;
            if (!in_br && (is_space(c) || c == '>')) break;
            tok += c;
            ++i;
        }
        if (tok.empty()) continue;
        if (!out.parts.empty()) {
            out.combinators.push_back(next_comb ? next_comb : ' ');
        }
        out.parts.push_back(parse_simple(tok));
        next_comb = 0;
    }
    return out;
}

int element_child_index(const Element& el) {
    if (!el.parent) return 1;
    int idx = 0;
    for (const auto& c : el.parent->children) {
        if (c->is_text()) continue;
        ++idx;
        if (c.get() == &el) return idx;
    }
    return 0;
}

bool matches_simple(const Element& el, const SimpleSelector& s) {
    if (el.is_text()) return false;
    if (!s.tag.empty() && el.tag != s.tag) return false;
    if (!s.id.empty()) {
        const std::string* id = el.attr("id");
        if (!id || *id != s.id) return false;
    }
    for (const auto& cls : s.classes) {
        const std::string* cv = el.attr("class");
        if (!cv) return false;
        std::istringstream iss(*cv);
        std::string tok;
        bool found = false;
        while (iss >> tok) {
            if (tok == cls) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    for (const auto& [k, v] : s.attr_tests) {
        const std::string* av = el.attr(k);
        if (!av) return false;
        if (v && *av != *v) return false;
    }
    if (s.nth_child && element_child_index(el) != *s.nth_child) return false;
    return true;
}

bool matches_compound(const Element& el, const CompoundSelector& sel,
                      size_t part) {
    if (!matches_simple(el, sel.parts[part])) return false;
    if (part == 0) return true;
    char comb = sel.combinators[part - 1];
    const Element* p = el.parent;
    if (comb == '>') {
        return p && !p->tag.empty() && p->tag != "#document" &&
               matches_compound(*p, sel, part - 1);
    }
    while (p && p->tag != "#document") {
        if (matches_compound(*p, sel, part - 1)) return true;
        p = p->parent;
    }
    return false;
}

// ---- xpath subset: //tag, //tag[@attr='v'], //tag[n] -------------------

std::vector<const Element*> resolve_xpath(const Element& root,
                                          const std::string& expr) {
    std::vector<const Element*> out;
    if (expr.compare(0, 2, "//") != 0) return out;
    std::string rest = expr.substr(2);
    std::string tag;
    size_t i = 0;
    while (i < rest.size() && rest[i] != '[') tag += rest[i++];
    std::optional<std::pair<std::string, std::string>> attr_test;
    std::optional<int> index;
    if (i < rest.size() && rest[i] == '[') {
        size_t end = rest.find(']', i);
        std::string body = rest.substr(i + 1, end - i - 1);
        if (!body.empty() && body[0] == '@') {
            size_t eq = body.find('=');
            std::string k = body.substr(1, eq - 1);
            std::string v = trim(body.substr(eq + 1));
            if (v.size() >= 2 && (v.front() == '\'' || v.front() == '"')) {
                v = v.substr(1, v.size() - 2);
            }
            attr_test = {k, v};
        } else {
            try {
                index = std::stoi(body);
            } catch (...) {
            }
        }
    }
    walk(root, [&](const Element& el) {
        if (el.is_text() || el.tag != tag) return;
        if (attr_test) {
            const std::string* av = el.attr(attr_test->first);
            if (!av || *av != attr_test->second) return;
        }
        out.push_back(&el);
    });
    if (index) {
        if (*index >= 1 && static_cast<size_t>(*index) <= out.size()) {
            return {out[*index - 1]};
        }
        return {};
    }
    return out;
}

bool is_text_like_input(const std::string& type) {
    static const std::set<std::string> kStateful = {
        "checkbox", "radio", "hidden", "submit", "button", "reset",
        "image",    "file"};
    return kStateful.count(type) == 0;
}

std::string input_type(const Element& el) {
    const std::string* t = el.attr("type");
    return t ? to_lower(*t) : "text";
}

void normalize_into(const Element& el, std::string& out) {
    if (el.is_text()) {
        std::string collapsed;
        bool in_ws = false;
        for (char c : el.text) {
            if (is_space(c)) {
                in_ws = true;
            } else {
                if (in_ws && !collapsed.empty()) collapsed += ' ';
                in_ws = false;
                collapsed += c;
            }
        }
        out += collapsed;
        return;
    }
    bool drop_value =
        el.tag == "input" && is_text_like_input(input_type(el));
    out += '<';
    out += el.tag;
    auto attrs = el.attrs;
    std::sort(attrs.begin(), attrs.end());
    for (const auto& [k, v] : attrs) {
        if (drop_value && k == "value") continue;
        out += ' ';
        out += k;
        out += "=\"";
        out += v;
        out += '"';
    }
    out += '>';
    if (el.tag != "textarea") {
        for (const auto& c : el.children) normalize_into(*c, out);
    }
    if (!kVoidElements.count(el.tag)) {
        out += "</";
        out += el.tag;
        out += '>';
    }
}

bool is_control(const Element& el) {
    return el.tag == "input" || el.tag == "select" || el.tag == "textarea";
}

bool is_marker_span(const Element& el) {
    if (el.tag != "span") return false;
    if (const std::string* cls = el.attr("class")) {
        std::istringstream iss(*cls);
        std::string tok;
        while (iss >> tok) {
            if (tok.find("required") != std::string::npos) return true;
        }
    }
    std::string txt;
    walk(el, [&](const Element& e) {
        if (e.is_text()) txt += e.text;
    });
    return trim(txt) == "*";
}

const Element* adjacent_element_sibling(const Element& el, int dir) {
    if (!el.parent) return nullptr;
    const auto& sibs = el.parent->children;
    int self = -1;
    for (size_t i = 0; i < sibs.size(); ++i) {
        if (sibs[i].get() == &el) {
            self = static_cast<int>(i);
            break;
        }
    }
    if (self < 0) return nullptr;
    for (int i = self + dir; i >= 0 && i < static_cast<int>(sibs.size());
         i += dir) {
        if (!sibs[i]->is_text()) return sibs[i].get();
        if (!trim(sibs[i]->text).empty()) return nullptr;
    }
    return nullptr;
}

bool has_marker_descendant(const Element& el) {
    bool found = false;
    walk(el, [&](const Element& e) {
        if (is_marker_span(e)) found = true;
    });
    return found;
}

bool has_indirect_marker(const HtmlDocument& doc, const Element& field) {
    for (int dir : {1, -1}) {
        const Element* sib = adjacent_element_sibling(field, dir);
        if (sib && is_marker_span(*sib)) return true;
    }
    // label[for=id] containing a marker
    if (const std::string* id = field.attr("id")) {
        bool found = false;
        walk(*doc.root, [&](const Element& e) {
            if (found || e.tag != "label") return;
            const std::string* f = e.attr("for");
            if (f && *f == *id && has_marker_descendant(e)) found = true;
        });
        if (found) return true;
    }
    // ancestor label containing a marker
    for (const Element* p = field.parent; p; p = p->parent) {
        if (p->tag == "label" && has_marker_descendant(*p)) return true;
    }
    return false;
}

}  // namespace

const std::string* Element::attr(const std::string& name) const {
    for (const auto& [k, v] : attrs) {
        if (k == name) return &v;
    }
    return nullptr;
}

void Element::set_attr(const std::string& name, const std::string& value) {
    for (auto& [k, v] : attrs) {
        if (k == name) {
            v = value;
            return;
        }
    }
    attrs.emplace_back(name, value);
}

void Element::remove_attr(const std::string& name) {
    attrs.erase(std::remove_if(attrs.begin(), attrs.end(),
                               [&](const auto& kv) { return kv.first == name; }),
                attrs.end());
}

HtmlDocument parse_document(const std::string& html) {
    HtmlDocument doc;
    doc.source_length = html.size();
    doc.root = std::make_unique<Element>();
    doc.root->tag = "#document";
    Parser p(html);
    p.stack.push_back(doc.root.get());
    p.run();
    return doc;
}

std::string serialize(const Element& el) {
    std::string out;
    serialize_into(el, out);
    return out;
}

std::string serialize(const HtmlDocument& doc) {
    std::string out;
    for (const auto& c : doc.root->children) serialize_into(*c, out);
    return out;
}

std::unique_ptr<Element> clone(const Element& el) {
    auto out = std::make_unique<Element>();
    out->tag = el.tag;
    out->text = el.text;
    out->attrs = el.attrs;
    out->prop_value = el.prop_value;
    out->prop_checked = el.prop_checked;
    for (const auto& c : el.children) {
        auto cc = clone(*c);
        cc->parent = out.get();
        out->children.push_back(std::move(cc));
    }
    return out;
}

HtmlDocument clone(const HtmlDocument& doc) {
    HtmlDocument out;
    out.source_length = doc.source_length;
    out.root = clone(*doc.root);
    return out;
}

bool tree_equal(const Element& a, const Element& b) {
    if (a.tag != b.tag || a.text != b.text || a.attrs != b.attrs) return false;
    if (a.children.size() != b.children.size()) return false;
    for (size_t i = 0; i < a.children.size(); ++i) {
        if (!tree_equal(*a.children[i], *b.children[i])) return false;
    }
    return true;
}

std::string to_string(const ElementRef& ref) {
    switch (ref.strategy) {
        case RefStrategy::css: return "css:" + ref.value;
        case RefStrategy::id: return "id:" + ref.value;
        case RefStrategy::name: return "name:" + ref.value;
        case RefStrategy::xpath: return "xpath:" + ref.value;
    }
    return ref.value;
}

std::vector<const Element*> resolve(const HtmlDocument& doc,
                                    const ElementRef& ref) {
    std::vector<const Element*> out;
    switch (ref.strategy) {
        case RefStrategy::id:
            walk(*doc.root, [&](const Element& el) {
                const std::string* id = el.attr("id");
                if (id && *id == ref.value) out.push_back(&el);
            });
            break;
        case RefStrategy::name:
            walk(*doc.root, [&](const Element& el) {
                const std::string* n = el.attr("name");
                if (n && *n == ref.value) out.push_back(&el);
            });
            break;
        case RefStrategy::css: {
            CompoundSelector sel = parse_selector(ref.value);
            if (sel.parts.empty()) break;
            walk(*doc.root, [&](const Element& el) {
                if (!el.is_text() && el.tag != "#document" &&
                    matches_compound(el, sel, sel.parts.size() - 1)) {
                    out.push_back(&el);
                }
            });
            break;
        }
        case RefStrategy::xpath:
            out = resolve_xpath(*doc.root, ref.value);
            break;
    }
    return out;
}

std::vector<Element*> resolve(HtmlDocument& doc, const ElementRef& ref) {
    auto found = resolve(static_cast<const HtmlDocument&>(doc), ref);
    std::vector<Element*> out;
    out.reserve(found.size());
    for (const Element* e : found) out.push_back(const_cast<Element*>(e));
    return out;
}

Element* resolve_unique(HtmlDocument& doc, const ElementRef& ref) {
    auto found = resolve(doc, ref);
    return found.size() == 1 ? found[0] : nullptr;
}

ElementRef make_ref(const HtmlDocument& doc, const Element& el) {
    if (const std::string* id = el.attr("id")) {
        ElementRef r{RefStrategy::id, *id};
        if (resolve(doc, r).size() == 1) return r;
    }
    if (const std::string* name = el.attr("name")) {
        ElementRef r{RefStrategy::name, *name};
        if (resolve(doc, r).size() == 1) return r;
    }
    std::vector<std::string> segs;
    for (const Element* e = &el; e && e->tag != "#document"; e = e->parent) {
        segs.push_back(e->tag + ":nth-child(" +
                       std::to_string(element_child_index(*e)) + ")");
    }
    std::string path;
    for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
        if (!path.empty()) path += " > ";
        path += *it;
    }
    return ElementRef{RefStrategy::css, path};
}

const char* control_name(ControlType t) {
    switch (t) {
        case ControlType::text: return "text";
        case ControlType::email: return "email";
        case ControlType::password: return "password";
        case ControlType::number: return "number";
        case ControlType::date: return "date";
        case ControlType::month: return "month";
        case ControlType::week: return "week";
        case ControlType::time: return "time";
        case ControlType::url: return "url";
        case ControlType::tel: return "tel";
        case ControlType::checkbox: return "checkbox";
        case ControlType::radio: return "radio";
        case ControlType::select_one: return "select";
        case ControlType::textarea: return "textarea";
        case ControlType::file: return "file";
        case ControlType::hidden: return "hidden";
        case ControlType::color: return "color";
        case ControlType::range: return "range";
        case ControlType::search: return "search";
    }
    return "text";
}

std::optional<ControlType> control_from_name(const std::string& name) {
    static const std::map<std::string, ControlType> kMap = {
        {"text", ControlType::text},         {"email", ControlType::email},
        {"password", ControlType::password}, {"number", ControlType::number},
        {"date", ControlType::date},         {"month", ControlType::month},
        {"week", ControlType::week},         {"time", ControlType::time},
        {"url", ControlType::url},           {"tel", ControlType::tel},
        {"checkbox", ControlType::checkbox}, {"radio", ControlType::radio},
        {"select", ControlType::select_one}, {"textarea", ControlType::textarea},
        {"file", ControlType::file},         {"hidden", ControlType::hidden},
        {"color", ControlType::color},       {"range", ControlType::range},
        {"search", ControlType::search}};
    auto it = kMap.find(name);
    if (it == kMap.end()) return std::nullopt;
    return it->second;
}

bool is_visible(const Element& el) {
    for (const Element* e = &el; e && e->tag != "#document"; e = e->parent) {
        if (e->has_attr("hidden")) return false;
        if (e->tag == "input" && input_type(*e) == "hidden") return false;
        if (const std::string* style = e->attr("style")) {
            std::string s = to_lower(*style);
            s.erase(std::remove_if(s.begin(), s.end(),
                                   [](char c) { return is_space(c); }),
                    s.end());
            if (s.find("display:none") != std::string::npos) return false;
            if (s.find("visibility:hidden") != std::string::npos) return false;
        }
    }
    return true;
}

bool is_enabled(const Element& el) {
    for (const Element* e = &el; e && e->tag != "#document"; e = e->parent) {
        if (e->has_attr("disabled")) return false;
    }
    return true;
}

std::vector<FormModel> extract_forms(const HtmlDocument& doc) {
    std::vector<FormModel> out;
    std::vector<const Element*> forms;
    walk(*doc.root, [&](const Element& el) {
        if (el.tag == "form") forms.push_back(&el);
    });
    for (const Element* form : forms) {
        FormModel model;
        model.root = make_ref(doc, *form);
        std::set<std::string> seen_radio_groups;
        std::vector<const Element*> controls;
        walk(*form, [&](const Element& el) {
            if (is_control(el)) controls.push_back(&el);
        });
        for (const Element* c : controls) {
            FieldDescriptor fd;
            fd.ref = make_ref(doc, *c);
            const std::string* name = c->attr("name");
            fd.name = name ? *name : (c->attr("id") ? *c->attr("id") : "");
            fd.visible = is_visible(*c);
            if (c->tag == "select") {
                fd.control = ControlType::select_one;
                walk(*c, [&](const Element& opt) {
                    if (opt.tag != "option") return;
                    if (const std::string* v = opt.attr("value")) {
                        fd.options.push_back(*v);
                    } else {
                        std::string txt;
                        walk(opt, [&](const Element& t) {
                            if (t.is_text()) txt += t.text;
                        });
                        fd.options.push_back(trim(txt));
                    }
                });
            } else if (c->tag == "textarea") {
                fd.control = ControlType::textarea;
            } else {
                std::string type = input_type(*c);
                if (type == "radio") {
                    // one descriptor per group, at first occurrence
                    std::string group = fd.name;
                    if (seen_radio_groups.count(group)) continue;
                    seen_radio_groups.insert(group);
                    fd.control = ControlType::radio;
                    for (const Element* r : controls) {
                        if (r->tag == "input" && input_type(*r) == "radio" &&
                            r->attr("name") && *r->attr("name") == group) {
                            const std::string* v = r->attr("value");
                            fd.options.push_back(v ? *v : "on");
                        }
                    }
                } else {
                    fd.control = control_from_name(type).value_or(ControlType::text);
                }
            }
            if (const std::string* v = c->attr("min")) fd.constraints.min = *v;
            if (const std::string* v = c->attr("max")) fd.constraints.max = *v;
            if (const std::string* v = c->attr("pattern")) {
                fd.constraints.pattern = *v;
            }
            if (const std::string* v = c->attr("maxlength")) {
                try {
                    fd.constraints.maxlength = std::stoi(*v);
                } catch (...) {
                }
            }
            if (c->has_attr("required")) {
                fd.required = RequiredKind::direct;
            } else if (has_indirect_marker(doc, *c)) {
                fd.required = RequiredKind::indirect;
            }
            model.fields.push_back(std::move(fd));
        }
        out.push_back(std::move(model));
    }
    return out;
}

std::vector<ElementRef> find_interactable_elements(const HtmlDocument& doc,
                                                   const ElementRef& scope) {
    auto scopes = resolve(doc, scope);
    if (scopes.empty()) throw ScopeNotFound(to_string(scope));
    const Element* root = scopes.front();
    std::vector<ElementRef> out;
    walk(*root, [&](const Element& el) {
        if (el.is_text() || &el == root) return;
        if (!is_visible(el) || !is_enabled(el)) return;
        bool interactable = false;
        if (el.tag == "select" || el.tag == "textarea" || el.tag == "button") {
            interactable = true;
        } else if (el.tag == "input") {
            interactable = input_type(el) != "hidden";
        } else if (el.tag == "a") {
            interactable = el.has_attr("href");
        }
        if (interactable) out.push_back(make_ref(doc, el));
    });
    return out;
}

StateFingerprint fingerprint_element(const Element& el) {
    std::string norm;
    normalize_into(el, norm);
    uint64_t h = fnv1a64(norm);
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    StateFingerprint fp;
    fp.digest = buf;
    int count = 0;
    walk(el, [&](const Element& e) {
        if (is_control(e) && is_visible(e)) ++count;
    });
    fp.field_count = count;
    return fp;
}

StateFingerprint fingerprint(const HtmlDocument& doc, const ElementRef& scope) {
    auto scopes = resolve(doc, scope);
    if (scopes.empty()) throw ScopeNotFound(to_string(scope));
    return fingerprint_element(*scopes.front());
}

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace formnav::dom
