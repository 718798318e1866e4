#include "formnav/url.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

namespace formnav::url {

namespace {

struct Parts {
    std::string scheme, authority, path, query, fragment;
    bool has_authority = false;
};

Parts split(const std::string& u) {
    Parts p;
    std::string rest = u;
    size_t hash = rest.find('#');
    if (hash != std::string::npos) {
        p.fragment = rest.substr(hash + 1);
        rest = rest.substr(0, hash);
    }
    size_t q = rest.find('?');
    if (q != std::string::npos) {
        p.query = rest.substr(q + 1);
        rest = rest.substr(0, q);
    }
    size_t colon = rest.find(':');
    size_t slash = rest.find('/');
    if (colon != std::string::npos &&
        (slash == std::string::npos || colon < slash)) {
        p.scheme = rest.substr(0, colon);
        rest = rest.substr(colon + 1);
    }
    if (rest.compare(0, 2, "//") == 0) {
        p.has_authority = true;
        size_t end = rest.find('/', 2);
        if (end == std::string::npos) {
            p.authority = rest.substr(2);
            rest.clear();
        } else {
            p.authority = rest.substr(2, end - 2);
            rest = rest.substr(end);
        }
    }
    p.path = rest;
    return p;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), ::tolower);
    return s;
}

std::string sort_query(const std::string& q) {
    if (q.empty()) return q;
    std::vector<std::string> params;
    std::stringstream ss(q);
    std::string tok;
    while (std::getline(ss, tok, '&')) {
        if (!tok.empty()) params.push_back(tok);
    }
    std::stable_sort(params.begin(), params.end(),
                     [](const std::string& a, const std::string& b) {
                         return a.substr(0, a.find('=')) <
                                b.substr(0, b.find('='));
                     });
    std::string out;
    for (const auto& p : params) {
        if (!out.empty()) out += '&';
        out += p;
    }
    return out;
}

std::string remove_dot_segments(const std::string& path) {
    std::vector<std::string> out;
    bool abs = !path.empty() && path[0] == '/';
    std::stringstream ss(path);
    std::string seg;
    bool trailing_slash = !path.empty() && path.back() == '/';
    while (std::getline(ss, seg, '/')) {
        if (seg.empty() || seg == ".") continue;
        if (seg == "..") {
            if (!out.empty()) out.pop_back();
        } else {
            out.push_back(seg);
        }
    }
    std::string res = abs ? "/" : "";
    for (size_t i = 0; i < out.size(); ++i) {
        if (i) res += '/';
        res += out[i];
    }
    if (trailing_slash && !out.empty()) res += '/';
    if (res.empty()) res = abs ? "/" : "";
    return res;
}

std::string assemble(const Parts& p) {
    std::string out;
    if (!p.scheme.empty()) out += p.scheme + ":";
    if (p.has_authority) out += "//" + p.authority;
    out += p.path;
    if (!p.query.empty()) out += "?" + p.query;
    return out;
}

}  // namespace

std::string canonicalize(const std::string& u) {
    Parts p = split(u);
    p.fragment.clear();
    p.scheme = lower(p.scheme);
    p.authority = lower(p.authority);
    p.query = sort_query(p.query);
    if (p.has_authority && p.path.empty()) p.path = "/";
    if (!p.path.empty()) p.path = remove_dot_segments(p.path);
    if (p.path.empty() && p.has_authority) p.path = "/";
    return assemble(p);
}

std::string resolve(const std::string& base, const std::string& ref) {
    if (ref.empty()) return base;
    Parts r = split(ref);
    if (!r.scheme.empty()) return ref;  // absolute
    Parts b = split(base);
    if (r.has_authority) {
        r.scheme = b.scheme;
        return assemble(r);
    }
    Parts out = b;
    out.fragment.clear();
    out.query = r.query;
    if (r.path.empty()) {
        out.query = r.query.empty() ? b.query : r.query;
    } else if (r.path[0] == '/') {
        out.path = remove_dot_segments(r.path);
    } else {
        std::string dir = b.path;
        size_t slash = dir.rfind('/');
        dir = (slash == std::string::npos) ? "" : dir.substr(0, slash + 1);
        out.path = remove_dot_segments(dir + r.path);
        if (out.path.empty() || out.path[0] != '/') out.path = "/" + out.path;
    }
    return assemble(out);
}

std::string origin(const std::string& u) {
    Parts p = split(u);
    if (!p.has_authority) return "";
    return lower(p.scheme) + "://" + lower(p.authority);
}

}  // namespace formnav::url
