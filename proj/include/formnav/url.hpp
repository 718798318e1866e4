#pragma once

#include <string>

namespace formnav::url {

// Canonical form: fragment stripped, query keys sorted, host lowercased,
// trailing slash on an empty path. Relative references pass through
// canonicalize unchanged apart from fragment/query handling.
std::string canonicalize(const std::string& u);

// RFC 3986-style resolution of a (possibly relative) reference against a
// base URL. Handles absolute refs, scheme-relative, root-relative, relative
// paths and dot segments.
std::string resolve(const std::string& base, const std::string& ref);

std::string origin(const std::string& u);  // scheme://host[:port], "" if relative

}  // namespace formnav::url
