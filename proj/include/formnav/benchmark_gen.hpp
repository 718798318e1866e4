#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "formnav/dom.hpp"
#include "formnav/simulator.hpp"

namespace formnav::bench {

// Prevalence buckets for input elements, most to least frequent.
enum class Category {
    essential,
    very_common,
    common,
    moderately_common,
    less_common,
    rare
};

inline constexpr std::array<int, 6> kCategoryWeights{32, 16, 8, 4, 2, 1};

const char* category_name(Category c);
Category category_from_name(const std::string& name);

struct InputPoolEntry {
    std::string id;  // unique template id, doubles as the base field name
    dom::ControlType control = dom::ControlType::text;
    std::string label;
    dom::FieldConstraints constraints;
    std::vector<std::string> options;  // select / radio only
    Category category = Category::essential;
};

// The fixed input pool: exactly 200 entries, every control type present.
const std::vector<InputPoolEntry>& input_pool();

// Versioned JSON rendering of the pool and its category weights.
std::string pool_to_json();

enum class FormKind { simple, dynamic };

struct FormSpec {
    FormKind kind = FormKind::simple;
    int field_count = 0;
    dom::RequiredKind required_mode = dom::RequiredKind::direct;
    int sub_form_count = 0;  // dynamic only, in [2,4]
    uint64_t seed = 0;
};

struct GeneratedForm {
    std::string html;
    sim::ReactionManifest manifest;
    FormSpec spec;
};

// Weighted sampling with replacement: category by kCategoryWeights, then
// uniform within the category bucket.
std::vector<InputPoolEntry> sample_fields(int n, std::mt19937_64& rng);

GeneratedForm generate_form(const FormSpec& spec);

struct BenchmarkConfig {
    int simple_count = 1000;
    int dynamic_count = 1000;
    uint64_t seed = 20240601;
    int simple_min_fields = 3;
    int simple_max_fields = 15;
    int dynamic_min_fields = 6;
    int dynamic_max_fields = 24;
};

// Expand the spec for form #index of a run. Pure in (config, index).
FormSpec spec_for_index(const BenchmarkConfig& config, int index);

// Write forms/NNNN.html, manifests/NNNN.json, pool.json, and index.json
// under dir. Byte-identical for equal configs.
void generate_benchmark(const std::string& dir, const BenchmarkConfig& config);

}  // namespace formnav::bench
