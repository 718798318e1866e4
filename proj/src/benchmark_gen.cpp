#include "formnav/benchmark_gen.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "formnav/errors.hpp"

namespace formnav::bench {

namespace fs = std::filesystem;
using json = nlohmann::json;
using dom::ControlType;
using dom::RequiredKind;

namespace {

// deterministic across platforms, unlike std::uniform_int_distribution
uint64_t uniform(std::mt19937_64& rng, uint64_t n) { return rng() % n; }

Category pick_category(std::mt19937_64& rng) {
    int total = 0;
    for (int w : kCategoryWeights) total += w;
    int r = static_cast<int>(uniform(rng, total));
    for (size_t i = 0; i < kCategoryWeights.size(); ++i) {
        r -= kCategoryWeights[i];
        if (r < 0) return static_cast<Category>(i);
    }
    return Category::rare;
}

std::string humanize(const std::string& name) {
    std::string out;
    for (char c : name) out += (c == '_') ? ' ' : c;
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(
        static_cast<unsigned char>(out[0])));
    return out;
}

struct PoolBuilder {
    std::vector<InputPoolEntry> entries;

    void add(Category cat, ControlType control, const std::string& name,
             dom::FieldConstraints constraints = {},
             std::vector<std::string> options = {}) {
        InputPoolEntry e;
        e.id = name;
        e.control = control;
        e.label = humanize(name);
        e.constraints = std::move(constraints);
        if (options.empty() && (control == ControlType::select_one ||
                                control == ControlType::radio)) {
            options = {name + "_1", name + "_2", name + "_3"};
        }
        e.options = std::move(options);
        e.category = cat;
        entries.push_back(std::move(e));
    }

    void add_all(Category cat, ControlType control,
                 std::initializer_list<const char*> names) {
        for (const char* n : names) add(cat, control, n);
    }
};

dom::FieldConstraints maxlen(int n) {
    dom::FieldConstraints c;
    c.maxlength = n;
    return c;
}

dom::FieldConstraints minmax(const std::string& lo, const std::string& hi) {
    dom::FieldConstraints c;
    c.min = lo;
    c.max = hi;
    return c;
}

dom::FieldConstraints pattern(const std::string& p) {
    dom::FieldConstraints c;
    c.pattern = p;
    return c;
}

std::vector<InputPoolEntry> build_pool() {
    PoolBuilder b;
    using C = ControlType;
    const Category ess = Category::essential;
    const Category vc = Category::very_common;
    const Category com = Category::common;
    const Category mod = Category::moderately_common;
    const Category lc = Category::less_common;
    const Category rare = Category::rare;

    // essential: 50
    b.add_all(ess, C::text,
              {"first_name", "last_name", "full_name", "street_address",
               "address_line2", "city", "username", "company", "subject",
               "nickname", "middle_name", "name_suffix", "department",
               "position", "organization", "reference_code", "billing_city",
               "shipping_city", "district", "region", "building",
               "floor_number", "tax_id", "account_number", "care_of"});
    b.add(ess, C::text, "promo_code", pattern("[A-Z0-9]{6}"));
    b.add(ess, C::text, "zip", pattern("[0-9]{5}"));
    b.add_all(ess, C::email, {"email", "contact_email", "work_email"});
    b.add_all(ess, C::password, {"password", "confirm_password"});
    b.add_all(ess, C::tel, {"phone", "mobile_phone", "fax"});
    b.add_all(ess, C::select_one, {"country", "state", "salutation"});
    b.add_all(ess, C::checkbox, {"terms_accepted", "subscribe_newsletter"});
    b.add_all(ess, C::radio, {"gender", "contact_method"});
    b.add(ess, C::textarea, "message", maxlen(200));
    b.add(ess, C::textarea, "comments");
    b.add(ess, C::number, "age", minmax("18", "99"));
    b.add(ess, C::number, "quantity", minmax("1", "10"));
    b.add(ess, C::date, "birth_date");
    b.add(ess, C::search, "site_search");
    b.add(ess, C::url, "website");
    b.add(ess, C::hidden, "session_token");

    // very_common: 45
    b.add_all(vc, C::text,
              {"po_box", "county", "province", "prefecture", "ward",
               "locality", "neighborhood", "employer", "school", "degree",
               "major", "skill", "language_spoken", "emergency_contact",
               "relationship", "insurance_provider", "policy_number",
               "membership_id", "referral_source", "landmark"});
    b.add(vc, C::number, "household_size", minmax("1", "20"));
    b.add_all(vc, C::number,
              {"years_experience", "salary_expectation", "num_children",
               "weight_kg"});
    b.add_all(vc, C::select_one,
              {"timezone", "currency", "language", "education_level",
               "marital_status"});
    b.add_all(vc, C::checkbox,
              {"remember_me", "receive_sms", "agree_privacy", "is_business"});
    b.add_all(vc, C::radio, {"shirt_size", "payment_method", "delivery_speed"});
    b.add(vc, C::textarea, "bio", maxlen(300));
    b.add_all(vc, C::textarea, {"delivery_instructions", "cover_letter"});
    b.add_all(vc, C::date, {"start_date", "end_date"});
    b.add(vc, C::email, "alternate_email");
    b.add(vc, C::tel, "work_phone");
    b.add(vc, C::url, "portfolio_url");

    // common: 40
    b.add_all(com, C::text,
              {"passport_number", "license_plate", "vehicle_model", "pet_name",
               "security_answer", "iban", "swift_code", "routing_number",
               "card_holder", "billing_reference", "invoice_number",
               "order_reference", "coupon", "gift_message", "favorite_team"});
    b.add_all(com, C::time,
              {"preferred_time", "pickup_time", "dropoff_time",
               "appointment_time"});
    b.add_all(com, C::date,
              {"appointment_date", "checkin_date", "checkout_date",
               "expiry_date"});
    b.add(com, C::number, "guests", minmax("1", "12"));
    b.add_all(com, C::number, {"rooms", "seats", "tickets", "donation_amount"});
    b.add_all(com, C::select_one,
              {"room_type", "seat_class", "topic", "support_department"});
    b.add_all(com, C::checkbox, {"gift_wrap", "express_shipping", "save_card"});
    b.add_all(com, C::radio, {"rating", "satisfaction"});
    b.add_all(com, C::textarea, {"special_requests", "feedback"});
    b.add(com, C::search, "product_search");

    // moderately_common: 30
    b.add_all(mod, C::text,
              {"blood_type", "allergy_list", "medication", "diagnosis_code",
               "case_number", "docket_number", "parcel_id", "plot_reference"});
    b.add(mod, C::range, "satisfaction_level", minmax("0", "10"));
    b.add(mod, C::range, "volume", minmax("0", "100"));
    b.add(mod, C::range, "brightness", minmax("0", "100"));
    b.add(mod, C::range, "budget_range", minmax("100", "10000"));
    b.add_all(mod, C::color, {"theme_color", "accent_color", "background_color"});
    b.add_all(mod, C::file, {"resume", "profile_photo", "attachment", "id_scan"});
    b.add_all(mod, C::hidden, {"csrf_token", "form_version", "tracking_id"});
    b.add_all(mod, C::number, {"floor_count", "bedrooms", "bathrooms"});
    b.add_all(mod, C::date, {"move_in_date", "warranty_until"});
    b.add_all(mod, C::select_one, {"property_type", "heating_type"});
    b.add(mod, C::url, "linkedin_url");

    // less_common: 20
    b.add_all(lc, C::month,
              {"billing_month", "statement_month", "renewal_month",
               "graduation_month"});
    b.add_all(lc, C::week, {"delivery_week", "vacation_week", "production_week"});
    b.add_all(lc, C::time, {"shift_start", "shift_end", "alarm_time"});
    b.add(lc, C::range, "zoom_level", minmax("1", "20"));
    b.add(lc, C::range, "difficulty", minmax("1", "5"));
    b.add_all(lc, C::color, {"border_color", "font_color"});
    b.add_all(lc, C::file, {"portfolio_file", "certificate"});
    b.add_all(lc, C::text,
              {"maiden_name", "clan_name", "vessel_name", "call_sign"});

    // rare: 15
    b.add_all(rare, C::month, {"fiscal_month", "audit_month", "harvest_month"});
    b.add_all(rare, C::week,
              {"fiscal_week", "sprint_week", "regatta_week", "almanac_week"});
    b.add_all(rare, C::color, {"sigil_color", "banner_color"});
    b.add(rare, C::range, "telescope_focus", minmax("0", "100"));
    b.add(rare, C::range, "seismograph_gain", minmax("0", "100"));
    b.add_all(rare, C::file, {"genome_upload", "blueprint_scan"});
    b.add(rare, C::hidden, "legacy_marker");
    b.add(rare, C::search, "archive_search");

    if (b.entries.size() != 200) {
        throw InvalidSpec("input pool must contain exactly 200 entries, has " +
                          std::to_string(b.entries.size()));
    }
    return b.entries;
}

std::string attr_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            case '<': out += "&lt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string text_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

constexpr const char* kMarker = "<span class=\"required\">*</span>";

std::string constraint_attrs(const dom::FieldConstraints& c) {
    std::string out;
    if (c.min) out += " min=\"" + attr_escape(*c.min) + "\"";
    if (c.max) out += " max=\"" + attr_escape(*c.max) + "\"";
    if (c.pattern) out += " pattern=\"" + attr_escape(*c.pattern) + "\"";
    if (c.maxlength) out += " maxlength=\"" + std::to_string(*c.maxlength) + "\"";
    return out;
}

// One field block; exactly one form control per block (radio: one group).
std::string render_field(const InputPoolEntry& entry, const std::string& name,
                         const std::string& id, RequiredKind required) {
    const std::string req_attr =
        required == RequiredKind::direct ? " required" : "";
    const std::string marker =
        required == RequiredKind::indirect ? kMarker : "";
    std::ostringstream out;

    if (entry.control == ControlType::hidden) {
        out << "<div class=\"field\"><input type=\"hidden\" id=\"" << id
            << "\" name=\"" << attr_escape(name) << "\" value=\"1\"></div>\n";
        return out.str();
    }
    out << "<div class=\"field\">\n";
    if (entry.control == ControlType::radio) {
        out << "<span class=\"group-label\">" << text_escape(entry.label)
            << "</span>\n";
        for (size_t i = 0; i < entry.options.size(); ++i) {
            std::string oid = id + "_" + std::to_string(i);
            // markers and the required attribute ride on the first radio
            if (i == 0) out << marker;
            out << "<input type=\"radio\" id=\"" << oid << "\" name=\""
                << attr_escape(name) << "\" value=\""
                << attr_escape(entry.options[i]) << "\""
                << (i == 0 ? req_attr : "") << "><label for=\"" << oid << "\">"
                << text_escape(humanize(entry.options[i])) << "</label>\n";
        }
    } else if (entry.control == ControlType::select_one) {
        out << "<label for=\"" << id << "\">" << text_escape(entry.label)
            << "</label>\n";
        out << "<select id=\"" << id << "\" name=\"" << attr_escape(name)
            << "\"" << req_attr << ">";
        for (const std::string& opt : entry.options) {
            out << "<option value=\"" << attr_escape(opt) << "\">"
                << text_escape(humanize(opt)) << "</option>";
        }
        out << "</select>" << marker << "\n";
    } else if (entry.control == ControlType::textarea) {
        out << "<label for=\"" << id << "\">" << text_escape(entry.label)
            << "</label>\n";
        out << "<textarea id=\"" << id << "\" name=\"" << attr_escape(name)
            << "\"" << constraint_attrs(entry.constraints) << req_attr
            << "></textarea>" << marker << "\n";
    } else {
        out << "<label for=\"" << id << "\">" << text_escape(entry.label)
            << "</label>\n";
        out << "<input type=\"" << dom::control_name(entry.control)
            << "\" id=\"" << id << "\" name=\"" << attr_escape(name) << "\""
            << constraint_attrs(entry.constraints) << req_attr << ">" << marker
            << "\n";
    }
    out << "</div>\n";
    return out.str();
}

struct PlannedField {
    InputPoolEntry entry;
    std::string name;  // deduplicated
    std::string id;
    RequiredKind required = RequiredKind::no;
    int sub_form = -1;
};

bool may_be_required(ControlType c) {
    return c != ControlType::hidden && c != ControlType::file;
}

std::vector<PlannedField> plan_fields(const FormSpec& spec,
                                      std::mt19937_64& rng) {
    std::vector<InputPoolEntry> picked = sample_fields(spec.field_count, rng);
    std::vector<PlannedField> out;
    std::map<std::string, int> name_counts;
    for (size_t i = 0; i < picked.size(); ++i) {
        PlannedField f;
        f.entry = picked[i];
        int n = ++name_counts[f.entry.id];
        f.name = n == 1 ? f.entry.id : f.entry.id + "_" + std::to_string(n);
        f.id = "fld_" + std::to_string(i);
        if (may_be_required(f.entry.control) && uniform(rng, 3) == 0) {
            f.required = spec.required_mode;
        }
        if (spec.kind == FormKind::dynamic) {
            f.sub_form = static_cast<int>(i) % spec.sub_form_count;
        }
        out.push_back(std::move(f));
    }
    return out;
}

sim::GroundTruthField truth_of(const PlannedField& f, bool visible) {
    sim::GroundTruthField g;
    g.name = f.name;
    g.control = f.entry.control;
    g.required = f.required;
    g.visible_initially = visible && f.entry.control != ControlType::hidden;
    g.sub_form = f.sub_form;
    return g;
}

std::string wrap_page(const std::string& form_body) {
    return "<!doctype html>\n<html>\n<head><title>Generated form</title></head>"
           "\n<body>\n<form id=\"f\" method=\"post\" action=\"/submit\">\n" +
           form_body + "<button type=\"submit\">Submit</button>\n"
           "</form>\n</body>\n</html>\n";
}

}  // namespace

const char* category_name(Category c) {
    switch (c) {
        case Category::essential: return "essential";
        case Category::very_common: return "very_common";
        case Category::common: return "common";
        case Category::moderately_common: return "moderately_common";
        case Category::less_common: return "less_common";
        case Category::rare: return "rare";
    }
    return "essential";
}

Category category_from_name(const std::string& name) {
    for (int i = 0; i < 6; ++i) {
        Category c = static_cast<Category>(i);
        if (name == category_name(c)) return c;
    }
    throw SchemaViolation("unknown category: " + name);
}

const std::vector<InputPoolEntry>& input_pool() {
    static const std::vector<InputPoolEntry> pool = build_pool();
    return pool;
}

std::string pool_to_json() {
    json j;
    j["version"] = 1;
    json weights = json::object();
    for (int i = 0; i < 6; ++i) {
        weights[category_name(static_cast<Category>(i))] = kCategoryWeights[i];
    }
    j["category_weights"] = weights;
    j["entries"] = json::array();
    for (const auto& e : input_pool()) {
        json je;
        je["id"] = e.id;
        je["control"] = dom::control_name(e.control);
        je["label"] = e.label;
        je["category"] = category_name(e.category);
        if (!e.options.empty()) je["options"] = e.options;
        json c = json::object();
        if (e.constraints.min) c["min"] = *e.constraints.min;
        if (e.constraints.max) c["max"] = *e.constraints.max;
        if (e.constraints.pattern) c["pattern"] = *e.constraints.pattern;
        if (e.constraints.maxlength) c["maxlength"] = *e.constraints.maxlength;
        if (!c.empty()) je["constraints"] = c;
        j["entries"].push_back(je);
    }
    return j.dump(2);
}

std::vector<InputPoolEntry> sample_fields(int n, std::mt19937_64& rng) {
    if (n < 1) throw InvalidSpec("sample_fields requires n >= 1");
    std::array<std::vector<const InputPoolEntry*>, 6> buckets;
    for (const auto& e : input_pool()) {
        buckets[static_cast<int>(e.category)].push_back(&e);
    }
    std::vector<InputPoolEntry> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const auto& bucket = buckets[static_cast<int>(pick_category(rng))];
        out.push_back(*bucket[uniform(rng, bucket.size())]);
    }
    return out;
}

GeneratedForm generate_form(const FormSpec& spec) {
    if (spec.field_count < 1) throw InvalidSpec("field_count must be >= 1");
    if (spec.required_mode == RequiredKind::no) {
        throw InvalidSpec("required_mode must be direct or indirect");
    }
    if (spec.kind == FormKind::dynamic) {
        if (spec.sub_form_count < 2 || spec.sub_form_count > 4) {
            throw InvalidSpec("sub_form_count must be in [2,4]");
        }
        if (spec.field_count < spec.sub_form_count) {
            throw InvalidSpec("dynamic form needs a field per sub-form");
        }
    } else if (spec.sub_form_count != 0) {
        throw InvalidSpec("simple form cannot have sub-forms");
    }

    std::mt19937_64 rng(spec.seed);
    std::vector<PlannedField> fields = plan_fields(spec, rng);
    GeneratedForm out;
    out.spec = spec;

    if (spec.kind == FormKind::simple) {
        std::string body;
        for (const auto& f : fields) {
            body += render_field(f.entry, f.name, f.id, f.required);
            out.manifest.fields.push_back(truth_of(f, true));
        }
        out.manifest.state_count = 1;
        out.html = wrap_page(body);
        return out;
    }

    // dynamic: one trigger select, one sub-form per option, first visible
    const int k = spec.sub_form_count;
    std::string body;
    body += "<div class=\"field\">\n<label for=\"section_select\">Section"
            "</label>\n<select id=\"section_select\" name=\"form_section\">";
    for (int i = 0; i < k; ++i) {
        body += "<option value=\"section_" + std::to_string(i + 1) + "\">"
                "Section " + std::to_string(i + 1) + "</option>";
    }
    body += "</select>\n</div>\n";
    {
        sim::GroundTruthField trig;
        trig.name = "form_section";
        trig.control = ControlType::select_one;
        trig.required = RequiredKind::no;
        trig.visible_initially = true;
        trig.sub_form = -1;
        out.manifest.fields.push_back(trig);
    }

    // manifest field order must match document order: sub-form by sub-form
    for (int s = 0; s < k; ++s) {
        std::string sub_id = "sub_" + std::to_string(s + 1);
        body += "<div id=\"" + sub_id + "\" class=\"sub-form\" style=\"display:" +
                (s == 0 ? std::string("block") : std::string("none")) + "\">\n";
        for (const auto& f : fields) {
            if (f.sub_form != s) continue;
            body += render_field(f.entry, f.name, f.id, f.required);
            out.manifest.fields.push_back(truth_of(f, s == 0));
        }
        body += "</div>\n";

        sim::ReactionRule rule;
        rule.trigger = {dom::RefStrategy::id, "section_select"};
        rule.condition = sim::ConditionKind::value_equals;
        rule.condition_value = "section_" + std::to_string(s + 1);
        for (int t = 0; t < k; ++t) {
            rule.effects.emplace_back("sub_" + std::to_string(t + 1),
                                      t == s ? sim::EffectOp::show
                                             : sim::EffectOp::hide);
        }
        out.manifest.rules.push_back(rule);
    }
    out.manifest.initial_visible = {"sub_1"};
    out.html = wrap_page(body);
    out.manifest.state_count = sim::enumerate_states(out.html, out.manifest);
    return out;
}

FormSpec spec_for_index(const BenchmarkConfig& config, int index) {
    if (index < 0 || index >= config.simple_count + config.dynamic_count) {
        throw InvalidSpec("form index out of range");
    }
    // one independent stream per form: reseeding keeps any (config, index)
    // pair reproducible without generating its predecessors
    std::mt19937_64 rng(config.seed ^ (0x9e3779b97f4a7c15ULL *
                                       (static_cast<uint64_t>(index) + 1)));
    FormSpec spec;
    spec.kind = index < config.simple_count ? FormKind::simple
                                            : FormKind::dynamic;
    if (spec.kind == FormKind::simple) {
        int lo = config.simple_min_fields, hi = config.simple_max_fields;
        spec.field_count = lo + static_cast<int>(uniform(rng, hi - lo + 1));
    } else {
        int lo = config.dynamic_min_fields, hi = config.dynamic_max_fields;
        spec.field_count = lo + static_cast<int>(uniform(rng, hi - lo + 1));
        spec.sub_form_count = 2 + static_cast<int>(uniform(rng, 3));
    }
    spec.required_mode = uniform(rng, 2) == 0 ? RequiredKind::direct
                                              : RequiredKind::indirect;
    spec.seed = rng();
    return spec;
}

void generate_benchmark(const std::string& dir,
                        const BenchmarkConfig& config) {
    if (config.simple_count < 0 || config.dynamic_count < 0) {
        throw InvalidSpec("form counts must be >= 0");
    }
    fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root / "forms", ec);
    fs::create_directories(root / "manifests", ec);
    if (ec) throw IoError("cannot create " + dir + ": " + ec.message());

    auto write_file = [](const fs::path& p, const std::string& content) {
        std::ofstream out(p, std::ios::binary);
        if (!out) throw IoError("cannot write " + p.string());
        out << content;
    };

    json index;
    index["version"] = 1;
    index["seed"] = config.seed;
    index["simple_count"] = config.simple_count;
    index["dynamic_count"] = config.dynamic_count;
    json weights = json::object();
    for (int i = 0; i < 6; ++i) {
        weights[category_name(static_cast<Category>(i))] = kCategoryWeights[i];
    }
    index["category_weights"] = weights;
    index["forms"] = json::array();

    const int total = config.simple_count + config.dynamic_count;
    for (int i = 0; i < total; ++i) {
        FormSpec spec = spec_for_index(config, i);
        GeneratedForm form = generate_form(spec);
        char id[16];
        std::snprintf(id, sizeof(id), "%04d", i);
        write_file(root / "forms" / (std::string(id) + ".html"), form.html);
        write_file(root / "manifests" / (std::string(id) + ".json"),
                   sim::manifest_to_json(form.manifest));
        json jf;
        jf["id"] = id;
        jf["kind"] = spec.kind == FormKind::simple ? "simple" : "dynamic";
        jf["field_count"] = spec.field_count;
        jf["required_mode"] =
            spec.required_mode == RequiredKind::direct ? "direct" : "indirect";
        if (spec.kind == FormKind::dynamic) {
            jf["sub_form_count"] = spec.sub_form_count;
        }
        jf["seed"] = spec.seed;
        jf["state_count"] = form.manifest.state_count;
        index["forms"].push_back(jf);
    }
    write_file(root / "pool.json", pool_to_json());
    write_file(root / "index.json", index.dump(2));
}

}  // namespace formnav::bench
