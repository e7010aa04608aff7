#include "codecheck/rules.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

namespace codecheck::rules {

namespace {

// Mirrors data/lpd/ashrae_90_1_2022.json. The bank entry reproduces the
// 3019 W allowance for a 500 m² bank; the office entry is a placeholder.
constexpr std::string_view kBuiltinTable = R"({
  "code_version": "ashrae_90_1_2022",
  "method": "building_area",
  "source_label": "Table 9.5.1",
  "title": "Lighting Power Densities Using the Building Area Method",
  "entries": [
    {"use_type": "bank_financial_institution", "display_name": "Bank/Financial Institution", "lpd_w_per_ft2": 0.561},
    {"use_type": "office", "display_name": "Office", "lpd_w_per_ft2": 0.56, "placeholder": true}
  ]
})";

std::string identifier_from(std::string_view text) {
    std::string out;
    bool pending_sep = false;
    for (char c : trim(text)) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) != 0) {
            if (pending_sep && !out.empty()) {
                out += '_';
            }
            pending_sep = false;
            out += static_cast<char>(std::tolower(uc));
        } else {
            pending_sep = true;
        }
    }
    return out;
}

[[noreturn]] void malformed(const std::string& what) {
    throw Error(Errc::MalformedTable, what);
}

} // namespace

std::string_view to_string(AreaUnit unit) noexcept {
    return unit == AreaUnit::m2 ? "m2" : "ft2";
}

AreaUnit parse_area_unit(std::string_view text) {
    const std::string key = to_lower(trim(text));
    if (key == "m2" || key == "m\xc2\xb2" || key == "sqm" || key == "sq m" || key == "square_meters" ||
        key == "square meters" || key == "squaremeters") {
        return AreaUnit::m2;
    }
    if (key == "ft2" || key == "ft\xc2\xb2" || key == "sqft" || key == "sq ft" || key == "square_feet" ||
        key == "square feet" || key == "squarefeet") {
        return AreaUnit::ft2;
    }
    throw Error(Errc::UnknownUnit, fmt::format("unknown area unit '{}'", text));
}

double convert_area(double value, AreaUnit from, AreaUnit to) {
    if (!std::isfinite(value) || value < 0.0) {
        throw Error(Errc::NegativeArea, fmt::format("area must be a finite value >= 0, got {}", value));
    }
    if (from == to) {
        return value;
    }
    return from == AreaUnit::m2 ? value * kSquareFeetPerSquareMeter : value / kSquareFeetPerSquareMeter;
}

CodeVersion normalize_code_version(std::string_view text) {
    std::string id = identifier_from(text);
    for (std::string_view prefix : {"ansi_", "standard_"}) {
        if (id.starts_with(prefix)) {
            id.erase(0, prefix.size());
        }
    }
    if (id.starts_with("90_1_")) {
        id = "ashrae_" + id;
    }
    if (id.starts_with("ashrae_standard_")) {
        id = "ashrae_" + id.substr(16);
    }
    return CodeVersion{id};
}

BuildingUseType normalize_use_type(std::string_view text) {
    const std::string id = identifier_from(text);
    if (id == "bank" || id == "banks" || id == "financial_institution" || id == "bank_financial_institution" ||
        id == "bank_or_financial_institution") {
        return BuildingUseType{"bank_financial_institution"};
    }
    return BuildingUseType{id};
}

LpdTable parse_lpd_table(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        malformed("LPD table must be a JSON object");
    }
    LpdTable table;
    try {
        table.code_version = CodeVersion{doc.at("code_version").get<std::string>()};
        const auto method = doc.at("method").get<std::string>();
        if (method != "building_area") {
            malformed("unsupported lighting method '" + method + "'");
        }
        table.source_label = doc.at("source_label").get<std::string>();
        table.title = doc.value("title", std::string{});
        for (const auto& item : doc.at("entries")) {
            BuildingUseType use{item.at("use_type").get<std::string>()};
            LpdEntry entry;
            entry.lpd_w_per_ft2 = item.at("lpd_w_per_ft2").get<double>();
            entry.display_name = item.value("display_name", use.id);
            entry.placeholder = item.value("placeholder", false);
            if (!(entry.lpd_w_per_ft2 > 0.0) || !std::isfinite(entry.lpd_w_per_ft2)) {
                malformed("LPD for '" + use.id + "' must be > 0");
            }
            if (!table.entries.emplace(use, entry).second) {
                malformed("duplicate use type '" + use.id + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        malformed(std::string("LPD table schema violation: ") + e.what());
    }
    if (table.code_version.id.empty()) {
        malformed("code_version must not be empty");
    }
    return table;
}

nlohmann::json to_json(const LpdTable& table) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [use, entry] : table.entries) {
        nlohmann::json item{{"use_type", use.id},
                            {"display_name", entry.display_name},
                            {"lpd_w_per_ft2", entry.lpd_w_per_ft2}};
        if (entry.placeholder) {
            item["placeholder"] = true;
        }
        entries.push_back(std::move(item));
    }
    return {{"code_version", table.code_version.id},
            {"method", "building_area"},
            {"source_label", table.source_label},
            {"title", table.title},
            {"entries", std::move(entries)}};
}

LpdCatalog::LpdCatalog(std::vector<LpdTable> tables) {
    for (auto& table : tables) {
        auto version = table.code_version;
        if (!tables_.emplace(version, std::move(table)).second) {
            malformed("more than one table for code version '" + version.id + "'");
        }
    }
}

LpdCatalog LpdCatalog::builtin() {
    std::vector<LpdTable> tables;
    tables.push_back(parse_lpd_table(nlohmann::json::parse(kBuiltinTable)));
    return LpdCatalog(std::move(tables));
}

LpdCatalog LpdCatalog::from_files(const std::vector<std::filesystem::path>& paths) {
    std::vector<LpdTable> tables;
    for (const auto& path : paths) {
        const auto text = read_text_file(path);
        auto doc = nlohmann::json::parse(text, nullptr, false);
        if (doc.is_discarded()) {
            malformed("LPD table " + path.string() + " is not valid JSON");
        }
        tables.push_back(parse_lpd_table(doc));
    }
    return LpdCatalog(std::move(tables));
}

const LpdTable* LpdCatalog::find(const CodeVersion& version) const noexcept {
    const auto it = tables_.find(version);
    return it == tables_.end() ? nullptr : &it->second;
}

const LpdTable& LpdCatalog::table(const CodeVersion& version) const {
    if (const auto* found = find(version)) {
        return *found;
    }
    throw Error(Errc::UnknownCodeVersion, "no LPD table for code version '" + version.id + "'");
}

std::vector<CodeVersion> LpdCatalog::versions() const {
    std::vector<CodeVersion> out;
    for (const auto& [version, table] : tables_) {
        out.push_back(version);
    }
    return out;
}

double lpd_lookup(const LpdCatalog& catalog, const BuildingUseType& use, const CodeVersion& version) {
    const auto& table = catalog.table(version);
    const auto it = table.entries.find(use);
    if (it == table.entries.end()) {
        throw Error(Errc::UnknownUseType,
                    fmt::format("use type '{}' is not in {} for {}", use.id, table.source_label, version.id));
    }
    return it->second.lpd_w_per_ft2;
}

std::int64_t lighting_allowed_wattage(const LpdCatalog& catalog, Area area, const BuildingUseType& use,
                                      const CodeVersion& version) {
    const double area_ft2 = convert_area(area.value, area.unit, AreaUnit::ft2);
    const double lpd = lpd_lookup(catalog, use, version);
    // std::llround rounds halfway cases away from zero.
    return std::llround(area_ft2 * lpd);
}

std::string_view to_string(ComplianceStatus status) noexcept {
    switch (status) {
    case ComplianceStatus::pass: return "pass";
    case ComplianceStatus::fail: return "fail";
    case ComplianceStatus::unknown: return "unknown";
    }
    return "unknown";
}

ComplianceResult check_interior_lighting(const LpdCatalog& catalog, const ComplianceInput& input) {
    if (input.designed_wattage && (!std::isfinite(*input.designed_wattage) || *input.designed_wattage < 0.0)) {
        throw Error(Errc::InvalidArguments, "designed wattage must be >= 0");
    }
    ComplianceResult result;
    result.allowance_w = lighting_allowed_wattage(catalog, input.floor_area, input.use_type, input.code_version);
    result.designed_w = input.designed_wattage;

    const auto& table = catalog.table(input.code_version);
    const auto& entry = table.entries.at(input.use_type);
    std::string detail = fmt::format("{}: {} at {} W/ft2 ({}, building area method)",
                                     table.title.empty() ? table.source_label : table.title,
                                     entry.display_name, entry.lpd_w_per_ft2, input.code_version.id);
    if (entry.placeholder) {
        detail += "; placeholder value, not verified against the published table";
    }
    result.citations.push_back({table.source_label, std::move(detail)});

    if (!input.designed_wattage) {
        result.status = ComplianceStatus::unknown;
        result.deficiencies.push_back("missing information: designed interior lighting wattage");
        return result;
    }
    const double designed = *input.designed_wattage;
    const auto allowance = static_cast<double>(result.allowance_w);
    if (designed <= allowance) {
        result.status = ComplianceStatus::pass;
    } else {
        result.status = ComplianceStatus::fail;
        result.deficiencies.push_back(fmt::format("exceeds by {} W: designed {} W, allowed {} W",
                                                  format_number(designed - allowance), format_number(designed),
                                                  result.allowance_w));
    }
    return result;
}

ComplianceInput parse_compliance_input(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw Error(Errc::InvalidArguments, "compliance input must be a JSON object");
    }
    ComplianceInput input;
    try {
        input.floor_area.value = doc.at("floor_area").get<double>();
        input.floor_area.unit = parse_area_unit(doc.value("area_unit", std::string{"m2"}));
        input.use_type = normalize_use_type(doc.at("use_type").get<std::string>());
        input.code_version = normalize_code_version(doc.at("code_version").get<std::string>());
        if (doc.contains("designed_wattage") && !doc.at("designed_wattage").is_null()) {
            input.designed_wattage = doc.at("designed_wattage").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidArguments, std::string("compliance input: ") + e.what());
    }
    if (!std::isfinite(input.floor_area.value) || input.floor_area.value < 0.0) {
        throw Error(Errc::NegativeArea, "floor_area must be >= 0");
    }
    return input;
}

nlohmann::json to_json(const ComplianceInput& input) {
    nlohmann::json doc{{"floor_area", input.floor_area.value},
                       {"area_unit", to_string(input.floor_area.unit)},
                       {"use_type", input.use_type.id},
                       {"code_version", input.code_version.id}};
    doc["designed_wattage"] = input.designed_wattage ? nlohmann::json(*input.designed_wattage) : nlohmann::json();
    return doc;
}

nlohmann::json to_json(const ComplianceResult& result) {
    nlohmann::json citations = nlohmann::json::array();
    for (const auto& c : result.citations) {
        citations.push_back({{"source_label", c.source_label}, {"detail", c.detail}});
    }
    return {{"allowance_w", result.allowance_w},
            {"designed_w", result.designed_w ? nlohmann::json(*result.designed_w) : nlohmann::json()},
            {"status", to_string(result.status)},
            {"deficiencies", result.deficiencies},
            {"citations", std::move(citations)}};
}

std::string summarize(const ComplianceInput& input, const ComplianceResult& result) {
    std::string text = fmt::format("Interior lighting ({}, {}): {} {} {} -> allowance {} W",
                                   input.use_type.id, input.code_version.id, format_number(input.floor_area.value),
                                   to_string(input.floor_area.unit), "floor area", result.allowance_w);
    switch (result.status) {
    case ComplianceStatus::pass:
        text += fmt::format(", designed {} W: PASS", format_number(*result.designed_w));
        break;
    case ComplianceStatus::fail:
        text += fmt::format(", designed {} W: FAIL", format_number(*result.designed_w));
        break;
    case ComplianceStatus::unknown:
        text += ": UNKNOWN (designed wattage not supplied)";
        break;
    }
    for (const auto& d : result.deficiencies) {
        text += "\n  - " + d;
    }
    return text;
}

} // namespace codecheck::rules
