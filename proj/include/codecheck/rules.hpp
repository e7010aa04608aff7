#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace codecheck::rules {

// Unit constants shared by every module that reports SI results.
inline constexpr double kSquareFeetPerSquareMeter = 10.763910417;
inline constexpr double kMetersPerFoot = 0.3048;
inline constexpr double kMetersPerInch = 0.0254;
inline constexpr double kMetersPerMillimeter = 0.001;
// ft^2·°F·h/Btu -> m^2·K/W
inline constexpr double kSiRPerIpR = 0.1761101838;
// Btu/(h·ft·°F) -> W/(m·K)
inline constexpr double kSiConductivityPerIp = 1.730734666;

enum class AreaUnit { m2, ft2 };

std::string_view to_string(AreaUnit unit) noexcept;
/// Accepts "m2", "m²", "sqm", "ft2", "ft²", "sqft" and similar spellings.
/// Throws Error{UnknownUnit}.
AreaUnit parse_area_unit(std::string_view text);

struct Area {
    double value = 0.0;
    AreaUnit unit = AreaUnit::m2;
};

/// Throws Error{NegativeArea} for negative or non-finite values.
double convert_area(double value, AreaUnit from, AreaUnit to);

/// Code edition identifier, e.g. "ashrae_90_1_2022". Open-ended: the set of
/// known editions is whatever tables are loaded.
struct CodeVersion {
    std::string id;
    friend auto operator<=>(const CodeVersion&, const CodeVersion&) = default;
};

/// Building use type identifier, e.g. "bank_financial_institution".
struct BuildingUseType {
    std::string id;
    friend auto operator<=>(const BuildingUseType&, const BuildingUseType&) = default;
};

/// Maps free-text edition names ("ASHRAE 90.1-2022", "90.1-2022") onto the
/// canonical identifier. Returns the input lowercased when no alias matches.
CodeVersion normalize_code_version(std::string_view text);

/// Maps free-text use names ("bank", "Bank/Financial Institution") onto the
/// canonical identifier.
BuildingUseType normalize_use_type(std::string_view text);

enum class LightingMethod { building_area };

struct LpdEntry {
    double lpd_w_per_ft2 = 0.0;
    std::string display_name;
    bool placeholder = false;
};

/// One lighting-power-density table for one code edition. Values are stored
/// on the IP basis (W/ft²) the governing table uses.
struct LpdTable {
    CodeVersion code_version;
    LightingMethod method = LightingMethod::building_area;
    std::string source_label;
    std::string title;
    std::map<BuildingUseType, LpdEntry> entries;
};

/// Throws Error{MalformedTable} on schema violations or non-positive LPDs.
LpdTable parse_lpd_table(const nlohmann::json& doc);
nlohmann::json to_json(const LpdTable& table);

/// Read-only set of LPD tables keyed by code edition.
class LpdCatalog {
public:
    LpdCatalog() = default;
    explicit LpdCatalog(std::vector<LpdTable> tables);

    /// The compiled-in ASHRAE 90.1-2022 building-area table.
    static LpdCatalog builtin();
    /// Loads one or more table files. Throws Error{FileNotFound|MalformedTable}.
    static LpdCatalog from_files(const std::vector<std::filesystem::path>& paths);

    [[nodiscard]] const LpdTable& table(const CodeVersion& version) const;
    [[nodiscard]] const LpdTable* find(const CodeVersion& version) const noexcept;
    [[nodiscard]] std::vector<CodeVersion> versions() const;

private:
    std::map<CodeVersion, LpdTable> tables_;
};

/// Throws Error{UnknownCodeVersion|UnknownUseType}.
double lpd_lookup(const LpdCatalog& catalog, const BuildingUseType& use, const CodeVersion& version);

/// Building-area-method allowance: area in ft² times LPD, rounded half away
/// from zero to whole watts.
std::int64_t lighting_allowed_wattage(const LpdCatalog& catalog, Area area,
                                      const BuildingUseType& use, const CodeVersion& version);

struct ComplianceInput {
    Area floor_area;
    BuildingUseType use_type;
    CodeVersion code_version;
    std::optional<double> designed_wattage;
};

enum class ComplianceStatus { pass, fail, unknown };
std::string_view to_string(ComplianceStatus status) noexcept;

struct Citation {
    std::string source_label;
    std::string detail;
    friend bool operator==(const Citation&, const Citation&) = default;
};

struct ComplianceResult {
    std::int64_t allowance_w = 0;
    std::optional<double> designed_w;
    ComplianceStatus status = ComplianceStatus::unknown;
    std::vector<std::string> deficiencies;
    std::vector<Citation> citations;
    friend bool operator==(const ComplianceResult&, const ComplianceResult&) = default;
};

/// Throws Error{InvalidArguments} for negative designed wattage, plus
/// anything lighting_allowed_wattage throws.
ComplianceResult check_interior_lighting(const LpdCatalog& catalog, const ComplianceInput& input);

/// Reads {floor_area, area_unit, use_type, code_version, designed_wattage?}.
ComplianceInput parse_compliance_input(const nlohmann::json& doc);
nlohmann::json to_json(const ComplianceInput& input);
nlohmann::json to_json(const ComplianceResult& result);
/// One-paragraph human summary of a result.
std::string summarize(const ComplianceInput& input, const ComplianceResult& result);

} // namespace codecheck::rules
