#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace codecheck::docparse {

/// One "Type ..." block of a lighting fixture schedule.
struct FixtureRecord {
    /// Code as written in the heading, whitespace-normalized ("S", "EXR / EXG").
    std::string type_code;
    /// Individual codes when the heading lists several ("EXR", "EXG").
    std::vector<std::string> aliases;
    std::string description;
    std::optional<double> voltage_min;
    std::optional<double> voltage_max;
    std::optional<double> wattage_w;
    std::string source;
    std::optional<std::string> mounting;
    std::optional<double> battery_minutes;
    std::optional<std::string> manufacturer;
    /// Key/value lines with no dedicated field (Housing, Finish/Style, ...),
    /// in document order.
    std::vector<std::pair<std::string, std::string>> attributes;

    friend bool operator==(const FixtureRecord&, const FixtureRecord&) = default;
};

enum class DayType { weekday, weekend };
std::string_view to_string(DayType day) noexcept;

struct Interval {
    double start_hour = 0.0;
    double end_hour = 0.0;
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Sorted, non-overlapping intervals within [0, 24].
struct OperatingSchedule {
    DayType day_type = DayType::weekday;
    std::vector<Interval> intervals;
    friend bool operator==(const OperatingSchedule&, const OperatingSchedule&) = default;
};

struct MissingField {
    /// The fixture's type code.
    std::string record;
    std::string field;
    std::string reason;
    friend bool operator==(const MissingField&, const MissingField&) = default;
};

struct UnrecognizedLine {
    std::size_t line_number = 0; // 1-based
    std::string text;
    friend bool operator==(const UnrecognizedLine&, const UnrecognizedLine&) = default;
};

struct ParseReport {
    std::vector<FixtureRecord> fixtures;
    std::vector<OperatingSchedule> schedules;
    std::vector<MissingField> missing;
    std::vector<UnrecognizedLine> unrecognized_lines;
    std::vector<std::string> warnings;
};

/// Parses post-OCR fixture schedule text. A document with no "Type"
/// headings yields an empty report carrying a warning, not an error.
ParseReport parse_fixture_schedule(std::string_view document_text);

/// Parses "<Weekday|Weekend>: HH:MM-HH:MM[, HH:MM-HH:MM...]" lines.
/// Blank lines and '#' comments are skipped. Intervals for a day type are
/// merged and sorted; weekday comes before weekend in the output.
/// Throws Error{BadTimeRange|UnknownDayType}.
std::vector<OperatingSchedule> parse_operating_schedule(std::string_view document_text);

/// Sum of wattage × quantity. Throws Error{MissingWattage} naming the
/// first record without a wattage.
double total_connected_wattage(const std::vector<std::pair<FixtureRecord, int>>& fixtures);

/// Renders fixtures in the heading/key-value layout the parser reads.
std::string to_text(const std::vector<FixtureRecord>& fixtures);

nlohmann::json to_json(const FixtureRecord& record);
nlohmann::json to_json(const OperatingSchedule& schedule);
nlohmann::json to_json(const ParseReport& report);

} // namespace codecheck::docparse
