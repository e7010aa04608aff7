#include "codecheck/docparse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

namespace codecheck::docparse {

namespace {

// UTF-8 punctuation OCR output commonly carries.
constexpr std::string_view kEnDash = "\xe2\x80\x93";
constexpr std::string_view kEmDash = "\xe2\x80\x94";
constexpr std::string_view kNonBreakingHyphen = "\xe2\x80\x91";
constexpr std::string_view kBullet = "\xe2\x80\xa2";
constexpr std::string_view kLeftQuote = "\xe2\x80\x9c";
constexpr std::string_view kRightQuote = "\xe2\x80\x9d";

bool is_digit(char c) noexcept { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) noexcept { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::size_t indent_of(std::string_view line) noexcept {
    std::size_t n = 0;
    while (n < line.size() && (line[n] == ' ' || line[n] == '\t')) {
        ++n;
    }
    return n;
}

/// Length of a dash at the front of text (ASCII or Unicode variant), else 0.
std::size_t dash_at(std::string_view text) noexcept {
    if (!text.empty() && text.front() == '-') return 1;
    for (auto dash : {kEnDash, kEmDash, kNonBreakingHyphen}) {
        if (text.starts_with(dash)) return dash.size();
    }
    return 0;
}

std::size_t quote_at(std::string_view text) noexcept {
    if (!text.empty() && (text.front() == '"' || text.front() == '\'')) return 1;
    for (auto quote : {kLeftQuote, kRightQuote}) {
        if (text.starts_with(quote)) return quote.size();
    }
    return 0;
}

/// Strips indentation and one leading bullet marker. Returns whether a
/// bullet was present.
bool strip_bullet(std::string_view& text) noexcept {
    text = trim(text);
    if (text.starts_with(kBullet)) {
        text = trim(text.substr(kBullet.size()));
        return true;
    }
    if (!text.empty() && (text.front() == '*' || (text.front() == '-' && text.size() > 1 && text[1] == ' '))) {
        text = trim(text.substr(1));
        return true;
    }
    return false;
}

std::string collapse_spaces(std::string_view text) {
    std::string out;
    bool space = false;
    for (char c : trim(text)) {
        if (std::isspace(static_cast<unsigned char>(c)) != 0) {
            space = true;
        } else {
            if (space && !out.empty()) out += ' ';
            space = false;
            out += c;
        }
    }
    return out;
}

std::vector<std::string> split_aliases(std::string_view code) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        auto t = std::string(trim(current));
        if (!t.empty()) out.push_back(t);
        current.clear();
    };
    for (char c : code) {
        if (c == '/' || c == ',') {
            flush();
        } else {
            current += c;
        }
    }
    flush();
    return out;
}

struct Heading {
    std::string code;
    std::string description;
};

std::optional<Heading> parse_heading(std::string_view line) {
    std::string_view text = line;
    strip_bullet(text);
    if (!istarts_with(text, "type")) {
        return std::nullopt;
    }
    text.remove_prefix(4);
    if (!text.empty() && is_alpha(text.front())) {
        return std::nullopt; // "Types", "Typed", ...
    }
    text = trim(text);
    std::string_view code;
    std::string_view rest;
    if (const auto open = quote_at(text); open > 0) {
        text.remove_prefix(open);
        std::size_t close = 0;
        while (close < text.size() && quote_at(text.substr(close)) == 0) {
            ++close;
        }
        if (close == text.size()) {
            return std::nullopt;
        }
        code = text.substr(0, close);
        rest = text.substr(close + quote_at(text.substr(close)));
    } else {
        std::size_t i = 0;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && dash_at(text.substr(i)) == 0) {
            ++i;
        }
        code = text.substr(0, i);
        rest = text.substr(i);
    }
    rest = trim(rest);
    if (const auto dash = dash_at(rest); dash > 0) {
        rest = trim(rest.substr(dash));
    } else if (!rest.empty() && rest.front() == ':') {
        rest = trim(rest.substr(1));
    }
    Heading heading{collapse_spaces(code), std::string(rest)};
    if (heading.code.empty()) {
        return std::nullopt;
    }
    return heading;
}

struct KeyValue {
    std::string key;
    std::string value;
};

std::optional<KeyValue> parse_key_value(std::string_view line) {
    std::string_view text = line;
    strip_bullet(text);
    const auto colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon > 40) {
        return std::nullopt;
    }
    const auto key = trim(text.substr(0, colon));
    if (key.empty() || !is_alpha(key.front())) {
        return std::nullopt;
    }
    for (char c : key) {
        if (!(is_alpha(c) || c == ' ' || c == '/' || c == '&' || c == '-' || c == '(' || c == ')' || c == '.')) {
            return std::nullopt;
        }
    }
    return KeyValue{std::string(key), std::string(trim(text.substr(colon + 1)))};
}

struct NumberToken {
    double value = 0.0;
    std::size_t end = 0; // offset just past the number
};

std::optional<NumberToken> number_at(std::string_view text, std::size_t pos) {
    std::size_t i = pos;
    while (i < text.size() && is_digit(text[i])) ++i;
    if (i == pos) return std::nullopt;
    if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
        ++i;
        while (i < text.size() && is_digit(text[i])) ++i;
    }
    return NumberToken{std::stod(std::string(text.substr(pos, i - pos))), i};
}

std::optional<NumberToken> first_number(std::string_view text, std::size_t from = 0) {
    for (std::size_t i = from; i < text.size(); ++i) {
        if (is_digit(text[i]) && (i == 0 || !is_digit(text[i - 1]))) {
            return number_at(text, i);
        }
    }
    return std::nullopt;
}

std::string_view skip_spaces(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    return text;
}

/// "a-b" with optional spaces and any dash variant, else the first number
/// for both bounds.
std::optional<std::pair<double, double>> parse_voltage(std::string_view value) {
    auto first = first_number(value);
    while (first) {
        auto rest = skip_spaces(value.substr(first->end));
        std::size_t sep = dash_at(rest);
        if (sep == 0 && istarts_with(rest, "to ")) sep = 3;
        if (sep > 0) {
            auto after = skip_spaces(rest.substr(sep));
            const auto offset = value.size() - after.size();
            if (auto second = number_at(value, offset)) {
                return std::pair{std::min(first->value, second->value), std::max(first->value, second->value)};
            }
        }
        // A lone number counts only when a later token does not form a range.
        auto later = first_number(value, first->end);
        if (!later) {
            return std::pair{first->value, first->value};
        }
        const auto tail = skip_spaces(value.substr(first->end));
        if (istarts_with(tail, "v")) {
            return std::pair{first->value, first->value};
        }
        first = later;
    }
    return std::nullopt;
}

std::optional<double> parse_wattage(std::string_view value) {
    const auto number = first_number(value);
    if (!number) return std::nullopt;
    const auto unit = skip_spaces(value.substr(number->end));
    if (unit.starts_with("kW")) return number->value * 1000.0;
    return number->value;
}

struct Duration {
    double minutes = 0.0;
    bool unit_stated = false;
};

std::optional<Duration> parse_minutes(std::string_view value) {
    const auto number = first_number(value);
    if (!number) return std::nullopt;
    auto unit = skip_spaces(value.substr(number->end));
    if (const auto dash = dash_at(unit); dash > 0) unit = skip_spaces(unit.substr(dash));
    if (istarts_with(unit, "min")) return Duration{number->value, true};
    if (istarts_with(unit, "h")) return Duration{number->value * 60.0, true};
    return Duration{number->value, false};
}

bool key_is(std::string_view key, std::initializer_list<std::string_view> names) {
    return std::any_of(names.begin(), names.end(), [&](std::string_view n) { return iequals(key, n); });
}

class FixtureParser {
public:
    ParseReport run(std::string_view text) {
        const auto lines = split_lines(text);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            handle(i + 1, lines[i]);
        }
        close_record();
        if (report_.fixtures.empty()) {
            report_.warnings.push_back("no fixture headings (\"Type ...\") found; report is empty");
        }
        return std::move(report_);
    }

private:
    void handle(std::size_t number, std::string_view line) {
        if (trim(line).empty()) {
            return;
        }
        if (auto heading = parse_heading(line)) {
            close_record();
            FixtureRecord record;
            record.type_code = heading->code;
            record.aliases = split_aliases(heading->code);
            record.description = heading->description;
            current_ = std::move(record);
            heading_indent_ = indent_of(line);
            return;
        }
        if (current_) {
            if (auto kv = parse_key_value(line)) {
                apply(*kv);
                return;
            }
            if (indent_of(line) <= heading_indent_) {
                close_record();
            }
        }
        report_.unrecognized_lines.push_back({number, std::string(trim(line))});
    }

    void apply(const KeyValue& kv) {
        auto& record = *current_;
        if (key_is(kv.key, {"Voltage", "Volts"})) {
            if (auto range = parse_voltage(kv.value)) {
                record.voltage_min = range->first;
                record.voltage_max = range->second;
            } else {
                uncertain("voltage", fmt::format("no numeric voltage in '{}'", kv.value));
            }
        } else if (key_is(kv.key, {"Wattage", "Watts", "Power", "Input Power"})) {
            const auto watts = parse_wattage(kv.value);
            if (watts && *watts > 0.0) {
                record.wattage_w = *watts;
            } else {
                uncertain("wattage_w", fmt::format("no positive wattage in '{}'", kv.value));
            }
        } else if (key_is(kv.key, {"Battery", "Emergency Battery"})) {
            if (auto duration = parse_minutes(kv.value)) {
                record.battery_minutes = duration->minutes;
                if (!duration->unit_stated) {
                    report_.warnings.push_back(
                        fmt::format("Type {}: battery duration '{}' has no unit; read as minutes", record.type_code,
                                    kv.value));
                }
            } else {
                uncertain("battery_minutes", fmt::format("no duration in '{}'", kv.value));
            }
        } else if (key_is(kv.key, {"Source", "Lamp", "Light Source"})) {
            record.source = kv.value;
        } else if (key_is(kv.key, {"Mounting"})) {
            record.mounting = kv.value;
        } else if (key_is(kv.key, {"Manufacturer", "Manufacturers"})) {
            record.manufacturer = kv.value;
        } else {
            record.attributes.emplace_back(kv.key, kv.value);
        }
    }

    void uncertain(std::string field, std::string reason) {
        flagged_.push_back({current_->type_code, std::move(field), std::move(reason)});
    }

    void close_record() {
        if (!current_) {
            return;
        }
        auto& record = *current_;
        auto already = [&](std::string_view field) {
            return std::any_of(flagged_.begin(), flagged_.end(), [&](const auto& m) { return m.field == field; });
        };
        for (auto& m : flagged_) {
            report_.missing.push_back(std::move(m));
        }
        if (!record.wattage_w && !already("wattage_w")) {
            report_.missing.push_back({record.type_code, "wattage_w", "not stated"});
        }
        if (!record.voltage_min && !already("voltage")) {
            report_.missing.push_back({record.type_code, "voltage", "not stated"});
        }
        flagged_.clear();
        report_.fixtures.push_back(std::move(record));
        current_.reset();
    }

    ParseReport report_;
    std::optional<FixtureRecord> current_;
    std::vector<MissingField> flagged_;
    std::size_t heading_indent_ = 0;
};

std::optional<double> parse_clock(std::string_view text) {
    text = trim(text);
    const auto colon = text.find(':');
    if (colon == std::string_view::npos || colon == 0 || colon > 2 || text.size() != colon + 3) {
        return std::nullopt;
    }
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i != colon && !is_digit(text[i])) return std::nullopt;
    }
    const int h = std::stoi(std::string(text.substr(0, colon)));
    const int m = std::stoi(std::string(text.substr(colon + 1)));
    if (h > 24 || m > 59 || (h == 24 && m != 0)) {
        return std::nullopt;
    }
    return h + m / 60.0;
}

Interval parse_range(std::string_view text, std::size_t line_number) {
    text = trim(text);
    std::size_t pos = 0;
    std::size_t dash = 0;
    for (; pos < text.size(); ++pos) {
        dash = dash_at(text.substr(pos));
        if (dash > 0) break;
    }
    const auto start = dash > 0 ? parse_clock(text.substr(0, pos)) : std::nullopt;
    const auto end = dash > 0 ? parse_clock(text.substr(pos + dash)) : std::nullopt;
    if (!start || !end) {
        throw Error(Errc::BadTimeRange, fmt::format("line {}: '{}' is not HH:MM-HH:MM", line_number, text));
    }
    if (*end <= *start) {
        throw Error(Errc::BadTimeRange,
                    fmt::format("line {}: end of '{}' is not after its start (ranges may not wrap midnight)",
                                line_number, text));
    }
    return {*start, *end};
}

std::string format_clock(double hours) {
    const auto total_minutes = static_cast<int>(std::lround(hours * 60.0));
    return fmt::format("{:02}:{:02}", total_minutes / 60, total_minutes % 60);
}

} // namespace

std::string_view to_string(DayType day) noexcept {
    return day == DayType::weekday ? "weekday" : "weekend";
}

ParseReport parse_fixture_schedule(std::string_view document_text) {
    return FixtureParser{}.run(document_text);
}

std::vector<OperatingSchedule> parse_operating_schedule(std::string_view document_text) {
    std::vector<Interval> weekday;
    std::vector<Interval> weekend;
    bool saw_weekday = false;
    bool saw_weekend = false;
    const auto lines = split_lines(document_text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto colon = line.find(':');
        const auto key = colon == std::string_view::npos ? line : trim(line.substr(0, colon));
        std::vector<Interval>* target = nullptr;
        if (key_is(key, {"weekday", "weekdays"})) {
            target = &weekday;
            saw_weekday = true;
        } else if (key_is(key, {"weekend", "weekends"})) {
            target = &weekend;
            saw_weekend = true;
        }
        if (target == nullptr || colon == std::string_view::npos) {
            throw Error(Errc::UnknownDayType,
                        fmt::format("line {}: '{}' is not a Weekday/Weekend schedule line", i + 1, key));
        }
        auto ranges = line.substr(colon + 1);
        while (!trim(ranges).empty()) {
            const auto comma = ranges.find(',');
            target->push_back(parse_range(ranges.substr(0, comma), i + 1));
            if (comma == std::string_view::npos) break;
            ranges.remove_prefix(comma + 1);
        }
    }

    auto merge = [](std::vector<Interval> intervals) {
        std::sort(intervals.begin(), intervals.end(),
                  [](const Interval& a, const Interval& b) { return a.start_hour < b.start_hour; });
        std::vector<Interval> out;
        for (const auto& iv : intervals) {
            if (!out.empty() && iv.start_hour <= out.back().end_hour) {
                out.back().end_hour = std::max(out.back().end_hour, iv.end_hour);
            } else {
                out.push_back(iv);
            }
        }
        return out;
    };

    std::vector<OperatingSchedule> schedules;
    if (saw_weekday) schedules.push_back({DayType::weekday, merge(std::move(weekday))});
    if (saw_weekend) schedules.push_back({DayType::weekend, merge(std::move(weekend))});
    return schedules;
}

double total_connected_wattage(const std::vector<std::pair<FixtureRecord, int>>& fixtures) {
    double total = 0.0;
    for (const auto& [record, quantity] : fixtures) {
        if (!record.wattage_w) {
            throw Error(Errc::MissingWattage, fmt::format("fixture type '{}' has no wattage", record.type_code));
        }
        if (quantity < 0) {
            throw Error(Errc::InvalidArguments,
                        fmt::format("fixture type '{}' has negative quantity {}", record.type_code, quantity));
        }
        total += *record.wattage_w * quantity;
    }
    return total;
}

std::string to_text(const std::vector<FixtureRecord>& fixtures) {
    std::string out;
    for (const auto& r : fixtures) {
        out += fmt::format("- Type \"{}\" {} {}\n", r.type_code, kEnDash, r.description);
        if (r.voltage_min && r.voltage_max) {
            if (*r.voltage_min == *r.voltage_max) {
                out += fmt::format("  - Voltage: {} V\n", format_number(*r.voltage_min));
            } else {
                out += fmt::format("  - Voltage: {}-{} V\n", format_number(*r.voltage_min),
                                   format_number(*r.voltage_max));
            }
        }
        if (r.wattage_w) out += fmt::format("  - Wattage: {} W\n", format_number(*r.wattage_w));
        if (!r.source.empty()) out += fmt::format("  - Source: {}\n", r.source);
        if (r.mounting) out += fmt::format("  - Mounting: {}\n", *r.mounting);
        if (r.battery_minutes) out += fmt::format("  - Battery: {}-minute operation\n", format_number(*r.battery_minutes));
        if (r.manufacturer) out += fmt::format("  - Manufacturer: {}\n", *r.manufacturer);
        for (const auto& [key, value] : r.attributes) {
            out += fmt::format("  - {}: {}\n", key, value);
        }
    }
    return out;
}

nlohmann::json to_json(const FixtureRecord& r) {
    auto opt = [](const auto& v) -> nlohmann::json { return v ? nlohmann::json(*v) : nlohmann::json(); };
    nlohmann::json attributes = nlohmann::json::array();
    for (const auto& [key, value] : r.attributes) {
        attributes.push_back({{"key", key}, {"value", value}});
    }
    return {{"type_code", r.type_code},
            {"aliases", r.aliases},
            {"description", r.description},
            {"voltage_min", opt(r.voltage_min)},
            {"voltage_max", opt(r.voltage_max)},
            {"wattage_w", opt(r.wattage_w)},
            {"source", r.source},
            {"mounting", opt(r.mounting)},
            {"battery_minutes", opt(r.battery_minutes)},
            {"manufacturer", opt(r.manufacturer)},
            {"attributes", std::move(attributes)}};
}

nlohmann::json to_json(const OperatingSchedule& schedule) {
    nlohmann::json intervals = nlohmann::json::array();
    for (const auto& iv : schedule.intervals) {
        intervals.push_back({{"start", format_clock(iv.start_hour)},
                             {"end", format_clock(iv.end_hour)},
                             {"start_hour", iv.start_hour},
                             {"end_hour", iv.end_hour}});
    }
    return {{"day_type", to_string(schedule.day_type)}, {"intervals", std::move(intervals)}};
}

nlohmann::json to_json(const ParseReport& report) {
    nlohmann::json fixtures = nlohmann::json::array();
    for (const auto& f : report.fixtures) fixtures.push_back(to_json(f));
    nlohmann::json schedules = nlohmann::json::array();
    for (const auto& s : report.schedules) schedules.push_back(to_json(s));
    nlohmann::json missing = nlohmann::json::array();
    for (const auto& m : report.missing) {
        missing.push_back({{"record", m.record}, {"field", m.field}, {"reason", m.reason}});
    }
    nlohmann::json unrecognized = nlohmann::json::array();
    for (const auto& u : report.unrecognized_lines) {
        unrecognized.push_back({{"line", u.line_number}, {"text", u.text}});
    }
    return {{"missing_information", std::move(missing)},
            {"fixtures", std::move(fixtures)},
            {"schedules", std::move(schedules)},
            {"unrecognized_lines", std::move(unrecognized)},
            {"warnings", report.warnings}};
}

} // namespace codecheck::docparse
