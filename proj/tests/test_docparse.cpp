#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <random>
#include <string>

#include <fmt/format.h>

#include "codecheck/docparse.hpp"
#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

using namespace codecheck;
using namespace codecheck::docparse;

namespace {

std::string schedule_text() {
    return read_text_file(std::string(CODECHECK_DATA_DIR) + "/samples/lighting_fixture_schedule.txt");
}

const FixtureRecord& by_code(const ParseReport& report, const std::string& code) {
    const auto it = std::find_if(report.fixtures.begin(), report.fixtures.end(),
                                 [&](const FixtureRecord& r) { return r.type_code == code; });
    if (it == report.fixtures.end()) {
        throw std::runtime_error("no record " + code);
    }
    return *it;
}

Errc code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::IoError;
}

// Oracle: mark covered minutes on a 24 h grid and read the runs back.
std::vector<Interval> minute_union(const std::vector<std::pair<int, int>>& ranges) {
    std::array<bool, 24 * 60> covered{};
    for (const auto& [a, b] : ranges) {
        for (int m = a; m < b; ++m) {
            covered[static_cast<std::size_t>(m)] = true;
        }
    }
    std::vector<Interval> out;
    int m = 0;
    while (m < 24 * 60) {
        if (!covered[static_cast<std::size_t>(m)]) {
            ++m;
            continue;
        }
        const int start = m;
        while (m < 24 * 60 && covered[static_cast<std::size_t>(m)]) {
            ++m;
        }
        out.push_back({start / 60.0, m / 60.0});
    }
    return out;
}

} // namespace

TEST(FixtureSchedule, SampleScheduleYieldsThreeRecords) {
    const auto report = parse_fixture_schedule(schedule_text());
    ASSERT_EQ(report.fixtures.size(), 3u);

    const auto& s = by_code(report, "S");
    EXPECT_EQ(s.description, "Exterior Wall Sconce");
    EXPECT_EQ(s.wattage_w, 14.2);
    EXPECT_EQ(s.voltage_min, 120.0);
    EXPECT_EQ(s.voltage_max, 277.0);
    EXPECT_EQ(s.source, "Integral LED module, down-light only");
    EXPECT_FALSE(s.battery_minutes.has_value());

    const auto& exit = by_code(report, "EXR / EXG");
    EXPECT_EQ(exit.aliases, (std::vector<std::string>{"EXR", "EXG"}));
    EXPECT_EQ(exit.battery_minutes, 90.0);
    EXPECT_EQ(exit.voltage_min, 120.0);
    EXPECT_EQ(exit.voltage_max, 277.0);
    EXPECT_EQ(exit.manufacturer, "Lithonia or approved equal");

    const auto& em = by_code(report, "ELML");
    EXPECT_EQ(em.battery_minutes, 90.0);
    EXPECT_EQ(em.mounting, "12 inches below ceiling");
}

TEST(FixtureSchedule, UnstatedWattageIsReportedMissing) {
    const auto report = parse_fixture_schedule(schedule_text());
    std::vector<std::string> missing_wattage;
    for (const auto& m : report.missing) {
        if (m.field == "wattage_w") {
            missing_wattage.push_back(m.record);
        }
    }
    EXPECT_EQ(missing_wattage, (std::vector<std::string>{"EXR / EXG", "ELML"}));
}

TEST(FixtureSchedule, EveryKeyLineLandsInARecord) {
    const auto report = parse_fixture_schedule(schedule_text());
    for (const auto& line : report.unrecognized_lines) {
        const auto colon = line.text.find(':');
        EXPECT_TRUE(colon == std::string::npos) << "key line left unrecognized: " << line.text;
    }
    const auto& s = by_code(report, "S");
    ASSERT_EQ(s.attributes.size(), 1u);
    EXPECT_EQ(s.attributes[0].first, "Finish/Style");
}

TEST(FixtureSchedule, EmptyDocumentWarns) {
    const auto report = parse_fixture_schedule("General Notes\n- nothing here\n");
    EXPECT_TRUE(report.fixtures.empty());
    EXPECT_FALSE(report.warnings.empty());
}

TEST(FixtureSchedule, RenderedTextParsesBack) {
    const auto first = parse_fixture_schedule(schedule_text());
    const auto second = parse_fixture_schedule(to_text(first.fixtures));
    EXPECT_EQ(first.fixtures, second.fixtures);
}

TEST(FixtureSchedule, ConnectedWattage) {
    const auto report = parse_fixture_schedule(schedule_text());
    const auto& s = by_code(report, "S");
    EXPECT_DOUBLE_EQ(total_connected_wattage({{s, 10}}), 142.0);
    EXPECT_EQ(code_of([&] { (void)total_connected_wattage({{s, 1}, {by_code(report, "ELML"), 2}}); }),
              Errc::MissingWattage);
    EXPECT_EQ(code_of([&] { (void)total_connected_wattage({{s, -1}}); }), Errc::InvalidArguments);
}

TEST(OperatingSchedule, MergesAndOrders) {
    const auto schedules = parse_operating_schedule(
        "Weekend: 09:00-13:00\n# comment\n\nWeekday: 12:00-18:30, 07:00-12:00\nweekdays: 20:00-22:00\n");
    ASSERT_EQ(schedules.size(), 2u);
    EXPECT_EQ(schedules[0].day_type, DayType::weekday);
    EXPECT_EQ(schedules[0].intervals, (std::vector<Interval>{{7.0, 18.5}, {20.0, 22.0}}));
    EXPECT_EQ(schedules[1].day_type, DayType::weekend);
    EXPECT_EQ(schedules[1].intervals, (std::vector<Interval>{{9.0, 13.0}}));
}

TEST(OperatingSchedule, Errors) {
    EXPECT_EQ(code_of([] { (void)parse_operating_schedule("Weekday: 18:00-07:00"); }), Errc::BadTimeRange);
    EXPECT_EQ(code_of([] { (void)parse_operating_schedule("Weekday: 7am to 5pm"); }), Errc::BadTimeRange);
    EXPECT_EQ(code_of([] { (void)parse_operating_schedule("Weekday: 25:00-26:00"); }), Errc::BadTimeRange);
    EXPECT_EQ(code_of([] { (void)parse_operating_schedule("Holiday: 08:00-12:00"); }), Errc::UnknownDayType);
}

TEST(OperatingScheduleProperty, MergeMatchesMinuteGridUnion) {
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> count(1, 6);
    std::uniform_int_distribution<int> minute(0, 24 * 60 - 1);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::pair<int, int>> ranges;
        std::string line = "Weekday:";
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            int a = minute(rng);
            int b = minute(rng);
            if (a == b) {
                b = a + 1;
            }
            if (a > b) {
                std::swap(a, b);
            }
            ranges.emplace_back(a, b);
            line += fmt::format("{} {:02}:{:02}-{:02}:{:02}", i == 0 ? "" : ",", a / 60, a % 60, b / 60, b % 60);
        }
        const auto parsed = parse_operating_schedule(line);
        ASSERT_EQ(parsed.size(), 1u);
        const auto expected = minute_union(ranges);
        ASSERT_EQ(parsed[0].intervals.size(), expected.size()) << line;
        for (std::size_t i = 0; i < expected.size(); ++i) {
            EXPECT_NEAR(parsed[0].intervals[i].start_hour, expected[i].start_hour, 1e-12) << line;
            EXPECT_NEAR(parsed[0].intervals[i].end_hour, expected[i].end_hour, 1e-12) << line;
        }
    }
}
