#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "codecheck/cli.hpp"
#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

using namespace codecheck;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;

    [[nodiscard]] nlohmann::json json() const { return nlohmann::json::parse(out); }
};

Run run(const std::vector<std::string>& args, const std::string& input = {}) {
    std::istringstream in(input);
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run_cli(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& relative) {
    return std::string(CODECHECK_DATA_DIR) + "/" + relative;
}

std::filesystem::path temp_path(const std::string& stem) {
    std::random_device rd;
    return std::filesystem::temp_directory_path() / fmt::format("codecheck-{}-{:08x}", stem, rd());
}

} // namespace

TEST(Cli, CheckPrintsAllowance) {
    const auto r = run({"check", "--area", "500", "--unit", "m2", "--use", "bank", "--code", "ASHRAE 90.1-2022"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = r.json();
    EXPECT_EQ(doc["allowance_w"], 3019);
    EXPECT_EQ(doc["status"], "unknown");
    EXPECT_EQ(doc["input"]["use_type"], "bank_financial_institution");
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, CheckWithDesignedWattageFails) {
    const auto r = run({"check", "--area", "500", "--use", "bank", "--code", "90.1-2022", "--designed", "4000"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.json()["status"], "fail");
}

TEST(Cli, UsageErrorsExitTwo) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"no-such-command"}).code, 2);
    EXPECT_EQ(run({"extract"}).code, 2);
    EXPECT_EQ(run({"check", "--area", "lots"}).code, 2);
}

TEST(Cli, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
}

TEST(Cli, OperationFailuresExitOneWithErrorDocument) {
    const auto missing = run({"extract", "definitely-missing.xml"});
    EXPECT_EQ(missing.code, 1);
    EXPECT_EQ(missing.json()["error"]["code"], "FileNotFound");

    const auto unknown_use = run({"check", "--area", "10", "--use", "warehouse", "--code", "90.1-2022"});
    EXPECT_EQ(unknown_use.code, 1);
    EXPECT_EQ(unknown_use.json()["error"]["code"], "UnknownUseType");

    const auto negative = run({"check", "--area", "-3", "--use", "bank", "--code", "90.1-2022"});
    EXPECT_EQ(negative.code, 1);
    EXPECT_EQ(negative.json()["error"]["code"], "NegativeArea");
}

TEST(Cli, ExtractSampleModel) {
    const auto r = run({"extract", data("samples/bank_branch.xml")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = r.json();
    const auto& surfaces = doc.contains("surfaces") ? doc["surfaces"] : doc;
    EXPECT_EQ(surfaces.size(), 7u);
}

TEST(Cli, ParseDocs) {
    const auto r = run({"parse-docs", data("samples/lighting_fixture_schedule.txt"), "--schedule",
                        data("samples/operating_schedule.txt")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = r.json();
    EXPECT_EQ(doc["fixtures"].size(), 3u);
    EXPECT_TRUE(doc.contains("schedules"));
}

TEST(Cli, AgentWithStubGenerator) {
    const auto r = run({"agent",
                        "What is the lighting power allowance for a 500-square-meter bank according to ASHRAE 90.1-2022?"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = r.json();
    EXPECT_EQ(doc["output"], "3019 W");
    EXPECT_EQ(doc["tools_used"], nlohmann::json::array({"LightingAllowedWattage"}));
}

TEST(Cli, AgentWithScriptedGenerator) {
    const auto script = temp_path("script");
    write_text_file(script, R"(["Action: get_surface_tilt\nAction Input: roof_unit1", "Final Answer: flat roof"])");
    const auto r = run({"agent", "Tilt of roof?", "--generator", "script:" + script.string(), "--gbxml",
                        data("samples/bank_branch.xml")});
    std::filesystem::remove(script);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = r.json();
    EXPECT_EQ(doc["output"], "flat roof");
    EXPECT_EQ(doc["chain_log"][3]["text"], "0");
}

TEST(Cli, AgentUnavailableGenerator) {
    ::unsetenv("LLM_BASE_URL");
    ::unsetenv("LLM_MODEL");
    const auto r = run({"agent", "q", "--generator", "http"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.json()["error"]["code"], "MissingConfiguration");
}

TEST(Cli, IndexThenAsk) {
    const auto index_file = temp_path("index");
    const auto built = run({"index", data("corpus/sample_provisions.json"), "--out", index_file.string()});
    ASSERT_EQ(built.code, 0) << built.err;
    const auto r = run({"ask", "lighting power density for a bank", "--index", index_file.string(), "--expect-w", "3019"});
    std::filesystem::remove(index_file);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = r.json();
    ASSERT_FALSE(doc["citations"].empty());
    EXPECT_EQ(doc["citations"][0]["section_label"], "9.5.1");
    EXPECT_TRUE(doc.contains("rules_check"));
}

TEST(Cli, McpServeOverStreams) {
    const std::string session =
        R"({"jsonrpc":"2.0","id":1,"method":"initialize","params":{}})"
        "\n"
        R"({"jsonrpc":"2.0","id":2,"method":"tools/call","params":{"name":"LightingAllowedWattage","arguments":{"area":500,"area_unit":"m2","use_type":"bank","code_version":"90.1-2022"}}})"
        "\n";
    const auto r = run({"mcp-serve"}, session);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lines = split_lines(r.out);
    ASSERT_GE(lines.size(), 2u);
    EXPECT_EQ(nlohmann::json::parse(lines[1])["result"]["content"][0]["text"], "3019");
    EXPECT_NE(r.err.find("input closed"), std::string::npos);
}

TEST(Cli, RecordFixtureThenReplayAgent) {
    const auto dir = temp_path("fixtures");
    const auto recorded = run({"record-fixture", "--area", "500", "--unit", "m2", "--use", "bank", "--code",
                               "ASHRAE 90.1-2022", "--fixtures", dir.string()});
    ASSERT_EQ(recorded.code, 0) << recorded.err;
    const auto r = run({"agent",
                        "What is the lighting power allowance for a 500-square-meter bank according to ASHRAE 90.1-2022?",
                        "--comcheck-mode", "replay", "--fixtures", dir.string()});
    std::filesystem::remove_all(dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.json()["output"], "3019 W");
}

TEST(Cli, BenchWithEchoGenerator) {
    const auto r = run({"bench", "--generator", "echo", "--reps", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = r.json();
    EXPECT_EQ(doc["records"].size(), 4u);
    EXPECT_EQ(doc["summary"].size(), 2u);
}

TEST(Cli, GeneratorFactory) {
    EXPECT_EQ(cli::make_llm_factory("stub")()->label(), "heuristic-stub");
    EXPECT_EQ(cli::make_llm_factory("echo")()->label(), "echo-stub");
    try {
        (void)cli::make_llm_factory("oracle");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidArguments);
    }
}
