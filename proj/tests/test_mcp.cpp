#include <gtest/gtest.h>

#include <chrono>
#include <sstream>

#include "codecheck/builtin_tools.hpp"
#include "codecheck/mcp.hpp"
#include "codecheck/text.hpp"

using namespace codecheck;
using namespace codecheck::mcp;

namespace {

std::vector<nlohmann::json> json_lines(const std::string& text) {
    std::vector<nlohmann::json> out;
    for (const auto& line : split_lines(text)) {
        if (!trim(line).empty()) {
            out.push_back(nlohmann::json::parse(line));
        }
    }
    return out;
}

nlohmann::json request(int id, const std::string& method, const nlohmann::json& params = nullptr) {
    nlohmann::json r{{"jsonrpc", "2.0"}, {"id", id}, {"method", method}};
    if (!params.is_null()) {
        r["params"] = params;
    }
    return r;
}

nlohmann::json initialized_reply(McpServer& server) {
    return *server.handle_message(request(1, "initialize", {{"protocolVersion", "2024-11-05"}}));
}

const nlohmann::json kBankArgs{
    {"area", 500}, {"area_unit", "m2"}, {"use_type", "bank_financial_institution"}, {"code_version", "ashrae_90_1_2022"}};

} // namespace

TEST(Mcp, GoldenTranscript) {
    const auto registry = tools::make_registry({});
    McpServer server(registry);
    std::istringstream in(read_text_file(std::string(CODECHECK_TEST_DATA_DIR) + "/mcp_session.jsonl"));
    std::ostringstream out;
    std::ostringstream log;
    const auto start = std::chrono::steady_clock::now();
    server.serve(in, out, log);
    EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);

    const auto actual = json_lines(out.str());
    const auto expected = json_lines(read_text_file(std::string(CODECHECK_TEST_DATA_DIR) + "/mcp_expected.jsonl"));
    ASSERT_EQ(actual.size(), expected.size()) << out.str();
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(actual[i], expected[i]) << "response " << i;
    }
    ASSERT_EQ(actual.size(), 5u);
    EXPECT_EQ(actual[2]["result"]["content"][0]["text"], "3019");
    EXPECT_EQ(actual[3]["error"]["code"], kParseError);
    EXPECT_EQ(actual[4]["error"]["code"], kMethodNotFound);
    EXPECT_EQ(log.str(), "mcp: input closed after 5 responses\n");
}

TEST(Mcp, StdoutCarriesOnlyProtocolLines) {
    const auto registry = tools::make_registry({});
    McpServer server(registry);
    std::istringstream in("\n{\"jsonrpc\":\"2.0\",\"method\":\"notifications/initialized\"}\n\n");
    std::ostringstream out;
    std::ostringstream log;
    server.serve(in, out, log);
    EXPECT_EQ(out.str(), "");
}

TEST(Mcp, CallsBeforeInitializeAreRejected) {
    const auto registry = tools::make_registry({});
    McpServer server(registry);
    const auto reply = *server.handle_message(request(7, "tools/list"));
    EXPECT_EQ(reply["id"], 7);
    EXPECT_EQ(reply["error"]["code"], kInvalidRequest);
    EXPECT_EQ(reply["error"]["data"], "not initialized");
    EXPECT_EQ((*server.handle_message(request(8, "ping")))["result"], nlohmann::json::object());
}

TEST(Mcp, InitializeOnce) {
    const auto registry = tools::make_registry({});
    McpServer server(registry);
    const auto first = initialized_reply(server);
    EXPECT_EQ(first["result"]["protocolVersion"], "2024-11-05");
    EXPECT_EQ(first["result"]["serverInfo"]["name"], "codecheck");
    EXPECT_TRUE(first["result"]["capabilities"].contains("tools"));
    EXPECT_TRUE(server.initialized());
    const auto second = initialized_reply(server);
    EXPECT_EQ(second["error"]["code"], kInvalidRequest);
    EXPECT_EQ(second["error"]["data"], "already initialized");
}

TEST(Mcp, ToolsListMatchesRegistry) {
    const auto registry = tools::make_registry({});
    McpServer server(registry);
    initialized_reply(server);
    const auto reply = *server.handle_message(request(2, "tools/list"));
    const auto& listed = reply["result"]["tools"];
    const auto descriptors = registry.descriptors();
    ASSERT_EQ(listed.size(), descriptors.size());
    for (std::size_t i = 0; i < descriptors.size(); ++i) {
        EXPECT_EQ(listed[i], agent::to_json(descriptors[i]));
    }
}

TEST(Mcp, ToolCallParityWithRegistry) {
    const auto registry = tools::make_registry({});
    McpServer server(registry);
    initialized_reply(server);
    for (const auto& args : {kBankArgs, nlohmann::json{{"area", 10}, {"area_unit", "ft2"}, {"use_type", "office"},
                                                        {"code_version", "ashrae_90_1_2022"}}}) {
        const auto direct = registry.invoke("LightingAllowedWattage", args);
        const auto reply = *server.handle_message(
            request(3, "tools/call", {{"name", "LightingAllowedWattage"}, {"arguments", args}}));
        EXPECT_EQ(reply["result"]["content"][0]["text"], direct.text);
        EXPECT_EQ(reply["result"]["isError"], direct.is_error);
    }
}

TEST(Mcp, ToolFaultIsContentNotProtocolError) {
    const auto registry = tools::make_registry({});
    McpServer server(registry);
    initialized_reply(server);
    auto args = kBankArgs;
    args["use_type"] = "warehouse";
    const auto reply = *server.handle_message(
        request(3, "tools/call", {{"name", "LightingAllowedWattage"}, {"arguments", args}}));
    EXPECT_TRUE(reply["result"]["isError"].get<bool>());
    EXPECT_EQ(reply["result"]["content"][0]["text"].get<std::string>().rfind("UnknownUseType:", 0), 0u);
}

TEST(Mcp, InvalidParams) {
    const auto registry = tools::make_registry({});
    McpServer server(registry);
    initialized_reply(server);
    const auto unknown = *server.handle_message(request(4, "tools/call", {{"name", "Nope"}}));
    EXPECT_EQ(unknown["error"]["code"], kInvalidParams);
    EXPECT_EQ(unknown["error"]["data"], "unknown tool");
    const auto missing = *server.handle_message(
        request(5, "tools/call", {{"name", "LightingAllowedWattage"}, {"arguments", {{"area", 5}}}}));
    EXPECT_EQ(missing["error"]["code"], kInvalidParams);
    const auto no_name = *server.handle_message(request(6, "tools/call", nlohmann::json::object()));
    EXPECT_EQ(no_name["error"]["code"], kInvalidParams);
}

TEST(Mcp, EnvelopeErrors) {
    const auto registry = tools::make_registry({});
    McpServer server(registry);
    const auto parse = nlohmann::json::parse(*server.handle_line("{oops"));
    EXPECT_EQ(parse["error"]["code"], kParseError);
    EXPECT_TRUE(parse["id"].is_null());

    const auto batch = nlohmann::json::parse(*server.handle_line("[]"));
    EXPECT_EQ(batch["error"]["code"], kInvalidRequest);
    EXPECT_TRUE(batch["id"].is_null());

    const auto version = *server.handle_message({{"jsonrpc", "1.0"}, {"id", 1}, {"method", "ping"}});
    EXPECT_EQ(version["error"]["code"], kInvalidRequest);
    EXPECT_EQ(version["id"], 1);

    const auto bad_id = *server.handle_message({{"jsonrpc", "2.0"}, {"id", {1, 2}}, {"method", "ping"}});
    EXPECT_EQ(bad_id["error"]["code"], kInvalidRequest);

    const auto no_method = *server.handle_message({{"jsonrpc", "2.0"}, {"id", "a"}});
    EXPECT_EQ(no_method["error"]["code"], kInvalidRequest);
    EXPECT_EQ(no_method["id"], "a");

    EXPECT_FALSE(server.handle_message({{"jsonrpc", "2.0"}, {"id", 9}, {"result", {}}}).has_value());
    EXPECT_FALSE(server.handle_message({{"jsonrpc", "2.0"}, {"method", "tools/call"}}).has_value());
    EXPECT_FALSE(server.handle_line("   ").has_value());
}

TEST(Mcp, StringIdsAreEchoed) {
    const auto registry = tools::make_registry({});
    McpServer server(registry);
    const auto reply = *server.handle_message({{"jsonrpc", "2.0"}, {"id", "abc"}, {"method", "unknown/thing"}});
    EXPECT_EQ(reply["id"], "abc");
    EXPECT_EQ(reply["error"]["code"], kMethodNotFound);
}
