#include "codecheck/mcp.hpp"

#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

namespace codecheck::mcp {

namespace {

struct RpcFailure {
    int code;
    std::string message;
    nlohmann::json data;
};

bool valid_id(const nlohmann::json& id) {
    return id.is_string() || id.is_number_integer() || id.is_null();
}

[[noreturn]] void fail(int code, std::string message, nlohmann::json data = nullptr) {
    throw RpcFailure{code, std::move(message), std::move(data)};
}

} // namespace

nlohmann::json make_error(const nlohmann::json& id, int code, std::string_view message, const nlohmann::json& data) {
    nlohmann::json error{{"code", code}, {"message", message}};
    if (!data.is_null()) {
        error["data"] = data;
    }
    return {{"jsonrpc", "2.0"}, {"id", id}, {"error", std::move(error)}};
}

McpServer::McpServer(const agent::ToolRegistry& registry) : registry_(registry) {}

std::optional<std::string> McpServer::handle_line(std::string_view line) {
    const auto text = trim(line);
    if (text.empty()) {
        return std::nullopt;
    }
    const auto message = nlohmann::json::parse(text, nullptr, false);
    if (message.is_discarded()) {
        return make_error(nullptr, kParseError, "Parse error").dump();
    }
    if (auto response = handle_message(message)) {
        return response->dump();
    }
    return std::nullopt;
}

std::optional<nlohmann::json> McpServer::handle_message(const nlohmann::json& message) {
    if (message.is_array()) {
        return make_error(nullptr, kInvalidRequest, "Invalid Request", "batch requests are not supported");
    }
    if (!message.is_object()) {
        return make_error(nullptr, kInvalidRequest, "Invalid Request", "message must be an object");
    }
    const bool has_id = message.contains("id");
    if (has_id && !valid_id(message["id"])) {
        return make_error(nullptr, kInvalidRequest, "Invalid Request", "id must be a string or an integer");
    }
    const nlohmann::json id = has_id ? message["id"] : nlohmann::json(nullptr);
    if (message.value("jsonrpc", "") != "2.0") {
        return make_error(id, kInvalidRequest, "Invalid Request", "jsonrpc must be \"2.0\"");
    }
    if (!message.contains("method") || !message["method"].is_string()) {
        if (message.contains("result") || message.contains("error")) {
            return std::nullopt; // a client response; this server never sends requests
        }
        return make_error(id, kInvalidRequest, "Invalid Request", "method must be a string");
    }
    const auto method = message["method"].get<std::string>();
    const nlohmann::json params = message.contains("params") ? message["params"] : nlohmann::json::object();
    if (!params.is_object() && !params.is_array()) {
        return has_id ? std::optional(make_error(id, kInvalidRequest, "Invalid Request", "params must be structured"))
                      : std::nullopt;
    }

    if (!has_id) {
        // Notifications never get a response, whatever they contain.
        return std::nullopt;
    }
    try {
        return nlohmann::json{{"jsonrpc", "2.0"}, {"id", id}, {"result", dispatch(method, params)}};
    } catch (const RpcFailure& f) {
        return make_error(id, f.code, f.message, f.data);
    } catch (const std::exception& e) {
        return make_error(id, kInternalError, "Internal error", e.what());
    }
}

nlohmann::json McpServer::dispatch(const std::string& method, const nlohmann::json& params) {
    if (method == "initialize") {
        if (initialized_) {
            fail(kInvalidRequest, "Invalid Request", "already initialized");
        }
        initialized_ = true;
        std::string version(kDefaultProtocolVersion);
        if (params.is_object() && params.contains("protocolVersion") && params["protocolVersion"].is_string()) {
            version = params["protocolVersion"].get<std::string>();
        }
        return {{"protocolVersion", version},
                {"capabilities", {{"tools", {{"listChanged", false}}}}},
                {"serverInfo", {{"name", kServerName}, {"version", kServerVersion}}}};
    }
    if (method == "ping") {
        return nlohmann::json::object();
    }
    if (method != "tools/list" && method != "tools/call") {
        fail(kMethodNotFound, "Method not found", method);
    }
    if (!initialized_) {
        fail(kInvalidRequest, "Invalid Request", "not initialized");
    }
    if (method == "tools/list") {
        nlohmann::json tools = nlohmann::json::array();
        for (const auto& d : registry_.descriptors()) {
            tools.push_back(agent::to_json(d));
        }
        return {{"tools", std::move(tools)}};
    }
    return call_tool(params);
}

nlohmann::json McpServer::call_tool(const nlohmann::json& params) {
    if (!params.is_object() || !params.contains("name") || !params["name"].is_string()) {
        fail(kInvalidParams, "Invalid params", "name must be a string");
    }
    const auto name = params["name"].get<std::string>();
    if (!registry_.contains(name)) {
        fail(kInvalidParams, "Invalid params", "unknown tool");
    }
    const nlohmann::json arguments = params.contains("arguments") ? params["arguments"] : nlohmann::json::object();
    try {
        registry_.validate(name, arguments);
    } catch (const Error& e) {
        fail(kInvalidParams, "Invalid params", e.what());
    }
    const auto outcome = registry_.invoke(name, arguments);
    return {{"content", nlohmann::json::array({{{"type", "text"}, {"text", outcome.text}}})},
            {"isError", outcome.is_error}};
}

void McpServer::serve(std::istream& in, std::ostream& out, std::ostream& log) {
    std::string line;
    std::size_t requests = 0;
    while (std::getline(in, line)) {
        auto response = handle_line(line);
        if (!response) {
            continue;
        }
        ++requests;
        out << *response << '\n';
        out.flush();
    }
    log << fmt::format("mcp: input closed after {} responses\n", requests);
}

} // namespace codecheck::mcp
