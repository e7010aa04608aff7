#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "codecheck/agent.hpp"

namespace codecheck::mcp {

// JSON-RPC 2.0 reserved error codes.
inline constexpr int kParseError = -32700;
inline constexpr int kInvalidRequest = -32600;
inline constexpr int kMethodNotFound = -32601;
inline constexpr int kInvalidParams = -32602;
inline constexpr int kInternalError = -32603;

inline constexpr std::string_view kDefaultProtocolVersion = "2024-11-05";
inline constexpr std::string_view kServerName = "codecheck";
inline constexpr std::string_view kServerVersion = "0.1.0";

/// One MCP session over newline-delimited JSON-RPC. Single-threaded: a
/// long-running tool blocks the loop.
class McpServer {
public:
    /// The registry must outlive the server.
    explicit McpServer(const agent::ToolRegistry& registry);

    /// Handles one line. Returns the response line (no trailing newline),
    /// or nothing for notifications and blank lines.
    std::optional<std::string> handle_line(std::string_view line);

    /// Handles one parsed message; nothing for notifications.
    std::optional<nlohmann::json> handle_message(const nlohmann::json& message);

    /// Reads until the input closes, writing one response line per request.
    /// Diagnostics go to `log` and never to `out`.
    void serve(std::istream& in, std::ostream& out, std::ostream& log);

    [[nodiscard]] bool initialized() const noexcept { return initialized_; }

private:
    nlohmann::json dispatch(const std::string& method, const nlohmann::json& params);
    nlohmann::json call_tool(const nlohmann::json& params);

    const agent::ToolRegistry& registry_;
    bool initialized_ = false;
};

nlohmann::json make_error(const nlohmann::json& id, int code, std::string_view message,
                          const nlohmann::json& data = nullptr);

} // namespace codecheck::mcp
