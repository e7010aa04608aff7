#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "codecheck/agent.hpp"
#include "codecheck/llm.hpp"

namespace httplib {
class Server;
}

namespace codecheck::service {

struct ChatSession {
    std::string session_id;
    std::string created_at;
    /// Every step of every episode, append-only.
    std::vector<agent::Step> history;
    /// (input, output) per completed episode; replayed to the model as context.
    std::vector<std::pair<std::string, std::string>> turns;
};

/// Thread-safe in-memory sessions with an optional JSONL journal. A journal
/// that already exists is replayed on construction.
class SessionStore {
public:
    SessionStore() = default;
    explicit SessionStore(std::filesystem::path journal);

    /// Fresh id, unique within this store.
    std::string create();
    [[nodiscard]] std::optional<ChatSession> find(const std::string& session_id) const;
    void append(const std::string& session_id, const agent::AgentResult& result);
    [[nodiscard]] std::size_t size() const;

private:
    std::string create_locked();

    mutable std::mutex mutex_;
    std::map<std::string, ChatSession> sessions_;
    std::filesystem::path journal_;
    std::uint64_t counter_ = 0;
};

struct ChatRequest {
    std::optional<std::string> session_id;
    std::string message;
};

struct ChatResponse {
    std::string session_id;
    std::string input;
    std::string output;
    std::vector<std::string> tools_used;
    std::vector<agent::Step> chain_log;
    agent::RunMetrics metrics;
};

nlohmann::json to_json(const ChatResponse& response);

/// Produces the generator for one chat request.
using LlmFactory = std::function<std::shared_ptr<llm::LlmClient>()>;

struct HttpReply {
    int status = 200;
    nlohmann::json body;
};

class ChatService {
public:
    /// The registry must outlive the service.
    ChatService(const agent::ToolRegistry& registry, LlmFactory factory, std::shared_ptr<SessionStore> store,
                agent::AgentOptions options = {});

    /// Creates a session when the id is absent or unknown. Throws
    /// Error{InvalidArguments} for an empty message, plus anything run_agent
    /// throws.
    ChatResponse handle_chat(const ChatRequest& request);

    /// JSON in, status and JSON out: 200 ChatResponse; 400 bad request;
    /// 503 generator unavailable; 500 for other failures. Error bodies are
    /// {"error": {"code", "message"}}.
    HttpReply chat_http(std::string_view body);
    [[nodiscard]] HttpReply health() const;
    [[nodiscard]] HttpReply tools() const;

private:
    const agent::ToolRegistry& registry_;
    LlmFactory factory_;
    std::shared_ptr<SessionStore> store_;
    agent::AgentOptions options_;
};

nlohmann::json error_body(std::string_view code, std::string_view message);

/// POST /api/chat, GET /api/health, GET /api/tools, plus static files from
/// static_dir when given.
void install_routes(httplib::Server& server, ChatService& service,
                    const std::optional<std::filesystem::path>& static_dir = std::nullopt);

struct BenchPrompt {
    std::string id;
    std::string text;
};

/// The two model-performance prompts used for latency and token runs.
std::vector<BenchPrompt> default_bench_prompts();

struct BenchRecord {
    std::string model;
    std::string prompt_id;
    double wall_time_ms = 0.0;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    double temperature = 0.0;
    std::string token_count_source;
};

struct BenchSummary {
    std::string prompt_id;
    std::size_t runs = 0;
    double mean_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;
    double mean_prompt_tokens = 0.0;
    double mean_completion_tokens = 0.0;
};

struct BenchReport {
    std::vector<BenchRecord> records;
    std::vector<BenchSummary> summary;
};

/// Milliseconds since an arbitrary origin.
using Clock = std::function<double()>;
Clock steady_clock_ms();

/// One generate() call per prompt per repetition, in prompt-major order.
/// Throws Error{InvalidArguments} for zero repetitions and whatever the
/// generator throws.
BenchReport run_bench(const std::vector<BenchPrompt>& prompts, llm::LlmClient& generator, std::size_t repetitions,
                      const llm::GenerationParams& params = {}, const Clock& clock = steady_clock_ms());

nlohmann::json to_json(const BenchReport& report);

} // namespace codecheck::service
