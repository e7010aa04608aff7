#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codecheck::llm {

enum class Role { system, user, assistant };
std::string_view to_string(Role role) noexcept;

struct Message {
    Role role = Role::user;
    std::string content;
    friend bool operator==(const Message&, const Message&) = default;
};

struct GenerationParams {
    double temperature = 0.0;
    int max_tokens = 1024;
};

struct TokenUsage {
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
};

struct Generation {
    std::string text;
    /// Present only when the provider reports usage.
    std::optional<TokenUsage> usage;
};

/// A chat-completion backend. Implementations throw
/// Error{GeneratorUnavailable} when they cannot produce a turn.
class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual Generation generate(const std::vector<Message>& messages, const GenerationParams& params) = 0;
    /// Label recorded in benchmark output.
    [[nodiscard]] virtual std::string label() const = 0;
};

/// Replays a fixed list of assistant turns in order. Thread-safe; throws
/// GeneratorUnavailable once the script is exhausted.
class ScriptedLlm final : public LlmClient {
public:
    explicit ScriptedLlm(std::vector<std::string> turns, std::string label = "scripted-stub");

    Generation generate(const std::vector<Message>& messages, const GenerationParams& params) override;
    [[nodiscard]] std::string label() const override { return label_; }

    /// Messages seen by each generate() call, in order.
    [[nodiscard]] std::vector<std::vector<Message>> calls() const;

private:
    std::vector<std::string> turns_;
    std::string label_;
    mutable std::mutex mutex_;
    std::size_t next_ = 0;
    std::vector<std::vector<Message>> calls_;
};

/// Answers with the content of the last user message.
class EchoLlm final : public LlmClient {
public:
    Generation generate(const std::vector<Message>& messages, const GenerationParams& params) override;
    [[nodiscard]] std::string label() const override { return "echo-stub"; }
};

/// Offline stand-in for an agent model. It reads the question, emits one
/// Action for the lighting allowance or a surface query when it can
/// recognize the arguments, and turns the first observation into a Final
/// Answer. Deterministic; it never invents tool results.
class HeuristicAgentLlm final : public LlmClient {
public:
    Generation generate(const std::vector<Message>& messages, const GenerationParams& params) override;
    [[nodiscard]] std::string label() const override { return "heuristic-stub"; }
};

/// Always throws GeneratorUnavailable.
class UnavailableLlm final : public LlmClient {
public:
    Generation generate(const std::vector<Message>& messages, const GenerationParams& params) override;
    [[nodiscard]] std::string label() const override { return "unavailable"; }
};

struct HttpLlmConfig {
    /// Base URL, e.g. "https://api.example.com"; the client posts to
    /// <base>/v1/chat/completions.
    std::string base_url;
    std::string api_key;
    std::string model;
    int timeout_seconds = 60;
};

/// OpenAI-compatible chat-completions adapter.
class HttpLlm final : public LlmClient {
public:
    explicit HttpLlm(HttpLlmConfig config);
    /// Reads LLM_BASE_URL, LLM_API_KEY, LLM_MODEL. Throws
    /// Error{MissingConfiguration} when the URL or model is unset.
    static HttpLlmConfig config_from_env();

    Generation generate(const std::vector<Message>& messages, const GenerationParams& params) override;
    [[nodiscard]] std::string label() const override { return config_.model; }

private:
    HttpLlmConfig config_;
};

/// Whitespace-token proxy for usage when the provider reports none.
TokenUsage estimate_usage(const std::vector<Message>& messages, std::string_view completion);

} // namespace codecheck::llm
