#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "codecheck/error.hpp"
#include "codecheck/llm.hpp"

namespace codecheck::agent {

enum class FieldType { string, number, integer, boolean };
std::string_view to_string(FieldType type) noexcept;

struct FieldSpec {
    std::string name;
    FieldType type = FieldType::string;
    std::string description;
    bool required = true;
};

/// What a handler hands back. Faults are content, flagged with is_error.
struct ToolOutcome {
    std::string text;
    bool is_error = false;
    friend bool operator==(const ToolOutcome&, const ToolOutcome&) = default;
};

using ToolHandler = std::function<ToolOutcome(const nlohmann::json& arguments)>;
/// Optional per-tool reader for free-text Action Input that is neither JSON
/// nor key=value pairs. Returns an argument object.
using FreeTextReader = std::function<nlohmann::json(std::string_view text)>;

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<FieldSpec> fields;
    ToolHandler handler;
    FreeTextReader free_text;
};

struct ToolDescriptor {
    std::string name;
    std::string description;
    /// JSON Schema object: {type, properties, required}.
    nlohmann::json input_schema;
};

nlohmann::json input_schema(const std::vector<FieldSpec>& fields);
nlohmann::json to_json(const ToolDescriptor& descriptor);

/// Name-keyed tool table. Fill it before sharing; afterwards it is only
/// read, so concurrent invocations are safe as long as handlers are.
class ToolRegistry {
public:
    /// Throws Error{DuplicateTool}.
    void register_tool(ToolSpec spec);

    [[nodiscard]] bool contains(std::string_view name) const;
    [[nodiscard]] std::size_t size() const noexcept { return tools_.size(); }
    /// Sorted by name.
    [[nodiscard]] std::vector<ToolDescriptor> descriptors() const;

    /// Reads an Action Input into an argument object: a JSON object,
    /// key=value pairs, or free text. Values are coerced to the declared
    /// field types. Throws Error{UnknownTool|InvalidArguments}.
    [[nodiscard]] nlohmann::json parse_arguments(std::string_view name, std::string_view input_text) const;

    /// Checks required fields, unknown fields and value types.
    /// Throws Error{UnknownTool|InvalidArguments}.
    void validate(std::string_view name, const nlohmann::json& arguments) const;

    /// Validates then runs the handler. Exceptions thrown by the handler
    /// come back as is_error outcomes ("Code: message"); validation
    /// failures and unknown tools are thrown.
    [[nodiscard]] ToolOutcome invoke(std::string_view name, const nlohmann::json& arguments) const;

private:
    const ToolSpec& spec(std::string_view name) const;
    std::map<std::string, ToolSpec, std::less<>> tools_;
};

struct ActionDirective {
    std::string tool_name;
    std::string input_text;
    friend bool operator==(const ActionDirective&, const ActionDirective&) = default;
};

struct FinalAnswerDirective {
    std::string text;
    friend bool operator==(const FinalAnswerDirective&, const FinalAnswerDirective&) = default;
};

struct InvalidDirective {
    std::string reason;
    friend bool operator==(const InvalidDirective&, const InvalidDirective&) = default;
};

using ParsedDirective = std::variant<ActionDirective, FinalAnswerDirective, InvalidDirective>;

/// Reads one assistant turn. Markers are recognized at the start of a line,
/// case-insensitively, after optional indentation. Other lines (e.g.
/// "Thought: ...") are free reasoning.
ParsedDirective parse_directive(std::string_view assistant_text);

enum class StepRole { system, user, assistant, observation };
std::string_view to_string(StepRole role) noexcept;

struct Step {
    StepRole role = StepRole::user;
    std::string text;
    friend bool operator==(const Step&, const Step&) = default;
};

struct RunMetrics {
    double wall_time_ms = 0.0;
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    /// "provider", "whitespace_proxy" or "mixed".
    std::string token_count_source = "whitespace_proxy";
};

struct Transcript {
    std::vector<Step> steps;
    std::vector<std::string> tools_used;
    RunMetrics metrics;
};

/// True when every observation directly follows an assistant Action turn.
bool is_well_formed(const Transcript& transcript);

struct AgentResult {
    std::string input;
    std::string output;
    std::vector<std::string> tools_used;
    Transcript transcript;
};

/// Raised for MaxStepsExceeded and RepeatedInvalidDirective; keeps the
/// partial transcript for diagnosis.
class AgentAborted : public Error {
public:
    AgentAborted(Errc code, const std::string& message, Transcript transcript)
        : Error(code, message), transcript_(std::move(transcript)) {}
    [[nodiscard]] const Transcript& transcript() const noexcept { return transcript_; }

private:
    Transcript transcript_;
};

inline constexpr std::size_t kDefaultMaxSteps = 8;

/// The agent instructions, without the tool list.
std::string_view base_system_prompt() noexcept;
/// base_system_prompt() followed by one line per registered tool.
std::string build_system_prompt(const ToolRegistry& registry);

struct AgentOptions {
    std::size_t max_steps = kDefaultMaxSteps;
    llm::GenerationParams params;
    /// Earlier turns of the same conversation, placed after the system
    /// prompt and before the new query.
    std::vector<llm::Message> history;
};

/// ReAct loop. Each generate() call is one step. Tool output, including
/// error text, becomes the next observation. Throws AgentAborted and
/// anything the generator throws (e.g. GeneratorUnavailable).
AgentResult run_agent(const ToolRegistry& registry, llm::LlmClient& llm, std::string_view query,
                      const AgentOptions& options = {});

nlohmann::json to_json(const Step& step);
nlohmann::json to_json(const RunMetrics& metrics);
nlohmann::json to_json(const AgentResult& result);

} // namespace codecheck::agent
