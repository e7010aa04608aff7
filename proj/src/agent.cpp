#include "codecheck/agent.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <optional>

#include <fmt/format.h>

#include "codecheck/text.hpp"

namespace codecheck::agent {

namespace {

// Shipped verbatim as data/prompts/agent_system.txt as well.
constexpr std::string_view kSystemPrompt =
    "You are an agent tool caller. Follow this rule strictly:\n"
    "1. If a tool is needed, only respond with:\n"
    " Action: <tool name>\n"
    " Action Input: <input text>\n"
    "2. Do NOT include Final Answer until after tool output.\n"
    "3. NEVER return both Action and Final Answer in the same response.\n"
    "4. NEVER invent tool results \xE2\x80\x94 wait for actual tool output.";

constexpr std::string_view kActionInput = "action input:";
constexpr std::string_view kAction = "action:";
constexpr std::string_view kFinalAnswer = "final answer:";
constexpr std::string_view kObservation = "observation:";

std::string_view after_marker(std::string_view line, std::string_view marker) {
    return trim(line.substr(marker.size()));
}

bool is_identifier_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_identifier_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool is_separator(char c) {
    return c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c)) != 0;
}

/// True when text[pos..] reads "identifier =".
bool key_starts_at(std::string_view text, std::size_t pos) {
    if (pos >= text.size() || !is_identifier_start(text[pos])) {
        return false;
    }
    while (pos < text.size() && is_identifier_char(text[pos])) {
        ++pos;
    }
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) {
        ++pos;
    }
    return pos < text.size() && text[pos] == '=';
}

/// Parses `a=1, b="two words"; c=x y=z`. Returns nullopt when the text is
/// not in pair form at all.
std::optional<std::vector<std::pair<std::string, std::string>>> read_pairs(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> pairs;
    std::size_t pos = 0;
    const auto skip = [&](auto pred) {
        while (pos < text.size() && pred(text[pos])) {
            ++pos;
        }
    };
    skip(is_separator);
    while (pos < text.size()) {
        if (!key_starts_at(text, pos)) {
            return std::nullopt;
        }
        const auto key_begin = pos;
        skip(is_identifier_char);
        std::string key(text.substr(key_begin, pos - key_begin));
        skip([](char c) { return c == ' ' || c == '\t'; });
        ++pos; // '='
        skip([](char c) { return c == ' ' || c == '\t'; });

        std::string value;
        if (pos < text.size() && (text[pos] == '"' || text[pos] == '\'')) {
            const char quote = text[pos++];
            const auto close = text.find(quote, pos);
            if (close == std::string_view::npos) {
                return std::nullopt;
            }
            value = std::string(text.substr(pos, close - pos));
            pos = close + 1;
        } else {
            const auto value_begin = pos;
            while (pos < text.size()) {
                const char c = text[pos];
                if (c == ',' || c == ';' || c == '\n') {
                    break;
                }
                if (std::isspace(static_cast<unsigned char>(c)) != 0) {
                    auto next = pos;
                    while (next < text.size() && (text[next] == ' ' || text[next] == '\t')) {
                        ++next;
                    }
                    if (key_starts_at(text, next)) {
                        break;
                    }
                }
                ++pos;
            }
            value = std::string(trim(text.substr(value_begin, pos - value_begin)));
        }
        pairs.emplace_back(std::move(key), std::move(value));
        skip(is_separator);
    }
    if (pairs.empty()) {
        return std::nullopt;
    }
    return pairs;
}

std::optional<double> parse_double(std::string_view text) {
    std::string cleaned(trim(text));
    std::erase(cleaned, ',');
    double value = 0.0;
    const auto* end = cleaned.data() + cleaned.size();
    const auto [ptr, ec] = std::from_chars(cleaned.data(), end, value);
    if (cleaned.empty() || ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return value;
}

nlohmann::json coerce(const FieldSpec& field, const std::string& raw) {
    switch (field.type) {
    case FieldType::string:
        return raw;
    case FieldType::number:
        if (auto v = parse_double(raw)) {
            return *v;
        }
        break;
    case FieldType::integer:
        if (auto v = parse_double(raw); v && *v == static_cast<double>(static_cast<long long>(*v))) {
            return static_cast<long long>(*v);
        }
        break;
    case FieldType::boolean:
        if (iequals(raw, "true")) {
            return true;
        }
        if (iequals(raw, "false")) {
            return false;
        }
        break;
    }
    throw Error(Errc::InvalidArguments,
                fmt::format("field '{}' expects {}, got '{}'", field.name, to_string(field.type), raw));
}

bool type_matches(FieldType type, const nlohmann::json& value) {
    switch (type) {
    case FieldType::string: return value.is_string();
    case FieldType::number: return value.is_number();
    case FieldType::integer:
        return value.is_number_integer() ||
               (value.is_number_float() && value.get<double>() == static_cast<double>(value.get<long long>()));
    case FieldType::boolean: return value.is_boolean();
    }
    return false;
}

std::size_t count_turn_tokens(const std::vector<llm::Message>& sent, const llm::Generation& generation,
                              RunMetrics& metrics, bool& any_provider, bool& any_proxy) {
    llm::TokenUsage usage;
    if (generation.usage) {
        usage = *generation.usage;
        any_provider = true;
    } else {
        usage = llm::estimate_usage(sent, generation.text);
        any_proxy = true;
    }
    metrics.prompt_tokens += usage.prompt_tokens;
    metrics.completion_tokens += usage.completion_tokens;
    return usage.prompt_tokens + usage.completion_tokens;
}

} // namespace

std::string_view to_string(FieldType type) noexcept {
    switch (type) {
    case FieldType::string: return "string";
    case FieldType::number: return "number";
    case FieldType::integer: return "integer";
    case FieldType::boolean: return "boolean";
    }
    return "string";
}

std::string_view to_string(StepRole role) noexcept {
    switch (role) {
    case StepRole::system: return "system";
    case StepRole::user: return "user";
    case StepRole::assistant: return "assistant";
    case StepRole::observation: return "observation";
    }
    return "user";
}

nlohmann::json input_schema(const std::vector<FieldSpec>& fields) {
    nlohmann::json properties = nlohmann::json::object();
    nlohmann::json required = nlohmann::json::array();
    for (const auto& f : fields) {
        properties[f.name] = {{"type", to_string(f.type)}, {"description", f.description}};
        if (f.required) {
            required.push_back(f.name);
        }
    }
    return {{"type", "object"}, {"properties", std::move(properties)}, {"required", std::move(required)}};
}

nlohmann::json to_json(const ToolDescriptor& descriptor) {
    return {{"name", descriptor.name}, {"description", descriptor.description}, {"inputSchema", descriptor.input_schema}};
}

void ToolRegistry::register_tool(ToolSpec spec) {
    if (spec.name.empty()) {
        throw Error(Errc::InvalidArguments, "tool name must not be empty");
    }
    if (tools_.contains(spec.name)) {
        throw Error(Errc::DuplicateTool, fmt::format("tool '{}' is already registered", spec.name));
    }
    auto name = spec.name;
    tools_.emplace(std::move(name), std::move(spec));
}

bool ToolRegistry::contains(std::string_view name) const {
    return tools_.find(name) != tools_.end();
}

const ToolSpec& ToolRegistry::spec(std::string_view name) const {
    const auto it = tools_.find(name);
    if (it == tools_.end()) {
        throw Error(Errc::UnknownTool, fmt::format("unknown tool: {}", name));
    }
    return it->second;
}

std::vector<ToolDescriptor> ToolRegistry::descriptors() const {
    std::vector<ToolDescriptor> out;
    out.reserve(tools_.size());
    for (const auto& [name, spec] : tools_) {
        out.push_back({name, spec.description, input_schema(spec.fields)});
    }
    return out;
}

nlohmann::json ToolRegistry::parse_arguments(std::string_view name, std::string_view input_text) const {
    const auto& tool = spec(name);
    const auto text = trim(input_text);

    if (text.starts_with('{')) {
        auto doc = nlohmann::json::parse(text, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) {
            throw Error(Errc::InvalidArguments, "action input looks like JSON but is not a valid object");
        }
        return doc;
    }

    const auto field_named = [&](std::string_view key) -> const FieldSpec* {
        const auto it = std::find_if(tool.fields.begin(), tool.fields.end(),
                                     [&](const FieldSpec& f) { return f.name == key; });
        return it == tool.fields.end() ? nullptr : &*it;
    };

    nlohmann::json args = nlohmann::json::object();
    if (auto pairs = read_pairs(text)) {
        for (const auto& [key, raw] : *pairs) {
            const auto* field = field_named(key);
            if (field == nullptr) {
                throw Error(Errc::InvalidArguments, fmt::format("tool '{}' has no field '{}'", name, key));
            }
            args[key] = coerce(*field, raw);
        }
        return args;
    }

    if (tool.free_text) {
        return tool.free_text(text);
    }
    const auto first = std::find_if(tool.fields.begin(), tool.fields.end(), [](const FieldSpec& f) { return f.required; });
    if (first == tool.fields.end()) {
        return args;
    }
    args[first->name] = coerce(*first, std::string(text));
    return args;
}

void ToolRegistry::validate(std::string_view name, const nlohmann::json& arguments) const {
    const auto& tool = spec(name);
    if (!arguments.is_object()) {
        throw Error(Errc::InvalidArguments, "arguments must be an object");
    }
    for (const auto& [key, value] : arguments.items()) {
        const auto it = std::find_if(tool.fields.begin(), tool.fields.end(),
                                     [&](const FieldSpec& f) { return f.name == key; });
        if (it == tool.fields.end()) {
            throw Error(Errc::InvalidArguments, fmt::format("unexpected field '{}'", key));
        }
        if (!type_matches(it->type, value)) {
            throw Error(Errc::InvalidArguments,
                        fmt::format("field '{}' must be of type {}", key, to_string(it->type)));
        }
    }
    for (const auto& f : tool.fields) {
        if (f.required && !arguments.contains(f.name)) {
            throw Error(Errc::InvalidArguments, fmt::format("missing required field '{}'", f.name));
        }
    }
}

ToolOutcome ToolRegistry::invoke(std::string_view name, const nlohmann::json& arguments) const {
    validate(name, arguments);
    const auto& tool = spec(name);
    try {
        return tool.handler(arguments);
    } catch (const Error& e) {
        return {describe(e), true};
    } catch (const std::exception& e) {
        return {fmt::format("{}: {}", to_string(Errc::IoError), e.what()), true};
    }
}

ParsedDirective parse_directive(std::string_view assistant_text) {
    const auto lines = split_lines(assistant_text);
    std::vector<std::size_t> actions;
    std::optional<std::size_t> input_line;
    std::optional<std::size_t> final_line;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (istarts_with(line, kActionInput)) {
            if (!input_line) {
                input_line = i;
            }
        } else if (istarts_with(line, kAction)) {
            actions.push_back(i);
        } else if (istarts_with(line, kFinalAnswer)) {
            if (!final_line) {
                final_line = i;
            }
        }
    }

    if (!actions.empty() && final_line) {
        return InvalidDirective{"both action and final answer"};
    }
    if (final_line) {
        if (input_line) {
            return InvalidDirective{"both action and final answer"};
        }
        std::string text(after_marker(trim(lines[*final_line]), kFinalAnswer));
        for (auto i = *final_line + 1; i < lines.size(); ++i) {
            text += '\n';
            text += lines[i];
        }
        text = std::string(trim(text));
        if (text.empty()) {
            return InvalidDirective{"empty final answer"};
        }
        return FinalAnswerDirective{std::move(text)};
    }
    if (actions.empty()) {
        return InvalidDirective{input_line ? "action input without action" : "no directive"};
    }
    if (actions.size() > 1) {
        return InvalidDirective{"multiple actions"};
    }
    const auto action_line = actions.front();
    std::string tool(after_marker(trim(lines[action_line]), kAction));
    if (tool.empty()) {
        return InvalidDirective{"missing tool name"};
    }
    if (!input_line) {
        return InvalidDirective{"missing action input"};
    }
    if (*input_line < action_line) {
        return InvalidDirective{"action input before action"};
    }
    std::string input(after_marker(trim(lines[*input_line]), kActionInput));
    for (auto i = *input_line + 1; i < lines.size(); ++i) {
        if (istarts_with(trim(lines[i]), kObservation)) {
            break;
        }
        input += '\n';
        input += lines[i];
    }
    return ActionDirective{std::move(tool), std::string(trim(input))};
}

bool is_well_formed(const Transcript& transcript) {
    for (std::size_t i = 0; i < transcript.steps.size(); ++i) {
        if (transcript.steps[i].role != StepRole::observation) {
            continue;
        }
        if (i == 0 || transcript.steps[i - 1].role != StepRole::assistant ||
            !std::holds_alternative<ActionDirective>(parse_directive(transcript.steps[i - 1].text))) {
            return false;
        }
    }
    return true;
}

std::string_view base_system_prompt() noexcept {
    return kSystemPrompt;
}

std::string build_system_prompt(const ToolRegistry& registry) {
    std::string prompt(kSystemPrompt);
    prompt += "\n\nAvailable tools:";
    for (const auto& d : registry.descriptors()) {
        std::vector<std::string> fields;
        for (const auto& [name, schema] : d.input_schema["properties"].items()) {
            fields.push_back(fmt::format("{}:{}", name, schema["type"].get<std::string>()));
        }
        prompt += fmt::format("\n- {}: {} (fields: {})", d.name, d.description,
                              fields.empty() ? std::string("none") : fmt::format("{}", fmt::join(fields, ", ")));
    }
    return prompt;
}

AgentResult run_agent(const ToolRegistry& registry, llm::LlmClient& llm, std::string_view query,
                      const AgentOptions& options) {
    if (options.max_steps == 0) {
        throw Error(Errc::InvalidArguments, "max_steps must be at least 1");
    }
    const auto started = std::chrono::steady_clock::now();
    AgentResult result;
    result.input = std::string(query);
    auto& transcript = result.transcript;
    bool any_provider = false;
    bool any_proxy = false;

    const auto finish_metrics = [&] {
        transcript.metrics.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        transcript.metrics.token_count_source =
            any_provider && any_proxy ? "mixed" : (any_provider ? "provider" : "whitespace_proxy");
    };

    std::vector<llm::Message> messages;
    const auto system = build_system_prompt(registry);
    messages.push_back({llm::Role::system, system});
    transcript.steps.push_back({StepRole::system, system});
    messages.insert(messages.end(), options.history.begin(), options.history.end());
    messages.push_back({llm::Role::user, result.input});
    transcript.steps.push_back({StepRole::user, result.input});

    std::size_t consecutive_invalid = 0;
    for (std::size_t step = 0; step < options.max_steps; ++step) {
        const auto generation = llm.generate(messages, options.params);
        count_turn_tokens(messages, generation, transcript.metrics, any_provider, any_proxy);
        messages.push_back({llm::Role::assistant, generation.text});
        transcript.steps.push_back({StepRole::assistant, generation.text});

        const auto directive = parse_directive(generation.text);
        if (const auto* final = std::get_if<FinalAnswerDirective>(&directive)) {
            result.output = final->text;
            result.tools_used = transcript.tools_used;
            finish_metrics();
            return result;
        }
        if (const auto* invalid = std::get_if<InvalidDirective>(&directive)) {
            if (++consecutive_invalid >= 2) {
                finish_metrics();
                throw AgentAborted(Errc::RepeatedInvalidDirective,
                                   fmt::format("two consecutive invalid directives (last: {})", invalid->reason),
                                   transcript);
            }
            auto correction = fmt::format(
                "Your reply was not a valid directive ({}). Reply with either \"Action: <tool name>\" followed by "
                "\"Action Input: <input text>\", or with \"Final Answer: <answer>\", never both.",
                invalid->reason);
            messages.push_back({llm::Role::user, correction});
            transcript.steps.push_back({StepRole::user, std::move(correction)});
            continue;
        }

        consecutive_invalid = 0;
        const auto& action = std::get<ActionDirective>(directive);
        std::string observation;
        if (!registry.contains(action.tool_name)) {
            observation = fmt::format("unknown tool: {}", action.tool_name);
        } else {
            try {
                const auto args = registry.parse_arguments(action.tool_name, action.input_text);
                registry.validate(action.tool_name, args);
                transcript.tools_used.push_back(action.tool_name);
                observation = registry.invoke(action.tool_name, args).text;
            } catch (const Error& e) {
                observation = describe(e);
            }
        }
        messages.push_back({llm::Role::user, fmt::format("Observation: {}", observation)});
        transcript.steps.push_back({StepRole::observation, std::move(observation)});
    }
    finish_metrics();
    throw AgentAborted(Errc::MaxStepsExceeded,
                       fmt::format("no final answer within {} steps", options.max_steps), transcript);
}

nlohmann::json to_json(const Step& step) {
    return {{"role", to_string(step.role)}, {"text", step.text}};
}

nlohmann::json to_json(const RunMetrics& metrics) {
    return {{"wall_time_ms", metrics.wall_time_ms},
            {"prompt_tokens", metrics.prompt_tokens},
            {"completion_tokens", metrics.completion_tokens},
            {"token_count_source", metrics.token_count_source}};
}

nlohmann::json to_json(const AgentResult& result) {
    nlohmann::json chain = nlohmann::json::array();
    for (const auto& step : result.transcript.steps) {
        chain.push_back(to_json(step));
    }
    return {{"input", result.input},
            {"output", result.output},
            {"tools_used", result.tools_used},
            {"chain_log", std::move(chain)},
            {"metrics", to_json(result.transcript.metrics)}};
}

} // namespace codecheck::agent
