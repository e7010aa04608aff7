#include "codecheck/llm.hpp"

#include <cstdlib>
#include <regex>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

namespace codecheck::llm {

namespace {

const Message* last_of(const std::vector<Message>& messages, Role role) {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
        if (it->role == role) {
            return &*it;
        }
    }
    return nullptr;
}

/// Splits "https://host:port/prefix" into ("https://host:port", "/prefix").
std::pair<std::string, std::string> split_base_url(const std::string& url) {
    const auto scheme = url.find("://");
    const auto path = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path == std::string::npos) {
        return {url, ""};
    }
    auto prefix = url.substr(path);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    return {url.substr(0, path), prefix};
}

std::optional<std::string> env(const char* name) {
    const char* value = std::getenv(name);
    if (value == nullptr || *value == '\0') {
        return std::nullopt;
    }
    return std::string(value);
}

struct QuestionFacts {
    std::optional<std::string> area;
    std::optional<std::string> area_unit;
    std::optional<std::string> use_type;
    std::optional<std::string> code_version;
};

QuestionFacts read_question(const std::string& question) {
    QuestionFacts facts;
    static const std::regex area_re(
        R"((\d[\d,]*(?:\.\d+)?)\s*-?\s*(square[- ]meters?|square[- ]metres?|sq\.?\s*m\b|m2|m\xc2\xb2|square[- ]f(?:ee|oo)t|sq\.?\s*ft|ft2|ft\xc2\xb2))",
        std::regex::icase);
    std::smatch m;
    if (std::regex_search(question, m, area_re)) {
        std::string number = m[1].str();
        std::erase(number, ',');
        facts.area = number;
        const auto unit = to_lower(m[2].str());
        facts.area_unit = (unit.find('f') != std::string::npos) ? "ft2" : "m2";
    }
    const auto lower = to_lower(question);
    if (lower.find("bank") != std::string::npos || lower.find("financial institution") != std::string::npos) {
        facts.use_type = "bank_financial_institution";
    } else if (lower.find("office") != std::string::npos) {
        facts.use_type = "office";
    }
    static const std::regex code_re(R"(90\.1\s*-\s*(\d{4}))");
    if (std::regex_search(question, m, code_re)) {
        facts.code_version = "ashrae_90_1_" + m[1].str();
    }
    return facts;
}

std::optional<std::string> surface_mentioned(const std::string& question) {
    static const std::regex quoted(R"([`"']([A-Za-z0-9_.\-]+)[`"'])");
    static const std::regex after_word(R"(surface\s+([A-Za-z0-9_.\-]*[_\d][A-Za-z0-9_.\-]*))",
                                       std::regex::icase);
    std::smatch m;
    if (std::regex_search(question, m, quoted) || std::regex_search(question, m, after_word)) {
        return m[1].str();
    }
    return std::nullopt;
}

bool tool_offered(const std::vector<Message>& messages, std::string_view tool) {
    const auto* system = last_of(messages, Role::system);
    return system != nullptr && system->content.find(tool) != std::string::npos;
}

} // namespace

std::string_view to_string(Role role) noexcept {
    switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    }
    return "user";
}

TokenUsage estimate_usage(const std::vector<Message>& messages, std::string_view completion) {
    TokenUsage usage;
    for (const auto& m : messages) {
        usage.prompt_tokens += whitespace_token_count(m.content);
    }
    usage.completion_tokens = whitespace_token_count(completion);
    return usage;
}

ScriptedLlm::ScriptedLlm(std::vector<std::string> turns, std::string label)
    : turns_(std::move(turns)), label_(std::move(label)) {}

Generation ScriptedLlm::generate(const std::vector<Message>& messages, const GenerationParams&) {
    std::lock_guard lock(mutex_);
    calls_.push_back(messages);
    if (next_ >= turns_.size()) {
        throw Error(Errc::GeneratorUnavailable, fmt::format("script exhausted after {} turns", turns_.size()));
    }
    return Generation{turns_[next_++], std::nullopt};
}

std::vector<std::vector<Message>> ScriptedLlm::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

Generation EchoLlm::generate(const std::vector<Message>& messages, const GenerationParams&) {
    const auto* user = last_of(messages, Role::user);
    return Generation{user == nullptr ? std::string{} : user->content, std::nullopt};
}

Generation UnavailableLlm::generate(const std::vector<Message>&, const GenerationParams&) {
    throw Error(Errc::GeneratorUnavailable, "no generator configured");
}

Generation HeuristicAgentLlm::generate(const std::vector<Message>& messages, const GenerationParams&) {
    const auto* user = last_of(messages, Role::user);
    if (user == nullptr) {
        return {"Final Answer: No question was asked.", std::nullopt};
    }
    constexpr std::string_view kObservation = "Observation:";
    if (user->content.starts_with(kObservation)) {
        const auto observation = std::string(trim(std::string_view(user->content).substr(kObservation.size())));
        const auto* previous = last_of(messages, Role::assistant);
        const std::string action = previous == nullptr ? std::string{} : previous->content;
        if (istarts_with(observation, "error") || istarts_with(observation, "unknown tool")) {
            return {"Final Answer: The tool reported a problem: " + observation, std::nullopt};
        }
        if (action.find("LightingAllowedWattage") != std::string::npos) {
            return {"Final Answer: " + observation + " W", std::nullopt};
        }
        if (action.find("get_surface_area") != std::string::npos) {
            return {"Final Answer: " + observation + " m2", std::nullopt};
        }
        return {"Final Answer: " + observation, std::nullopt};
    }

    const auto facts = read_question(user->content);
    const auto lower = to_lower(user->content);
    if (lower.find("lighting") != std::string::npos && facts.area && facts.use_type) {
        if (!facts.code_version) {
            return {"Final Answer: Please state the code edition (for example ASHRAE 90.1-2022).", std::nullopt};
        }
        if (!tool_offered(messages, "LightingAllowedWattage")) {
            return {"Final Answer: No lighting allowance tool is available.", std::nullopt};
        }
        return {fmt::format("Thought: building-area method lighting allowance.\nAction: LightingAllowedWattage\n"
                            "Action Input: area={}, area_unit={}, use_type={}, code_version={}",
                            *facts.area, *facts.area_unit, *facts.use_type, *facts.code_version),
                std::nullopt};
    }
    if (auto surface = surface_mentioned(user->content)) {
        std::string tool = "get_surface_area";
        if (lower.find("tilt") != std::string::npos) {
            tool = "get_surface_tilt";
        } else if (lower.find("azimuth") != std::string::npos || lower.find("orientation") != std::string::npos) {
            tool = "get_surface_azimuth";
        } else if (lower.find("r-value") != std::string::npos || lower.find("thermal resistance") != std::string::npos) {
            tool = "get_surface_r_value";
        }
        if (tool_offered(messages, tool)) {
            return {fmt::format("Action: {}\nAction Input: {}", tool, *surface), std::nullopt};
        }
    }
    return {"Final Answer: I could not map this question to an available tool.", std::nullopt};
}

HttpLlm::HttpLlm(HttpLlmConfig config) : config_(std::move(config)) {}

HttpLlmConfig HttpLlm::config_from_env() {
    HttpLlmConfig config;
    auto url = env("LLM_BASE_URL");
    auto model = env("LLM_MODEL");
    if (!url || !model) {
        throw Error(Errc::MissingConfiguration, "LLM_BASE_URL and LLM_MODEL must be set for the http generator");
    }
    config.base_url = *url;
    config.model = *model;
    config.api_key = env("LLM_API_KEY").value_or("");
    return config;
}

Generation HttpLlm::generate(const std::vector<Message>& messages, const GenerationParams& params) {
    const auto [host, prefix] = split_base_url(config_.base_url);
    httplib::Client client(host);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    if (!config_.api_key.empty()) {
        client.set_bearer_token_auth(config_.api_key);
    }

    nlohmann::json body;
    body["model"] = config_.model;
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_tokens;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : messages) {
        body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }

    auto response = client.Post(prefix + "/v1/chat/completions", body.dump(), "application/json");
    if (!response) {
        throw Error(Errc::GeneratorUnavailable,
                    fmt::format("cannot reach {}: {}", config_.base_url, httplib::to_string(response.error())));
    }
    if (response->status != 200) {
        throw Error(Errc::GeneratorUnavailable, fmt::format("generator returned HTTP {}", response->status));
    }
    const auto doc = nlohmann::json::parse(response->body, nullptr, false);
    try {
        Generation out;
        out.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        if (doc.contains("usage")) {
            const auto& usage = doc.at("usage");
            out.usage = TokenUsage{usage.value("prompt_tokens", std::size_t{0}),
                                   usage.value("completion_tokens", std::size_t{0})};
        }
        return out;
    } catch (const nlohmann::json::exception&) {
        throw Error(Errc::MalformedResponse, "generator response has no choices[0].message.content");
    }
}

} // namespace codecheck::llm
