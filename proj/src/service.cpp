#include "codecheck/service.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <httplib.h>

#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

namespace codecheck::service {

namespace {

std::string utc_now() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                       fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())));
}

agent::StepRole role_from(std::string_view text) {
    for (auto role : {agent::StepRole::system, agent::StepRole::user, agent::StepRole::assistant,
                      agent::StepRole::observation}) {
        if (agent::to_string(role) == text) {
            return role;
        }
    }
    return agent::StepRole::user;
}

HttpReply error_reply(int status, std::string_view code, std::string_view message) {
    return {status, error_body(code, message)};
}

} // namespace

SessionStore::SessionStore(std::filesystem::path journal) : journal_(std::move(journal)) {
    if (journal_.empty() || !std::filesystem::exists(journal_)) {
        return;
    }
    const auto text = read_text_file(journal_);
    for (const auto line : split_lines(text)) {
        if (trim(line).empty()) {
            continue;
        }
        const auto entry = nlohmann::json::parse(line, nullptr, false);
        if (entry.is_discarded() || !entry.contains("session_id")) {
            continue; // a torn final line from an interrupted write
        }
        auto& session = sessions_[entry["session_id"].get<std::string>()];
        session.session_id = entry["session_id"].get<std::string>();
        if (session.created_at.empty()) {
            session.created_at = entry.value("created_at", "");
        }
        for (const auto& step : entry.value("steps", nlohmann::json::array())) {
            session.history.push_back({role_from(step.value("role", "user")), step.value("text", "")});
        }
        session.turns.emplace_back(entry.value("input", ""), entry.value("output", ""));
    }
}

std::string SessionStore::create_locked() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::string id;
    do {
        id = fmt::format("s-{:012x}-{}", rng() & 0xffffffffffffULL, ++counter_);
    } while (sessions_.contains(id));
    sessions_[id] = ChatSession{id, utc_now(), {}, {}};
    return id;
}

std::string SessionStore::create() {
    std::lock_guard lock(mutex_);
    return create_locked();
}

std::optional<ChatSession> SessionStore::find(const std::string& session_id) const {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void SessionStore::append(const std::string& session_id, const agent::AgentResult& result) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        throw Error(Errc::InvalidArguments, fmt::format("unknown session '{}'", session_id));
    }
    auto& session = it->second;
    session.history.insert(session.history.end(), result.transcript.steps.begin(), result.transcript.steps.end());
    session.turns.emplace_back(result.input, result.output);
    if (!journal_.empty()) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : result.transcript.steps) {
            steps.push_back(agent::to_json(s));
        }
        nlohmann::json entry{{"session_id", session_id}, {"created_at", session.created_at},
                             {"input", result.input}, {"output", result.output},
                             {"tools_used", result.tools_used}, {"steps", std::move(steps)}};
        std::ofstream out(journal_, std::ios::app);
        if (!out) {
            throw Error(Errc::IoError, fmt::format("cannot append to journal {}", journal_.string()));
        }
        out << entry.dump() << '\n';
    }
}

std::size_t SessionStore::size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

nlohmann::json to_json(const ChatResponse& response) {
    nlohmann::json chain = nlohmann::json::array();
    for (const auto& step : response.chain_log) {
        chain.push_back(agent::to_json(step));
    }
    return {{"session_id", response.session_id},
            {"input", response.input},
            {"output", response.output},
            {"tools_used", response.tools_used},
            {"chain_log", std::move(chain)},
            {"metrics", agent::to_json(response.metrics)}};
}

nlohmann::json error_body(std::string_view code, std::string_view message) {
    return {{"error", {{"code", code}, {"message", message}}}};
}

ChatService::ChatService(const agent::ToolRegistry& registry, LlmFactory factory, std::shared_ptr<SessionStore> store,
                         agent::AgentOptions options)
    : registry_(registry), factory_(std::move(factory)), store_(std::move(store)), options_(std::move(options)) {
    if (!store_) {
        store_ = std::make_shared<SessionStore>();
    }
}

ChatResponse ChatService::handle_chat(const ChatRequest& request) {
    if (trim(request.message).empty()) {
        throw Error(Errc::InvalidArguments, "message must not be empty");
    }
    std::optional<ChatSession> session;
    if (request.session_id) {
        session = store_->find(*request.session_id);
    }
    if (!session) {
        session = store_->find(store_->create());
    }

    auto options = options_;
    for (const auto& [input, output] : session->turns) {
        options.history.push_back({llm::Role::user, input});
        options.history.push_back({llm::Role::assistant, "Final Answer: " + output});
    }
    const auto generator = factory_ ? factory_() : nullptr;
    if (!generator) {
        throw Error(Errc::GeneratorUnavailable, "no generator configured");
    }
    auto result = agent::run_agent(registry_, *generator, request.message, options);
    store_->append(session->session_id, result);

    return ChatResponse{session->session_id, result.input,
                        result.output,       result.tools_used,
                        result.transcript.steps, result.transcript.metrics};
}

HttpReply ChatService::chat_http(std::string_view body) {
    const auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        return error_reply(400, "BadRequest", "body must be a JSON object");
    }
    if (!doc.contains("message") || !doc["message"].is_string()) {
        return error_reply(400, "BadRequest", "message must be a string");
    }
    ChatRequest request;
    request.message = doc["message"].get<std::string>();
    if (trim(request.message).empty()) {
        return error_reply(400, "BadRequest", "message must not be empty");
    }
    if (doc.contains("session_id") && doc["session_id"].is_string()) {
        request.session_id = doc["session_id"].get<std::string>();
    }
    try {
        return {200, to_json(handle_chat(request))};
    } catch (const Error& e) {
        const auto code = to_string(e.code());
        switch (e.code()) {
        case Errc::GeneratorUnavailable:
        case Errc::MissingConfiguration:
            return error_reply(503, code, e.what());
        case Errc::InvalidArguments:
            return error_reply(400, "BadRequest", e.what());
        default:
            return error_reply(500, code, e.what());
        }
    } catch (const std::exception& e) {
        return error_reply(500, "InternalError", e.what());
    }
}

HttpReply ChatService::health() const {
    return {200, {{"status", "ok"}, {"tool_count", registry_.size()}, {"session_count", store_->size()}}};
}

HttpReply ChatService::tools() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& d : registry_.descriptors()) {
        list.push_back(agent::to_json(d));
    }
    return {200, {{"tools", std::move(list)}}};
}

void install_routes(httplib::Server& server, ChatService& service, const std::optional<std::filesystem::path>& static_dir) {
    const auto send = [](httplib::Response& res, const HttpReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
    };
    server.Post("/api/chat", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.chat_http(req.body));
    });
    server.Get("/api/health", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.health());
    });
    server.Get("/api/tools", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.tools());
    });
    if (static_dir && !server.set_mount_point("/", static_dir->string())) {
        throw Error(Errc::FileNotFound, fmt::format("static directory not found: {}", static_dir->string()));
    }
}

std::vector<BenchPrompt> default_bench_prompts() {
    return {
        {"prompt-1",
         "What is the minimum U-factor required for a doorway in Climate Zone 5 according to ASHRAE 90.1-2022?"},
        {"prompt-2",
         "Which IFC entity type is used to represent a building envelope wall for energy code compliance checks?"},
    };
}

Clock steady_clock_ms() {
    return [] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now().time_since_epoch()).count();
    };
}

BenchReport run_bench(const std::vector<BenchPrompt>& prompts, llm::LlmClient& generator, std::size_t repetitions,
                      const llm::GenerationParams& params, const Clock& clock) {
    if (repetitions == 0) {
        throw Error(Errc::InvalidArguments, "repetitions must be at least 1");
    }
    BenchReport report;
    for (const auto& prompt : prompts) {
        BenchSummary summary;
        summary.prompt_id = prompt.id;
        double total_ms = 0.0;
        double total_prompt = 0.0;
        double total_completion = 0.0;
        for (std::size_t rep = 0; rep < repetitions; ++rep) {
            const std::vector<llm::Message> messages{{llm::Role::user, prompt.text}};
            const auto start = clock();
            const auto generation = generator.generate(messages, params);
            const auto elapsed = std::max(0.0, clock() - start);

            BenchRecord record;
            record.model = generator.label();
            record.prompt_id = prompt.id;
            record.wall_time_ms = elapsed;
            record.temperature = params.temperature;
            const auto usage = generation.usage.value_or(llm::estimate_usage(messages, generation.text));
            record.prompt_tokens = usage.prompt_tokens;
            record.completion_tokens = usage.completion_tokens;
            record.token_count_source = generation.usage ? "provider" : "whitespace_proxy";

            summary.min_ms = rep == 0 ? elapsed : std::min(summary.min_ms, elapsed);
            summary.max_ms = rep == 0 ? elapsed : std::max(summary.max_ms, elapsed);
            total_ms += elapsed;
            total_prompt += static_cast<double>(usage.prompt_tokens);
            total_completion += static_cast<double>(usage.completion_tokens);
            report.records.push_back(std::move(record));
        }
        const auto n = static_cast<double>(repetitions);
        summary.runs = repetitions;
        summary.mean_ms = total_ms / n;
        summary.mean_prompt_tokens = total_prompt / n;
        summary.mean_completion_tokens = total_completion / n;
        report.summary.push_back(std::move(summary));
    }
    return report;
}

nlohmann::json to_json(const BenchReport& report) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : report.records) {
        records.push_back({{"model", r.model},
                           {"prompt_id", r.prompt_id},
                           {"wall_time_ms", r.wall_time_ms},
                           {"prompt_tokens", r.prompt_tokens},
                           {"completion_tokens", r.completion_tokens},
                           {"temperature", r.temperature},
                           {"token_count_source", r.token_count_source}});
    }
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& s : report.summary) {
        summary.push_back({{"prompt_id", s.prompt_id},
                           {"runs", s.runs},
                           {"mean_ms", s.mean_ms},
                           {"min_ms", s.min_ms},
                           {"max_ms", s.max_ms},
                           {"mean_prompt_tokens", s.mean_prompt_tokens},
                           {"mean_completion_tokens", s.mean_completion_tokens}});
    }
    return {{"records", std::move(records)}, {"summary", std::move(summary)}};
}

} // namespace codecheck::service
