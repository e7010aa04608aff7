#include "codecheck/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include "codecheck/builtin_tools.hpp"
#include "codecheck/comcheck.hpp"
#include "codecheck/docparse.hpp"
#include "codecheck/error.hpp"
#include "codecheck/gbxml.hpp"
#include "codecheck/mcp.hpp"
#include "codecheck/retrieval.hpp"
#include "codecheck/rules.hpp"
#include "codecheck/text.hpp"

namespace codecheck::cli {

namespace {

struct RegistryOptions {
    std::string gbxml;
    std::string corpus;
    std::string index;
    std::vector<std::string> lpd_tables;
    std::string comcheck_mode;
    std::string fixtures;
};

void add_registry_options(CLI::App* cmd, RegistryOptions& o) {
    cmd->add_option("--gbxml", o.gbxml, "gbXML model that backs the surface tools");
    cmd->add_option("--corpus", o.corpus, "Provision corpus (JSON) for RetrieveProvisions");
    cmd->add_option("--index", o.index, "Persisted provision index (from `index`)");
    cmd->add_option("--lpd-table", o.lpd_tables, "LPD table file; repeatable. Defaults to the built-in table");
    cmd->add_option("--comcheck-mode", o.comcheck_mode, "live, replay or local (default: COMCHECK_MODE or local)");
    cmd->add_option("--fixtures", o.fixtures, "Fixture directory for replay mode");
}

std::shared_ptr<const rules::LpdCatalog> load_catalog(const std::vector<std::string>& paths) {
    if (paths.empty()) {
        return std::make_shared<const rules::LpdCatalog>(rules::LpdCatalog::builtin());
    }
    return std::make_shared<const rules::LpdCatalog>(
        rules::LpdCatalog::from_files({paths.begin(), paths.end()}));
}

std::shared_ptr<const retrieval::ProvisionIndex> load_index(const std::string& corpus, const std::string& index) {
    if (!index.empty()) {
        const auto doc = nlohmann::json::parse(read_text_file(index), nullptr, false);
        if (doc.is_discarded()) {
            throw Error(Errc::MalformedCorpus, fmt::format("{} is not valid JSON", index));
        }
        return std::make_shared<const retrieval::ProvisionIndex>(retrieval::index_from_json(doc));
    }
    if (!corpus.empty()) {
        return std::make_shared<const retrieval::ProvisionIndex>(
            retrieval::ingest_provisions(retrieval::load_corpus(corpus)));
    }
    return nullptr;
}

agent::ToolRegistry build_registry(const RegistryOptions& o, std::ostream& err) {
    tools::ToolContext context;
    context.catalog = load_catalog(o.lpd_tables);
    if (!o.gbxml.empty()) {
        auto parsed = gbxml::parse_gbxml(read_text_file(o.gbxml));
        for (const auto& w : parsed.warnings) {
            err << fmt::format("warning: {}{}{}\n", w.subject_id, w.subject_id.empty() ? "" : ": ", w.message);
        }
        context.model = std::make_shared<const gbxml::BuildingModel>(std::move(parsed.model));
    }
    context.index = load_index(o.corpus, o.index);

    auto config = comcheck::ComcheckConfig::from_env(comcheck::TransportMode::local);
    if (!o.comcheck_mode.empty()) {
        config.mode = comcheck::parse_transport_mode(o.comcheck_mode);
    }
    if (!o.fixtures.empty()) {
        config.fixtures_dir = o.fixtures;
    }
    if (config.mode != comcheck::TransportMode::local) {
        context.comcheck = std::make_shared<const comcheck::ComcheckClient>(config, context.catalog);
    }
    return tools::make_registry(context);
}

std::vector<std::string> read_script(const std::string& path) {
    const auto doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_array() ||
        !std::all_of(doc.begin(), doc.end(), [](const nlohmann::json& t) { return t.is_string(); })) {
        throw Error(Errc::InvalidArguments, fmt::format("{} must be a JSON array of strings", path));
    }
    return doc.get<std::vector<std::string>>();
}

void print_chain_log(const agent::Transcript& transcript, std::ostream& err) {
    err << "Chain Log\n";
    for (const auto& step : transcript.steps) {
        if (step.role == agent::StepRole::system) {
            continue;
        }
        err << fmt::format("[{}] {}\n", agent::to_string(step.role), step.text);
    }
    err << "Tools Used:\n";
    for (const auto& tool : transcript.tools_used) {
        err << "- " << tool << '\n';
    }
}

struct Options {
    std::string path;
    std::string schedule;
    std::string query;
    std::string out_path;
    std::string generator = "stub";
    std::string ask_generator = "echo";
    std::optional<double> area;
    std::string unit = "m2";
    std::string use;
    std::string code;
    std::optional<double> designed;
    std::string input_json;
    std::size_t k = retrieval::kDefaultTopK;
    std::size_t budget = retrieval::kDefaultBudgetTokens;
    std::optional<double> expect_w;
    std::size_t max_steps = agent::kDefaultMaxSteps;
    std::string host = "127.0.0.1";
    int port = 0;
    std::string static_dir;
    std::string journal;
    std::size_t reps = 3;
    double temperature = 0.0;
    std::string prompts;
    RegistryOptions registry;
};

int cmd_extract(const Options& o, std::ostream& out, std::ostream& err) {
    const auto parsed = gbxml::parse_gbxml(read_text_file(o.path));
    out << gbxml::extract_attributes(parsed).dump(2) << '\n';
    err << fmt::format("{} surfaces, {} warnings\n", parsed.model.surfaces.size(), parsed.warnings.size());
    return 0;
}

int cmd_parse_docs(const Options& o, std::ostream& out, std::ostream& err) {
    auto report = docparse::parse_fixture_schedule(read_text_file(o.path));
    if (!o.schedule.empty()) {
        report.schedules = docparse::parse_operating_schedule(read_text_file(o.schedule));
    }
    out << docparse::to_json(report).dump(2) << '\n';
    err << fmt::format("{} fixtures, {} missing fields, {} unrecognized lines\n", report.fixtures.size(),
                       report.missing.size(), report.unrecognized_lines.size());
    return 0;
}

int cmd_check(const Options& o, std::ostream& out, std::ostream& err) {
    rules::ComplianceInput input;
    if (!o.input_json.empty()) {
        const auto doc = nlohmann::json::parse(read_text_file(o.input_json), nullptr, false);
        if (doc.is_discarded()) {
            throw Error(Errc::InvalidArguments, fmt::format("{} is not valid JSON", o.input_json));
        }
        input = rules::parse_compliance_input(doc);
    } else {
        if (!o.area || o.use.empty() || o.code.empty()) {
            throw Error(Errc::InvalidArguments, "check needs --area, --use and --code (or --input)");
        }
        input.floor_area = {*o.area, rules::parse_area_unit(o.unit)};
        input.use_type = rules::normalize_use_type(o.use);
        input.code_version = rules::normalize_code_version(o.code);
        input.designed_wattage = o.designed;
    }
    const auto catalog = load_catalog(o.registry.lpd_tables);
    const auto result = rules::check_interior_lighting(*catalog, input);
    auto doc = rules::to_json(result);
    doc["input"] = rules::to_json(input);
    out << doc.dump(2) << '\n';
    err << rules::summarize(input, result) << '\n';
    return 0;
}

int cmd_index(const Options& o, std::ostream& out, std::ostream& err) {
    const auto index = retrieval::ingest_provisions(retrieval::load_corpus(o.path));
    const auto doc = retrieval::to_json(index);
    if (o.out_path.empty()) {
        out << doc.dump(2) << '\n';
    } else {
        write_text_file(o.out_path, doc.dump(2) + "\n");
        out << nlohmann::json{{"index", o.out_path},
                              {"chunk_count", index.size()},
                              {"average_chunk_length", index.average_chunk_length()},
                              {"term_count", index.document_frequencies().size()}}
                   .dump(2)
            << '\n';
    }
    err << fmt::format("indexed {} provisions\n", index.size());
    return 0;
}

int cmd_ask(const Options& o, std::ostream& out, std::ostream& err) {
    auto index = load_index(o.registry.corpus, o.registry.index);
    if (!index) {
        index = std::make_shared<const retrieval::ProvisionIndex>();
    }
    const auto generator = make_llm_factory(o.ask_generator)();
    const auto answer = retrieval::answer_with_rag(*index, o.query, *generator, o.k, o.budget);
    nlohmann::json citations = nlohmann::json::array();
    for (const auto& id : answer.cited_ids) {
        citations.push_back({{"id", id}, {"section_label", index->find(id)->section_label}});
    }
    nlohmann::json doc{{"query", o.query}, {"answer", answer.answer}, {"citations", std::move(citations)}};
    if (o.expect_w) {
        const auto comparison = retrieval::compare_with_rules(answer.answer, *o.expect_w);
        doc["rules_check"] = retrieval::to_json(comparison);
        if (comparison.mismatch) {
            err << fmt::format("warning: answer disagrees with the rules engine ({} W expected)\n", *o.expect_w);
        }
    }
    out << doc.dump(2) << '\n';
    return 0;
}

int cmd_agent(const Options& o, std::ostream& out, std::ostream& err) {
    const auto registry = build_registry(o.registry, err);
    const auto generator = make_llm_factory(o.generator)();
    agent::AgentOptions options;
    options.max_steps = o.max_steps;
    options.params.temperature = o.temperature;
    const auto result = agent::run_agent(registry, *generator, o.query, options);
    print_chain_log(result.transcript, err);
    out << agent::to_json(result).dump(2) << '\n';
    return 0;
}

int cmd_mcp_serve(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
    const auto registry = build_registry(o.registry, err);
    err << fmt::format("mcp: serving {} tools on stdio\n", registry.size());
    mcp::McpServer server(registry);
    server.serve(in, out, err);
    return 0;
}

int cmd_chat_serve(const Options& o, std::ostream& err) {
    const auto registry = build_registry(o.registry, err);
    auto store = std::make_shared<service::SessionStore>(o.journal);
    agent::AgentOptions options;
    options.max_steps = o.max_steps;
    options.params.temperature = o.temperature;
    service::ChatService chat(registry, make_llm_factory(o.generator), store, options);

    int port = o.port;
    if (port == 0) {
        const char* env_port = std::getenv("PORT");
        port = env_port != nullptr ? std::atoi(env_port) : 8080;
    }
    httplib::Server server;
    service::install_routes(server, chat,
                            o.static_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(o.static_dir));
    err << fmt::format("chat service listening on http://{}:{}\n", o.host, port);
    if (!server.listen(o.host, port)) {
        throw Error(Errc::IoError, fmt::format("cannot listen on {}:{}", o.host, port));
    }
    return 0;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
    auto prompts = service::default_bench_prompts();
    if (!o.prompts.empty()) {
        prompts.clear();
        const auto lines = read_script(o.prompts);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            prompts.push_back({fmt::format("prompt-{}", i + 1), lines[i]});
        }
    }
    const auto generator = make_llm_factory(o.generator)();
    llm::GenerationParams params;
    params.temperature = o.temperature;
    const auto report = service::run_bench(prompts, *generator, o.reps, params);
    for (const auto& s : report.summary) {
        err << fmt::format("{}: mean {:.3f} ms, min {:.3f} ms, max {:.3f} ms over {} runs\n", s.prompt_id, s.mean_ms,
                           s.min_ms, s.max_ms, s.runs);
    }
    out << service::to_json(report).dump(2) << '\n';
    return 0;
}

int cmd_record_fixture(const Options& o, std::ostream& out) {
    if (!o.area || o.use.empty() || o.code.empty() || o.registry.fixtures.empty()) {
        throw Error(Errc::InvalidArguments, "record-fixture needs --area, --use, --code and --fixtures");
    }
    const auto catalog = load_catalog(o.registry.lpd_tables);
    comcheck::FixtureStore store(o.registry.fixtures);
    const auto request = comcheck::make_request({*o.area, rules::parse_area_unit(o.unit)}, o.use, o.code);
    const auto watts = comcheck::record_from_local(*catalog, store, request);
    out << nlohmann::json{{"hash", comcheck::canonical_hash(request)},
                          {"request", comcheck::to_json(request)},
                          {"allowed_wattage_w", watts}}
               .dump(2)
        << '\n';
    return 0;
}

} // namespace

service::LlmFactory make_llm_factory(std::string_view spec) {
    if (spec == "stub") {
        return [] { return std::make_shared<llm::HeuristicAgentLlm>(); };
    }
    if (spec == "echo") {
        return [] { return std::make_shared<llm::EchoLlm>(); };
    }
    if (spec.starts_with("script:")) {
        const auto turns = read_script(std::string(spec.substr(7)));
        return [turns] { return std::make_shared<llm::ScriptedLlm>(turns); };
    }
    if (spec == "http") {
        const auto config = llm::HttpLlm::config_from_env();
        return [config] { return std::make_shared<llm::HttpLlm>(config); };
    }
    throw Error(Errc::InvalidArguments, fmt::format("unknown generator '{}' (stub, echo, script:<file>, http)", spec));
}

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Building-code compliance toolkit", "codecheck"};
    app.require_subcommand(1);
    Options o;

    auto* extract = app.add_subcommand("extract", "Surface attributes from a gbXML file");
    extract->add_option("file", o.path, "gbXML file")->required();

    auto* parse_docs = app.add_subcommand("parse-docs", "Fixture schedule text to structured records");
    parse_docs->add_option("file", o.path, "Fixture schedule text")->required();
    parse_docs->add_option("--schedule", o.schedule, "Operating schedule text");

    auto* check = app.add_subcommand("check", "Interior lighting allowance and compliance");
    check->add_option("--area", o.area, "Floor area");
    check->add_option("--unit", o.unit, "m2 or ft2")->capture_default_str();
    check->add_option("--use", o.use, "Building use type");
    check->add_option("--code", o.code, "Code edition");
    check->add_option("--designed", o.designed, "Designed lighting power in watts");
    check->add_option("--input", o.input_json, "Compliance input JSON file instead of flags");
    check->add_option("--lpd-table", o.registry.lpd_tables, "LPD table file; repeatable");

    auto* index = app.add_subcommand("index", "Build a provision index from a corpus");
    index->add_option("corpus", o.path, "Corpus JSON")->required();
    index->add_option("--out", o.out_path, "Write the index here instead of stdout");

    auto* ask = app.add_subcommand("ask", "Answer a question from retrieved provisions");
    ask->add_option("query", o.query, "Question")->required();
    ask->add_option("--corpus", o.registry.corpus, "Corpus JSON");
    ask->add_option("--index", o.registry.index, "Persisted index");
    ask->add_option("--k", o.k, "Provisions to retrieve")->capture_default_str();
    ask->add_option("--budget", o.budget, "Context budget in tokens")->capture_default_str();
    ask->add_option("--generator", o.ask_generator, "stub, echo, script:<file> or http")->capture_default_str();
    ask->add_option("--expect-w", o.expect_w, "Rules-engine watts to compare the answer against");

    auto* agent_cmd = app.add_subcommand("agent", "Run one agent episode");
    agent_cmd->add_option("query", o.query, "Question")->required();
    agent_cmd->add_option("--generator", o.generator, "stub, echo, script:<file> or http")->capture_default_str();
    agent_cmd->add_option("--max-steps", o.max_steps, "Step limit")->capture_default_str();
    agent_cmd->add_option("--temperature", o.temperature, "Sampling temperature");
    add_registry_options(agent_cmd, o.registry);

    auto* mcp_cmd = app.add_subcommand("mcp-serve", "Serve the tools over MCP on stdio");
    add_registry_options(mcp_cmd, o.registry);

    auto* chat = app.add_subcommand("chat-serve", "HTTP chat service");
    chat->add_option("--host", o.host, "Bind address")->capture_default_str();
    chat->add_option("--port", o.port, "Port (default: PORT or 8080)");
    chat->add_option("--static", o.static_dir, "Directory of web UI files to serve");
    chat->add_option("--journal", o.journal, "Append-only session journal (JSONL)");
    chat->add_option("--generator", o.generator, "stub, echo, script:<file> or http")->capture_default_str();
    chat->add_option("--max-steps", o.max_steps, "Step limit")->capture_default_str();
    chat->add_option("--temperature", o.temperature, "Sampling temperature");
    add_registry_options(chat, o.registry);

    auto* bench = app.add_subcommand("bench", "Latency and token benchmark");
    bench->add_option("--generator", o.generator, "stub, echo, script:<file> or http")->capture_default_str();
    bench->add_option("--reps", o.reps, "Repetitions per prompt")->capture_default_str();
    bench->add_option("--temperature", o.temperature, "Sampling temperature");
    bench->add_option("--prompts", o.prompts, "JSON array of prompt strings");

    auto* record = app.add_subcommand("record-fixture", "Record a replay fixture from the rules engine");
    record->add_option("--area", o.area, "Floor area")->required();
    record->add_option("--unit", o.unit, "m2 or ft2")->capture_default_str();
    record->add_option("--use", o.use, "Building use type")->required();
    record->add_option("--code", o.code, "Code edition")->required();
    record->add_option("--fixtures", o.registry.fixtures, "Fixture directory")->required();
    record->add_option("--lpd-table", o.registry.lpd_tables, "LPD table file; repeatable");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (extract->parsed()) return cmd_extract(o, out, err);
        if (parse_docs->parsed()) return cmd_parse_docs(o, out, err);
        if (check->parsed()) return cmd_check(o, out, err);
        if (index->parsed()) return cmd_index(o, out, err);
        if (ask->parsed()) return cmd_ask(o, out, err);
        if (agent_cmd->parsed()) return cmd_agent(o, out, err);
        if (mcp_cmd->parsed()) return cmd_mcp_serve(o, in, out, err);
        if (chat->parsed()) return cmd_chat_serve(o, err);
        if (bench->parsed()) return cmd_bench(o, out, err);
        if (record->parsed()) return cmd_record_fixture(o, out);
    } catch (const agent::AgentAborted& e) {
        print_chain_log(e.transcript(), err);
        out << service::error_body(to_string(e.code()), e.what()).dump(2) << '\n';
        err << "error: " << describe(e) << '\n';
        return 1;
    } catch (const Error& e) {
        out << service::error_body(to_string(e.code()), e.what()).dump(2) << '\n';
        err << "error: " << describe(e) << '\n';
        return 1;
    } catch (const std::exception& e) {
        out << service::error_body("InternalError", e.what()).dump(2) << '\n';
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << app.help();
    return 2;
}

} // namespace codecheck::cli
