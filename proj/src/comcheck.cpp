#include "codecheck/comcheck.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <httplib.h>
#include <openssl/evp.h>

#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

namespace codecheck::comcheck {

namespace {

std::string utc_now() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())));
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::IoError, "SHA-256 digest failed");
    }
    std::string hex;
    hex.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        hex += fmt::format("{:02x}", digest[i]);
    }
    return hex;
}

std::optional<std::string> env(const char* name) {
    const char* value = std::getenv(name);
    if (value == nullptr || *value == '\0') {
        return std::nullopt;
    }
    return std::string(value);
}

nlohmann::json to_json(const RecordedExchange& e, const std::string& hash) {
    return {{"hash", hash}, {"request", e.request}, {"response", e.response}, {"recorded_at", e.recorded_at},
            {"source", e.source}};
}

} // namespace

std::string_view to_string(TransportMode mode) noexcept {
    switch (mode) {
    case TransportMode::live: return "live";
    case TransportMode::replay: return "replay";
    case TransportMode::local: return "local";
    }
    return "local";
}

TransportMode parse_transport_mode(std::string_view text) {
    const auto lower = to_lower(trim(text));
    if (lower == "live") {
        return TransportMode::live;
    }
    if (lower == "replay") {
        return TransportMode::replay;
    }
    if (lower == "local") {
        return TransportMode::local;
    }
    throw Error(Errc::InvalidArguments, fmt::format("unknown transport mode '{}' (live, replay, local)", text));
}

nlohmann::json to_json(const AllowanceRequest& request) {
    return {{"floor_area_ft2", request.floor_area_ft2},
            {"use_type", request.use_type},
            {"code_version", request.code_version}};
}

AllowanceRequest request_from_json(const nlohmann::json& doc) {
    try {
        AllowanceRequest request;
        request.floor_area_ft2 = doc.at("floor_area_ft2").get<double>();
        request.use_type = doc.at("use_type").get<std::string>();
        request.code_version = doc.at("code_version").get<std::string>();
        return request;
    } catch (const nlohmann::json::exception&) {
        throw Error(Errc::InvalidArguments, "request needs floor_area_ft2, use_type and code_version");
    }
}

std::string canonical_form(const nlohmann::json& request_doc) {
    // nlohmann objects are std::map-backed, so dump() already emits keys in
    // sorted order at every level.
    return request_doc.dump();
}

std::string canonical_hash(const nlohmann::json& request_doc) {
    return sha256_hex(canonical_form(request_doc));
}

std::string canonical_hash(const AllowanceRequest& request) {
    return canonical_hash(to_json(request));
}

FixtureStore::FixtureStore(std::filesystem::path directory) : directory_(std::move(directory)) {
    if (directory_.empty() || !std::filesystem::exists(directory_)) {
        return;
    }
    for (const auto& entry : std::filesystem::directory_iterator(directory_)) {
        if (entry.path().extension() != ".json") {
            continue;
        }
        const auto doc = nlohmann::json::parse(read_text_file(entry.path()), nullptr, false);
        if (doc.is_discarded() || !doc.contains("request") || !doc.contains("response")) {
            throw Error(Errc::MalformedResponse, fmt::format("unreadable fixture {}", entry.path().string()));
        }
        entries_[canonical_hash(doc["request"])] = RecordedExchange{
            doc["request"], doc["response"], doc.value("recorded_at", ""), doc.value("source", "")};
    }
}

std::optional<RecordedExchange> FixtureStore::lookup(const std::string& hash) const {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(hash);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

RecordOutcome FixtureStore::record(const nlohmann::json& request, const nlohmann::json& response, std::string source,
                                   std::string recorded_at) {
    const auto hash = canonical_hash(request);
    std::unique_lock lock(mutex_);
    auto outcome = RecordOutcome::inserted;
    if (const auto it = entries_.find(hash); it != entries_.end()) {
        if (it->second.response == response) {
            return RecordOutcome::unchanged;
        }
        std::clog << fmt::format("warning: fixture {} re-recorded with a different response; overwriting\n", hash);
        outcome = RecordOutcome::overwritten;
    }
    RecordedExchange exchange{request, response, recorded_at.empty() ? utc_now() : std::move(recorded_at),
                              std::move(source)};
    if (!directory_.empty()) {
        std::filesystem::create_directories(directory_);
        write_text_file(directory_ / (hash + ".json"), to_json(exchange, hash).dump(2) + "\n");
    }
    entries_[hash] = std::move(exchange);
    return outcome;
}

std::size_t FixtureStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

ComcheckConfig ComcheckConfig::from_env(TransportMode fallback) {
    ComcheckConfig config;
    config.endpoint = env("COMCHECK_ENDPOINT").value_or("");
    config.token = env("COMCHECK_TOKEN").value_or("");
    if (auto mode = env("COMCHECK_MODE")) {
        config.mode = parse_transport_mode(*mode);
    } else {
        config.mode = config.endpoint.empty() ? fallback : TransportMode::live;
    }
    return config;
}

ComcheckClient::ComcheckClient(ComcheckConfig config, std::shared_ptr<const rules::LpdCatalog> catalog,
                               std::shared_ptr<FixtureStore> store)
    : config_(std::move(config)), catalog_(std::move(catalog)), store_(std::move(store)) {
    if (!store_ && config_.mode == TransportMode::replay) {
        store_ = std::make_shared<FixtureStore>(config_.fixtures_dir);
    }
    if (!catalog_) {
        catalog_ = std::make_shared<const rules::LpdCatalog>(rules::LpdCatalog::builtin());
    }
}

std::int64_t ComcheckClient::allowed_wattage(const AllowanceRequest& request) const {
    if (!(request.floor_area_ft2 >= 0.0) || !std::isfinite(request.floor_area_ft2)) {
        throw Error(Errc::NegativeArea, "floor_area_ft2 must be a non-negative number");
    }
    switch (config_.mode) {
    case TransportMode::local: return local(request);
    case TransportMode::replay: return replay(request);
    case TransportMode::live: return live(request);
    }
    return local(request);
}

std::int64_t ComcheckClient::local(const AllowanceRequest& request) const {
    return rules::lighting_allowed_wattage(*catalog_, {request.floor_area_ft2, rules::AreaUnit::ft2},
                                           rules::normalize_use_type(request.use_type),
                                           rules::normalize_code_version(request.code_version));
}

std::int64_t ComcheckClient::replay(const AllowanceRequest& request) const {
    const auto hash = canonical_hash(request);
    const auto hit = store_ ? store_->lookup(hash) : std::nullopt;
    if (!hit) {
        throw Error(Errc::MissingFixture, fmt::format("no recorded fixture for request {}", hash));
    }
    return parse_allowance_response(hit->response);
}

std::int64_t ComcheckClient::live(const AllowanceRequest& request) const {
    if (config_.endpoint.empty()) {
        throw Error(Errc::MissingConfiguration, "COMCHECK_ENDPOINT is required in live mode");
    }
    const auto scheme = config_.endpoint.find("://");
    const auto path_start = config_.endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    const auto host = config_.endpoint.substr(0, path_start);
    const auto path = path_start == std::string::npos ? std::string("/") : config_.endpoint.substr(path_start);

    httplib::Client client(host);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);
    if (!config_.token.empty()) {
        client.set_bearer_token_auth(config_.token);
    }
    const auto response = client.Post(path, to_json(request).dump(), "application/json");
    if (!response) {
        throw Error(Errc::EndpointUnreachable,
                    fmt::format("cannot reach {}: {}", config_.endpoint, httplib::to_string(response.error())));
    }
    if (response->status < 200 || response->status >= 300) {
        throw Error(Errc::EndpointUnreachable, fmt::format("{} answered HTTP {}", config_.endpoint, response->status));
    }
    const auto doc = nlohmann::json::parse(response->body, nullptr, false);
    if (doc.is_discarded()) {
        throw Error(Errc::MalformedResponse, "response body is not JSON");
    }
    return parse_allowance_response(doc);
}

AllowanceRequest make_request(rules::Area area, std::string_view use_type, std::string_view code_version) {
    return AllowanceRequest{rules::convert_area(area.value, area.unit, rules::AreaUnit::ft2),
                            rules::normalize_use_type(use_type).id, rules::normalize_code_version(code_version).id};
}

std::int64_t record_from_local(const rules::LpdCatalog& catalog, FixtureStore& store, const AllowanceRequest& request,
                               std::string recorded_at) {
    const auto watts = rules::lighting_allowed_wattage(catalog, {request.floor_area_ft2, rules::AreaUnit::ft2},
                                                       rules::normalize_use_type(request.use_type),
                                                       rules::normalize_code_version(request.code_version));
    store.record(to_json(request), {{"allowed_wattage_w", watts}}, "local", std::move(recorded_at));
    return watts;
}

std::int64_t parse_allowance_response(const nlohmann::json& response) {
    if (!response.is_object() || !response.contains("allowed_wattage_w") ||
        !response["allowed_wattage_w"].is_number()) {
        throw Error(Errc::MalformedResponse, "response lacks a numeric allowed_wattage_w");
    }
    const auto value = response["allowed_wattage_w"].get<double>();
    if (!std::isfinite(value) || value < 0.0 || value != std::floor(value)) {
        throw Error(Errc::MalformedResponse, "allowed_wattage_w must be a non-negative whole number");
    }
    return static_cast<std::int64_t>(value);
}

} // namespace codecheck::comcheck
