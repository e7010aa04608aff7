#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>

#include <json.hpp>

#include "codecheck/rules.hpp"

namespace codecheck::comcheck {

enum class TransportMode { live, replay, local };
std::string_view to_string(TransportMode mode) noexcept;
/// Throws Error{InvalidArguments}.
TransportMode parse_transport_mode(std::string_view text);

/// Thin request shape for the allowance endpoint. The remote service's real
/// schema is undocumented, so this is a placeholder seam.
struct AllowanceRequest {
    double floor_area_ft2 = 0.0;
    std::string use_type;
    std::string code_version;
};

nlohmann::json to_json(const AllowanceRequest& request);
/// Throws Error{InvalidArguments}.
AllowanceRequest request_from_json(const nlohmann::json& doc);

/// Compact dump with keys in sorted order, independent of insertion order.
std::string canonical_form(const nlohmann::json& request_doc);
/// Lowercase hex SHA-256 of canonical_form().
std::string canonical_hash(const nlohmann::json& request_doc);
std::string canonical_hash(const AllowanceRequest& request);

struct RecordedExchange {
    nlohmann::json request;
    nlohmann::json response;
    std::string recorded_at;
    std::string source;
};

enum class RecordOutcome { inserted, unchanged, overwritten };

/// Hash-keyed recorded responses. With a directory, every record is also
/// written to <dir>/<hash>.json and the directory is loaded on construction.
/// Lookups take a shared lock, recording an exclusive one.
class FixtureStore {
public:
    FixtureStore() = default;
    /// Throws Error{MalformedResponse} for an unreadable fixture file.
    explicit FixtureStore(std::filesystem::path directory);

    [[nodiscard]] std::optional<RecordedExchange> lookup(const std::string& hash) const;
    /// Identical re-records change nothing. A different response for the
    /// same request replaces the old one and logs a warning to stderr.
    RecordOutcome record(const nlohmann::json& request, const nlohmann::json& response, std::string source,
                         std::string recorded_at = {});
    [[nodiscard]] std::size_t size() const;

private:
    std::filesystem::path directory_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, RecordedExchange> entries_;
};

struct ComcheckConfig {
    TransportMode mode = TransportMode::local;
    std::string endpoint;
    std::string token;
    std::filesystem::path fixtures_dir;
    int timeout_seconds = 30;

    /// Reads COMCHECK_MODE, COMCHECK_ENDPOINT, COMCHECK_TOKEN. Without a
    /// mode variable, an endpoint selects live and otherwise fallback.
    static ComcheckConfig from_env(TransportMode fallback = TransportMode::local);
};

class ComcheckClient {
public:
    /// The store is required for replay mode; it is created from
    /// config.fixtures_dir when not supplied.
    ComcheckClient(ComcheckConfig config, std::shared_ptr<const rules::LpdCatalog> catalog,
                   std::shared_ptr<FixtureStore> store = nullptr);

    /// Throws Error{MissingFixture|EndpointUnreachable|MalformedResponse|
    /// MissingConfiguration} plus rules errors in local mode.
    std::int64_t allowed_wattage(const AllowanceRequest& request) const;

    [[nodiscard]] TransportMode mode() const noexcept { return config_.mode; }
    [[nodiscard]] const std::shared_ptr<FixtureStore>& store() const noexcept { return store_; }

private:
    std::int64_t local(const AllowanceRequest& request) const;
    std::int64_t replay(const AllowanceRequest& request) const;
    std::int64_t live(const AllowanceRequest& request) const;

    ComcheckConfig config_;
    std::shared_ptr<const rules::LpdCatalog> catalog_;
    std::shared_ptr<FixtureStore> store_;
};

/// Builds the request a tool sends for a floor area in any unit, with
/// normalized use-type and code-version labels.
AllowanceRequest make_request(rules::Area area, std::string_view use_type, std::string_view code_version);

/// Runs the request through local mode and records the answer in the store
/// with source "local". Returns the watts recorded.
std::int64_t record_from_local(const rules::LpdCatalog& catalog, FixtureStore& store, const AllowanceRequest& request,
                               std::string recorded_at = {});

/// Reads the watts out of a response document {allowed_wattage_w: N}.
/// Throws Error{MalformedResponse}.
std::int64_t parse_allowance_response(const nlohmann::json& response);

} // namespace codecheck::comcheck
