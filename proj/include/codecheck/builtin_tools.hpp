#pragma once

#include <memory>
#include <string_view>

#include <json.hpp>

#include "codecheck/agent.hpp"
#include "codecheck/comcheck.hpp"
#include "codecheck/gbxml.hpp"
#include "codecheck/retrieval.hpp"
#include "codecheck/rules.hpp"

namespace codecheck::tools {

/// What the built-in tools may use. Only the catalog is required; surface
/// tools appear when a model is loaded, RetrieveProvisions when an index is.
struct ToolContext {
    std::shared_ptr<const rules::LpdCatalog> catalog;
    std::shared_ptr<const gbxml::BuildingModel> model;
    std::shared_ptr<const retrieval::ProvisionIndex> index;
    /// When present, LightingAllowedWattage asks this client instead of the
    /// rules engine directly.
    std::shared_ptr<const comcheck::ComcheckClient> comcheck;
};

agent::ToolRegistry make_registry(const ToolContext& context);

/// Reads "500 m2 bank ASHRAE 90.1-2022"-style text into the
/// LightingAllowedWattage argument object. Throws Error{InvalidArguments}
/// naming the first part it could not find.
nlohmann::json read_lighting_request(std::string_view text, const rules::LpdCatalog& catalog);

} // namespace codecheck::tools
