#include "codecheck/builtin_tools.hpp"

#include <cmath>
#include <regex>

#include <fmt/format.h>

#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

namespace codecheck::tools {

namespace {

using agent::FieldSpec;
using agent::FieldType;
using agent::ToolOutcome;
using agent::ToolSpec;

std::string rounded(double value) {
    return format_number(std::round(value * 1e6) / 1e6);
}

std::string string_arg(const nlohmann::json& args, const char* key) {
    return args.at(key).get<std::string>();
}

std::vector<FieldSpec> lighting_fields() {
    return {
        {"area", FieldType::number, "Gross floor area, in area_unit", true},
        {"area_unit", FieldType::string, "m2 or ft2", true},
        {"use_type", FieldType::string, "Building use type, e.g. bank_financial_institution", true},
        {"code_version", FieldType::string, "Code edition, e.g. ashrae_90_1_2022", true},
    };
}

void add_lighting_tools(agent::ToolRegistry& registry, const ToolContext& context) {
    const auto catalog = context.catalog;
    const auto client = context.comcheck;

    registry.register_tool(ToolSpec{
        "LightingAllowedWattage",
        "Interior lighting power allowance in watts by the building area method",
        lighting_fields(),
        [catalog, client](const nlohmann::json& args) {
            const rules::Area area{args.at("area").get<double>(), rules::parse_area_unit(string_arg(args, "area_unit"))};
            const auto use = string_arg(args, "use_type");
            const auto version = string_arg(args, "code_version");
            std::int64_t watts = 0;
            if (client) {
                watts = client->allowed_wattage(comcheck::make_request(area, use, version));
            } else {
                watts = rules::lighting_allowed_wattage(*catalog, area, rules::normalize_use_type(use),
                                                        rules::normalize_code_version(version));
            }
            return ToolOutcome{std::to_string(watts), false};
        },
        [catalog](std::string_view text) { return read_lighting_request(text, *catalog); },
    });

    auto check_fields = lighting_fields();
    check_fields.push_back({"designed_wattage", FieldType::number, "Installed lighting power in watts", false});
    registry.register_tool(ToolSpec{
        "CheckInteriorLighting",
        "Checks designed interior lighting power against the building area allowance",
        std::move(check_fields),
        [catalog](const nlohmann::json& args) {
            rules::ComplianceInput input;
            input.floor_area = {args.at("area").get<double>(), rules::parse_area_unit(string_arg(args, "area_unit"))};
            input.use_type = rules::normalize_use_type(string_arg(args, "use_type"));
            input.code_version = rules::normalize_code_version(string_arg(args, "code_version"));
            if (args.contains("designed_wattage")) {
                input.designed_wattage = args.at("designed_wattage").get<double>();
            }
            return ToolOutcome{rules::to_json(rules::check_interior_lighting(*catalog, input)).dump(), false};
        },
        [catalog](std::string_view text) {
            auto args = read_lighting_request(text, *catalog);
            static const std::regex designed(R"(designed\D{0,20}?(\d[\d,]*(?:\.\d+)?)\s*W)", std::regex::icase);
            const std::string subject(text);
            std::smatch m;
            if (std::regex_search(subject, m, designed)) {
                auto digits = m[1].str();
                std::erase(digits, ',');
                args["designed_wattage"] = std::stod(digits);
            }
            return args;
        },
    });
}

void add_surface_tools(agent::ToolRegistry& registry, const std::shared_ptr<const gbxml::BuildingModel>& model) {
    const std::vector<FieldSpec> by_id{{"surface_id", FieldType::string, "gbXML Surface id", true}};
    const auto surface_tool = [&](std::string name, std::string description, double (*query)(const gbxml::BuildingModel&, std::string_view)) {
        registry.register_tool(ToolSpec{
            std::move(name), std::move(description), by_id,
            [model, query](const nlohmann::json& args) {
                return ToolOutcome{rounded(query(*model, string_arg(args, "surface_id"))), false};
            },
            {},
        });
    };
    surface_tool("get_surface_area", "Area of a surface in square meters", &gbxml::surface_area);
    surface_tool("get_surface_tilt", "Tilt of a surface in degrees (0 roof, 90 wall, 180 floor)", &gbxml::surface_tilt);
    surface_tool("get_surface_azimuth", "Azimuth of a surface's outward normal in degrees clockwise from north",
                 &gbxml::surface_azimuth);
    surface_tool("get_surface_r_value", "Summed layer R-value of a surface's construction in m2·K/W",
                 &gbxml::surface_r_value);

    registry.register_tool(ToolSpec{
        "get_model_summary", "Counts of spaces, surfaces and constructions plus total floor area", {},
        [model](const nlohmann::json&) {
            return ToolOutcome{gbxml::to_json(gbxml::model_summary(*model)).dump(), false};
        },
        {},
    });
}

void add_retrieval_tool(agent::ToolRegistry& registry, const std::shared_ptr<const retrieval::ProvisionIndex>& index) {
    registry.register_tool(ToolSpec{
        "RetrieveProvisions",
        "Ranked code provisions relevant to a question",
        {{"query", FieldType::string, "Question or keywords", true},
         {"k", FieldType::integer, "Number of provisions to return (default 4)", false}},
        [index](const nlohmann::json& args) {
            const auto k = args.contains("k") ? args.at("k").get<long long>() : static_cast<long long>(retrieval::kDefaultTopK);
            if (k < 1) {
                throw Error(Errc::InvalidArguments, "k must be at least 1");
            }
            nlohmann::json out = nlohmann::json::array();
            for (const auto& r : retrieval::retrieve(*index, string_arg(args, "query"), static_cast<std::size_t>(k))) {
                const auto* p = index->find(r.id);
                out.push_back({{"rank", r.rank},
                               {"id", r.id},
                               {"score", r.score},
                               {"section_label", p->section_label},
                               {"heading", p->heading},
                               {"body", p->body}});
            }
            return ToolOutcome{out.dump(), false};
        },
        {},
    });
}

} // namespace

agent::ToolRegistry make_registry(const ToolContext& context) {
    ToolContext resolved = context;
    if (!resolved.catalog) {
        resolved.catalog = std::make_shared<const rules::LpdCatalog>(rules::LpdCatalog::builtin());
    }
    agent::ToolRegistry registry;
    add_lighting_tools(registry, resolved);
    if (resolved.model) {
        add_surface_tools(registry, resolved.model);
    }
    if (resolved.index) {
        add_retrieval_tool(registry, resolved.index);
    }
    return registry;
}

nlohmann::json read_lighting_request(std::string_view text, const rules::LpdCatalog& catalog) {
    const std::string subject(text);
    const auto lower = to_lower(text);
    nlohmann::json args = nlohmann::json::object();

    static const std::regex area_re(
        R"((\d[\d,]*(?:\.\d+)?)\s*-?\s*(square[- ]met(?:er|re)s?|sq\.?\s*m\b|m2|m\xc2\xb2|square[- ]f(?:ee|oo)t|sq\.?\s*ft|ft2|ft\xc2\xb2))",
        std::regex::icase);
    std::smatch m;
    if (!std::regex_search(subject, m, area_re)) {
        throw Error(Errc::InvalidArguments, "could not find a floor area with a unit (m2 or ft2)");
    }
    auto digits = m[1].str();
    std::erase(digits, ',');
    args["area"] = std::stod(digits);
    args["area_unit"] = to_lower(m[2].str()).find('f') != std::string::npos ? "ft2" : "m2";

    for (const auto& version : catalog.versions()) {
        for (const auto& [use, entry] : catalog.table(version).entries) {
            auto spaced = use.id;
            std::replace(spaced.begin(), spaced.end(), '_', ' ');
            const auto display = to_lower(entry.display_name);
            const auto first_word = display.substr(0, display.find_first_of("/ "));
            for (const auto& candidate : {use.id, spaced, display, first_word}) {
                if (!candidate.empty() && lower.find(candidate) != std::string::npos) {
                    args["use_type"] = use.id;
                    break;
                }
            }
            if (args.contains("use_type")) {
                break;
            }
        }
        if (lower.find(version.id) != std::string::npos) {
            args["code_version"] = version.id;
        }
    }
    static const std::regex code_re(R"(90\.1\s*-\s*(\d{4}))");
    if (!args.contains("code_version") && std::regex_search(subject, m, code_re)) {
        args["code_version"] = "ashrae_90_1_" + m[1].str();
    }
    if (!args.contains("use_type")) {
        throw Error(Errc::InvalidArguments, "could not recognize a building use type");
    }
    if (!args.contains("code_version")) {
        throw Error(Errc::InvalidArguments, "could not find a code edition such as ASHRAE 90.1-2022");
    }
    return args;
}

} // namespace codecheck::tools
