#include <gtest/gtest.h>

#include <cmath>

#include "codecheck/builtin_tools.hpp"
#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

using namespace codecheck;

namespace {

tools::ToolContext full_context() {
    tools::ToolContext ctx;
    const auto parsed = gbxml::parse_gbxml(read_text_file(std::string(CODECHECK_DATA_DIR) + "/samples/bank_branch.xml"));
    ctx.model = std::make_shared<const gbxml::BuildingModel>(parsed.model);
    ctx.index = std::make_shared<const retrieval::ProvisionIndex>(retrieval::ProvisionIndex::build(
        retrieval::load_corpus(std::string(CODECHECK_DATA_DIR) + "/corpus/sample_provisions.json")));
    return ctx;
}

std::string run(const agent::ToolRegistry& registry, const std::string& tool, const nlohmann::json& args) {
    const auto out = registry.invoke(tool, args);
    EXPECT_FALSE(out.is_error) << out.text;
    return out.text;
}

const nlohmann::json kBankArgs{
    {"area", 500}, {"area_unit", "m2"}, {"use_type", "bank_financial_institution"}, {"code_version", "ashrae_90_1_2022"}};

} // namespace

TEST(BuiltinTools, MinimalRegistryHasLightingTools) {
    const auto registry = tools::make_registry({});
    EXPECT_EQ(registry.size(), 2u);
    EXPECT_EQ(run(registry, "LightingAllowedWattage", kBankArgs), "3019");
}

TEST(BuiltinTools, FullRegistry) {
    const auto registry = tools::make_registry(full_context());
    EXPECT_EQ(registry.size(), 8u);
    for (const char* name : {"get_surface_area", "get_surface_tilt", "get_surface_azimuth", "get_surface_r_value",
                             "get_model_summary", "RetrieveProvisions"}) {
        EXPECT_TRUE(registry.contains(name)) << name;
    }
}

TEST(BuiltinTools, SurfaceQueriesOnSampleModel) {
    const auto registry = tools::make_registry(full_context());
    const auto id = [](const char* s) { return nlohmann::json{{"surface_id", s}}; };
    EXPECT_EQ(run(registry, "get_surface_area", id("wall_south_unit1")), "30");
    EXPECT_EQ(run(registry, "get_surface_area", id("ceiling_unit1_Reversed")), "80");
    EXPECT_EQ(run(registry, "get_surface_tilt", id("roof_unit1")), "0");
    EXPECT_EQ(run(registry, "get_surface_tilt", id("slab_unit1")), "180");
    EXPECT_EQ(run(registry, "get_surface_azimuth", id("wall_east_unit1")), "90");
    EXPECT_EQ(run(registry, "get_surface_azimuth", id("wall_west_unit1")), "270");
    // Oracle: 0.8 IP R of brick converted, plus 2.5, plus gypsum 0.013 m / 0.16 W/mK.
    const double wall_r = 0.8 * 0.1761101838 + 2.5 + 0.013 / 0.16;
    EXPECT_NEAR(std::stod(run(registry, "get_surface_r_value", id("wall_north_unit1"))), wall_r, 1e-6);
}

TEST(BuiltinTools, SurfaceFaultsAreErrorOutcomes) {
    const auto registry = tools::make_registry(full_context());
    const auto missing = registry.invoke("get_surface_area", {{"surface_id", "nope"}});
    EXPECT_TRUE(missing.is_error);
    EXPECT_EQ(missing.text.rfind("UnknownSurface:", 0), 0u);
    const auto horizontal = registry.invoke("get_surface_azimuth", {{"surface_id", "roof_unit1"}});
    EXPECT_TRUE(horizontal.is_error);
    EXPECT_EQ(horizontal.text.rfind("HorizontalSurface:", 0), 0u);
}

TEST(BuiltinTools, ModelSummary) {
    const auto registry = tools::make_registry(full_context());
    const auto doc = nlohmann::json::parse(run(registry, "get_model_summary", nlohmann::json::object()));
    EXPECT_EQ(doc["surfaces"], 7);
    EXPECT_EQ(doc["spaces"], 1);
}

TEST(BuiltinTools, CheckInteriorLighting) {
    const auto registry = tools::make_registry({});
    auto args = kBankArgs;
    args["designed_wattage"] = 3500;
    const auto doc = nlohmann::json::parse(run(registry, "CheckInteriorLighting", args));
    EXPECT_EQ(doc["status"], "fail");
    EXPECT_EQ(doc["allowance_w"], 3019);

    const auto free_text = registry.parse_arguments("CheckInteriorLighting",
                                                    "500 m2 bank under ASHRAE 90.1-2022 with designed 2,900 W");
    EXPECT_EQ(free_text["designed_wattage"], 2900.0);
    EXPECT_EQ(nlohmann::json::parse(run(registry, "CheckInteriorLighting", free_text))["status"], "pass");
}

TEST(BuiltinTools, RetrieveProvisions) {
    const auto registry = tools::make_registry(full_context());
    const auto doc = nlohmann::json::parse(
        run(registry, "RetrieveProvisions", {{"query", "lighting power allowance bank"}, {"k", 2}}));
    ASSERT_EQ(doc.size(), 2u);
    EXPECT_EQ(doc[0]["section_label"], "9.5.1");
    EXPECT_EQ(doc[0]["rank"], 1);
    const auto bad = registry.invoke("RetrieveProvisions", {{"query", "x"}, {"k", 0}});
    EXPECT_TRUE(bad.is_error);
}

TEST(BuiltinTools, ReadLightingRequest) {
    const auto catalog = rules::LpdCatalog::builtin();
    const auto args = tools::read_lighting_request(
        "What is the lighting power allowance for a 500-square-meter bank according to ASHRAE 90.1-2022?", catalog);
    EXPECT_EQ(args, (nlohmann::json{{"area", 500.0},
                                    {"area_unit", "m2"},
                                    {"use_type", "bank_financial_institution"},
                                    {"code_version", "ashrae_90_1_2022"}}));
    const auto office = tools::read_lighting_request("12,000 sq ft office, 90.1-2022", catalog);
    EXPECT_EQ(office["area"], 12000.0);
    EXPECT_EQ(office["area_unit"], "ft2");
    EXPECT_EQ(office["use_type"], "office");
    for (const char* bad : {"a bank under 90.1-2022", "500 m2 under 90.1-2022", "500 m2 bank"}) {
        try {
            (void)tools::read_lighting_request(bad, catalog);
            FAIL() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), Errc::InvalidArguments) << bad;
        }
    }
}
