#include <gtest/gtest.h>

#include <algorithm>
#include <string>

#include <fmt/format.h>

#include "codecheck/error.hpp"
#include "codecheck/gbxml.hpp"
#include "codecheck/rules.hpp"
#include "codecheck/text.hpp"

using namespace codecheck;
using namespace codecheck::gbxml;

namespace {

std::string sample() {
    return read_text_file(std::string(CODECHECK_DATA_DIR) + "/samples/bank_branch.xml");
}

std::string wrap(const std::string& campus_body, const std::string& tail = "",
                 const std::string& units = R"(lengthUnit="Meters" areaUnit="SquareMeters")") {
    return fmt::format(R"(<?xml version="1.0"?>
<gbXML xmlns="http://www.gbxml.org/schema" {}>
  <Campus id="c"><Building id="b">{}</Building></Campus>
  {}
</gbXML>)",
                       units, campus_body, tail);
}

std::string square_surface(const std::string& id, double side, const std::string& extra = "") {
    return fmt::format(R"(<Surface id="{0}" surfaceType="Roof" {2}>
      <PlanarGeometry><PolyLoop>
        <CartesianPoint><Coordinate>0</Coordinate><Coordinate>0</Coordinate><Coordinate>3</Coordinate></CartesianPoint>
        <CartesianPoint><Coordinate>{1}</Coordinate><Coordinate>0</Coordinate><Coordinate>3</Coordinate></CartesianPoint>
        <CartesianPoint><Coordinate>{1}</Coordinate><Coordinate>{1}</Coordinate><Coordinate>3</Coordinate></CartesianPoint>
        <CartesianPoint><Coordinate>0</Coordinate><Coordinate>{1}</Coordinate><Coordinate>3</Coordinate></CartesianPoint>
      </PolyLoop></PlanarGeometry></Surface>)",
                       id, side, extra);
}

bool has_warning(const ParseResult& r, const std::string& subject, const std::string& fragment) {
    return std::any_of(r.warnings.begin(), r.warnings.end(), [&](const Warning& w) {
        return w.subject_id == subject && w.message.find(fragment) != std::string::npos;
    });
}

Errc code_of(const auto& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return Errc::IoError;
}

} // namespace

TEST(Gbxml, SampleParsesWithoutWarnings) {
    const auto parsed = parse_gbxml(sample());
    EXPECT_TRUE(parsed.warnings.empty());
    EXPECT_EQ(parsed.model.spaces.size(), 1u);
    EXPECT_EQ(parsed.model.surfaces.size(), 7u);
    EXPECT_EQ(parsed.model.constructions.size(), 4u);
    EXPECT_EQ(parsed.model.materials.size(), 8u);
    ASSERT_EQ(parsed.model.schedules.size(), 1u);
    EXPECT_EQ(parsed.model.schedules[0].hourly_values.at("Weekday").size(), 24u);
}

TEST(Gbxml, SampleSurfaceQueries) {
    const auto model = parse_gbxml(sample()).model;
    EXPECT_DOUBLE_EQ(surface_area(model, "ceiling_unit1_Reversed"), 80.0);
    EXPECT_DOUBLE_EQ(surface_tilt(model, "ceiling_unit1_Reversed"), 180.0);
    EXPECT_DOUBLE_EQ(surface_tilt(model, "roof_unit1"), 0.0);
    EXPECT_DOUBLE_EQ(surface_area(model, "wall_east_unit1"), 24.0);
    EXPECT_DOUBLE_EQ(surface_azimuth(model, "wall_east_unit1"), 90.0);
    EXPECT_DOUBLE_EQ(surface_azimuth(model, "wall_west_unit1"), 270.0);
    // brick 0.8 IP + 2.5 SI + 0.013 m / 0.16 W/(m·K)
    EXPECT_NEAR(surface_r_value(model, "wall_south_unit1"), 0.8 * rules::kSiRPerIpR + 2.5 + 0.013 / 0.16, 1e-12);
}

TEST(Gbxml, QueryErrors) {
    const auto model = parse_gbxml(sample()).model;
    EXPECT_EQ(code_of([&] { (void)surface_area(model, "nope"); }), Errc::UnknownSurface);
    EXPECT_EQ(code_of([&] { (void)surface_azimuth(model, "roof_unit1"); }), Errc::HorizontalSurface);

    const auto no_cons = parse_gbxml(wrap(square_surface("s1", 2.0))).model;
    EXPECT_EQ(code_of([&] { (void)surface_r_value(no_cons, "s1"); }), Errc::NoConstruction);

    const auto dangling = parse_gbxml(wrap(square_surface("s1", 2.0, R"(constructionIdRef="c1")"),
                                           R"(<Construction id="c1"><LayerId layerIdRef="l1"/></Construction>
                                              <Layer id="l1"><MaterialId materialIdRef="ghost"/></Layer>)"));
    EXPECT_EQ(code_of([&] { (void)surface_r_value(dangling.model, "s1"); }), Errc::UnresolvedMaterial);
    EXPECT_TRUE(has_warning(dangling, "c1", "dangling material reference 'ghost'"));
}

TEST(Gbxml, DocumentErrors) {
    EXPECT_EQ(code_of([] { (void)parse_gbxml("<gbXML><Campus>"); }), Errc::MalformedXml);
    EXPECT_EQ(code_of([] { (void)parse_gbxml(R"(<gbXML lengthUnit="Meters"/>)"); }), Errc::MissingCampus);
    EXPECT_EQ(code_of([] { (void)parse_gbxml(wrap("", "", R"(lengthUnit="Cubits")")); }), Errc::UnknownUnit);
}

TEST(Gbxml, FeetAreConvertedToSquareMeters) {
    const auto parsed = parse_gbxml(wrap(square_surface("s1", 10.0), "", R"(lengthUnit="Feet" areaUnit="SquareFeet")"));
    EXPECT_NEAR(surface_area(parsed.model, "s1"), 100.0 * 0.3048 * 0.3048, 1e-12);
}

TEST(Gbxml, MissingUnitsWarnAndDefault) {
    const auto parsed = parse_gbxml(wrap(square_surface("s1", 2.0), "", ""));
    EXPECT_TRUE(has_warning(parsed, "", "lengthUnit not declared"));
    EXPECT_TRUE(has_warning(parsed, "", "areaUnit not declared"));
    EXPECT_DOUBLE_EQ(surface_area(parsed.model, "s1"), 4.0);
}

TEST(Gbxml, NamespacePrefixesAreIgnored) {
    const std::string doc = R"(<gb:gbXML xmlns:gb="http://www.gbxml.org/schema" lengthUnit="Meters" areaUnit="SquareMeters">
      <gb:Campus id="c"><gb:Surface id="s1" surfaceType="Roof"><gb:PlanarGeometry><gb:PolyLoop>
        <gb:CartesianPoint><gb:Coordinate>0</gb:Coordinate><gb:Coordinate>0</gb:Coordinate><gb:Coordinate>0</gb:Coordinate></gb:CartesianPoint>
        <gb:CartesianPoint><gb:Coordinate>3</gb:Coordinate><gb:Coordinate>0</gb:Coordinate><gb:Coordinate>0</gb:Coordinate></gb:CartesianPoint>
        <gb:CartesianPoint><gb:Coordinate>3</gb:Coordinate><gb:Coordinate>2</gb:Coordinate><gb:Coordinate>0</gb:Coordinate></gb:CartesianPoint>
      </gb:PolyLoop></gb:PlanarGeometry></gb:Surface></gb:Campus></gb:gbXML>)";
    EXPECT_DOUBLE_EQ(surface_area(parse_gbxml(doc).model, "s1"), 3.0);
}

TEST(Gbxml, UnknownElementsWarnOncePerPath) {
    const auto parsed = parse_gbxml(wrap(square_surface("s1", 1.0, "") + square_surface("s2", 1.0, ""),
                                         "<Mystery/><Mystery/><Mystery/>"));
    const auto count = std::count_if(parsed.warnings.begin(), parsed.warnings.end(), [](const Warning& w) {
        return w.message.find("Mystery") != std::string::npos;
    });
    EXPECT_EQ(count, 1);
}

TEST(Gbxml, DuplicateIdsKeepFirstDefinition) {
    const auto parsed = parse_gbxml(wrap(square_surface("s1", 1.0) + square_surface("s1", 5.0)));
    ASSERT_EQ(parsed.model.surfaces.size(), 1u);
    EXPECT_DOUBLE_EQ(surface_area(parsed.model, "s1"), 1.0);
    EXPECT_TRUE(has_warning(parsed, "s1", "duplicate surface id"));
}

TEST(Gbxml, DeclaredTiltDisagreementWarns) {
    const auto surface = square_surface("s1", 2.0);
    auto with_tilt = surface;
    with_tilt.insert(with_tilt.find("<PlanarGeometry>"), "<RectangularGeometry><Tilt>45</Tilt></RectangularGeometry>");
    const auto parsed = parse_gbxml(wrap(with_tilt));
    EXPECT_TRUE(has_warning(parsed, "s1", "declared Tilt 45"));
    // The loop wins over the declared value.
    EXPECT_DOUBLE_EQ(surface_tilt(parsed.model, "s1"), 0.0);
}

TEST(Gbxml, NonPlanarLoopWarns) {
    const auto doc = wrap(R"(<Surface id="warp" surfaceType="Roof"><PlanarGeometry><PolyLoop>
        <CartesianPoint><Coordinate>0</Coordinate><Coordinate>0</Coordinate><Coordinate>0</Coordinate></CartesianPoint>
        <CartesianPoint><Coordinate>1</Coordinate><Coordinate>0</Coordinate><Coordinate>0</Coordinate></CartesianPoint>
        <CartesianPoint><Coordinate>1</Coordinate><Coordinate>1</Coordinate><Coordinate>0.3</Coordinate></CartesianPoint>
        <CartesianPoint><Coordinate>0</Coordinate><Coordinate>1</Coordinate><Coordinate>0</Coordinate></CartesianPoint>
      </PolyLoop></PlanarGeometry></Surface>)");
    EXPECT_TRUE(has_warning(parse_gbxml(doc), "warp", "not planar"));
}

TEST(Gbxml, IpMaterialValuesNormalizeToSi) {
    const auto parsed = parse_gbxml(wrap(square_surface("s1", 1.0, R"(constructionIdRef="c1")"),
                                         R"(<Construction id="c1"><LayerId layerIdRef="l1"/></Construction>
        <Layer id="l1"><MaterialId materialIdRef="m1"/><MaterialId materialIdRef="m2"/></Layer>
        <Material id="m1"><R-value unit="SquareFtHrFPerBTU">1</R-value></Material>
        <Material id="m2"><Thickness unit="Inches">12</Thickness><Conductivity unit="BtuPerHourFtF">1</Conductivity></Material>)"));
    const auto& m1 = parsed.model.materials.at(0);
    const auto& m2 = parsed.model.materials.at(1);
    EXPECT_DOUBLE_EQ(*m1.r_value_si, rules::kSiRPerIpR);
    EXPECT_DOUBLE_EQ(*m2.thickness_m, 0.3048);
    EXPECT_DOUBLE_EQ(*m2.conductivity, rules::kSiConductivityPerIp);
    EXPECT_NEAR(surface_r_value(parsed.model, "s1"), rules::kSiRPerIpR + 0.3048 / rules::kSiConductivityPerIp, 1e-12);
}

TEST(GbxmlProperty, RValueIsExactlyAdditiveForDyadicLayers) {
    std::string materials;
    std::string refs;
    double expected = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double r = 0.125 * (i + 1);
        expected += r;
        materials += fmt::format(R"(<Material id="m{}"><R-value unit="SquareMeterKPerW">{}</R-value></Material>)", i, r);
        refs += fmt::format(R"(<MaterialId materialIdRef="m{}"/>)", i);
    }
    const auto parsed = parse_gbxml(wrap(square_surface("s1", 1.0, R"(constructionIdRef="c1")"),
                                         R"(<Construction id="c1"><LayerId layerIdRef="l1"/></Construction><Layer id="l1">)" +
                                             refs + "</Layer>" + materials));
    EXPECT_EQ(surface_r_value(parsed.model, "s1"), expected);
}

TEST(GbxmlProperty, WriteThenParseIsIdentity) {
    const auto first = parse_gbxml(sample()).model;
    const auto second = parse_gbxml(write_gbxml(first)).model;
    EXPECT_EQ(first, second);
    EXPECT_EQ(write_gbxml(first), write_gbxml(second));
}

TEST(Gbxml, SummaryPrefersSpaceAreas) {
    const auto summary = model_summary(parse_gbxml(sample()).model);
    EXPECT_EQ(summary.space_count, 1u);
    EXPECT_EQ(summary.surface_count, 7u);
    EXPECT_TRUE(summary.area_from_spaces);
    EXPECT_DOUBLE_EQ(summary.total_floor_area_m2, 80.0);
}

TEST(Gbxml, ExtractAttributesMarksUncomputableValuesNull) {
    const auto doc = extract_attributes(parse_gbxml(sample()));
    const auto& surfaces = doc.at("surfaces");
    const auto roof = std::find_if(surfaces.begin(), surfaces.end(), [](const auto& s) { return s["id"] == "roof_unit1"; });
    ASSERT_NE(roof, surfaces.end());
    EXPECT_TRUE((*roof)["azimuth_deg"].is_null());
    EXPECT_FALSE((*roof)["warnings"].empty());
    EXPECT_EQ((*roof)["area_m2"].get<double>(), 80.0);
}
