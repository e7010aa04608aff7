#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "codecheck/geometry.hpp"

namespace codecheck::gbxml {

using geometry::Vec3;

enum class LengthUnit { meters, feet, inches, millimeters };
enum class AreaUnit { square_meters, square_feet };

enum class SurfaceType {
    exterior_wall,
    interior_wall,
    roof,
    ceiling,
    raised_floor,
    slab_on_grade,
    shade,
    other,
};

std::string_view to_string(LengthUnit unit) noexcept;
std::string_view to_string(AreaUnit unit) noexcept;
std::string_view to_string(SurfaceType type) noexcept;

/// Meters per model length unit.
double meters_per_unit(LengthUnit unit) noexcept;

struct Space {
    std::string id;
    std::string name;
    /// Floor area in the model's area unit, when the document states one.
    std::optional<double> area;
    friend bool operator==(const Space&, const Space&) = default;
};

struct Surface {
    std::string id;
    SurfaceType surface_type = SurfaceType::other;
    std::string name;
    /// Loop in model length units; the closing vertex is not repeated.
    std::vector<Vec3> vertices;
    std::optional<std::string> construction_id;
    std::vector<std::string> adjacent_space_ids;
    /// Tilt/Azimuth as declared in RectangularGeometry, for cross-checking.
    std::optional<double> declared_tilt;
    std::optional<double> declared_azimuth;
    friend bool operator==(const Surface&, const Surface&) = default;
};

struct Construction {
    std::string id;
    std::string name;
    /// Outside to inside.
    std::vector<std::string> layer_material_ids;
    friend bool operator==(const Construction&, const Construction&) = default;
};

/// Thermal properties normalized to SI at parse time.
struct Material {
    std::string id;
    std::string name;
    std::optional<double> r_value_si;   // m²·K/W
    std::optional<double> thickness_m;
    std::optional<double> conductivity; // W/(m·K)
    friend bool operator==(const Material&, const Material&) = default;
};

/// Fractional hourly values keyed by gbXML day type ("Weekday", "Weekend",
/// "All", ...). Every list has 24 entries in [0, 1].
struct NamedSchedule {
    std::string id;
    std::string name;
    std::map<std::string, std::vector<double>> hourly_values;
    friend bool operator==(const NamedSchedule&, const NamedSchedule&) = default;
};

struct BuildingModel {
    LengthUnit length_unit = LengthUnit::meters;
    AreaUnit area_unit = AreaUnit::square_meters;
    std::vector<Space> spaces;
    std::vector<Surface> surfaces;
    std::vector<Construction> constructions;
    std::vector<Material> materials;
    std::vector<NamedSchedule> schedules;
    friend bool operator==(const BuildingModel&, const BuildingModel&) = default;
};

struct Warning {
    /// Id of the element the warning concerns; empty for document-level ones.
    std::string subject_id;
    std::string message;
    friend bool operator==(const Warning&, const Warning&) = default;
};

struct ParseResult {
    BuildingModel model;
    std::vector<Warning> warnings;
};

/// Throws Error{MalformedXml|MissingCampus|UnknownUnit}. Unknown elements,
/// dangling references, non-planar loops and declared tilt/azimuth that
/// disagree with the loop by more than one degree become warnings.
ParseResult parse_gbxml(std::string_view document_text);

/// Writes the recognized subset back out as gbXML. Reparsing yields an
/// equal model.
std::string write_gbxml(const BuildingModel& model);

/// Throws Error{UnknownSurface}.
const Surface& find_surface(const BuildingModel& model, std::string_view surface_id);

/// Newell area in m². Throws Error{UnknownSurface|DegenerateLoop}.
double surface_area(const BuildingModel& model, std::string_view surface_id);
/// Degrees in [0, 180]. Throws Error{UnknownSurface|DegenerateLoop}.
double surface_tilt(const BuildingModel& model, std::string_view surface_id);
/// Degrees in [0, 360) clockwise from +Y. Throws
/// Error{UnknownSurface|DegenerateLoop|HorizontalSurface}.
double surface_azimuth(const BuildingModel& model, std::string_view surface_id);
/// Layer sum in m²·K/W, air films excluded. Throws
/// Error{UnknownSurface|NoConstruction|UnresolvedMaterial}.
double surface_r_value(const BuildingModel& model, std::string_view surface_id);

double surface_area(const BuildingModel& model, const Surface& surface);
double surface_tilt(const Surface& surface);
double surface_azimuth(const Surface& surface);
double surface_r_value(const BuildingModel& model, const Surface& surface);

struct ModelSummary {
    std::size_t space_count = 0;
    std::size_t surface_count = 0;
    std::size_t construction_count = 0;
    double total_floor_area_m2 = 0.0;
    /// True when the total came from space areas, false when from floor surfaces.
    bool area_from_spaces = false;
};

ModelSummary model_summary(const BuildingModel& model);

nlohmann::json to_json(const ModelSummary& summary);

/// The structured attribute document emitted by `extract`: one record per
/// surface with id, type, area_m2, tilt_deg, azimuth_deg, r_value_si and
/// warnings. Values that cannot be computed are null, with the reason
/// listed under the surface's warnings.
nlohmann::json extract_attributes(const ParseResult& parsed);

} // namespace codecheck::gbxml
