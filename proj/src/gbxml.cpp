#include "codecheck/gbxml.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <fmt/format.h>

#include "codecheck/error.hpp"
#include "codecheck/rules.hpp"
#include "codecheck/text.hpp"

namespace codecheck::gbxml {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kAttrKey = "<xmlattr>";
constexpr double kPlanarityRatio = 1e-6;
constexpr double kDeclaredAngleTolerance = 1.0;

std::string_view local_name(std::string_view key) noexcept {
    const auto pos = key.rfind(':');
    return pos == std::string_view::npos ? key : key.substr(pos + 1);
}

bool is_markup_key(std::string_view key) noexcept {
    return key == kAttrKey || key == "<xmlcomment>" || key == "<xmltext>";
}

std::optional<std::string> attr(const pt::ptree& node, std::string_view name) {
    const auto attrs = node.get_child_optional(pt::ptree::path_type(std::string(kAttrKey), '\0'));
    if (!attrs) {
        return std::nullopt;
    }
    for (const auto& [key, value] : *attrs) {
        if (local_name(key) == name) {
            return std::string(trim(value.data()));
        }
    }
    return std::nullopt;
}

std::vector<const pt::ptree*> children(const pt::ptree& node, std::string_view name) {
    std::vector<const pt::ptree*> out;
    for (const auto& [key, child] : node) {
        if (local_name(key) == name) {
            out.push_back(&child);
        }
    }
    return out;
}

const pt::ptree* first_child(const pt::ptree& node, std::string_view name) {
    for (const auto& [key, child] : node) {
        if (local_name(key) == name) {
            return &child;
        }
    }
    return nullptr;
}

std::string text_of(const pt::ptree& node) {
    return std::string(trim(node.data()));
}

std::optional<double> parse_double(std::string_view text) {
    const std::string s(trim(text));
    if (s.empty()) {
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        const double value = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(value)) {
            return std::nullopt;
        }
        return value;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

LengthUnit parse_length_unit(std::string_view text) {
    if (text == "Meters") return LengthUnit::meters;
    if (text == "Feet") return LengthUnit::feet;
    if (text == "Inches") return LengthUnit::inches;
    if (text == "Millimeters") return LengthUnit::millimeters;
    throw Error(Errc::UnknownUnit, fmt::format("unsupported length unit '{}'", text));
}

AreaUnit parse_area_unit(std::string_view text) {
    if (text == "SquareMeters") return AreaUnit::square_meters;
    if (text == "SquareFeet") return AreaUnit::square_feet;
    throw Error(Errc::UnknownUnit, fmt::format("unsupported area unit '{}'", text));
}

std::string_view length_unit_attr(LengthUnit unit) noexcept {
    switch (unit) {
    case LengthUnit::meters: return "Meters";
    case LengthUnit::feet: return "Feet";
    case LengthUnit::inches: return "Inches";
    case LengthUnit::millimeters: return "Millimeters";
    }
    return "Meters";
}

SurfaceType parse_surface_type(std::string_view text) {
    if (text == "ExteriorWall") return SurfaceType::exterior_wall;
    if (text == "InteriorWall") return SurfaceType::interior_wall;
    if (text == "Roof") return SurfaceType::roof;
    if (text == "Ceiling") return SurfaceType::ceiling;
    if (text == "RaisedFloor") return SurfaceType::raised_floor;
    if (text == "SlabOnGrade") return SurfaceType::slab_on_grade;
    if (text == "Shade") return SurfaceType::shade;
    return SurfaceType::other;
}

std::string_view surface_type_attr(SurfaceType type) noexcept {
    switch (type) {
    case SurfaceType::exterior_wall: return "ExteriorWall";
    case SurfaceType::interior_wall: return "InteriorWall";
    case SurfaceType::roof: return "Roof";
    case SurfaceType::ceiling: return "Ceiling";
    case SurfaceType::raised_floor: return "RaisedFloor";
    case SurfaceType::slab_on_grade: return "SlabOnGrade";
    case SurfaceType::shade: return "Shade";
    case SurfaceType::other: return "Other";
    }
    return "Other";
}

double angular_difference(double a, double b) noexcept {
    const double d = std::fmod(std::abs(a - b), 360.0);
    return d > 180.0 ? 360.0 - d : d;
}

class Parser {
public:
    ParseResult run(std::string_view text) {
        pt::ptree doc;
        try {
            std::istringstream in{std::string(text)};
            pt::read_xml(in, doc, pt::xml_parser::trim_whitespace | pt::xml_parser::no_comments);
        } catch (const pt::xml_parser_error& e) {
            throw Error(Errc::MalformedXml, fmt::format("not parseable as XML: {} (line {})", e.message(), e.line()));
        }

        const pt::ptree* root = nullptr;
        for (const auto& [key, child] : doc) {
            if (!is_markup_key(key)) {
                root = &child;
                break;
            }
        }
        if (root == nullptr) {
            throw Error(Errc::MalformedXml, "document has no root element");
        }

        read_units(*root);
        const pt::ptree* campus = first_child(*root, "Campus");
        if (campus == nullptr) {
            throw Error(Errc::MissingCampus, "document has no Campus element (no building geometry)");
        }

        for (const auto& [key, child] : *root) {
            const auto name = local_name(key);
            if (is_markup_key(key) || name == "Campus" || name == "DocumentHistory") {
                continue;
            }
            if (name == "Construction") {
                raw_constructions_.push_back(&child);
            } else if (name == "Layer") {
                index_layer(child);
            } else if (name == "Material") {
                read_material(child);
            } else if (name == "Schedule") {
                raw_schedules_.push_back(&child);
            } else if (name == "WeekSchedule") {
                if (auto id = attr(child, "id")) week_schedules_[*id] = &child;
            } else if (name == "DaySchedule") {
                if (auto id = attr(child, "id")) day_schedules_[*id] = &child;
            } else {
                ignore("gbXML", name);
            }
        }

        read_campus(*campus);
        for (const auto* node : raw_constructions_) {
            read_construction(*node);
        }
        for (const auto* node : raw_schedules_) {
            read_schedule(*node);
        }
        check_references();
        check_geometry();
        return std::move(result_);
    }

private:
    void warn(std::string subject, std::string message) {
        result_.warnings.push_back({std::move(subject), std::move(message)});
    }

    void ignore(std::string_view parent, std::string_view name) {
        auto path = fmt::format("{}/{}", parent, name);
        if (ignored_.insert(path).second) {
            warn("", fmt::format("ignored unrecognized element {}", path));
        }
    }

    void read_units(const pt::ptree& root) {
        auto& model = result_.model;
        if (auto unit = attr(root, "lengthUnit")) {
            model.length_unit = parse_length_unit(*unit);
        } else {
            warn("", "lengthUnit not declared; assuming Meters");
        }
        if (auto unit = attr(root, "areaUnit")) {
            model.area_unit = parse_area_unit(*unit);
        } else {
            warn("", "areaUnit not declared; assuming SquareMeters");
        }
    }

    void read_campus(const pt::ptree& campus) {
        for (const auto& [key, child] : campus) {
            const auto name = local_name(key);
            if (is_markup_key(key) || name == "Location" || name == "Name" || name == "Description") {
                continue;
            }
            if (name == "Building") {
                read_building(child);
            } else if (name == "Surface") {
                read_surface(child);
            } else {
                ignore("Campus", name);
            }
        }
    }

    void read_building(const pt::ptree& building) {
        for (const auto& [key, child] : building) {
            const auto name = local_name(key);
            if (is_markup_key(key) || name == "Name" || name == "Area" || name == "Description" ||
                name == "BuildingStorey") {
                continue;
            }
            if (name == "Space") {
                read_space(child);
            } else if (name == "Surface") {
                read_surface(child);
            } else {
                ignore("Building", name);
            }
        }
    }

    void read_space(const pt::ptree& node) {
        Space space;
        space.id = attr(node, "id").value_or("");
        if (space.id.empty()) {
            warn("", "Space without id skipped");
            return;
        }
        if (const auto* name = first_child(node, "Name")) {
            space.name = text_of(*name);
        }
        if (const auto* area = first_child(node, "Area")) {
            space.area = parse_double(text_of(*area));
            if (!space.area || *space.area < 0.0) {
                warn(space.id, "space Area is not a non-negative number; ignored");
                space.area.reset();
            }
        }
        for (const auto& [key, child] : node) {
            const auto name = local_name(key);
            if (is_markup_key(key) || name == "Name" || name == "Area" || name == "Volume" ||
                name == "ShellGeometry" || name == "SpaceBoundary" || name == "Description" ||
                name == "PeopleNumber" || name == "LightPowerPerArea") {
                continue;
            }
            ignore("Space", name);
        }
        if (!space_ids_.insert(space.id).second) {
            warn(space.id, "duplicate space id; later definition skipped");
            return;
        }
        result_.model.spaces.push_back(std::move(space));
    }

    void read_surface(const pt::ptree& node) {
        Surface surface;
        surface.id = attr(node, "id").value_or("");
        if (surface.id.empty()) {
            warn("", "Surface without id skipped");
            return;
        }
        const auto type_text = attr(node, "surfaceType").value_or("");
        surface.surface_type = parse_surface_type(type_text);
        if (surface.surface_type == SurfaceType::other && type_text != "Other") {
            // Mapped, not lost: the enum has no finer slot for it.
            warn(surface.id, fmt::format("surfaceType '{}' mapped to other", type_text));
        }
        surface.construction_id = attr(node, "constructionIdRef");

        bool geometry_ok = true;
        for (const auto& [key, child] : node) {
            const auto name = local_name(key);
            if (is_markup_key(key) || name == "CADObjectId" || name == "Description") {
                continue;
            }
            if (name == "Name") {
                surface.name = text_of(child);
            } else if (name == "AdjacentSpaceId") {
                if (auto ref = attr(child, "spaceIdRef")) {
                    surface.adjacent_space_ids.push_back(*ref);
                }
            } else if (name == "RectangularGeometry") {
                if (const auto* tilt = first_child(child, "Tilt")) {
                    surface.declared_tilt = parse_double(text_of(*tilt));
                }
                if (const auto* azimuth = first_child(child, "Azimuth")) {
                    surface.declared_azimuth = parse_double(text_of(*azimuth));
                }
            } else if (name == "PlanarGeometry") {
                geometry_ok = read_loop(child, surface) && geometry_ok;
            } else {
                ignore("Surface", name);
            }
        }
        if (!geometry_ok) {
            surface.vertices.clear();
        }
        if (surface.adjacent_space_ids.size() > 2) {
            warn(surface.id, "more than two AdjacentSpaceId entries; extra entries dropped");
            surface.adjacent_space_ids.resize(2);
        }
        if (!surface_ids_.insert(surface.id).second) {
            warn(surface.id, "duplicate surface id; later definition skipped");
            return;
        }
        result_.model.surfaces.push_back(std::move(surface));
    }

    bool read_loop(const pt::ptree& planar, Surface& surface) {
        const pt::ptree* loop = first_child(planar, "PolyLoop");
        if (loop == nullptr) {
            warn(surface.id, "PlanarGeometry without PolyLoop");
            return false;
        }
        for (const auto* point : children(*loop, "CartesianPoint")) {
            const auto coords = children(*point, "Coordinate");
            if (coords.size() != 3) {
                warn(surface.id, "CartesianPoint must have exactly 3 coordinates; loop dropped");
                return false;
            }
            std::array<double, 3> xyz{};
            for (std::size_t i = 0; i < 3; ++i) {
                const auto value = parse_double(text_of(*coords[i]));
                if (!value) {
                    warn(surface.id, "non-numeric or non-finite coordinate; loop dropped");
                    return false;
                }
                xyz[i] = *value;
            }
            surface.vertices.push_back({xyz[0], xyz[1], xyz[2]});
        }
        if (surface.vertices.size() > 1 && surface.vertices.front() == surface.vertices.back()) {
            surface.vertices.pop_back();
        }
        return true;
    }

    void index_layer(const pt::ptree& node) {
        const auto id = attr(node, "id");
        if (!id) {
            warn("", "Layer without id skipped");
            return;
        }
        std::vector<std::string> materials;
        for (const auto* ref : children(node, "MaterialId")) {
            if (auto mat = attr(*ref, "materialIdRef")) {
                materials.push_back(*mat);
            }
        }
        layers_[*id] = std::move(materials);
    }

    void read_material(const pt::ptree& node) {
        Material material;
        material.id = attr(node, "id").value_or("");
        if (material.id.empty()) {
            warn("", "Material without id skipped");
            return;
        }
        for (const auto& [key, child] : node) {
            const auto name = local_name(key);
            if (is_markup_key(key)) {
                continue;
            }
            if (name == "Name") {
                material.name = text_of(child);
            } else if (name == "R-value") {
                const auto unit = attr(child, "unit").value_or("SquareMeterKPerW");
                auto value = parse_double(text_of(child));
                if (unit == "SquareFtHrFPerBTU" && value) {
                    *value *= rules::kSiRPerIpR;
                } else if (unit != "SquareMeterKPerW") {
                    throw Error(Errc::UnknownUnit, fmt::format("unsupported R-value unit '{}'", unit));
                }
                material.r_value_si = value;
            } else if (name == "Thickness") {
                const auto unit = parse_length_unit(attr(child, "unit").value_or("Meters"));
                auto value = parse_double(text_of(child));
                if (value) {
                    *value *= meters_per_unit(unit);
                }
                material.thickness_m = value;
            } else if (name == "Conductivity") {
                const auto unit = attr(child, "unit").value_or("WPerMeterK");
                auto value = parse_double(text_of(child));
                if (unit == "BtuPerHourFtF" && value) {
                    *value *= rules::kSiConductivityPerIp;
                } else if (unit != "WPerMeterK") {
                    throw Error(Errc::UnknownUnit, fmt::format("unsupported conductivity unit '{}'", unit));
                }
                material.conductivity = value;
            } else if (name != "Description" && name != "Density" && name != "SpecificHeat" &&
                       name != "Permeance" && name != "Porosity" && name != "Cost" && name != "CADMaterialId") {
                ignore("Material", name);
            }
        }
        const bool has_r = material.r_value_si.has_value();
        const bool has_tk = material.thickness_m.value_or(0.0) > 0.0 && material.conductivity.value_or(0.0) > 0.0;
        if (!has_r && !has_tk) {
            warn(material.id, "material has neither R-value nor positive thickness and conductivity");
        }
        if (!material_ids_.insert(material.id).second) {
            warn(material.id, "duplicate material id; later definition skipped");
            return;
        }
        result_.model.materials.push_back(std::move(material));
    }

    void read_construction(const pt::ptree& node) {
        Construction construction;
        construction.id = attr(node, "id").value_or("");
        if (construction.id.empty()) {
            warn("", "Construction without id skipped");
            return;
        }
        if (const auto* name = first_child(node, "Name")) {
            construction.name = text_of(*name);
        }
        for (const auto* ref : children(node, "LayerId")) {
            const auto layer_id = attr(*ref, "layerIdRef").value_or("");
            const auto it = layers_.find(layer_id);
            if (it == layers_.end()) {
                warn(construction.id, fmt::format("dangling layer reference '{}'", layer_id));
                continue;
            }
            for (const auto& material : it->second) {
                construction.layer_material_ids.push_back(material);
            }
        }
        if (construction.layer_material_ids.empty()) {
            warn(construction.id, "construction has no resolvable layers");
        }
        if (!construction_ids_.insert(construction.id).second) {
            warn(construction.id, "duplicate construction id; later definition skipped");
            return;
        }
        result_.model.constructions.push_back(std::move(construction));
    }

    void read_schedule(const pt::ptree& node) {
        NamedSchedule schedule;
        schedule.id = attr(node, "id").value_or("");
        if (schedule.id.empty()) {
            warn("", "Schedule without id skipped");
            return;
        }
        if (const auto* name = first_child(node, "Name")) {
            schedule.name = text_of(*name);
        }
        for (const auto* year : children(node, "YearSchedule")) {
            for (const auto* week_ref : children(*year, "WeekScheduleId")) {
                const auto week_id = attr(*week_ref, "weekScheduleIdRef").value_or("");
                const auto week = week_schedules_.find(week_id);
                if (week == week_schedules_.end()) {
                    warn(schedule.id, fmt::format("dangling week schedule reference '{}'", week_id));
                    continue;
                }
                read_week(*week->second, schedule);
            }
        }
        result_.model.schedules.push_back(std::move(schedule));
    }

    void read_week(const pt::ptree& week, NamedSchedule& schedule) {
        for (const auto* day : children(week, "Day")) {
            const auto day_type = attr(*day, "dayType").value_or("All");
            const auto day_id = attr(*day, "dayScheduleIdRef").value_or("");
            const auto it = day_schedules_.find(day_id);
            if (it == day_schedules_.end()) {
                warn(schedule.id, fmt::format("dangling day schedule reference '{}'", day_id));
                continue;
            }
            std::vector<double> values;
            bool ok = true;
            for (const auto* value_node : children(*it->second, "ScheduleValue")) {
                const auto value = parse_double(text_of(*value_node));
                if (!value || *value < 0.0 || *value > 1.0) {
                    ok = false;
                    break;
                }
                values.push_back(*value);
            }
            if (!ok || values.size() != 24) {
                warn(schedule.id,
                     fmt::format("day schedule '{}' is not 24 fractional values in [0,1]; skipped", day_id));
                continue;
            }
            schedule.hourly_values.emplace(day_type, std::move(values));
        }
    }

    void check_references() {
        const auto& model = result_.model;
        for (const auto& surface : model.surfaces) {
            if (surface.construction_id && !construction_ids_.contains(*surface.construction_id)) {
                warn(surface.id, fmt::format("dangling construction reference '{}'", *surface.construction_id));
            }
            for (const auto& space : surface.adjacent_space_ids) {
                if (!space_ids_.contains(space)) {
                    warn(surface.id, fmt::format("dangling space reference '{}'", space));
                }
            }
        }
        for (const auto& construction : model.constructions) {
            for (const auto& material : construction.layer_material_ids) {
                if (!material_ids_.contains(material)) {
                    warn(construction.id, fmt::format("dangling material reference '{}'", material));
                }
            }
        }
    }

    void check_geometry() {
        for (const auto& surface : result_.model.surfaces) {
            if (geometry::is_degenerate(surface.vertices)) {
                warn(surface.id, "vertex loop is degenerate (collinear or fewer than 3 distinct points)");
                continue;
            }
            const double diameter = geometry::loop_diameter(surface.vertices);
            if (geometry::max_plane_deviation(surface.vertices) > kPlanarityRatio * diameter) {
                warn(surface.id, "vertex loop is not planar; area uses the Newell projection");
            }
            const auto normal = geometry::unit_normal(surface.vertices);
            const double tilt = geometry::tilt_degrees(normal);
            if (surface.declared_tilt && std::abs(*surface.declared_tilt - tilt) > kDeclaredAngleTolerance) {
                warn(surface.id, fmt::format("declared Tilt {} differs from loop-derived {:.3f}",
                                             *surface.declared_tilt, tilt));
            }
            if (surface.declared_azimuth) {
                try {
                    const double azimuth = geometry::azimuth_degrees(normal);
                    if (angular_difference(*surface.declared_azimuth, azimuth) > kDeclaredAngleTolerance) {
                        warn(surface.id, fmt::format("declared Azimuth {} differs from loop-derived {:.3f}",
                                                     *surface.declared_azimuth, azimuth));
                    }
                } catch (const Error&) {
                    // Horizontal: any declared azimuth is moot.
                }
            }
        }
    }

    ParseResult result_;
    std::set<std::string> ignored_;
    std::unordered_set<std::string> space_ids_;
    std::unordered_set<std::string> surface_ids_;
    std::unordered_set<std::string> material_ids_;
    std::unordered_set<std::string> construction_ids_;
    std::unordered_map<std::string, std::vector<std::string>> layers_;
    std::unordered_map<std::string, const pt::ptree*> week_schedules_;
    std::unordered_map<std::string, const pt::ptree*> day_schedules_;
    std::vector<const pt::ptree*> raw_constructions_;
    std::vector<const pt::ptree*> raw_schedules_;
};

pt::ptree& add(pt::ptree& parent, const std::string& name, const std::string& data = {}) {
    return parent.add_child(pt::ptree::path_type(name, '\0'), pt::ptree(data));
}

void set_attr(pt::ptree& node, const std::string& name, const std::string& value) {
    node.put(pt::ptree::path_type(std::string(kAttrKey) + '\0' + name, '\0'), value);
}

} // namespace

std::string_view to_string(LengthUnit unit) noexcept {
    switch (unit) {
    case LengthUnit::meters: return "meters";
    case LengthUnit::feet: return "feet";
    case LengthUnit::inches: return "inches";
    case LengthUnit::millimeters: return "millimeters";
    }
    return "meters";
}

std::string_view to_string(AreaUnit unit) noexcept {
    return unit == AreaUnit::square_meters ? "square_meters" : "square_feet";
}

std::string_view to_string(SurfaceType type) noexcept {
    switch (type) {
    case SurfaceType::exterior_wall: return "exterior_wall";
    case SurfaceType::interior_wall: return "interior_wall";
    case SurfaceType::roof: return "roof";
    case SurfaceType::ceiling: return "ceiling";
    case SurfaceType::raised_floor: return "raised_floor";
    case SurfaceType::slab_on_grade: return "slab_on_grade";
    case SurfaceType::shade: return "shade";
    case SurfaceType::other: return "other";
    }
    return "other";
}

double meters_per_unit(LengthUnit unit) noexcept {
    switch (unit) {
    case LengthUnit::meters: return 1.0;
    case LengthUnit::feet: return rules::kMetersPerFoot;
    case LengthUnit::inches: return rules::kMetersPerInch;
    case LengthUnit::millimeters: return rules::kMetersPerMillimeter;
    }
    return 1.0;
}

ParseResult parse_gbxml(std::string_view document_text) {
    return Parser{}.run(document_text);
}

std::string write_gbxml(const BuildingModel& model) {
    pt::ptree doc;
    auto& root = add(doc, "gbXML");
    set_attr(root, "xmlns", "http://www.gbxml.org/schema");
    set_attr(root, "lengthUnit", std::string(length_unit_attr(model.length_unit)));
    set_attr(root, "areaUnit", model.area_unit == AreaUnit::square_meters ? "SquareMeters" : "SquareFeet");
    set_attr(root, "version", "7.03");

    auto& campus = add(root, "Campus");
    set_attr(campus, "id", "campus");
    auto& building = add(campus, "Building");
    set_attr(building, "id", "building");
    set_attr(building, "buildingType", "Unknown");
    for (const auto& space : model.spaces) {
        auto& node = add(building, "Space");
        set_attr(node, "id", space.id);
        add(node, "Name", space.name);
        if (space.area) {
            add(node, "Area", format_number(*space.area));
        }
    }
    for (const auto& surface : model.surfaces) {
        auto& node = add(campus, "Surface");
        set_attr(node, "id", surface.id);
        set_attr(node, "surfaceType", std::string(surface_type_attr(surface.surface_type)));
        if (surface.construction_id) {
            set_attr(node, "constructionIdRef", *surface.construction_id);
        }
        add(node, "Name", surface.name);
        for (const auto& space : surface.adjacent_space_ids) {
            set_attr(add(node, "AdjacentSpaceId"), "spaceIdRef", space);
        }
        if (surface.declared_tilt || surface.declared_azimuth) {
            auto& rect = add(node, "RectangularGeometry");
            if (surface.declared_azimuth) add(rect, "Azimuth", format_number(*surface.declared_azimuth));
            if (surface.declared_tilt) add(rect, "Tilt", format_number(*surface.declared_tilt));
        }
        auto& loop = add(add(node, "PlanarGeometry"), "PolyLoop");
        for (const auto& v : surface.vertices) {
            auto& point = add(loop, "CartesianPoint");
            add(point, "Coordinate", format_number(v.x));
            add(point, "Coordinate", format_number(v.y));
            add(point, "Coordinate", format_number(v.z));
        }
    }
    for (const auto& construction : model.constructions) {
        auto& node = add(root, "Construction");
        set_attr(node, "id", construction.id);
        const auto layer_id = "layer-" + construction.id;
        set_attr(add(node, "LayerId"), "layerIdRef", layer_id);
        add(node, "Name", construction.name);
        auto& layer = add(root, "Layer");
        set_attr(layer, "id", layer_id);
        for (const auto& material : construction.layer_material_ids) {
            set_attr(add(layer, "MaterialId"), "materialIdRef", material);
        }
    }
    for (const auto& material : model.materials) {
        auto& node = add(root, "Material");
        set_attr(node, "id", material.id);
        add(node, "Name", material.name);
        if (material.r_value_si) {
            set_attr(add(node, "R-value", format_number(*material.r_value_si)), "unit", "SquareMeterKPerW");
        }
        if (material.thickness_m) {
            set_attr(add(node, "Thickness", format_number(*material.thickness_m)), "unit", "Meters");
        }
        if (material.conductivity) {
            set_attr(add(node, "Conductivity", format_number(*material.conductivity)), "unit", "WPerMeterK");
        }
    }
    for (const auto& schedule : model.schedules) {
        auto& node = add(root, "Schedule");
        set_attr(node, "id", schedule.id);
        set_attr(node, "type", "Fraction");
        const auto week_id = "week-" + schedule.id;
        set_attr(add(add(node, "YearSchedule"), "WeekScheduleId"), "weekScheduleIdRef", week_id);
        add(node, "Name", schedule.name);
        auto& week = add(root, "WeekSchedule");
        set_attr(week, "id", week_id);
        int index = 0;
        for (const auto& [day_type, values] : schedule.hourly_values) {
            const auto day_id = fmt::format("day-{}-{}", schedule.id, index++);
            auto& day = add(week, "Day");
            set_attr(day, "dayType", day_type);
            set_attr(day, "dayScheduleIdRef", day_id);
            auto& day_node = add(root, "DaySchedule");
            set_attr(day_node, "id", day_id);
            for (double v : values) {
                add(day_node, "ScheduleValue", format_number(v));
            }
        }
    }

    std::ostringstream out;
    pt::write_xml(out, doc, pt::xml_writer_make_settings<std::string>(' ', 2));
    return out.str();
}

const Surface& find_surface(const BuildingModel& model, std::string_view surface_id) {
    for (const auto& surface : model.surfaces) {
        if (surface.id == surface_id) {
            return surface;
        }
    }
    throw Error(Errc::UnknownSurface, fmt::format("no surface with id '{}'", surface_id));
}

double surface_area(const BuildingModel& model, const Surface& surface) {
    const double scale = meters_per_unit(model.length_unit);
    return geometry::loop_area(surface.vertices) * scale * scale;
}

double surface_tilt(const Surface& surface) {
    return geometry::tilt_degrees(geometry::unit_normal(surface.vertices));
}

double surface_azimuth(const Surface& surface) {
    return geometry::azimuth_degrees(geometry::unit_normal(surface.vertices));
}

double surface_r_value(const BuildingModel& model, const Surface& surface) {
    if (!surface.construction_id) {
        throw Error(Errc::NoConstruction, fmt::format("surface '{}' has no construction", surface.id));
    }
    const Construction* construction = nullptr;
    for (const auto& c : model.constructions) {
        if (c.id == *surface.construction_id) {
            construction = &c;
            break;
        }
    }
    if (construction == nullptr) {
        throw Error(Errc::NoConstruction,
                    fmt::format("construction '{}' of surface '{}' is not defined", *surface.construction_id,
                                surface.id));
    }
    if (construction->layer_material_ids.empty()) {
        throw Error(Errc::UnresolvedMaterial, fmt::format("construction '{}' has no layers", construction->id));
    }
    double total = 0.0;
    for (const auto& material_id : construction->layer_material_ids) {
        const Material* material = nullptr;
        for (const auto& m : model.materials) {
            if (m.id == material_id) {
                material = &m;
                break;
            }
        }
        if (material == nullptr) {
            throw Error(Errc::UnresolvedMaterial, fmt::format("material '{}' is not defined", material_id));
        }
        if (material->r_value_si) {
            total += *material->r_value_si;
        } else if (material->thickness_m.value_or(0.0) > 0.0 && material->conductivity.value_or(0.0) > 0.0) {
            total += *material->thickness_m / *material->conductivity;
        } else {
            throw Error(Errc::UnresolvedMaterial,
                        fmt::format("material '{}' has no usable thermal resistance", material_id));
        }
    }
    return total;
}

double surface_area(const BuildingModel& model, std::string_view surface_id) {
    return surface_area(model, find_surface(model, surface_id));
}

double surface_tilt(const BuildingModel& model, std::string_view surface_id) {
    return surface_tilt(find_surface(model, surface_id));
}

double surface_azimuth(const BuildingModel& model, std::string_view surface_id) {
    return surface_azimuth(find_surface(model, surface_id));
}

double surface_r_value(const BuildingModel& model, std::string_view surface_id) {
    return surface_r_value(model, find_surface(model, surface_id));
}

ModelSummary model_summary(const BuildingModel& model) {
    ModelSummary summary;
    summary.space_count = model.spaces.size();
    summary.surface_count = model.surfaces.size();
    summary.construction_count = model.constructions.size();

    const double area_scale = model.area_unit == AreaUnit::square_meters ? 1.0 : 1.0 / rules::kSquareFeetPerSquareMeter;
    for (const auto& space : model.spaces) {
        if (space.area) {
            summary.area_from_spaces = true;
            summary.total_floor_area_m2 += *space.area * area_scale;
        }
    }
    if (summary.area_from_spaces) {
        return summary;
    }
    for (const auto& surface : model.surfaces) {
        const bool is_floor =
            surface.surface_type == SurfaceType::raised_floor || surface.surface_type == SurfaceType::slab_on_grade;
        if (is_floor && !geometry::is_degenerate(surface.vertices)) {
            summary.total_floor_area_m2 += surface_area(model, surface);
        }
    }
    return summary;
}

nlohmann::json to_json(const ModelSummary& summary) {
    return {{"spaces", summary.space_count},
            {"surfaces", summary.surface_count},
            {"constructions", summary.construction_count},
            {"total_floor_area_m2", summary.total_floor_area_m2},
            {"floor_area_source", summary.area_from_spaces ? "spaces" : "floor_surfaces"}};
}

nlohmann::json extract_attributes(const ParseResult& parsed) {
    const auto& model = parsed.model;
    nlohmann::json surfaces = nlohmann::json::array();
    for (const auto& surface : model.surfaces) {
        nlohmann::json warnings = nlohmann::json::array();
        for (const auto& w : parsed.warnings) {
            if (w.subject_id == surface.id) {
                warnings.push_back(w.message);
            }
        }
        auto attempt = [&](const char* field, auto&& compute) -> nlohmann::json {
            try {
                return compute();
            } catch (const Error& e) {
                warnings.push_back(fmt::format("{} unavailable: {}", field, describe(e)));
                return nullptr;
            }
        };
        nlohmann::json record;
        record["id"] = surface.id;
        record["name"] = surface.name;
        record["type"] = to_string(surface.surface_type);
        record["area_m2"] = attempt("area_m2", [&] { return surface_area(model, surface); });
        record["tilt_deg"] = attempt("tilt_deg", [&] { return surface_tilt(surface); });
        record["azimuth_deg"] = attempt("azimuth_deg", [&] { return surface_azimuth(surface); });
        record["r_value_si"] = attempt("r_value_si", [&] { return surface_r_value(model, surface); });
        record["warnings"] = std::move(warnings);
        surfaces.push_back(std::move(record));
    }
    nlohmann::json document_warnings = nlohmann::json::array();
    for (const auto& w : parsed.warnings) {
        if (w.subject_id.empty() || !std::any_of(model.surfaces.begin(), model.surfaces.end(),
                                                  [&](const Surface& s) { return s.id == w.subject_id; })) {
            document_warnings.push_back(w.subject_id.empty() ? w.message : w.subject_id + ": " + w.message);
        }
    }
    return {{"length_unit", to_string(model.length_unit)},
            {"area_unit", to_string(model.area_unit)},
            {"summary", to_json(model_summary(model))},
            {"surfaces", std::move(surfaces)},
            {"warnings", std::move(document_warnings)}};
}

} // namespace codecheck::gbxml
