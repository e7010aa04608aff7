#include "codecheck/error.hpp"

namespace codecheck {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::MalformedXml: return "MalformedXml";
    case Errc::MissingCampus: return "MissingCampus";
    case Errc::UnknownUnit: return "UnknownUnit";
    case Errc::UnknownSurface: return "UnknownSurface";
    case Errc::DegenerateLoop: return "DegenerateLoop";
    case Errc::HorizontalSurface: return "HorizontalSurface";
    case Errc::NoConstruction: return "NoConstruction";
    case Errc::UnresolvedMaterial: return "UnresolvedMaterial";
    case Errc::BadTimeRange: return "BadTimeRange";
    case Errc::UnknownDayType: return "UnknownDayType";
    case Errc::MissingWattage: return "MissingWattage";
    case Errc::NegativeArea: return "NegativeArea";
    case Errc::UnknownUseType: return "UnknownUseType";
    case Errc::UnknownCodeVersion: return "UnknownCodeVersion";
    case Errc::MalformedTable: return "MalformedTable";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::EmptyIndex: return "EmptyIndex";
    case Errc::BudgetTooSmall: return "BudgetTooSmall";
    case Errc::MalformedCorpus: return "MalformedCorpus";
    case Errc::GeneratorUnavailable: return "GeneratorUnavailable";
    case Errc::MaxStepsExceeded: return "MaxStepsExceeded";
    case Errc::RepeatedInvalidDirective: return "RepeatedInvalidDirective";
    case Errc::DuplicateTool: return "DuplicateTool";
    case Errc::UnknownTool: return "UnknownTool";
    case Errc::InvalidArguments: return "InvalidArguments";
    case Errc::MissingFixture: return "MissingFixture";
    case Errc::EndpointUnreachable: return "EndpointUnreachable";
    case Errc::MalformedResponse: return "MalformedResponse";
    case Errc::MissingConfiguration: return "MissingConfiguration";
    case Errc::FileNotFound: return "FileNotFound";
    case Errc::IoError: return "IoError";
    }
    return "Unknown";
}

std::string describe(const Error& error) {
    std::string out{to_string(error.code())};
    out += ": ";
    out += error.what();
    return out;
}

} // namespace codecheck
