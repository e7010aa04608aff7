#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codecheck {

/// Failure kinds raised across the toolkit. The enumerator name is what
/// callers see in tool output and structured error documents.
enum class Errc {
    // gbxml
    MalformedXml,
    MissingCampus,
    UnknownUnit,
    UnknownSurface,
    DegenerateLoop,
    HorizontalSurface,
    NoConstruction,
    UnresolvedMaterial,
    // docparse
    BadTimeRange,
    UnknownDayType,
    MissingWattage,
    // rules
    NegativeArea,
    UnknownUseType,
    UnknownCodeVersion,
    MalformedTable,
    // retrieval
    DuplicateId,
    EmptyIndex,
    BudgetTooSmall,
    MalformedCorpus,
    // agent / llm
    GeneratorUnavailable,
    MaxStepsExceeded,
    RepeatedInvalidDirective,
    DuplicateTool,
    UnknownTool,
    InvalidArguments,
    // comcheck
    MissingFixture,
    EndpointUnreachable,
    MalformedResponse,
    MissingConfiguration,
    // io
    FileNotFound,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// "<Code>: <message>", the form used for tool-level fault text.
std::string describe(const Error& error);

} // namespace codecheck
