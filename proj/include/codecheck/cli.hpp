#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "codecheck/service.hpp"

namespace codecheck::cli {

/// Runs one command line (without the program name). Machine output goes to
/// `out` as JSON, prose to `err`. Returns 0 on success, 1 when the operation
/// fails (an {"error": ...} document is written to `out`), 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// "stub" (offline heuristic agent model), "echo", "script:<file>" (JSON
/// array of assistant turns, replayed fresh for every request) or "http"
/// (LLM_BASE_URL, LLM_API_KEY, LLM_MODEL). Throws Error{InvalidArguments|
/// MissingConfiguration|FileNotFound}.
service::LlmFactory make_llm_factory(std::string_view spec);

} // namespace codecheck::cli
