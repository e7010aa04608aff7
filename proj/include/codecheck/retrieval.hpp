#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "codecheck/llm.hpp"

namespace codecheck::retrieval {

struct Provision {
    std::string id;
    std::string section_label;
    std::string heading;
    std::string body;
    friend bool operator==(const Provision&, const Provision&) = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct RetrievalResult {
    std::string id;
    double score = 0.0;
    std::size_t rank = 0; // 1-based
};

inline constexpr std::size_t kDefaultTopK = 4;
inline constexpr std::size_t kDefaultBudgetTokens = 2048;

/// Lowercase, split on anything that is not an ASCII letter or digit.
std::vector<std::string> tokenize(std::string_view text);

/// One chunk per provision with BM25 statistics. Immutable once built.
class ProvisionIndex {
public:
    ProvisionIndex() = default;

    /// Throws Error{DuplicateId} and Error{MalformedCorpus} for an empty body.
    static ProvisionIndex build(std::vector<Provision> provisions, Bm25Params params = {});

    [[nodiscard]] bool empty() const noexcept { return provisions_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return provisions_.size(); }
    [[nodiscard]] const std::vector<Provision>& provisions() const noexcept { return provisions_; }
    [[nodiscard]] const Provision* find(std::string_view id) const noexcept;
    [[nodiscard]] const Bm25Params& params() const noexcept { return params_; }

    [[nodiscard]] std::size_t chunk_length(std::size_t chunk) const { return lengths_.at(chunk); }
    [[nodiscard]] double average_chunk_length() const noexcept { return average_length_; }
    [[nodiscard]] std::size_t document_frequency(std::string_view term) const;
    [[nodiscard]] const std::map<std::string, std::size_t, std::less<>>& document_frequencies() const noexcept {
        return document_frequency_;
    }

    /// BM25 score of every chunk that contains at least one query term,
    /// keyed by chunk position.
    [[nodiscard]] std::map<std::size_t, double> score(std::string_view query) const;

private:
    struct Posting {
        std::size_t chunk;
        std::size_t term_frequency;
    };

    std::vector<Provision> provisions_;
    std::vector<std::size_t> lengths_;
    double average_length_ = 0.0;
    std::map<std::string, std::size_t, std::less<>> document_frequency_;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    Bm25Params params_;
};

ProvisionIndex ingest_provisions(std::vector<Provision> provisions);

/// Top-k results, score descending, ties by ascending id. Only chunks that
/// share a term with the query are returned. Throws Error{EmptyIndex} and
/// Error{InvalidArguments} for k == 0.
std::vector<RetrievalResult> retrieve(const ProvisionIndex& index, std::string_view query,
                                      std::size_t k = kDefaultTopK);

struct AssembledContext {
    std::string prompt;
    /// Provisions that made it into the prompt, in rank order.
    std::vector<std::string> included_ids;
    std::size_t tokens_used = 0;
};

/// Builds the grounded prompt. The budget covers the query plus every
/// included provision block, counted in whitespace tokens; provisions are
/// added whole, in rank order, until the next one would not fit. Throws
/// Error{BudgetTooSmall} when the query alone exceeds the budget.
AssembledContext assemble_context(const std::vector<RetrievalResult>& results, const ProvisionIndex& index,
                                  std::string_view query, std::size_t budget = kDefaultBudgetTokens);

struct RagAnswer {
    std::string answer;
    std::vector<std::string> cited_ids;
    std::string prompt;
};

/// retrieve, assemble, generate. An empty index is not an error here: the
/// prompt carries the no-provisions marker and nothing is cited.
RagAnswer answer_with_rag(const ProvisionIndex& index, std::string_view query, llm::LlmClient& generator,
                          std::size_t k = kDefaultTopK, std::size_t budget = kDefaultBudgetTokens);

/// Corpus file: JSON array of {id, section_label, heading, body}.
/// Throws Error{MalformedCorpus}.
std::vector<Provision> parse_corpus(const nlohmann::json& doc);
std::vector<Provision> load_corpus(const std::filesystem::path& path);

nlohmann::json to_json(const ProvisionIndex& index);
/// Rebuilds the statistics from the stored provisions.
ProvisionIndex index_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const RetrievalResult& result);

/// Last "<number> W" quantity in free text. Accepts thousands separators
/// written as commas or spaces ("5,400 W", "7 535 W").
std::optional<double> extract_wattage(std::string_view text);

struct RulesComparison {
    double expected_w = 0.0;
    std::optional<double> reported_w;
    bool mismatch = true;
};

/// Compares a generated answer against the rules-engine allowance.
RulesComparison compare_with_rules(std::string_view answer, double expected_w);
nlohmann::json to_json(const RulesComparison& comparison);

} // namespace codecheck::retrieval
