#include "codecheck/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "codecheck/error.hpp"
#include "codecheck/text.hpp"

namespace codecheck::retrieval {

namespace {

constexpr std::string_view kContextHeader =
    "Answer the question using only the code provisions below. "
    "Cite the section label of every provision you rely on.";
constexpr std::string_view kNoProvisions = "No provisions found.";
constexpr std::string_view kIndexFormat = "codecheck-provision-index/1";

std::string provision_block(const Provision& p) {
    return fmt::format("[{}] {}\n{}", p.section_label, p.heading, p.body);
}

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u) != 0 && u < 0x80) {
            current.push_back(static_cast<char>(std::tolower(u)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

ProvisionIndex ProvisionIndex::build(std::vector<Provision> provisions, Bm25Params params) {
    ProvisionIndex index;
    index.params_ = params;
    std::unordered_set<std::string> seen;
    std::size_t total = 0;
    for (std::size_t chunk = 0; chunk < provisions.size(); ++chunk) {
        const auto& p = provisions[chunk];
        if (!seen.insert(p.id).second) {
            throw Error(Errc::DuplicateId, fmt::format("duplicate provision id '{}'", p.id));
        }
        if (trim(p.body).empty()) {
            throw Error(Errc::MalformedCorpus, fmt::format("provision '{}' has an empty body", p.id));
        }
        const auto tokens = tokenize(p.heading + "\n" + p.body);
        std::map<std::string, std::size_t> counts;
        for (const auto& t : tokens) {
            ++counts[t];
        }
        for (const auto& [term, tf] : counts) {
            ++index.document_frequency_[term];
            index.postings_[term].push_back({chunk, tf});
        }
        index.lengths_.push_back(tokens.size());
        total += tokens.size();
    }
    if (!provisions.empty()) {
        index.average_length_ = static_cast<double>(total) / static_cast<double>(provisions.size());
    }
    index.provisions_ = std::move(provisions);
    return index;
}

const Provision* ProvisionIndex::find(std::string_view id) const noexcept {
    const auto it = std::find_if(provisions_.begin(), provisions_.end(), [&](const Provision& p) { return p.id == id; });
    return it == provisions_.end() ? nullptr : &*it;
}

std::size_t ProvisionIndex::document_frequency(std::string_view term) const {
    const auto it = document_frequency_.find(term);
    return it == document_frequency_.end() ? 0 : it->second;
}

std::map<std::size_t, double> ProvisionIndex::score(std::string_view query) const {
    std::map<std::size_t, double> scores;
    if (provisions_.empty() || average_length_ <= 0.0) {
        return scores;
    }
    const auto tokens = tokenize(query);
    // Sorted distinct terms keep the summation order independent of the
    // query's word order and of the corpus order.
    const std::set<std::string> terms(tokens.begin(), tokens.end());
    const auto n = static_cast<double>(provisions_.size());
    for (const auto& term : terms) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) {
            continue;
        }
        const auto df = static_cast<double>(it->second.size());
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        for (const auto& posting : it->second) {
            const auto tf = static_cast<double>(posting.term_frequency);
            const double norm = 1.0 - params_.b +
                                params_.b * static_cast<double>(lengths_[posting.chunk]) / average_length_;
            scores[posting.chunk] += idf * tf * (params_.k1 + 1.0) / (tf + params_.k1 * norm);
        }
    }
    return scores;
}

ProvisionIndex ingest_provisions(std::vector<Provision> provisions) {
    return ProvisionIndex::build(std::move(provisions));
}

std::vector<RetrievalResult> retrieve(const ProvisionIndex& index, std::string_view query, std::size_t k) {
    if (index.empty()) {
        throw Error(Errc::EmptyIndex, "the provision index is empty");
    }
    if (k == 0) {
        throw Error(Errc::InvalidArguments, "k must be at least 1");
    }
    std::vector<RetrievalResult> results;
    for (const auto& [chunk, value] : index.score(query)) {
        results.push_back({index.provisions()[chunk].id, value, 0});
    }
    std::sort(results.begin(), results.end(), [](const RetrievalResult& a, const RetrievalResult& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.id < b.id;
    });
    if (results.size() > k) {
        results.resize(k);
    }
    for (std::size_t i = 0; i < results.size(); ++i) {
        results[i].rank = i + 1;
    }
    return results;
}

AssembledContext assemble_context(const std::vector<RetrievalResult>& results, const ProvisionIndex& index,
                                  std::string_view query, std::size_t budget) {
    const auto query_tokens = whitespace_token_count(query);
    if (query_tokens > budget) {
        throw Error(Errc::BudgetTooSmall,
                    fmt::format("budget of {} tokens cannot hold a {}-token query", budget, query_tokens));
    }
    AssembledContext context;
    context.tokens_used = query_tokens;
    std::vector<std::string> blocks;
    for (const auto& result : results) {
        const auto* provision = index.find(result.id);
        if (provision == nullptr) {
            throw Error(Errc::InvalidArguments, fmt::format("result '{}' is not in the index", result.id));
        }
        auto block = provision_block(*provision);
        const auto cost = whitespace_token_count(block);
        if (context.tokens_used + cost > budget) {
            break;
        }
        context.tokens_used += cost;
        context.included_ids.push_back(provision->id);
        blocks.push_back(std::move(block));
    }

    std::string prompt(kContextHeader);
    prompt += "\n\n";
    if (blocks.empty()) {
        prompt += kNoProvisions;
        prompt += "\n\n";
    }
    for (const auto& block : blocks) {
        prompt += block;
        prompt += "\n\n";
    }
    prompt += "Question: ";
    prompt += query;
    prompt += "\n";
    context.prompt = std::move(prompt);
    return context;
}

RagAnswer answer_with_rag(const ProvisionIndex& index, std::string_view query, llm::LlmClient& generator,
                          std::size_t k, std::size_t budget) {
    const auto results = index.empty() ? std::vector<RetrievalResult>{} : retrieve(index, query, k);
    auto context = assemble_context(results, index, query, budget);
    const std::vector<llm::Message> messages{{llm::Role::user, context.prompt}};
    auto generation = generator.generate(messages, {});
    return RagAnswer{std::move(generation.text), std::move(context.included_ids), std::move(context.prompt)};
}

std::vector<Provision> parse_corpus(const nlohmann::json& doc) {
    if (!doc.is_array()) {
        throw Error(Errc::MalformedCorpus, "corpus must be a JSON array of provisions");
    }
    std::vector<Provision> provisions;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& item = doc[i];
        Provision p;
        for (auto [key, target] : {std::pair{"id", &p.id}, std::pair{"section_label", &p.section_label},
                                   std::pair{"heading", &p.heading}, std::pair{"body", &p.body}}) {
            if (!item.is_object() || !item.contains(key) || !item.at(key).is_string()) {
                throw Error(Errc::MalformedCorpus, fmt::format("provision {} lacks a string '{}'", i, key));
            }
            *target = item.at(key).get<std::string>();
        }
        provisions.push_back(std::move(p));
    }
    return provisions;
}

std::vector<Provision> load_corpus(const std::filesystem::path& path) {
    const auto doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded()) {
        throw Error(Errc::MalformedCorpus, fmt::format("{} is not valid JSON", path.string()));
    }
    return parse_corpus(doc);
}

nlohmann::json to_json(const ProvisionIndex& index) {
    nlohmann::json provisions = nlohmann::json::array();
    for (const auto& p : index.provisions()) {
        provisions.push_back({{"id", p.id}, {"section_label", p.section_label}, {"heading", p.heading}, {"body", p.body}});
    }
    return {{"format", kIndexFormat},
            {"params", {{"k1", index.params().k1}, {"b", index.params().b}}},
            {"chunk_count", index.size()},
            {"average_chunk_length", index.average_chunk_length()},
            {"provisions", std::move(provisions)}};
}

ProvisionIndex index_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.value("format", "") != kIndexFormat || !doc.contains("provisions")) {
        throw Error(Errc::MalformedCorpus, "not a provision index document");
    }
    Bm25Params params;
    if (doc.contains("params")) {
        params.k1 = doc["params"].value("k1", params.k1);
        params.b = doc["params"].value("b", params.b);
    }
    return ProvisionIndex::build(parse_corpus(doc["provisions"]), params);
}

nlohmann::json to_json(const RetrievalResult& result) {
    return {{"id", result.id}, {"score", result.score}, {"rank", result.rank}};
}

std::optional<double> extract_wattage(std::string_view text) {
    // The leading group stands in for a lookbehind so that "2022 500 W"
    // yields 500 rather than "022 500".
    static const std::regex pattern(R"((?:^|[^\d.,])(\d{1,3}(?:[, ]\d{3})+|\d+)(\.\d+)?\s*W(?![A-Za-z/]))");
    const std::string subject(text);
    std::optional<double> last;
    for (auto it = std::sregex_iterator(subject.begin(), subject.end(), pattern); it != std::sregex_iterator(); ++it) {
        std::string digits = (*it)[1].str() + (*it)[2].str();
        std::erase_if(digits, [](char c) { return c == ',' || c == ' '; });
        last = std::stod(digits);
    }
    return last;
}

RulesComparison compare_with_rules(std::string_view answer, double expected_w) {
    RulesComparison comparison;
    comparison.expected_w = expected_w;
    comparison.reported_w = extract_wattage(answer);
    comparison.mismatch = !comparison.reported_w || *comparison.reported_w != expected_w;
    return comparison;
}

nlohmann::json to_json(const RulesComparison& comparison) {
    nlohmann::json out{{"expected_w", comparison.expected_w}, {"mismatch", comparison.mismatch}};
    out["reported_w"] = comparison.reported_w ? nlohmann::json(*comparison.reported_w) : nlohmann::json(nullptr);
    return out;
}

} // namespace codecheck::retrieval
