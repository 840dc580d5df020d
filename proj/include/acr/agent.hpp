#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acr/corpus.hpp"
#include "acr/dense.hpp"
#include "acr/hybrid.hpp"
#include "acr/kgraph.hpp"
#include "acr/lexical.hpp"
#include "acr/providers.hpp"
#include "acr/ranking.hpp"

namespace acr::agent {

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
    std::vector<std::string> sources{"lexical", "dense", "kgraph"};
    std::size_t k_per_source = 10;
    double rrf_k = 60.0;
    std::size_t evidence_budget_chars = 6000;
    double confidence_threshold = 0.7;
    int max_refinements = 2;
    int hops = 1;

    /// Stage switches. The baselines turn these off; `retrieval = false`
    /// sends an empty evidence bundle to the decision stage.
    bool retrieval = true;
    bool reformulate = true;
    bool condense = true;
    bool self_validate = true;
    /// Fall back to an identity rewrite when the reformulation call fails.
    bool allow_reformulation_fallback = true;

    void validate() const;
};

/// Thrown when a stage fails; the message names the stage.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what)
        : Error("stage " + stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// ---------------------------------------------------------------------------
// Stage A: query understanding

struct ReformulatedQuery {
    std::string original;
    std::string rewritten;
    std::vector<std::string> key_concepts;
    /// True when the provider reply was unusable and the identity rewrite was used.
    bool fallback = false;
};

/// The 30-word stoplist used only by concept extraction.
std::span<const std::string_view> default_stoplist();

/// Stopword-filtered adjacent bigrams then unigrams, deduplicated. With an
/// index, the 5 candidates with highest mean token idf are kept (stable);
/// otherwise the first 5.
std::vector<std::string> extract_concepts(std::string_view query, const LexicalIndex* index = nullptr);

ChatRequest reformulation_request(std::string_view query);

/// Asks the provider for a standards-aligned rewrite and key concepts in the
/// REWRITTEN: / CONCEPTS: format. Falls back to the identity rewrite plus
/// extract_concepts() when the reply cannot be parsed, or when the call
/// fails and `allow_fallback` is set.
ReformulatedQuery reformulate_query(std::string_view query, ChatProvider& llm, bool allow_fallback = true,
                                    const LexicalIndex* index = nullptr);

/// Identity rewrite used when reformulation is switched off.
ReformulatedQuery passthrough_query(std::string_view query, const LexicalIndex* index = nullptr);

// ---------------------------------------------------------------------------
// Stage B: multi-source retrieval

struct SourceHits {
    Ranking ranked;
    /// Chunks the source created itself (graph evidence); not in the corpus.
    std::vector<Chunk> synthesized;
};

class RetrievalSource {
public:
    virtual ~RetrievalSource() = default;
    virtual std::string id() const = 0;
    virtual SourceHits retrieve(const ReformulatedQuery& query, std::size_t k) = 0;
};

class LexicalSource final : public RetrievalSource {
public:
    explicit LexicalSource(const LexicalIndex& index) : index_(index) {}
    std::string id() const override { return "lexical"; }
    SourceHits retrieve(const ReformulatedQuery& query, std::size_t k) override;

private:
    const LexicalIndex& index_;
};

class DenseSource final : public RetrievalSource {
public:
    DenseSource(const VectorIndex& index, Embedder& embedder) : index_(index), embedder_(embedder) {}
    std::string id() const override { return "dense"; }
    SourceHits retrieve(const ReformulatedQuery& query, std::size_t k) override;

private:
    const VectorIndex& index_;
    Embedder& embedder_;
};

class HybridSource final : public RetrievalSource {
public:
    HybridSource(const LexicalIndex& lexical, const VectorIndex& vectors, Embedder& embedder,
                 std::size_t coarse_k = 100)
        : lexical_(lexical), vectors_(vectors), embedder_(embedder), coarse_k_(coarse_k) {}
    std::string id() const override { return "hybrid"; }
    SourceHits retrieve(const ReformulatedQuery& query, std::size_t k) override;

private:
    const LexicalIndex& lexical_;
    const VectorIndex& vectors_;
    Embedder& embedder_;
    std::size_t coarse_k_;
};

/// Links key concepts to entities, expands `hops` around them and returns
/// the triples as synthesized "kg#i" chunks, nearest first.
class GraphSource final : public RetrievalSource {
public:
    GraphSource(const KnowledgeGraph& graph, int hops) : graph_(graph), hops_(hops) {}
    std::string id() const override { return "kgraph"; }
    SourceHits retrieve(const ReformulatedQuery& query, std::size_t k) override;

private:
    const KnowledgeGraph& graph_;
    int hops_;
};

struct SourceResult {
    std::string source_id;
    Ranking ranked;
    std::optional<std::string> error;
};

/// Reciprocal-rank fusion: score(c) = sum over lists of 1 / (rrf_k + rank),
/// rank starting at 1. Each chunk's terms are summed in ascending order so
/// the result does not depend on list order.
Ranking fuse_rrf(std::span<const Ranking> lists, double rrf_k);

struct MultiSourceResult {
    Ranking fused;
    std::vector<SourceResult> per_source;
    std::vector<Chunk> synthesized;
};

/// Queries every source with the reformulated query and fuses the lists.
/// A failing source is recorded and skipped unless it is the only one.
MultiSourceResult retrieve_multi_source(const ReformulatedQuery& query, std::span<RetrievalSource* const> sources,
                                        const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Stage C: evidence aggregation

struct EvidenceItem {
    std::string chunk_id;
    std::string text;
    double fused_score = 0.0;
    std::vector<std::string> sources;
    bool condensed = false;
};

struct EvidenceBundle {
    std::vector<EvidenceItem> items;
    /// Unicode scalar values across item texts.
    std::size_t total_chars = 0;
};

using ChunkLookup = std::function<const Chunk*(std::string_view)>;

/// Walks the fused list, skipping repeated ids, and appends whole chunks
/// until the next one would exceed the budget. The first chunk is always
/// kept. With a provider, a bundle above 80% of the budget has each item
/// condensed in place (never reordered or dropped).
EvidenceBundle aggregate_evidence(const Ranking& fused, const ChunkLookup& lookup, const PipelineConfig& cfg,
                                  ChatProvider* llm = nullptr, std::string_view query = {},
                                  std::span<const SourceResult> per_source = {});

// ---------------------------------------------------------------------------
// Stage D: decision and self-validation

struct Decision {
    std::optional<std::string> answer_label;
    std::string answer_text;
    std::string explanation;
    double confidence = 0.0;
};

class DecisionParseError : public Error {
public:
    using Error::Error;
};

ChatRequest decision_request(const ReformulatedQuery& query, const EvidenceBundle& evidence, const OptionList& options,
                             std::string_view critique = {});

/// Parses ANSWER / EXPLANATION / CONFIDENCE from model output. With
/// options, the answer must name a label (exact, then case-insensitive).
/// Confidence is clamped to [0, 1]; a missing one reads as 0.5.
Decision parse_decision(std::string_view reply, const OptionList& options);

/// Chain-of-thought prompt over the evidence; re-prompts once on an
/// unparseable reply.
Decision decide(const ReformulatedQuery& query, const EvidenceBundle& evidence, const OptionList& options,
                ChatProvider& llm, std::string_view critique = {});

struct ValidationRound {
    Decision decision;
    std::string verdict;  // ACCEPT, REVISE, or empty when validation is off
    std::string critique;
};

struct ValidationOutcome {
    Decision final;
    std::vector<ValidationRound> rounds;
    int refinements = 0;
    std::optional<std::string> error;
};

ChatRequest validation_request(const ReformulatedQuery& query, const EvidenceBundle& evidence,
                               const OptionList& options, const Decision& decision, double threshold);

/// Validator loop: stop once the verdict is ACCEPT and confidence reaches
/// the threshold; otherwise re-decide with the critique, at most
/// max_refinements times. A provider failure mid-loop returns the most
/// confident decision so far and records the error.
ValidationOutcome self_validate(Decision decision, const ReformulatedQuery& query, const EvidenceBundle& evidence,
                                const OptionList& options, ChatProvider& llm, const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Whole pipeline

/// Everything a run may need; only what the configured sources use must be set.
struct Resources {
    const ChunkCatalog* chunks = nullptr;
    const LexicalIndex* lexical = nullptr;
    const VectorIndex* vectors = nullptr;
    const KnowledgeGraph* graph = nullptr;
    Embedder* embedder = nullptr;
    ChatProvider* llm = nullptr;
    /// Extra sources addressable by id from PipelineConfig::sources.
    std::vector<RetrievalSource*> custom_sources;
};

struct PipelineTrace {
    ReformulatedQuery query;
    std::vector<SourceResult> per_source;
    Ranking fused;
    EvidenceBundle evidence;
    std::vector<ValidationRound> rounds;
    int refinements = 0;
    /// Stage names in execution order.
    std::vector<std::string> stages;
    std::map<std::string, double> timings_ms;
    std::vector<std::string> errors;
};

struct PipelineResult {
    Decision decision;
    PipelineTrace trace;
};

PipelineResult run_pipeline(std::string_view query, const OptionList& options, const Resources& resources,
                            const PipelineConfig& cfg);

/// One JSON object per run. Timing fields are omitted when `with_timing` is false.
std::string trace_to_json(const PipelineResult& result, bool with_timing = true);
void append_trace(const std::filesystem::path& path, const PipelineResult& result);

}  // namespace acr::agent
