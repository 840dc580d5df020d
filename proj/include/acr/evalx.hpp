#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acr/agent.hpp"
#include "acr/providers.hpp"

namespace acr::eval {

/// Multiple-choice QA item. Labels are "option 1" ... "option N".
struct QAItem {
    std::string qa_id;
    std::string question;
    OptionList options;
    std::string answer_label;
    std::string answer_text;
    std::string explanation;
    std::string category;
};

/// Line-delimited records with qa_id, question, options [{label, text}],
/// answer_label, explanation, category. Errors carry the line number.
std::vector<QAItem> load_qa(const std::filesystem::path& path);
QAItem parse_qa_item(std::string_view line, std::size_t line_no);

/// Fraction of predictions whose label equals the gold label.
double answer_accuracy(std::span<const agent::Decision> predictions, std::span<const QAItem> gold);

/// Token-multiset F1. Both empty -> 1, exactly one empty -> 0.
double token_f1(std::string_view predicted, std::string_view gold);

/// Whole-text embedding cosine, clamped to [0, 1].
double explanation_cosine(std::string_view predicted, std::string_view gold, Embedder& embedder);

/// Greedy token matching over per-token embeddings: recall averages, over
/// gold tokens, the best cosine to any predicted token; precision the
/// reverse. Per-token cosines below 0 count as 0. Empty-text conventions
/// follow token_f1.
double explanation_embed_f1(std::string_view predicted, std::string_view gold, Embedder& embedder);

enum class Preset { None, Traditional, Semantic, Agentic };

std::string_view preset_name(Preset p);
/// Throws ConfigError for an unknown name.
Preset parse_preset(std::string_view name);
std::vector<Preset> all_presets();

/// Pipeline configuration for a baseline or the full system, starting from `base`.
/// `with_graph` adds the graph source to the agentic preset.
agent::PipelineConfig preset_config(Preset p, const agent::PipelineConfig& base, bool with_graph);

struct ItemRow {
    std::string qa_id;
    std::string category;
    std::optional<std::string> predicted_label;
    std::string gold_label;
    bool correct = false;
    double answer_f1 = 0.0;
    double explanation_embed_f1 = 0.0;
    double explanation_cosine = 0.0;
    double confidence = 0.0;
    int refinements = 0;
    std::vector<std::string> evidence_ids;
    std::optional<std::string> error;
};

struct MetricsReport {
    std::string system_id;
    std::size_t n = 0;
    double accuracy = 0.0;
    double answer_f1 = 0.0;
    double explanation_embed_f1 = 0.0;
    double explanation_cosine = 0.0;
    std::vector<ItemRow> rows;
};

struct EvalResources {
    agent::Resources pipeline;
    /// Embedder for the explanation metrics; may differ from the retrieval one.
    Embedder* metric_embedder = nullptr;
    agent::PipelineConfig base;
    std::size_t max_concurrency = 4;
};

/// Throws Error naming what is missing when the preset cannot run.
void check_preset_resources(Preset p, const EvalResources& resources);

MetricsReport evaluate_preset(std::span<const QAItem> items, Preset preset, const EvalResources& resources);

/// Runs every preset over every item. Throws "empty dataset" for no items.
std::vector<MetricsReport> run_comparison(std::span<const QAItem> items, std::span<const Preset> presets,
                                          const EvalResources& resources);

/// Per-item rows then one summary row per report, one JSON object per line.
void write_report(const std::filesystem::path& path, std::span<const MetricsReport> reports);
/// Aligned plain-text summary table.
std::string format_table(std::span<const MetricsReport> reports);

}  // namespace acr::eval
