#include "acr/evalx.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "acr/error.hpp"
#include "acr/text.hpp"

namespace acr::eval {

using nlohmann::json;
using nlohmann::ordered_json;

QAItem parse_qa_item(std::string_view line, std::size_t line_no) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("malformed QA record: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw FormatError("QA record must be an object", line_no);

    auto str = [&](const char* name, bool required) -> std::string {
        auto it = obj.find(name);
        if (it == obj.end() || it->is_null()) {
            if (required) throw FormatError(std::string("missing field '") + name + "'", line_no);
            return {};
        }
        if (!it->is_string()) throw FormatError(std::string("field '") + name + "' must be a string", line_no);
        return it->get<std::string>();
    };

    QAItem item;
    item.qa_id = str("qa_id", true);
    item.question = str("question", true);
    item.answer_label = str("answer_label", true);
    item.explanation = str("explanation", true);
    item.category = str("category", false);

    auto options = obj.find("options");
    if (options == obj.end() || !options->is_array() || options->empty()) {
        throw FormatError("missing field 'options' (nonempty list of {label, text})", line_no);
    }
    for (const auto& opt : *options) {
        if (!opt.is_object() || !opt.contains("label") || !opt.contains("text") || !opt["label"].is_string() ||
            !opt["text"].is_string()) {
            throw FormatError("each option needs string 'label' and 'text'", line_no);
        }
        const auto label = opt["label"].get<std::string>();
        for (const auto& existing : item.options) {
            if (existing.first == label) throw FormatError("duplicate option label '" + label + "'", line_no);
        }
        item.options.emplace_back(label, opt["text"].get<std::string>());
    }
    auto gold = std::find_if(item.options.begin(), item.options.end(),
                             [&](const auto& o) { return o.first == item.answer_label; });
    if (gold == item.options.end()) {
        throw FormatError("answer_label '" + item.answer_label + "' is not among the options", line_no);
    }
    item.answer_text = gold->second;
    if (auto it = obj.find("answer_text");
        it != obj.end() && it->is_string() && it->get<std::string>() != item.answer_text) {
        throw FormatError("answer_text does not match the text of answer_label", line_no);
    }
    return item;
}

std::vector<QAItem> load_qa(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open QA file: " + path.string());
    std::vector<QAItem> items;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (trim(line).empty()) continue;
        auto item = parse_qa_item(line, line_no);
        if (!seen.emplace(item.qa_id, line_no).second) throw FormatError("duplicate qa_id " + item.qa_id, line_no);
        items.push_back(std::move(item));
    }
    return items;
}

double answer_accuracy(std::span<const agent::Decision> predictions, std::span<const QAItem> gold) {
    if (predictions.size() != gold.size()) {
        throw Error("prediction count " + std::to_string(predictions.size()) + " does not match gold count " +
                    std::to_string(gold.size()));
    }
    if (gold.empty()) throw Error("accuracy over zero items");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (predictions[i].answer_label && *predictions[i].answer_label == gold[i].answer_label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(gold.size());
}

double token_f1(std::string_view predicted, std::string_view gold) {
    const auto p = tokenize(predicted);
    const auto g = tokenize(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    std::unordered_map<std::string, int> counts;
    for (const auto& t : g) ++counts[t];
    std::size_t overlap = 0;
    for (const auto& t : p) {
        auto it = counts.find(t);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(p.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(g.size());
    return 2.0 * precision * recall / (precision + recall);
}

double explanation_cosine(std::string_view predicted, std::string_view gold, Embedder& embedder) {
    const std::vector<std::string> texts{std::string(predicted), std::string(gold)};
    const auto vectors = embedder.embed(texts);
    if (vectors.size() != 2) throw ProviderError("embedder returned the wrong number of vectors");
    return std::clamp(cosine(vectors[0], vectors[1]), 0.0, 1.0);
}

double explanation_embed_f1(std::string_view predicted, std::string_view gold, Embedder& embedder) {
    const auto p = tokenize(predicted);
    const auto g = tokenize(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;

    std::vector<std::string> unique;
    std::unordered_map<std::string, std::size_t> slot;
    for (const auto* list : {&p, &g}) {
        for (const auto& t : *list) {
            if (slot.emplace(t, unique.size()).second) unique.push_back(t);
        }
    }
    std::vector<Embedding> vectors;
    constexpr std::size_t kBatch = 64;
    for (std::size_t start = 0; start < unique.size(); start += kBatch) {
        const std::size_t n = std::min(kBatch, unique.size() - start);
        auto part = embedder.embed(std::span<const std::string>(unique.data() + start, n));
        if (part.size() != n) throw ProviderError("embedder returned the wrong number of vectors");
        for (auto& v : part) vectors.push_back(std::move(v));
    }

    auto similarity = [&](std::size_t a, std::size_t b) { return std::max(0.0, cosine(vectors[a], vectors[b])); };
    auto greedy = [&](const std::vector<std::string>& from, const std::vector<std::string>& to) {
        double sum = 0.0;
        for (const auto& t : from) {
            double best = 0.0;
            for (const auto& u : to) best = std::max(best, similarity(slot[t], slot[u]));
            sum += best;
        }
        return sum / static_cast<double>(from.size());
    };
    const double precision = greedy(p, g);
    const double recall = greedy(g, p);
    if (precision + recall == 0.0) return 0.0;
    return std::clamp(2.0 * precision * recall / (precision + recall), 0.0, 1.0);
}

std::string_view preset_name(Preset p) {
    switch (p) {
        case Preset::None:
            return "none";
        case Preset::Traditional:
            return "traditional";
        case Preset::Semantic:
            return "semantic";
        case Preset::Agentic:
            return "agentic";
    }
    return "?";
}

Preset parse_preset(std::string_view name) {
    for (auto p : all_presets()) {
        if (preset_name(p) == name) return p;
    }
    throw ConfigError("unknown preset '" + std::string(name) + "' (expected none, traditional, semantic, agentic)");
}

std::vector<Preset> all_presets() { return {Preset::None, Preset::Traditional, Preset::Semantic, Preset::Agentic}; }

agent::PipelineConfig preset_config(Preset p, const agent::PipelineConfig& base, bool with_graph) {
    agent::PipelineConfig cfg = base;
    switch (p) {
        case Preset::None:
            cfg.sources.clear();
            cfg.retrieval = false;
            cfg.reformulate = false;
            cfg.self_validate = false;
            cfg.condense = false;
            break;
        case Preset::Traditional:
        case Preset::Semantic:
            cfg.sources = {p == Preset::Traditional ? "lexical" : "dense"};
            cfg.retrieval = true;
            cfg.reformulate = false;
            cfg.self_validate = false;
            cfg.condense = false;
            break;
        case Preset::Agentic:
            cfg.sources = {"lexical", "dense"};
            if (with_graph) cfg.sources.push_back("kgraph");
            cfg.retrieval = true;
            cfg.reformulate = true;
            cfg.self_validate = true;
            break;
    }
    return cfg;
}

void check_preset_resources(Preset p, const EvalResources& r) {
    const auto& res = r.pipeline;
    auto require = [p](bool ok, const char* what) {
        if (!ok) throw Error("preset '" + std::string(preset_name(p)) + "' requires " + what);
    };
    require(res.llm != nullptr, "a chat provider");
    require(r.metric_embedder != nullptr, "an embedder for explanation metrics");
    if (p == Preset::Traditional || p == Preset::Agentic) require(res.lexical && res.chunks, "a lexical index");
    if (p == Preset::Semantic || p == Preset::Agentic) {
        require(res.vectors && res.embedder && res.chunks, "a vector index and an embedder");
    }
}

MetricsReport evaluate_preset(std::span<const QAItem> items, Preset preset, const EvalResources& resources) {
    if (items.empty()) throw Error("empty dataset");
    check_preset_resources(preset, resources);
    const agent::PipelineConfig cfg = preset_config(preset, resources.base, resources.pipeline.graph != nullptr);

    MetricsReport report;
    report.system_id = std::string(preset_name(preset));
    report.n = items.size();
    report.rows.resize(items.size());
    std::vector<agent::Decision> decisions(items.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
            const QAItem& item = items[i];
            ItemRow& row = report.rows[i];
            row.qa_id = item.qa_id;
            row.category = item.category;
            row.gold_label = item.answer_label;
            try {
                auto result = agent::run_pipeline(item.question, item.options, resources.pipeline, cfg);
                decisions[i] = result.decision;
                row.refinements = result.trace.refinements;
                for (const auto& ev : result.trace.evidence.items) row.evidence_ids.push_back(ev.chunk_id);
            } catch (const Error& e) {
                row.error = e.what();
            }
            const agent::Decision& d = decisions[i];
            row.predicted_label = d.answer_label;
            row.correct = d.answer_label && *d.answer_label == item.answer_label;
            row.confidence = d.confidence;
            row.answer_f1 = token_f1(d.answer_text, item.answer_text);
            row.explanation_cosine = explanation_cosine(d.explanation, item.explanation, *resources.metric_embedder);
            row.explanation_embed_f1 =
                explanation_embed_f1(d.explanation, item.explanation, *resources.metric_embedder);
        }
    };

    const std::size_t n_workers = std::clamp<std::size_t>(resources.max_concurrency, 1, items.size());
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    }

    // Reduce in item order so sums are identical whatever the scheduling.
    report.accuracy = answer_accuracy(decisions, items);
    for (const auto& row : report.rows) {
        report.answer_f1 += row.answer_f1;
        report.explanation_embed_f1 += row.explanation_embed_f1;
        report.explanation_cosine += row.explanation_cosine;
    }
    const double n = static_cast<double>(items.size());
    report.answer_f1 /= n;
    report.explanation_embed_f1 /= n;
    report.explanation_cosine /= n;
    return report;
}

std::vector<MetricsReport> run_comparison(std::span<const QAItem> items, std::span<const Preset> presets,
                                          const EvalResources& resources) {
    if (items.empty()) throw Error("empty dataset");
    if (presets.empty()) throw ConfigError("no presets requested");
    for (auto p : presets) check_preset_resources(p, resources);
    std::vector<MetricsReport> reports;
    for (auto p : presets) reports.push_back(evaluate_preset(items, p, resources));
    return reports;
}

void write_report(const std::filesystem::path& path, std::span<const MetricsReport> reports) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write report: " + path.string());
    for (const auto& r : reports) {
        for (const auto& row : r.rows) {
            ordered_json j;
            j["type"] = "item";
            j["system_id"] = r.system_id;
            j["qa_id"] = row.qa_id;
            j["category"] = row.category;
            j["predicted_label"] = row.predicted_label ? ordered_json(*row.predicted_label) : ordered_json(nullptr);
            j["gold_label"] = row.gold_label;
            j["correct"] = row.correct;
            j["answer_f1"] = row.answer_f1;
            j["explanation_embed_f1"] = row.explanation_embed_f1;
            j["explanation_cosine"] = row.explanation_cosine;
            j["confidence"] = row.confidence;
            j["refinements"] = row.refinements;
            j["evidence_ids"] = row.evidence_ids;
            j["error"] = row.error ? ordered_json(*row.error) : ordered_json(nullptr);
            out << j.dump() << '\n';
        }
    }
    for (const auto& r : reports) {
        ordered_json j;
        j["type"] = "summary";
        j["system_id"] = r.system_id;
        j["n"] = r.n;
        j["accuracy"] = r.accuracy;
        j["answer_f1"] = r.answer_f1;
        j["explanation_embed_f1"] = r.explanation_embed_f1;
        j["explanation_cosine"] = r.explanation_cosine;
        out << j.dump() << '\n';
    }
    if (!out) throw Error("failed writing report: " + path.string());
}

std::string format_table(std::span<const MetricsReport> reports) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-12s %5s %10s %10s %12s %12s\n", "system", "n", "accuracy", "answer_f1",
                  "expl_emb_f1", "expl_cosine");
    os << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-12s %5zu %10.4f %10.4f %12.4f %12.4f\n", r.system_id.c_str(), r.n,
                      r.accuracy, r.answer_f1, r.explanation_embed_f1, r.explanation_cosine);
        os << line;
    }
    return os.str();
}

}  // namespace acr::eval
