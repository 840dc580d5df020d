#include <fstream>

#include <json.hpp>

#include "acr/agent.hpp"
#include "acr/error.hpp"

namespace acr::agent {

using nlohmann::ordered_json;

namespace {

ordered_json ranking_json(const Ranking& ranking) {
    ordered_json arr = ordered_json::array();
    for (const auto& hit : ranking) arr.push_back({{"chunk_id", hit.chunk_id}, {"score", hit.score}});
    return arr;
}

ordered_json decision_json(const Decision& d) {
    ordered_json j;
    j["answer_label"] = d.answer_label ? ordered_json(*d.answer_label) : ordered_json(nullptr);
    j["answer_text"] = d.answer_text;
    j["explanation"] = d.explanation;
    j["confidence"] = d.confidence;
    return j;
}

}  // namespace

std::string trace_to_json(const PipelineResult& result, bool with_timing) {
    const PipelineTrace& t = result.trace;
    ordered_json j;
    j["query"] = {{"original", t.query.original},
                  {"rewritten", t.query.rewritten},
                  {"key_concepts", t.query.key_concepts},
                  {"fallback", t.query.fallback}};

    ordered_json sources = ordered_json::array();
    for (const auto& s : t.per_source) {
        ordered_json sj = {{"source_id", s.source_id}, {"ranked", ranking_json(s.ranked)}};
        sj["error"] = s.error ? ordered_json(*s.error) : ordered_json(nullptr);
        sources.push_back(std::move(sj));
    }
    j["per_source"] = std::move(sources);
    j["fused"] = ranking_json(t.fused);

    ordered_json items = ordered_json::array();
    for (const auto& item : t.evidence.items) {
        items.push_back({{"chunk_id", item.chunk_id},
                         {"fused_score", item.fused_score},
                         {"sources", item.sources},
                         {"condensed", item.condensed},
                         {"text", item.text}});
    }
    j["evidence"] = {{"items", std::move(items)}, {"total_chars", t.evidence.total_chars}};

    ordered_json rounds = ordered_json::array();
    for (const auto& r : t.rounds) {
        rounds.push_back({{"decision", decision_json(r.decision)}, {"verdict", r.verdict}, {"critique", r.critique}});
    }
    j["rounds"] = std::move(rounds);
    j["refinements"] = t.refinements;
    j["stages"] = t.stages;
    j["errors"] = t.errors;
    j["decision"] = decision_json(result.decision);
    if (with_timing) {
        ordered_json timings = ordered_json::object();
        for (const auto& [stage, ms] : t.timings_ms) timings[stage] = ms;
        j["timings_ms"] = std::move(timings);
    }
    return j.dump();
}

void append_trace(const std::filesystem::path& path, const PipelineResult& result) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot open trace log: " + path.string());
    out << trace_to_json(result) << '\n';
    if (!out) throw Error("failed writing trace log: " + path.string());
}

}  // namespace acr::agent
