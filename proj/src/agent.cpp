#include "acr/agent.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "acr/error.hpp"
#include "acr/stub_providers.hpp"
#include "acr/text.hpp"

namespace acr::agent {

namespace {

constexpr std::array<std::string_view, 30> kStoplist = {
    "a",  "an", "and", "are",  "as",  "at",   "be", "by",  "for",  "from", "how",   "i",     "in",  "is",  "it",
    "of", "on", "or",  "that", "the", "this", "to", "was", "what", "when", "where", "which", "who", "why", "with"};

constexpr std::size_t kMaxConcepts = 5;

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

void push_unique(std::vector<std::string>& out, std::string value) {
    if (value.empty()) return;
    if (std::find(out.begin(), out.end(), value) == out.end()) out.push_back(std::move(value));
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

void PipelineConfig::validate() const {
    if (k_per_source < 1) throw ConfigError("k_per_source must be >= 1");
    if (!(rrf_k >= 0.0)) throw ConfigError("rrf_k must be >= 0");
    if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0)) {
        throw ConfigError("confidence threshold must lie in [0, 1]");
    }
    if (max_refinements < 0) throw ConfigError("max_refinements must be >= 0");
    if (hops < 0) throw ConfigError("hops must be >= 0");
}

// --- Stage A ---------------------------------------------------------------

std::span<const std::string_view> default_stoplist() { return kStoplist; }

std::vector<std::string> extract_concepts(std::string_view query, const LexicalIndex* index) {
    std::vector<std::string> kept;
    for (auto& t : tokenize(query)) {
        if (std::find(kStoplist.begin(), kStoplist.end(), t) == kStoplist.end()) kept.push_back(std::move(t));
    }
    std::vector<std::string> candidates;
    for (std::size_t i = 0; i + 1 < kept.size(); ++i) push_unique(candidates, kept[i] + " " + kept[i + 1]);
    for (const auto& t : kept) push_unique(candidates, t);

    if (index && candidates.size() > kMaxConcepts) {
        auto mean_idf = [index](const std::string& phrase) {
            const auto tokens = tokenize(phrase);
            double sum = 0.0;
            for (const auto& t : tokens) sum += index->idf(t);
            return sum / static_cast<double>(tokens.size());
        };
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t i = 0; i < candidates.size(); ++i) scored.emplace_back(mean_idf(candidates[i]), i);
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        scored.resize(kMaxConcepts);
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
        std::vector<std::string> top;
        for (const auto& [_, i] : scored) top.push_back(candidates[i]);
        return top;
    }
    if (candidates.size() > kMaxConcepts) candidates.resize(kMaxConcepts);
    return candidates;
}

ChatRequest reformulation_request(std::string_view query) {
    ChatRequest req;
    req.tag = task::kReformulate;
    req.fields[stub::kQuery] = std::string(query);
    req.messages.push_back(
        {"system",
         "You rewrite questions about telecommunications networks so they use the terminology of 3GPP "
         "specifications. Expand colloquial phrasing and abbreviations into the standard terms, keep the "
         "intent unchanged, and list the key concepts a retriever should look up.\n"
         "Reply in exactly this format:\n"
         "REWRITTEN: <the rewritten query on one line>\n"
         "CONCEPTS:\n<one key concept per line>"});
    req.messages.push_back({"user", "Query: " + std::string(query)});
    return req;
}

ReformulatedQuery passthrough_query(std::string_view query, const LexicalIndex* index) {
    ReformulatedQuery rq;
    rq.original = std::string(query);
    rq.rewritten = rq.original;
    rq.key_concepts = extract_concepts(query, index);
    return rq;
}

ReformulatedQuery reformulate_query(std::string_view query, ChatProvider& llm, bool allow_fallback,
                                    const LexicalIndex* index) {
    if (trim(query).empty()) throw Error("query is empty");
    ChatResponse reply;
    try {
        reply = llm.complete(reformulation_request(query));
    } catch (const Error&) {
        if (!allow_fallback) throw;
        auto rq = passthrough_query(query, index);
        rq.fallback = true;
        return rq;
    }

    static constexpr std::array<std::string_view, 2> kSections = {"REWRITTEN", "CONCEPTS"};
    const auto sections = parse_sections(reply.text, kSections);
    auto rewritten = sections.find("REWRITTEN");
    if (rewritten == sections.end() || rewritten->second.empty()) {
        auto rq = passthrough_query(query, index);
        rq.fallback = true;
        return rq;
    }

    ReformulatedQuery rq;
    rq.original = std::string(query);
    // Only the first line is the rewrite; anything after it is commentary.
    rq.rewritten = trim(rewritten->second.substr(0, rewritten->second.find('\n')));
    if (auto concepts = sections.find("CONCEPTS"); concepts != sections.end()) {
        std::string_view rest = concepts->second;
        while (!rest.empty()) {
            const auto nl = rest.find('\n');
            std::string_view line = rest.substr(0, nl);
            rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
            // Strip list markers such as "-", "*", "1." and surrounding quotes.
            std::size_t i = 0;
            while (i < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == ' ' || line[i] == '\t' ||
                                       std::isdigit(static_cast<unsigned char>(line[i])) || line[i] == '.')) {
                if (std::isdigit(static_cast<unsigned char>(line[i]))) {
                    std::size_t j = i;
                    while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
                    if (j < line.size() && (line[j] == '.' || line[j] == ')')) {
                        i = j + 1;
                        continue;
                    }
                    break;
                }
                ++i;
            }
            std::string item = trim(line.substr(i));
            if (item.size() >= 2 && (item.front() == '"' || item.front() == '\'') && item.back() == item.front()) {
                item = item.substr(1, item.size() - 2);
            }
            push_unique(rq.key_concepts, trim(item));
        }
    }
    if (rq.key_concepts.empty()) rq.key_concepts = extract_concepts(query, index);
    return rq;
}

// --- Stage B ---------------------------------------------------------------

SourceHits LexicalSource::retrieve(const ReformulatedQuery& query, std::size_t k) {
    return {search_lexical(index_, query.rewritten, k), {}};
}

SourceHits DenseSource::retrieve(const ReformulatedQuery& query, std::size_t k) {
    return {search_dense(index_, query.rewritten, embedder_, k), {}};
}

SourceHits HybridSource::retrieve(const ReformulatedQuery& query, std::size_t k) {
    HybridConfig cfg;
    cfg.final_k = k;
    cfg.coarse_k = std::max(coarse_k_, k);
    return {search_hybrid(lexical_, vectors_, embedder_, query.rewritten, cfg), {}};
}

SourceHits GraphSource::retrieve(const ReformulatedQuery& query, std::size_t k) {
    const auto seeds = link_entities(graph_, query.key_concepts);
    if (seeds.empty()) return {};
    auto neighbors = expand_neighborhood(graph_, seeds, hops_);
    std::stable_sort(neighbors.begin(), neighbors.end(),
                     [](const NeighborTriple& a, const NeighborTriple& b) { return a.distance < b.distance; });
    if (neighbors.size() > k) neighbors.resize(k);

    SourceHits hits;
    hits.synthesized = triples_to_evidence(graph_, neighbors);
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        hits.ranked.push_back({hits.synthesized[i].chunk_id, 1.0 / (1.0 + neighbors[i].distance)});
    }
    return hits;
}

Ranking fuse_rrf(std::span<const Ranking> lists, double rrf_k) {
    std::unordered_map<std::string, std::vector<double>> terms;
    for (const auto& list : lists) {
        std::unordered_set<std::string_view> seen;
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (!seen.insert(list[i].chunk_id).second) continue;
            terms[list[i].chunk_id].push_back(1.0 / (rrf_k + static_cast<double>(i + 1)));
        }
    }
    Ranking fused;
    fused.reserve(terms.size());
    for (auto& [id, contributions] : terms) {
        std::sort(contributions.begin(), contributions.end());
        fused.push_back({id, std::accumulate(contributions.begin(), contributions.end(), 0.0)});
    }
    std::sort(fused.begin(), fused.end(), ranks_before);
    return fused;
}

MultiSourceResult retrieve_multi_source(const ReformulatedQuery& query, std::span<RetrievalSource* const> sources,
                                        const PipelineConfig& cfg) {
    if (sources.empty()) throw Error("no sources");
    MultiSourceResult out;
    std::vector<Ranking> lists;
    for (RetrievalSource* source : sources) {
        SourceResult r;
        r.source_id = source->id();
        try {
            auto hits = source->retrieve(query, cfg.k_per_source);
            r.ranked = std::move(hits.ranked);
            for (auto& c : hits.synthesized) out.synthesized.push_back(std::move(c));
            lists.push_back(r.ranked);
        } catch (const Error& e) {
            if (sources.size() == 1) throw;
            r.error = e.what();
        }
        out.per_source.push_back(std::move(r));
    }
    out.fused = fuse_rrf(lists, cfg.rrf_k);
    return out;
}

// --- Stage C ---------------------------------------------------------------

EvidenceBundle aggregate_evidence(const Ranking& fused, const ChunkLookup& lookup, const PipelineConfig& cfg,
                                  ChatProvider* llm, std::string_view query, std::span<const SourceResult> per_source) {
    std::unordered_map<std::string_view, std::vector<std::string>> contributors;
    for (const auto& src : per_source) {
        for (const auto& hit : src.ranked) contributors[hit.chunk_id].push_back(src.source_id);
    }

    EvidenceBundle bundle;
    std::unordered_set<std::string_view> seen;
    for (const auto& hit : fused) {
        if (!seen.insert(hit.chunk_id).second) continue;
        const Chunk* chunk = lookup ? lookup(hit.chunk_id) : nullptr;
        if (!chunk) continue;
        const std::size_t length = scalar_length(chunk->text);
        if (!bundle.items.empty() && bundle.total_chars + length > cfg.evidence_budget_chars) break;
        EvidenceItem item;
        item.chunk_id = hit.chunk_id;
        item.text = chunk->text;
        item.fused_score = hit.score;
        if (auto it = contributors.find(hit.chunk_id); it != contributors.end()) item.sources = it->second;
        bundle.items.push_back(std::move(item));
        bundle.total_chars += length;
    }

    const bool over_soft_limit =
        static_cast<double>(bundle.total_chars) > 0.8 * static_cast<double>(cfg.evidence_budget_chars);
    if (llm && cfg.condense && over_soft_limit) {
        static constexpr std::array<std::string_view, 1> kSections = {"CONDENSED"};
        bundle.total_chars = 0;
        for (auto& item : bundle.items) {
            ChatRequest req;
            req.tag = task::kCondense;
            req.fields[stub::kQuery] = std::string(query);
            req.fields[stub::kText] = item.text;
            req.messages.push_back({"system",
                                    "Extract only the sentences of the passage that help answer the query. Remove "
                                    "redundant or irrelevant detail. Reply as:\nCONDENSED: <text>"});
            req.messages.push_back({"user", "Query: " + std::string(query) + "\n\nPassage:\n" + item.text});
            const auto sections = parse_sections(llm->complete(req).text, kSections);
            auto it = sections.find("CONDENSED");
            if (it != sections.end() && !it->second.empty() && it->second.size() < item.text.size()) {
                item.text = it->second;
                item.condensed = true;
            }
            bundle.total_chars += scalar_length(item.text);
        }
    }
    return bundle;
}

// --- Stage D ---------------------------------------------------------------

namespace {

std::string render_options(const OptionList& options) {
    std::string out;
    for (const auto& [label, text] : options) out += label + ": " + text + "\n";
    return out;
}

std::string render_evidence(const EvidenceBundle& evidence) {
    std::string out;
    for (std::size_t i = 0; i < evidence.items.size(); ++i) {
        const auto& item = evidence.items[i];
        out += "[" + std::to_string(i + 1) + "] (" + item.chunk_id;
        if (!item.sources.empty()) {
            out += "; sources:";
            for (const auto& s : item.sources) out += " " + s;
        }
        out += ")\n" + item.text + "\n\n";
    }
    return out;
}

std::string evidence_text(const EvidenceBundle& evidence) {
    std::string out;
    for (const auto& item : evidence.items) {
        if (!out.empty()) out += "\n\n";
        out += item.text;
    }
    return out;
}

double parse_confidence(const std::string& raw) {
    const char* begin = raw.c_str();
    char* end = nullptr;
    double value = std::strtod(begin, &end);
    if (end == begin) return 0.5;
    while (*end == ' ') ++end;
    if (*end == '%') value /= 100.0;
    if (!(value == value)) return 0.5;
    return std::clamp(value, 0.0, 1.0);
}

std::string strip_label(std::string s) {
    s = trim(s);
    s = s.substr(0, s.find('\n'));
    while (!s.empty() && (s.back() == '.' || s.back() == '*' || s.back() == ' ')) s.pop_back();
    std::size_t i = 0;
    while (i < s.size() && (s[i] == '*' || s[i] == ' ')) ++i;
    return s.substr(i);
}

}  // namespace

ChatRequest decision_request(const ReformulatedQuery& query, const EvidenceBundle& evidence, const OptionList& options,
                             std::string_view critique) {
    ChatRequest req;
    req.tag = task::kDecide;
    req.fields[stub::kQuestion] = query.original;
    req.fields[stub::kOptions] = stub::encode_options(options);
    req.fields[stub::kEvidence] = evidence_text(evidence);
    req.fields[stub::kCritique] = std::string(critique);

    std::string system =
        "You are a telecommunications standards expert. Answer using the retrieved evidence; cite evidence "
        "numbers in the explanation. Reason step by step first, then finish with exactly these sections:\n";
    system += options.empty() ? "ANSWER: <the answer>\n" : "ANSWER: <one option label, exactly as written>\n";
    system +=
        "EXPLANATION: <a concise justification>\n"
        "CONFIDENCE: <a number between 0 and 1>";
    req.messages.push_back({"system", std::move(system)});

    std::string user = "Question: " + query.original + "\n";
    if (query.rewritten != query.original) user += "Reformulated query: " + query.rewritten + "\n";
    if (!options.empty()) user += "\nOptions:\n" + render_options(options);
    user += "\nEvidence:\n";
    user += evidence.items.empty() ? std::string("(none retrieved)\n") : render_evidence(evidence);
    if (!critique.empty()) {
        user += "\nA reviewer rejected your previous answer with this critique:\n" + std::string(critique) +
                "\nRevise the answer accordingly.\n";
    }
    req.messages.push_back({"user", std::move(user)});
    return req;
}

Decision parse_decision(std::string_view reply, const OptionList& options) {
    static constexpr std::array<std::string_view, 3> kSections = {"ANSWER", "EXPLANATION", "CONFIDENCE"};
    const auto sections = parse_sections(reply, kSections);
    auto answer = sections.find("ANSWER");
    if (answer == sections.end() || answer->second.empty()) throw DecisionParseError("reply has no ANSWER section");

    Decision d;
    if (options.empty()) {
        d.answer_text = answer->second;
    } else {
        const std::string raw = strip_label(answer->second);
        const std::pair<std::string, std::string>* match = nullptr;
        for (const auto& opt : options) {
            if (opt.first == raw) match = &opt;
        }
        if (!match) {
            for (const auto& opt : options) {
                if (lower(opt.first) == lower(raw)) {
                    match = &opt;
                    break;
                }
            }
        }
        if (!match) throw DecisionParseError("answer '" + raw + "' does not name an option label");
        d.answer_label = match->first;
        d.answer_text = match->second;
    }
    if (auto it = sections.find("EXPLANATION"); it != sections.end()) d.explanation = it->second;
    if (d.explanation.empty()) d.explanation = "(no explanation given)";
    auto conf = sections.find("CONFIDENCE");
    d.confidence = conf == sections.end() ? 0.5 : parse_confidence(conf->second);
    return d;
}

Decision decide(const ReformulatedQuery& query, const EvidenceBundle& evidence, const OptionList& options,
                ChatProvider& llm, std::string_view critique) {
    ChatRequest req = decision_request(query, evidence, options, critique);
    const ChatResponse first = llm.complete(req);
    try {
        return parse_decision(first.text, options);
    } catch (const DecisionParseError& e) {
        req.messages.push_back({"assistant", first.text});
        std::string reminder = "Your reply could not be used (" + std::string(e.what()) +
                               "). Reply again ending with ANSWER:, EXPLANATION: and CONFIDENCE: sections";
        if (!options.empty()) {
            reminder += "; ANSWER must be one of:";
            for (const auto& opt : options) reminder += " " + opt.first + ";";
        }
        req.messages.push_back({"user", reminder});
        const ChatResponse second = llm.complete(req);
        try {
            return parse_decision(second.text, options);
        } catch (const DecisionParseError& again) {
            throw DecisionParseError(std::string("unparseable decision after re-prompt: ") + again.what());
        }
    }
}

ChatRequest validation_request(const ReformulatedQuery& query, const EvidenceBundle& evidence,
                               const OptionList& options, const Decision& decision, double threshold) {
    ChatRequest req;
    req.tag = task::kValidate;
    req.fields[stub::kQuestion] = query.original;
    req.fields[stub::kOptions] = stub::encode_options(options);
    req.fields[stub::kEvidence] = evidence_text(evidence);
    req.fields[stub::kAnswer] = decision.answer_label.value_or(decision.answer_text);
    req.fields[stub::kExplanation] = decision.explanation;
    req.fields[stub::kConfidence] = format_real(decision.confidence);
    req.fields[stub::kThreshold] = format_real(threshold);

    req.messages.push_back(
        {"system",
         "You review answers to telecommunications standards questions. Check that the answer is consistent with "
         "the evidence, that the explanation supports it, and that nothing is speculative. Reply as:\n"
         "VERDICT: ACCEPT or REVISE\nCRITIQUE: <what is wrong, or 'none'>"});
    std::string user = "Question: " + query.original + "\n";
    if (!options.empty()) user += "\nOptions:\n" + render_options(options);
    user += "\nEvidence:\n";
    user += evidence.items.empty() ? std::string("(none retrieved)\n") : render_evidence(evidence);
    user += "\nProposed answer: " + req.fields[stub::kAnswer] + "\nExplanation: " + decision.explanation +
            "\nStated confidence: " + req.fields[stub::kConfidence] + "\n";
    req.messages.push_back({"user", std::move(user)});
    return req;
}

ValidationOutcome self_validate(Decision decision, const ReformulatedQuery& query, const EvidenceBundle& evidence,
                                const OptionList& options, ChatProvider& llm, const PipelineConfig& cfg) {
    if (cfg.max_refinements < 0) throw ConfigError("max_refinements must be >= 0");
    static constexpr std::array<std::string_view, 2> kSections = {"VERDICT", "CRITIQUE"};

    ValidationOutcome out;
    auto best_so_far = [&out]() {
        const ValidationRound* best = nullptr;
        for (const auto& r : out.rounds) {
            if (!best || r.decision.confidence > best->decision.confidence) best = &r;
        }
        return best->decision;
    };

    Decision current = std::move(decision);
    while (true) {
        ValidationRound round;
        round.decision = current;
        out.rounds.push_back(round);
        ChatResponse reply;
        try {
            reply = llm.complete(validation_request(query, evidence, options, current, cfg.confidence_threshold));
        } catch (const Error& e) {
            out.error = std::string("validation failed: ") + e.what();
            out.final = best_so_far();
            return out;
        }
        const auto sections = parse_sections(reply.text, kSections);
        auto verdict = sections.find("VERDICT");
        const std::string verdict_text = verdict == sections.end() ? std::string{} : lower(verdict->second);
        const bool accepted =
            verdict_text.find("accept") != std::string::npos && verdict_text.find("revise") == std::string::npos;
        auto critique = sections.find("CRITIQUE");
        out.rounds.back().verdict = accepted ? "ACCEPT" : "REVISE";
        out.rounds.back().critique = critique != sections.end() ? critique->second : trim(reply.text);

        if (accepted && current.confidence >= cfg.confidence_threshold) break;
        if (out.refinements >= cfg.max_refinements) break;

        try {
            current = decide(query, evidence, options, llm, out.rounds.back().critique);
        } catch (const Error& e) {
            out.error = std::string("refinement failed: ") + e.what();
            out.final = best_so_far();
            return out;
        }
        ++out.refinements;
    }
    out.final = current;
    return out;
}

// --- Pipeline --------------------------------------------------------------

namespace {

template <typename Fn>
auto run_stage(PipelineTrace& trace, const std::string& name, Fn&& fn) {
    const auto start = Clock::now();
    trace.stages.push_back(name);
    try {
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            trace.timings_ms[name] = ms_since(start);
        } else {
            auto result = fn();
            trace.timings_ms[name] = ms_since(start);
            return result;
        }
    } catch (const PipelineError&) {
        throw;
    } catch (const std::exception& e) {
        throw PipelineError(name, e.what());
    }
}

std::vector<std::unique_ptr<RetrievalSource>> make_sources(const Resources& res, const PipelineConfig& cfg,
                                                           std::vector<RetrievalSource*>& order) {
    std::vector<std::unique_ptr<RetrievalSource>> owned;
    for (const auto& id : cfg.sources) {
        auto require = [&](bool ok, const char* what) {
            if (!ok) throw Error("source '" + id + "' requires " + what);
        };
        if (id == "lexical") {
            require(res.lexical, "a lexical index");
            owned.push_back(std::make_unique<LexicalSource>(*res.lexical));
        } else if (id == "dense") {
            require(res.vectors && res.embedder, "a vector index and an embedder");
            owned.push_back(std::make_unique<DenseSource>(*res.vectors, *res.embedder));
        } else if (id == "hybrid") {
            require(res.lexical && res.vectors && res.embedder, "lexical and vector indexes and an embedder");
            owned.push_back(std::make_unique<HybridSource>(*res.lexical, *res.vectors, *res.embedder));
        } else if (id == "kgraph") {
            require(res.graph, "a knowledge graph");
            owned.push_back(std::make_unique<GraphSource>(*res.graph, cfg.hops));
        } else {
            auto it = std::find_if(res.custom_sources.begin(), res.custom_sources.end(),
                                   [&](RetrievalSource* s) { return s && s->id() == id; });
            if (it == res.custom_sources.end()) throw Error("unknown source '" + id + "'");
            order.push_back(*it);
            continue;
        }
        order.push_back(owned.back().get());
    }
    return owned;
}

}  // namespace

PipelineResult run_pipeline(std::string_view query, const OptionList& options, const Resources& resources,
                            const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.retrieval && cfg.sources.empty()) throw Error("no sources");
    if (!resources.llm) throw Error("pipeline needs a chat provider");
    ChatProvider& llm = *resources.llm;

    PipelineResult result;
    PipelineTrace& trace = result.trace;

    trace.query = run_stage(trace, "reformulate", [&] {
        return cfg.reformulate ? reformulate_query(query, llm, cfg.allow_reformulation_fallback, resources.lexical)
                               : passthrough_query(query, resources.lexical);
    });
    if (trace.query.fallback) trace.errors.push_back("reformulate: provider reply unusable, identity rewrite used");

    std::vector<Chunk> synthesized;
    if (cfg.retrieval) {
        run_stage(trace, "retrieve", [&] {
            std::vector<RetrievalSource*> order;
            auto owned = make_sources(resources, cfg, order);
            auto multi = retrieve_multi_source(trace.query, order, cfg);
            trace.per_source = std::move(multi.per_source);
            trace.fused = std::move(multi.fused);
            synthesized = std::move(multi.synthesized);
        });
        for (const auto& src : trace.per_source) {
            if (src.error) trace.errors.push_back("retrieve/" + src.source_id + ": " + *src.error);
        }
    }

    trace.evidence = run_stage(trace, "aggregate", [&] {
        std::unordered_map<std::string_view, const Chunk*> extra;
        for (const auto& c : synthesized) extra.emplace(c.chunk_id, &c);
        ChunkLookup lookup = [&](std::string_view id) -> const Chunk* {
            if (auto it = extra.find(id); it != extra.end()) return it->second;
            return resources.chunks ? resources.chunks->find(id) : nullptr;
        };
        return aggregate_evidence(trace.fused, lookup, cfg, &llm, trace.query.rewritten, trace.per_source);
    });

    const Decision first =
        run_stage(trace, "decide", [&] { return decide(trace.query, trace.evidence, options, llm); });

    if (cfg.self_validate) {
        auto outcome = run_stage(trace, "validate",
                                 [&] { return self_validate(first, trace.query, trace.evidence, options, llm, cfg); });
        trace.rounds = std::move(outcome.rounds);
        trace.refinements = outcome.refinements;
        if (outcome.error) trace.errors.push_back("validate: " + *outcome.error);
        result.decision = std::move(outcome.final);
    } else {
        trace.rounds.push_back({first, {}, {}});
        result.decision = first;
    }
    return result;
}

}  // namespace acr::agent
