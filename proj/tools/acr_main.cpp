// acr: command-line front end for ingesting corpora, building indexes,
// querying every retrieval method, and running the evaluation presets.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "acr/agent.hpp"
#include "acr/error.hpp"
#include "acr/evalx.hpp"
#include "acr/index_dir.hpp"
#include "acr/stub_providers.hpp"
#include "acr/text.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public acr::Error {
public:
    using acr::Error::Error;
};

struct ProviderOptions {
    std::string kind = "stub";
    std::string base_url;
    std::string api_key;
    std::string model;
    std::string embed_model;
    double timeout = 60.0;
    int max_retries = 2;
    int embed_dim = acr::kStubEmbedDim;
    std::string lexicon;
};

void add_provider_options(CLI::App& cmd, ProviderOptions& p, bool with_chat) {
    cmd.add_option("--provider", p.kind, "Model backend")->check(CLI::IsMember({"stub", "http"}));
    cmd.add_option("--base-url", p.base_url, "Provider base URL")->envname("ACR_BASE_URL");
    cmd.add_option("--api-key", p.api_key, "Provider API key")->envname("ACR_API_KEY");
    cmd.add_option("--embed-model", p.embed_model, "Embedding model name (http)");
    cmd.add_option("--timeout", p.timeout, "Request timeout in seconds")->check(CLI::PositiveNumber);
    cmd.add_option("--max-retries", p.max_retries, "Retries on transport failure")->check(CLI::NonNegativeNumber);
    cmd.add_option("--embed-dim", p.embed_dim, "Stub embedding dimension")->check(CLI::PositiveNumber);
    if (with_chat) {
        cmd.add_option("--model", p.model, "Chat model name (http)");
        cmd.add_option("--lexicon", p.lexicon,
                       "Synonym lexicon for the stub reformulator ('none' disables; default: bundled fixture)");
    }
}

/// Flat `key = value` file mirroring flag names. Applied only to options
/// that neither the command line nor the environment set.
void apply_config_file(CLI::App& cmd, const std::string& path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        const auto text = acr::trim(line);
        if (text.empty() || text.front() == '#' || text.front() == ';' || text.front() == '[') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
        auto key = acr::trim(std::string_view(text).substr(0, eq));
        auto value = acr::trim(std::string_view(text).substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        CLI::Option* opt = nullptr;
        try {
            opt = cmd.get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw UsageError(path + ":" + std::to_string(line_no) + ": unknown setting '" + key + "'");
        }
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

struct Providers {
    std::unique_ptr<acr::Embedder> embedder;
    std::unique_ptr<acr::ChatProvider> chat;
};

fs::path default_lexicon() { return fs::path(ACR_DATA_DIR) / "synthetic" / "lexicon.tsv"; }

Providers make_providers(const ProviderOptions& p, bool need_chat) {
    Providers out;
    if (p.kind == "stub") {
        out.embedder = std::make_unique<acr::StubEmbedder>(p.embed_dim);
        if (need_chat) {
            acr::SynonymLexicon lexicon;
            if (p.lexicon != "none") {
                const fs::path path = p.lexicon.empty() ? default_lexicon() : fs::path(p.lexicon);
                if (!p.lexicon.empty() || fs::exists(path)) lexicon = acr::SynonymLexicon::load(path);
            }
            out.chat = acr::stub::make_stub_chat(lexicon);
        }
        return out;
    }
    if (p.base_url.empty()) throw UsageError("--provider http needs --base-url or ACR_BASE_URL");
    acr::ProviderConfig cfg;
    cfg.base_url = p.base_url;
    cfg.api_key = p.api_key;
    cfg.timeout_s = p.timeout;
    cfg.max_retries = p.max_retries;
    if (p.embed_model.empty()) throw UsageError("--provider http needs --embed-model");
    cfg.model_name = p.embed_model;
    out.embedder = std::make_unique<acr::HttpEmbedder>(cfg);
    if (need_chat) {
        if (p.model.empty()) throw UsageError("--provider http needs --model");
        cfg.model_name = p.model;
        out.chat = std::make_unique<acr::HttpChatProvider>(cfg);
    }
    return out;
}

std::string snippet(const std::string& text, std::size_t max_bytes = 80) {
    std::string s = text.substr(0, max_bytes);
    // Do not cut a UTF-8 sequence in half.
    while (!s.empty() && (static_cast<unsigned char>(s.back()) & 0xC0) == 0x80) s.pop_back();
    if (!s.empty() && (static_cast<unsigned char>(s.back()) & 0x80)) s.pop_back();
    for (char& c : s) {
        if (c == '\n' || c == '\t' || c == '\r') c = ' ';
    }
    return text.size() > max_bytes ? s + "..." : s;
}

void print_ranking(const acr::Ranking& ranking, const std::function<const acr::Chunk*(std::string_view)>& lookup) {
    std::size_t rank = 1;
    for (const auto& hit : ranking) {
        const acr::Chunk* c = lookup(hit.chunk_id);
        std::printf("%zu\t%s\t%.6f\t%s\n", rank++, hit.chunk_id.c_str(), hit.score, c ? snippet(c->text).c_str() : "");
    }
}

// --- ingest ------------------------------------------------------------------

struct IngestArgs {
    std::string corpus, out;
    std::size_t chunk_size = 1000, overlap = 100;
};

int cmd_ingest(const IngestArgs& a) {
    acr::ChunkingConfig cfg{a.chunk_size, a.overlap};
    try {
        cfg.validate();
    } catch (const acr::ConfigError& e) {
        throw UsageError(e.what());
    }
    const auto m = acr::ingest_corpus(a.corpus, a.out, cfg);
    std::printf("ingested %zu documents into %zu chunks (chunk_size %zu, overlap %zu) -> %s\n", m.n_docs, m.n_chunks,
                m.chunk_size, m.overlap, a.out.c_str());
    return kExitOk;
}

// --- index -------------------------------------------------------------------

struct IndexArgs {
    std::string dir, graph;
    bool lexical = false, dense = false;
    ProviderOptions provider;
};

int cmd_index(const IndexArgs& a) {
    if (!a.lexical && !a.dense && a.graph.empty())
        throw UsageError("nothing to build: pass --lexical, --dense or --graph");
    Providers providers;
    if (a.dense) providers = make_providers(a.provider, false);
    if (a.lexical || a.dense) {
        const auto m = acr::build_indexes(a.dir, a.lexical, providers.embedder.get());
        if (a.lexical) std::printf("lexical index: %zu chunks\n", m.n_chunks);
        if (a.dense) std::printf("vector index: %zu x %d (%s)\n", m.n_chunks, m.embed_dim, m.provider_id.c_str());
    }
    if (!a.graph.empty()) {
        acr::install_graph(a.dir, a.graph);
        std::printf("graph installed from %s\n", a.graph.c_str());
    }
    return kExitOk;
}

// --- query -------------------------------------------------------------------

struct QueryArgs {
    std::string dir, method = "lexical", query, graph, trace_out;
    std::vector<std::string> options;
    std::size_t k = 10;
    std::size_t coarse_k = 100;
    int hops = 1;
    ProviderOptions provider;
};

const acr::LexicalIndex& need_lexical(const acr::IndexDirectory& d) {
    if (!d.lexical) throw acr::Error("no lexical index in " + d.dir.string() + " (run `acr index --lexical`)");
    return *d.lexical;
}

const acr::VectorIndex& need_vectors(const acr::IndexDirectory& d) {
    if (!d.vectors) throw acr::Error("no vector index in " + d.dir.string() + " (run `acr index --dense`)");
    return *d.vectors;
}

int cmd_query(const QueryArgs& a) {
    if (a.method == "kg" && a.graph.empty()) throw UsageError("--method kg requires --graph");
    if (a.k < 1) throw UsageError("--k must be >= 1");
    auto dir = acr::IndexDirectory::open(a.dir);
    std::optional<acr::KnowledgeGraph> graph;
    if (!a.graph.empty())
        graph = acr::load_graph(a.graph);
    else if (dir.graph)
        graph = std::move(dir.graph);

    auto lookup = [&](std::string_view id) { return dir.chunks.find(id); };

    if (a.method == "lexical") {
        print_ranking(acr::search_lexical(need_lexical(dir), a.query, a.k), lookup);
        return kExitOk;
    }
    if (a.method == "dense" || a.method == "hybrid") {
        auto providers = make_providers(a.provider, false);
        if (a.method == "dense") {
            print_ranking(acr::search_dense(need_vectors(dir), a.query, *providers.embedder, a.k), lookup);
        } else {
            acr::HybridConfig cfg;
            cfg.coarse_k = a.coarse_k;
            cfg.final_k = a.k;
            print_ranking(acr::search_hybrid(need_lexical(dir), need_vectors(dir), *providers.embedder, a.query, cfg),
                          lookup);
        }
        return kExitOk;
    }
    if (a.method == "kg") {
        acr::agent::GraphSource source(*graph, a.hops);
        const auto rq = acr::agent::passthrough_query(a.query, dir.lexical ? &*dir.lexical : nullptr);
        const auto hits = source.retrieve(rq, a.k);
        std::printf("concepts:");
        for (const auto& c : rq.key_concepts) std::printf(" [%s]", c.c_str());
        std::printf("\n");
        for (std::size_t i = 0; i < hits.ranked.size(); ++i) {
            std::printf("%zu\t%s\t%.6f\t%s\n", i + 1, hits.ranked[i].chunk_id.c_str(), hits.ranked[i].score,
                        hits.synthesized[i].text.c_str());
        }
        return kExitOk;
    }

    // agentic
    auto providers = make_providers(a.provider, true);
    acr::agent::PipelineConfig cfg;
    cfg.k_per_source = a.k;
    cfg.hops = a.hops;
    cfg.sources = {"lexical", "dense"};
    if (graph) cfg.sources.push_back("kgraph");
    acr::agent::Resources res;
    res.chunks = &dir.chunks;
    res.lexical = dir.lexical ? &*dir.lexical : nullptr;
    res.vectors = dir.vectors ? &*dir.vectors : nullptr;
    res.graph = graph ? &*graph : nullptr;
    res.embedder = providers.embedder.get();
    res.llm = providers.chat.get();
    need_lexical(dir);
    need_vectors(dir);

    acr::OptionList options;
    for (std::size_t i = 0; i < a.options.size(); ++i)
        options.emplace_back("option " + std::to_string(i + 1), a.options[i]);

    const auto result = acr::agent::run_pipeline(a.query, options, res, cfg);
    if (!a.trace_out.empty()) acr::agent::append_trace(a.trace_out, result);
    const auto& d = result.decision;
    if (d.answer_label)
        std::printf("answer: %s: %s\n", d.answer_label->c_str(), d.answer_text.c_str());
    else
        std::printf("answer: %s\n", d.answer_text.c_str());
    std::printf("confidence: %.4f\n", d.confidence);
    std::printf("explanation: %s\n", d.explanation.c_str());
    std::printf("evidence:");
    for (const auto& item : result.trace.evidence.items) std::printf(" %s", item.chunk_id.c_str());
    std::printf("\nrefinements: %d\n", result.trace.refinements);
    for (const auto& err : result.trace.errors) std::fprintf(stderr, "warning: %s\n", err.c_str());
    return kExitOk;
}

// --- eval / compare ------------------------------------------------------------

struct EvalArgs {
    std::string dir, qa, preset, report_out, graph;
    std::size_t max_concurrency = 4;
    std::size_t k = 10;
    double threshold = 0.7;
    int max_refinements = 2;
    ProviderOptions provider;
};

int run_eval(const EvalArgs& a, const std::vector<acr::eval::Preset>& presets) {
    const auto items = acr::eval::load_qa(a.qa);
    if (items.empty()) throw acr::Error("empty dataset");
    auto dir = acr::IndexDirectory::open(a.dir);
    std::optional<acr::KnowledgeGraph> graph;
    if (!a.graph.empty())
        graph = acr::load_graph(a.graph);
    else if (dir.graph)
        graph = std::move(dir.graph);

    auto providers = make_providers(a.provider, true);
    acr::eval::EvalResources res;
    res.pipeline.chunks = &dir.chunks;
    res.pipeline.lexical = dir.lexical ? &*dir.lexical : nullptr;
    res.pipeline.vectors = dir.vectors ? &*dir.vectors : nullptr;
    res.pipeline.graph = graph ? &*graph : nullptr;
    res.pipeline.embedder = providers.embedder.get();
    res.pipeline.llm = providers.chat.get();
    res.metric_embedder = providers.embedder.get();
    res.max_concurrency = a.max_concurrency;
    res.base.k_per_source = a.k;
    res.base.confidence_threshold = a.threshold;
    res.base.max_refinements = a.max_refinements;

    const auto reports = acr::eval::run_comparison(items, presets, res);
    std::fputs(acr::eval::format_table(reports).c_str(), stdout);
    if (!a.report_out.empty()) acr::eval::write_report(a.report_out, reports);
    return kExitOk;
}

void add_eval_options(CLI::App& cmd, EvalArgs& a) {
    cmd.add_option("--dir", a.dir, "Index directory")->required();
    cmd.add_option("--qa", a.qa, "QA file (line-delimited records)")->required();
    cmd.add_option("--report-out", a.report_out, "Write per-item and summary rows here");
    cmd.add_option("--graph", a.graph, "Knowledge graph file (overrides the directory's graph)");
    cmd.add_option("--max-concurrency", a.max_concurrency, "Items evaluated in parallel")->check(CLI::PositiveNumber);
    cmd.add_option("--k", a.k, "Results per retrieval source")->check(CLI::PositiveNumber);
    cmd.add_option("--confidence-threshold", a.threshold, "Self-validation acceptance threshold")
        ->check(CLI::Range(0.0, 1.0));
    cmd.add_option("--max-refinements", a.max_refinements, "Self-validation refinement bound")
        ->check(CLI::NonNegativeNumber);
    add_provider_options(cmd, a.provider, true);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agentic contextual retrieval over telecom standards corpora"};
    app.require_subcommand(1);

    std::string config_file;
    auto add_config = [&config_file](CLI::App* cmd) {
        cmd->add_option("--config", config_file, "Flat key = value file mirroring flag names");
    };

    IngestArgs ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Chunk a corpus file into an index directory");
    c_ingest->add_option("--corpus", ingest.corpus, "Corpus file (one JSON record per line)")->required();
    c_ingest->add_option("--out", ingest.out, "Index directory to create or refresh")->required();
    c_ingest->add_option("--chunk-size", ingest.chunk_size, "Chunk length in characters");
    c_ingest->add_option("--overlap", ingest.overlap, "Overlap between consecutive chunks in characters");
    add_config(c_ingest);

    IndexArgs index;
    auto* c_index = app.add_subcommand("index", "Build lexical and/or dense indexes");
    c_index->add_option("--dir", index.dir, "Index directory")->required();
    c_index->add_flag("--lexical", index.lexical, "Build the TF-IDF index");
    c_index->add_flag("--dense", index.dense, "Build the vector index");
    c_index->add_option("--graph", index.graph, "Install a knowledge graph file into the directory");
    add_provider_options(*c_index, index.provider, false);
    add_config(c_index);

    QueryArgs query;
    auto* c_query = app.add_subcommand("query", "Retrieve or answer a single query");
    c_query->add_option("--dir", query.dir, "Index directory")->required();
    c_query->add_option("--method", query.method, "Retrieval method")
        ->check(CLI::IsMember({"lexical", "dense", "hybrid", "kg", "agentic"}));
    c_query->add_option("--query", query.query, "Query text")->required();
    c_query->add_option("--k", query.k, "Results to return (per source for agentic)");
    c_query->add_option("--coarse-k", query.coarse_k, "Hybrid stage-1 candidate count")->check(CLI::PositiveNumber);
    c_query->add_option("--hops", query.hops, "Graph expansion depth")->check(CLI::NonNegativeNumber);
    c_query->add_option("--graph", query.graph, "Knowledge graph file");
    c_query->add_option("--option", query.options, "Answer option (repeat; labelled option 1..N)");
    c_query->add_option("--trace-out", query.trace_out, "Append the pipeline trace to this file");
    add_provider_options(*c_query, query.provider, true);
    add_config(c_query);

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("eval", "Evaluate one preset on a QA file");
    add_eval_options(*c_eval, eval);
    c_eval->add_option("--preset", eval.preset, "none | traditional | semantic | agentic")->required();
    add_config(c_eval);

    EvalArgs compare;
    auto* c_compare = app.add_subcommand("compare", "Evaluate all four presets on a QA file");
    add_eval_options(*c_compare, compare);
    add_config(c_compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        for (auto* cmd : app.get_subcommands()) apply_config_file(*cmd, config_file);
        if (c_ingest->parsed()) return cmd_ingest(ingest);
        if (c_index->parsed()) return cmd_index(index);
        if (c_query->parsed()) return cmd_query(query);
        if (c_eval->parsed()) return run_eval(eval, {acr::eval::parse_preset(eval.preset)});
        if (c_compare->parsed()) return run_eval(compare, acr::eval::all_presets());
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const acr::ConfigError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
