#pragma once

// The bundled synthetic corpus, QA set, lexicon and graph wired to the
// deterministic stub providers.

#include <filesystem>
#include <memory>

#include "acr/agent.hpp"
#include "acr/evalx.hpp"
#include "acr/stub_providers.hpp"

struct SyntheticStack {
    static std::filesystem::path dir() { return std::filesystem::path(ACR_DATA_DIR) / "synthetic"; }

    acr::ChunkCatalog chunks;
    acr::LexicalIndex lexical;
    acr::VectorIndex vectors;
    acr::KnowledgeGraph graph;
    acr::StubEmbedder embedder;
    std::unique_ptr<acr::StubChatProvider> chat;
    std::vector<acr::eval::QAItem> qa;

    SyntheticStack() {
        chunks = acr::ChunkCatalog(acr::chunk_corpus(acr::load_corpus(dir() / "corpus.jsonl"), {}));
        lexical = acr::build_lexical_index(chunks.chunks());
        vectors = acr::build_vector_index(chunks.chunks(), embedder);
        graph = acr::load_graph(dir() / "graph.tsv");
        chat = acr::stub::make_stub_chat(acr::SynonymLexicon::load(dir() / "lexicon.tsv"));
        qa = acr::eval::load_qa(dir() / "qa.jsonl");
    }

    acr::agent::Resources resources() {
        acr::agent::Resources r;
        r.chunks = &chunks;
        r.lexical = &lexical;
        r.vectors = &vectors;
        r.graph = &graph;
        r.embedder = &embedder;
        r.llm = chat.get();
        return r;
    }

    acr::eval::EvalResources eval_resources(std::size_t concurrency = 4) {
        acr::eval::EvalResources r;
        r.pipeline = resources();
        r.metric_embedder = &embedder;
        r.max_concurrency = concurrency;
        return r;
    }
};
