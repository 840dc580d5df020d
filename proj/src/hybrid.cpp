#include "acr/hybrid.hpp"

#include "acr/error.hpp"

namespace acr {

void HybridConfig::validate() const {
    if (final_k < 1) throw ConfigError("final_k must be >= 1");
    if (coarse_k < 1) throw ConfigError("coarse_k must be >= 1");
    if (lexical_weight < 0.0 || lexical_weight > 1.0) throw ConfigError("lexical_weight must lie in [0, 1]");
}

void check_same_universe(const LexicalIndex& lexical, const VectorIndex& vectors) {
    if (lexical.n_chunks() != vectors.size()) {
        throw Error("index mismatch: lexical index has " + std::to_string(lexical.n_chunks()) +
                    " chunks, vector index has " + std::to_string(vectors.size()));
    }
    for (const auto& id : lexical.chunk_ids()) {
        if (!vectors.row_of(id)) throw Error("index mismatch: chunk " + id + " missing from vector index");
    }
}

Ranking search_hybrid(const LexicalIndex& lexical, const VectorIndex& vectors, Embedder& embedder,
                      std::string_view query, const HybridConfig& cfg) {
    cfg.validate();
    check_same_universe(lexical, vectors);

    const Ranking coarse = search_lexical(lexical, query, cfg.coarse_k);
    if (coarse.empty()) return {};

    const Embedding q = embed_query(vectors, query, embedder);
    Ranking reranked;
    reranked.reserve(coarse.size());
    for (const auto& hit : coarse) {
        const double dense = vectors.score_row(*vectors.row_of(hit.chunk_id), q);
        const double score =
            cfg.lexical_weight == 0.0 ? dense : (1.0 - cfg.lexical_weight) * dense + cfg.lexical_weight * hit.score;
        reranked.push_back({hit.chunk_id, score});
    }
    return top_k(std::move(reranked), cfg.final_k);
}

}  // namespace acr
