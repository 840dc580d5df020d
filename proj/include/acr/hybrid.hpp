#pragma once

#include <string_view>

#include "acr/dense.hpp"
#include "acr/lexical.hpp"

namespace acr {

struct HybridConfig {
    std::size_t coarse_k = 100;
    std::size_t final_k = 10;
    /// Weight of the lexical score in the final score; 0 is a pure dense re-rank.
    double lexical_weight = 0.0;

    void validate() const;
};

/// Lexical top-coarse_k candidates re-ranked by their prebuilt dense rows.
/// The result is always a subset of the lexical candidates.
Ranking search_hybrid(const LexicalIndex& lexical, const VectorIndex& vectors, Embedder& embedder,
                      std::string_view query, const HybridConfig& cfg);

/// Throws unless both indexes cover the same chunk_id set.
void check_same_universe(const LexicalIndex& lexical, const VectorIndex& vectors);

}  // namespace acr
