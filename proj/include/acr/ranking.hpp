#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace acr {

struct ScoredChunk {
    std::string chunk_id;
    double score = 0.0;

    friend bool operator==(const ScoredChunk&, const ScoredChunk&) = default;
};

using Ranking = std::vector<ScoredChunk>;

/// Total order used by every ranked list: descending score, then ascending chunk_id.
inline bool ranks_before(const ScoredChunk& a, const ScoredChunk& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.chunk_id < b.chunk_id;
}

/// Keeps the best `k` entries in ranked order.
inline Ranking top_k(Ranking hits, std::size_t k) {
    if (hits.size() > k) {
        std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), ranks_before);
        hits.resize(k);
    } else {
        std::sort(hits.begin(), hits.end(), ranks_before);
    }
    return hits;
}

}  // namespace acr
