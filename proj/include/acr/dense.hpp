#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "acr/corpus.hpp"
#include "acr/providers.hpp"
#include "acr/ranking.hpp"

namespace acr {

/// Chunk-aligned matrix of unit-norm (or zero) embeddings, stored as
/// row-major 32-bit floats.
class VectorIndex {
public:
    VectorIndex() = default;
    VectorIndex(int dim, std::string provider_id);

    /// Appends a row. Throws unless the vector has the index dimension and a
    /// norm within 1e-6 of 1 (or is exactly zero), or the id repeats.
    void add(std::string chunk_id, std::span<const double> embedding);

    std::size_t size() const noexcept { return chunk_ids_.size(); }
    int dim() const noexcept { return dim_; }
    const std::string& provider_id() const noexcept { return provider_id_; }
    void set_provider_id(std::string id) { provider_id_ = std::move(id); }
    const std::vector<std::string>& chunk_ids() const noexcept { return chunk_ids_; }
    const std::vector<float>& matrix() const noexcept { return matrix_; }

    std::span<const float> row(std::size_t i) const {
        return {matrix_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    std::optional<std::size_t> row_of(std::string_view chunk_id) const;

    /// Dot product of row `i` with `query`, accumulated in double in
    /// ascending dimension order.
    double score_row(std::size_t i, std::span<const double> query) const;

    friend bool operator==(const VectorIndex& a, const VectorIndex& b) {
        return a.dim_ == b.dim_ && a.provider_id_ == b.provider_id_ && a.chunk_ids_ == b.chunk_ids_ &&
               a.matrix_ == b.matrix_;
    }

private:
    int dim_ = 0;
    std::string provider_id_;
    std::vector<std::string> chunk_ids_;
    std::vector<float> matrix_;
    std::unordered_map<std::string, std::size_t> rows_;
};

VectorIndex build_vector_index(const std::vector<Chunk>& chunks, Embedder& embedder, std::size_t batch_size = 32);

/// Embeds a query, checking the embedder matches the index's provider.
Embedding embed_query(const VectorIndex& index, std::string_view query, Embedder& embedder);

/// Exhaustive scan; score = dot product = cosine for unit rows.
Ranking search_dense(const VectorIndex& index, std::string_view query, Embedder& embedder, std::size_t k);
Ranking search_dense(const VectorIndex& index, std::span<const double> query, std::size_t k);

/// Binary layout: "ACRV", u32 version, u32 n, u32 dim, n*dim f32 row-major,
/// n newline-terminated chunk ids, u32 CRC32 of everything before it. All
/// integers and floats little-endian. provider_id is not stored here.
void save_vector_index(const VectorIndex& index, const std::filesystem::path& path);
VectorIndex load_vector_index(const std::filesystem::path& path);

}  // namespace acr
