#include "acr/dense.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "acr/error.hpp"
#include "acr/text.hpp"

namespace acr {

namespace {

constexpr char kMagic[4] = {'A', 'C', 'R', 'V'};
constexpr std::uint32_t kVersion = 1;
constexpr double kNormTolerance = 1e-6;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

}  // namespace

VectorIndex::VectorIndex(int dim, std::string provider_id) : dim_(dim), provider_id_(std::move(provider_id)) {
    if (dim < 0) throw ConfigError("vector index dimension must be >= 0");
}

void VectorIndex::add(std::string chunk_id, std::span<const double> embedding) {
    if (chunk_ids_.empty() && dim_ == 0) dim_ = static_cast<int>(embedding.size());
    if (embedding.size() != static_cast<std::size_t>(dim_)) {
        throw Error("embedding for " + chunk_id + " has dimension " + std::to_string(embedding.size()) +
                    ", index expects " + std::to_string(dim_));
    }
    if (chunk_id.find('\n') != std::string::npos) throw Error("chunk_id contains a newline");
    double sq = 0.0;
    for (double x : embedding) sq += x * x;
    if (sq != 0.0 && std::abs(std::sqrt(sq) - 1.0) > kNormTolerance) {
        throw Error("embedding for " + chunk_id + " is not unit-norm");
    }
    if (!rows_.emplace(chunk_id, chunk_ids_.size()).second)
        throw Error("duplicate chunk_id in vector index: " + chunk_id);
    for (double x : embedding) matrix_.push_back(static_cast<float>(x));
    chunk_ids_.push_back(std::move(chunk_id));
}

std::optional<std::size_t> VectorIndex::row_of(std::string_view chunk_id) const {
    auto it = rows_.find(std::string(chunk_id));
    if (it == rows_.end()) return std::nullopt;
    return it->second;
}

double VectorIndex::score_row(std::size_t i, std::span<const double> query) const {
    const auto r = row(i);
    double dot = 0.0;
    for (std::size_t d = 0; d < r.size(); ++d) dot += static_cast<double>(r[d]) * query[d];
    return dot;
}

VectorIndex build_vector_index(const std::vector<Chunk>& chunks, Embedder& embedder, std::size_t batch_size) {
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
    VectorIndex index(embedder.dim().value_or(0), embedder.id());
    std::vector<std::string> batch;
    for (std::size_t start = 0; start < chunks.size(); start += batch_size) {
        const std::size_t end = std::min(chunks.size(), start + batch_size);
        batch.clear();
        for (std::size_t i = start; i < end; ++i) batch.push_back(chunks[i].text);
        std::vector<Embedding> vectors;
        try {
            vectors = embedder.embed(batch);
        } catch (const ProviderError& e) {
            throw ProviderError(
                "embedding chunks " + chunks[start].chunk_id + ".." + chunks[end - 1].chunk_id + ": " + e.what(),
                e.status());
        }
        if (vectors.size() != batch.size()) throw ProviderError("embedder returned the wrong number of vectors");
        for (std::size_t i = start; i < end; ++i) index.add(chunks[i].chunk_id, vectors[i - start]);
    }
    return index;
}

Embedding embed_query(const VectorIndex& index, std::string_view query, Embedder& embedder) {
    if (embedder.id() != index.provider_id()) {
        throw Error("provider mismatch: index built with '" + index.provider_id() + "', query embedder is '" +
                    embedder.id() + "'");
    }
    const std::string text(query);
    auto vectors = embedder.embed(std::span<const std::string>(&text, 1));
    if (vectors.size() != 1) throw ProviderError("embedder returned the wrong number of vectors");
    if (index.size() > 0 && vectors.front().size() != static_cast<std::size_t>(index.dim())) {
        throw Error("query embedding dimension does not match the index");
    }
    return std::move(vectors.front());
}

Ranking search_dense(const VectorIndex& index, std::span<const double> query, std::size_t k) {
    if (k == 0) throw ConfigError("k must be >= 1");
    Ranking hits;
    hits.reserve(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) hits.push_back({index.chunk_ids()[i], index.score_row(i, query)});
    return top_k(std::move(hits), k);
}

Ranking search_dense(const VectorIndex& index, std::string_view query, Embedder& embedder, std::size_t k) {
    const Embedding q = embed_query(index, query, embedder);
    return search_dense(index, q, k);
}

void save_vector_index(const VectorIndex& index, const std::filesystem::path& path) {
    std::string buf(kMagic, sizeof kMagic);
    put_u32(buf, kVersion);
    put_u32(buf, static_cast<std::uint32_t>(index.size()));
    put_u32(buf, static_cast<std::uint32_t>(index.dim()));
    buf.reserve(buf.size() + index.matrix().size() * 4);
    for (float x : index.matrix()) put_u32(buf, std::bit_cast<std::uint32_t>(x));
    for (const auto& id : index.chunk_ids()) {
        buf += id;
        buf.push_back('\n');
    }
    put_u32(buf, crc32(buf));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write vector index: " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error("failed writing vector index: " + path.string());
}

VectorIndex load_vector_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open vector index: " + path.string());
    const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    constexpr std::size_t kHeader = 16;
    if (buf.size() < 4 || buf.compare(0, 4, kMagic, 4) != 0) throw FormatError("bad magic");
    if (buf.size() < kHeader) {
        throw FormatError("truncated header: expected " + std::to_string(kHeader) + " bytes, got " +
                          std::to_string(buf.size()));
    }
    const std::uint32_t version = get_u32(buf, 4);
    if (version != kVersion) throw FormatError("version mismatch: file has " + std::to_string(version));
    const std::uint32_t n = get_u32(buf, 8);
    const std::uint32_t dim = get_u32(buf, 12);

    const std::uint64_t matrix_bytes = std::uint64_t{n} * dim * 4;
    const std::uint64_t available = buf.size() - kHeader;
    if (available < matrix_bytes) {
        throw FormatError("truncated matrix section: expected " + std::to_string(matrix_bytes) + " bytes, got " +
                          std::to_string(available));
    }
    if (buf.size() < kHeader + matrix_bytes + 4) throw FormatError("truncated file: missing checksum");
    const std::size_t crc_at = buf.size() - 4;
    if (crc32(std::string_view(buf).substr(0, crc_at)) != get_u32(buf, crc_at)) throw FormatError("checksum mismatch");

    std::vector<std::string> ids;
    ids.reserve(n);
    std::size_t pos = kHeader + static_cast<std::size_t>(matrix_bytes);
    while (pos < crc_at) {
        const auto nl = buf.find('\n', pos);
        if (nl == std::string::npos || nl >= crc_at) throw FormatError("unterminated chunk id");
        ids.push_back(buf.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (ids.size() != n) {
        throw FormatError("chunk id count " + std::to_string(ids.size()) + " does not match row count " +
                          std::to_string(n));
    }

    VectorIndex index(static_cast<int>(dim), "");
    Embedding row(dim);
    for (std::uint32_t r = 0; r < n; ++r) {
        for (std::uint32_t d = 0; d < dim; ++d) {
            row[d] = std::bit_cast<float>(get_u32(buf, kHeader + (std::size_t{r} * dim + d) * 4));
        }
        index.add(std::move(ids[r]), row);
    }
    return index;
}

}  // namespace acr
