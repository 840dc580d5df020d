#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace acr {

/// Reserved doc_id for chunks synthesized from knowledge-graph triples.
inline constexpr std::string_view kGraphDocId = "kg";

struct Document {
    std::string doc_id;
    std::string title;
    std::string text;
    std::string source;
    std::map<std::string, std::string> metadata;
};

/// A slice of a document. Offsets count Unicode scalar values, half-open.
struct Chunk {
    std::string chunk_id;
    std::string doc_id;
    std::size_t ordinal = 0;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    std::string text;

    friend bool operator==(const Chunk&, const Chunk&) = default;
};

struct ChunkingConfig {
    std::size_t chunk_size = 1000;
    std::size_t overlap = 100;

    /// Throws ConfigError unless 0 <= overlap < chunk_size.
    void validate() const;
    std::size_t stride() const noexcept { return chunk_size - overlap; }
};

std::string make_chunk_id(std::string_view doc_id, std::size_t ordinal);

/// Closed-form chunk count for a text of `length` scalar values.
std::size_t expected_chunk_count(std::size_t length, const ChunkingConfig& cfg);

/// Reads the line-delimited corpus file. Blank lines are skipped but still
/// counted for error line numbers.
std::vector<Document> load_corpus(const std::filesystem::path& path);
Document parse_document(std::string_view line, std::size_t line_no);

std::vector<Chunk> chunk_document(const Document& doc, const ChunkingConfig& cfg);
std::vector<Chunk> chunk_corpus(const std::vector<Document>& docs, const ChunkingConfig& cfg);

/// Chunks file: one JSON object per line with every Chunk field.
void write_chunks(const std::filesystem::path& path, const std::vector<Chunk>& chunks);
std::vector<Chunk> read_chunks(const std::filesystem::path& path);

/// chunk_id -> Chunk lookup over a chunk list it owns.
class ChunkCatalog {
public:
    ChunkCatalog() = default;
    explicit ChunkCatalog(std::vector<Chunk> chunks);

    /// Adds or replaces a chunk.
    void add(Chunk chunk);
    const Chunk* find(std::string_view chunk_id) const;
    const std::vector<Chunk>& chunks() const noexcept { return chunks_; }
    std::size_t size() const noexcept { return chunks_.size(); }

private:
    std::vector<Chunk> chunks_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

}  // namespace acr
