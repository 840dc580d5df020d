#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "acr/corpus.hpp"
#include "acr/dense.hpp"
#include "acr/kgraph.hpp"
#include "acr/lexical.hpp"

namespace acr {

/// File names inside an index directory.
namespace index_files {
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kChunks = "chunks";
inline constexpr const char* kLexical = "lexical";
inline constexpr const char* kVectors = "vectors";
inline constexpr const char* kGraph = "graph";
}  // namespace index_files

inline constexpr int kManifestVersion = 1;

struct IndexManifest {
    int version = kManifestVersion;
    std::size_t chunk_size = 0;
    std::size_t overlap = 0;
    std::size_t n_docs = 0;
    std::size_t n_chunks = 0;
    int embed_dim = 0;
    std::string provider_id;
    std::string created_at;  // UTC, ISO 8601
    /// artifact file name -> CRC32 as 8 hex digits
    std::map<std::string, std::string> checksums;

    bool has(const char* artifact) const { return checksums.count(artifact) != 0; }
};

std::string file_checksum(const std::filesystem::path& path);
std::string utc_timestamp();

/// Writes via `<path>.tmp` and renames into place; the temp file is removed
/// if `write` throws.
template <typename Write>
void write_atomically(const std::filesystem::path& path, Write&& write) {
    auto tmp = path;
    tmp += ".tmp";
    try {
        write(tmp);
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

IndexManifest read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const IndexManifest& manifest);
/// Throws FormatError ("dirty manifest: ...") when a listed artifact is
/// missing or its checksum differs.
void verify_manifest(const std::filesystem::path& dir, const IndexManifest& manifest);

/// Loads and chunks the corpus, then writes `chunks` and a fresh manifest
/// into `dir`. Stale index artifacts from an earlier ingest are removed.
IndexManifest ingest_corpus(const std::filesystem::path& corpus, const std::filesystem::path& dir,
                            const ChunkingConfig& cfg);

/// Builds the requested indexes over the directory's chunks. Each artifact
/// is written to a temp file and renamed only after the build succeeds.
IndexManifest build_indexes(const std::filesystem::path& dir, bool lexical, Embedder* dense);

/// Validates a graph file and copies it into the directory.
IndexManifest install_graph(const std::filesystem::path& dir, const std::filesystem::path& graph_file);

/// Everything present in an index directory, checksums verified.
struct IndexDirectory {
    std::filesystem::path dir;
    IndexManifest manifest;
    ChunkCatalog chunks;
    std::optional<LexicalIndex> lexical;
    std::optional<VectorIndex> vectors;
    std::optional<KnowledgeGraph> graph;

    static IndexDirectory open(const std::filesystem::path& dir);
};

}  // namespace acr
