#include "acr/index_dir.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "acr/error.hpp"
#include "acr/text.hpp"

namespace acr {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string file_checksum(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::uint32_t crc = 0;
    std::string buf(1 << 16, '\0');
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        crc = crc32(crc, std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
    }
    char hex[9];
    std::snprintf(hex, sizeof hex, "%08x", crc);
    return hex;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

IndexManifest read_manifest(const fs::path& dir) {
    const fs::path path = dir / index_files::kManifest;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("no manifest in " + dir.string() + " (run `acr ingest` first)");
    IndexManifest m;
    try {
        const auto j = nlohmann::json::parse(in);
        m.version = j.at("version").get<int>();
        if (m.version != kManifestVersion) {
            throw FormatError("unsupported manifest version " + std::to_string(m.version));
        }
        m.chunk_size = j.at("chunk_size").get<std::size_t>();
        m.overlap = j.at("overlap").get<std::size_t>();
        m.n_docs = j.at("n_docs").get<std::size_t>();
        m.n_chunks = j.at("n_chunks").get<std::size_t>();
        m.embed_dim = j.at("embed_dim").get<int>();
        m.provider_id = j.at("provider_id").get<std::string>();
        m.created_at = j.at("created_at").get<std::string>();
        m.checksums = j.at("checksums").get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void write_manifest(const fs::path& dir, const IndexManifest& m) {
    ordered_json j;
    j["version"] = m.version;
    j["chunk_size"] = m.chunk_size;
    j["overlap"] = m.overlap;
    j["n_docs"] = m.n_docs;
    j["n_chunks"] = m.n_chunks;
    j["embed_dim"] = m.embed_dim;
    j["provider_id"] = m.provider_id;
    j["created_at"] = m.created_at;
    j["checksums"] = m.checksums;
    write_atomically(dir / index_files::kManifest, [&](const fs::path& tmp) {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << j.dump(2) << '\n';
        if (!out) throw Error("failed writing manifest: " + tmp.string());
    });
}

void verify_manifest(const fs::path& dir, const IndexManifest& m) {
    for (const auto& [file, expected] : m.checksums) {
        const fs::path path = dir / file;
        if (!fs::exists(path)) throw FormatError("dirty manifest: artifact '" + file + "' is missing");
        const auto actual = file_checksum(path);
        if (actual != expected) {
            throw FormatError("dirty manifest: checksum of '" + file + "' is " + actual + ", manifest says " +
                              expected);
        }
    }
}

IndexManifest ingest_corpus(const fs::path& corpus, const fs::path& dir, const ChunkingConfig& cfg) {
    cfg.validate();
    const auto docs = load_corpus(corpus);
    const auto chunks = chunk_corpus(docs, cfg);
    fs::create_directories(dir);

    write_atomically(dir / index_files::kChunks, [&](const fs::path& tmp) { write_chunks(tmp, chunks); });
    for (const char* stale : {index_files::kLexical, index_files::kVectors}) {
        std::error_code ec;
        fs::remove(dir / stale, ec);
    }

    IndexManifest m;
    m.chunk_size = cfg.chunk_size;
    m.overlap = cfg.overlap;
    m.n_docs = docs.size();
    m.n_chunks = chunks.size();
    m.created_at = utc_timestamp();
    m.checksums[index_files::kChunks] = file_checksum(dir / index_files::kChunks);
    if (fs::exists(dir / index_files::kGraph))
        m.checksums[index_files::kGraph] = file_checksum(dir / index_files::kGraph);
    write_manifest(dir, m);
    return m;
}

IndexManifest build_indexes(const fs::path& dir, bool lexical, Embedder* dense) {
    IndexManifest m = read_manifest(dir);
    verify_manifest(dir, m);
    const auto chunks = read_chunks(dir / index_files::kChunks);
    if (chunks.size() != m.n_chunks) throw FormatError("dirty manifest: chunk count differs from chunks file");

    if (lexical) {
        const auto index = LexicalIndex::build(chunks);
        write_atomically(dir / index_files::kLexical, [&](const fs::path& tmp) { index.save(tmp); });
        m.checksums[index_files::kLexical] = file_checksum(dir / index_files::kLexical);
    }
    if (dense) {
        const auto index = build_vector_index(chunks, *dense);
        write_atomically(dir / index_files::kVectors, [&](const fs::path& tmp) { save_vector_index(index, tmp); });
        m.checksums[index_files::kVectors] = file_checksum(dir / index_files::kVectors);
        m.embed_dim = index.dim();
        m.provider_id = index.provider_id();
    }
    write_manifest(dir, m);
    return m;
}

IndexManifest install_graph(const fs::path& dir, const fs::path& graph_file) {
    IndexManifest m = read_manifest(dir);
    load_graph(graph_file);
    write_atomically(dir / index_files::kGraph, [&](const fs::path& tmp) {
        fs::copy_file(graph_file, tmp, fs::copy_options::overwrite_existing);
    });
    m.checksums[index_files::kGraph] = file_checksum(dir / index_files::kGraph);
    write_manifest(dir, m);
    return m;
}

IndexDirectory IndexDirectory::open(const fs::path& dir) {
    IndexDirectory d;
    d.dir = dir;
    d.manifest = read_manifest(dir);
    verify_manifest(dir, d.manifest);
    d.chunks = ChunkCatalog(read_chunks(dir / index_files::kChunks));
    if (d.manifest.has(index_files::kLexical)) d.lexical = LexicalIndex::load(dir / index_files::kLexical);
    if (d.manifest.has(index_files::kVectors)) {
        d.vectors = load_vector_index(dir / index_files::kVectors);
        d.vectors->set_provider_id(d.manifest.provider_id);
    }
    if (d.manifest.has(index_files::kGraph)) d.graph = load_graph(dir / index_files::kGraph);
    return d;
}

}  // namespace acr
