#include "acr/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "acr/error.hpp"
#include "acr/text.hpp"

namespace acr {

using nlohmann::json;

void ChunkingConfig::validate() const {
    if (chunk_size == 0) throw ConfigError("chunk_size must be positive");
    if (overlap >= chunk_size) {
        throw ConfigError("overlap (" + std::to_string(overlap) + ") must be smaller than chunk_size (" +
                          std::to_string(chunk_size) + ")");
    }
}

std::string make_chunk_id(std::string_view doc_id, std::size_t ordinal) {
    std::string id(doc_id);
    id += '#';
    id += std::to_string(ordinal);
    return id;
}

std::size_t expected_chunk_count(std::size_t length, const ChunkingConfig& cfg) {
    if (length == 0) return 0;
    if (length <= cfg.chunk_size) return 1;
    const std::size_t stride = cfg.stride();
    return (length - cfg.chunk_size + stride - 1) / stride + 1;
}

namespace {

std::string string_field(const json& obj, const char* name, std::size_t line_no, bool required) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) {
        if (required) throw FormatError(std::string("missing field '") + name + "'", line_no);
        return {};
    }
    if (!it->is_string()) throw FormatError(std::string("field '") + name + "' must be a string", line_no);
    return it->get<std::string>();
}

}  // namespace

Document parse_document(std::string_view line, std::size_t line_no) {
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("malformed corpus record: ") + e.what(), line_no);
    }
    if (!obj.is_object()) throw FormatError("corpus record must be an object", line_no);

    Document doc;
    doc.doc_id = string_field(obj, "doc_id", line_no, true);
    if (doc.doc_id.empty()) throw FormatError("empty doc_id", line_no);
    if (doc.doc_id == kGraphDocId) {
        throw FormatError("doc_id '" + doc.doc_id + "' is reserved for graph evidence", line_no);
    }
    doc.title = string_field(obj, "title", line_no, false);
    doc.text = string_field(obj, "text", line_no, true);
    doc.source = string_field(obj, "source", line_no, false);
    if (auto it = obj.find("metadata"); it != obj.end() && !it->is_null()) {
        if (!it->is_object()) throw FormatError("metadata must be an object", line_no);
        for (const auto& [key, value] : it->items()) {
            if (!value.is_string()) throw FormatError("metadata value for '" + key + "' must be a string", line_no);
            doc.metadata.emplace(key, value.get<std::string>());
        }
    }
    return doc;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open corpus file: " + path.string());

    std::vector<Document> docs;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (trim(line).empty()) continue;
        Document doc = parse_document(line, line_no);
        auto [it, inserted] = seen.emplace(doc.doc_id, line_no);
        if (!inserted) {
            throw FormatError(
                "duplicate doc_id '" + doc.doc_id + "' (first seen on line " + std::to_string(it->second) + ")",
                line_no);
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::vector<Chunk> chunk_document(const Document& doc, const ChunkingConfig& cfg) {
    cfg.validate();
    const auto offsets = scalar_offsets(doc.text);
    const std::size_t length = offsets.size() - 1;

    std::vector<Chunk> chunks;
    if (length == 0) return chunks;
    chunks.reserve(expected_chunk_count(length, cfg));
    for (std::size_t start = 0, ordinal = 0;; start += cfg.stride(), ++ordinal) {
        const std::size_t end = std::min(start + cfg.chunk_size, length);
        Chunk c;
        c.chunk_id = make_chunk_id(doc.doc_id, ordinal);
        c.doc_id = doc.doc_id;
        c.ordinal = ordinal;
        c.char_start = start;
        c.char_end = end;
        c.text = doc.text.substr(offsets[start], offsets[end] - offsets[start]);
        chunks.push_back(std::move(c));
        if (end == length) break;
    }
    return chunks;
}

std::vector<Chunk> chunk_corpus(const std::vector<Document>& docs, const ChunkingConfig& cfg) {
    std::vector<Chunk> all;
    for (const auto& doc : docs) {
        auto chunks = chunk_document(doc, cfg);
        all.insert(all.end(), std::make_move_iterator(chunks.begin()), std::make_move_iterator(chunks.end()));
    }
    return all;
}

void write_chunks(const std::filesystem::path& path, const std::vector<Chunk>& chunks) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write chunks file: " + path.string());
    for (const auto& c : chunks) {
        json obj = {{"chunk_id", c.chunk_id},     {"doc_id", c.doc_id},     {"ordinal", c.ordinal},
                    {"char_start", c.char_start}, {"char_end", c.char_end}, {"text", c.text}};
        out << obj.dump() << '\n';
    }
    if (!out) throw Error("failed writing chunks file: " + path.string());
}

std::vector<Chunk> read_chunks(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open chunks file: " + path.string());
    std::vector<Chunk> chunks;
    std::unordered_set<std::string> ids;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (line.empty()) continue;
        try {
            const json obj = json::parse(line);
            Chunk c;
            c.chunk_id = obj.at("chunk_id").get<std::string>();
            c.doc_id = obj.at("doc_id").get<std::string>();
            c.ordinal = obj.at("ordinal").get<std::size_t>();
            c.char_start = obj.at("char_start").get<std::size_t>();
            c.char_end = obj.at("char_end").get<std::size_t>();
            c.text = obj.at("text").get<std::string>();
            if (!ids.insert(c.chunk_id).second) throw FormatError("duplicate chunk_id " + c.chunk_id, line_no);
            chunks.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw FormatError(std::string("malformed chunk record: ") + e.what(), line_no);
        }
    }
    return chunks;
}

ChunkCatalog::ChunkCatalog(std::vector<Chunk> chunks) {
    for (auto& c : chunks) add(std::move(c));
}

void ChunkCatalog::add(Chunk chunk) {
    if (auto it = by_id_.find(chunk.chunk_id); it != by_id_.end()) {
        chunks_[it->second] = std::move(chunk);
        return;
    }
    by_id_.emplace(chunk.chunk_id, chunks_.size());
    chunks_.push_back(std::move(chunk));
}

const Chunk* ChunkCatalog::find(std::string_view chunk_id) const {
    auto it = by_id_.find(std::string(chunk_id));
    return it == by_id_.end() ? nullptr : &chunks_[it->second];
}

}  // namespace acr
