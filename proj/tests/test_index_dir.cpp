#include <doctest.h>

#include <fstream>

#include "acr/error.hpp"
#include "acr/index_dir.hpp"
#include "acr/stub_providers.hpp"
#include "acr/text.hpp"
#include "oracles.hpp"

using namespace acr;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

/// Two documents of 1000 and 2500 scalar values, one 4-byte character each.
fs::path write_corpus(const TempDir& tmp) {
    const std::string a(1000, 'a');
    std::string b(2499, 'b');
    b += "\xF0\x9F\x93\xA1";
    write_file(tmp / "corpus.jsonl",
               "{\"doc_id\": \"a\", \"text\": \"" + a + "\"}\n{\"doc_id\": \"b\", \"text\": \"" + b + "\"}\n");
    return tmp / "corpus.jsonl";
}

class FailingEmbedder final : public Embedder {
public:
    std::vector<Embedding> embed(std::span<const std::string>) override { throw ProviderError("offline"); }
    std::string id() const override { return "failing"; }
};

}  // namespace

TEST_CASE("ingest_corpus writes chunks and a manifest") {
    TempDir tmp;
    const ChunkingConfig cfg;
    const auto m = ingest_corpus(write_corpus(tmp), tmp / "idx", cfg);
    CHECK(m.n_docs == 2);
    CHECK(m.n_chunks == expected_chunk_count(1000, cfg) + expected_chunk_count(2500, cfg));
    CHECK(m.n_chunks == 4);
    CHECK(m.chunk_size == 1000);
    CHECK(m.overlap == 100);
    CHECK(m.has(index_files::kChunks));
    CHECK_FALSE(m.has(index_files::kLexical));
    CHECK(m.created_at.size() == 20);
    CHECK(m.created_at.back() == 'Z');

    const auto back = read_manifest(tmp / "idx");
    CHECK(back.checksums == m.checksums);
    CHECK(read_chunks(tmp / "idx" / index_files::kChunks).size() == 4);
}

TEST_CASE("build_indexes and open") {
    TempDir tmp;
    ingest_corpus(write_corpus(tmp), tmp / "idx", {});
    StubEmbedder e;
    const auto m = build_indexes(tmp / "idx", true, &e);
    CHECK(m.has(index_files::kLexical));
    CHECK(m.has(index_files::kVectors));
    CHECK(m.embed_dim == 64);
    CHECK(m.provider_id == e.id());

    const auto dir = IndexDirectory::open(tmp / "idx");
    CHECK(dir.chunks.size() == 4);
    REQUIRE(dir.lexical.has_value());
    REQUIRE(dir.vectors.has_value());
    CHECK_FALSE(dir.graph.has_value());
    CHECK(dir.vectors->provider_id() == e.id());
    CHECK(dir.lexical->n_chunks() == 4);

    SUBCASE("vector file is byte-identical across rebuilds") {
        const auto first = file_checksum(tmp / "idx" / index_files::kVectors);
        build_indexes(tmp / "idx", false, &e);
        CHECK(file_checksum(tmp / "idx" / index_files::kVectors) == first);
    }
    SUBCASE("re-ingest removes stale indexes") {
        ingest_corpus(tmp / "corpus.jsonl", tmp / "idx", {500, 50});
        CHECK_FALSE(fs::exists(tmp / "idx" / index_files::kLexical));
        CHECK_FALSE(fs::exists(tmp / "idx" / index_files::kVectors));
        CHECK_FALSE(IndexDirectory::open(tmp / "idx").lexical.has_value());
    }
    SUBCASE("a modified artifact makes the manifest dirty") {
        write_file(tmp / "idx" / index_files::kLexical, "tampered");
        CHECK_THROWS_WITH_AS(IndexDirectory::open(tmp / "idx"), doctest::Contains("dirty manifest"), FormatError);
    }
    SUBCASE("a missing artifact makes the manifest dirty") {
        fs::remove(tmp / "idx" / index_files::kVectors);
        CHECK_THROWS_WITH_AS(IndexDirectory::open(tmp / "idx"), doctest::Contains("missing"), FormatError);
    }
    SUBCASE("a failed dense build leaves the previous artifacts") {
        const auto before = file_checksum(tmp / "idx" / index_files::kVectors);
        FailingEmbedder broken;
        CHECK_THROWS_AS(build_indexes(tmp / "idx", false, &broken), ProviderError);
        CHECK(file_checksum(tmp / "idx" / index_files::kVectors) == before);
        CHECK_NOTHROW(IndexDirectory::open(tmp / "idx"));
    }
}

TEST_CASE("write_atomically removes the temp file on failure") {
    TempDir tmp;
    write_file(tmp / "artifact", "old");
    CHECK_THROWS_AS(write_atomically(tmp / "artifact",
                                     [](const fs::path& p) {
                                         write_file(p, "partial");
                                         throw Error("boom");
                                     }),
                    Error);
    CHECK_FALSE(fs::exists(tmp / "artifact.tmp"));
    CHECK(file_checksum(tmp / "artifact") == file_checksum([&] {
              write_file(tmp / "expected", "old");
              return tmp / "expected";
          }()));
}

TEST_CASE("install_graph") {
    TempDir tmp;
    ingest_corpus(write_corpus(tmp), tmp / "idx", {});
    write_file(tmp / "g.tsv", "E\ta\tA\t\nE\tb\tB\t\nT\ta\trel\tb\n");
    const auto m = install_graph(tmp / "idx", tmp / "g.tsv");
    CHECK(m.has(index_files::kGraph));
    const auto dir = IndexDirectory::open(tmp / "idx");
    REQUIRE(dir.graph.has_value());
    CHECK(dir.graph->triples().size() == 1);

    write_file(tmp / "bad.tsv", "T\ta\trel\tghost\n");
    CHECK_THROWS_AS(install_graph(tmp / "idx", tmp / "bad.tsv"), FormatError);
    CHECK(IndexDirectory::open(tmp / "idx").graph->triples().size() == 1);

    SUBCASE("the graph survives a re-ingest") {
        const auto again = ingest_corpus(tmp / "corpus.jsonl", tmp / "idx", {});
        CHECK(again.has(index_files::kGraph));
    }
}

TEST_CASE("manifest errors") {
    TempDir tmp;
    CHECK_THROWS_WITH_AS(read_manifest(tmp.path), doctest::Contains("no manifest"), Error);
    write_file(tmp / index_files::kManifest, "{not json");
    CHECK_THROWS_AS(read_manifest(tmp.path), FormatError);
    write_file(tmp / index_files::kManifest, R"({"version": 99})");
    CHECK_THROWS_WITH_AS(read_manifest(tmp.path), doctest::Contains("unsupported manifest version"), FormatError);
}
