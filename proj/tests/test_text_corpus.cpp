#include <doctest.h>

#include <fstream>
#include <random>

#include "acr/corpus.hpp"
#include "acr/error.hpp"
#include "acr/text.hpp"
#include "oracles.hpp"

using namespace acr;

namespace {

void write_file(const std::filesystem::path& p, const std::string& body) {
    std::ofstream out(p, std::ios::binary);
    out << body;
}

Document doc_of_length(std::size_t n, char fill = 'x') {
    Document d;
    d.doc_id = "d";
    d.text.assign(n, fill);
    return d;
}

}  // namespace

TEST_CASE("tokenize folds case and splits on non-alphanumerics") {
    CHECK(tokenize("Ultra-Reliable Low-Latency") == std::vector<std::string>{"ultra", "reliable", "low", "latency"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("5G NR") == std::vector<std::string>{"5g", "nr"});
    CHECK(tokenize("  --  ").empty());
    // Non-ASCII letters are alphanumeric; the Greek capital folds to lowercase.
    CHECK(tokenize("Δf spacing, état") == std::vector<std::string>{"δf", "spacing", "état"});
}

TEST_CASE("scalar offsets count code points") {
    CHECK(scalar_length("abc") == 3);
    CHECK(scalar_length("é€𝄞") == 3);
    CHECK(scalar_offsets("aé") == std::vector<std::size_t>{0, 1, 3});
}

TEST_CASE("fnv1a64 and crc32 match published check values") {
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(crc32("123456789") == 0xCBF43926u);
    CHECK(crc32(crc32("1234"), "56789") == 0xCBF43926u);
}

TEST_CASE("chunking config validation") {
    CHECK_NOTHROW(ChunkingConfig{1000, 100}.validate());
    CHECK_NOTHROW(ChunkingConfig{5, 0}.validate());
    CHECK_THROWS_AS((ChunkingConfig{100, 100}.validate()), ConfigError);
    CHECK_THROWS_AS((ChunkingConfig{0, 0}.validate()), ConfigError);
}

TEST_CASE("chunk_document worked examples") {
    const ChunkingConfig cfg{1000, 100};
    SUBCASE("exact chunk size") {
        const auto chunks = chunk_document(doc_of_length(1000), cfg);
        REQUIRE(chunks.size() == 1);
        CHECK(chunks[0].char_start == 0);
        CHECK(chunks[0].char_end == 1000);
    }
    SUBCASE("1900 characters") {
        const auto chunks = chunk_document(doc_of_length(1900), cfg);
        REQUIRE(chunks.size() == 2);
        CHECK(chunks[1].char_start == 900);
        CHECK(chunks[1].char_end == 1900);
    }
    SUBCASE("2500 characters") {
        const auto chunks = chunk_document(doc_of_length(2500), cfg);
        REQUIRE(chunks.size() == 3);
        CHECK(chunks[0].char_end == 1000);
        CHECK(chunks[1].char_start == 900);
        CHECK(chunks[1].char_end == 1900);
        CHECK(chunks[2].char_start == 1800);
        CHECK(chunks[2].char_end == 2500);
    }
    SUBCASE("empty text") { CHECK(chunk_document(doc_of_length(0), cfg).empty()); }
}

TEST_CASE("chunk ids, ordinals and texts") {
    Document d;
    d.doc_id = "TS38.300";
    d.text = "abcdefghij";
    const auto chunks = chunk_document(d, {4, 1});
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].chunk_id == "TS38.300#0");
    CHECK(chunks[2].chunk_id == "TS38.300#2");
    CHECK(chunks[1].ordinal == 1);
    CHECK(chunks[0].text == "abcd");
    CHECK(chunks[1].text == "defg");
    CHECK(chunks[2].text == "ghij");
}

TEST_CASE("offsets count Unicode scalar values, not bytes") {
    Document d;
    d.doc_id = "u";
    d.text = "αβγδε";  // 5 scalars, 10 bytes
    const auto chunks = chunk_document(d, {3, 1});
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].text == "αβγ");
    CHECK(chunks[1].char_start == 2);
    CHECK(chunks[1].text == "γδε");
}

TEST_CASE("chunking matches the stepping oracle and reconstructs the text") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t cs = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
        const std::size_t ov = std::uniform_int_distribution<std::size_t>(0, cs - 1)(rng);
        const std::size_t len = std::uniform_int_distribution<std::size_t>(0, 200)(rng);
        Document d;
        d.doc_id = "r";
        for (std::size_t i = 0; i < len; ++i) d.text.push_back(static_cast<char>('a' + rng() % 26));
        const auto chunks = chunk_document(d, {cs, ov});
        const auto spans = oracle::chunk_spans(len, cs, ov);
        REQUIRE(chunks.size() == spans.size());
        CHECK(chunks.size() == expected_chunk_count(len, {cs, ov}));
        std::string rebuilt;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            CHECK(chunks[i].char_start == spans[i].start);
            CHECK(chunks[i].char_end == spans[i].end);
            CHECK(chunks[i].text == d.text.substr(spans[i].start, spans[i].end - spans[i].start));
            rebuilt += chunks[i].text.substr(rebuilt.size() - chunks[i].char_start);
        }
        CHECK(rebuilt == d.text);
    }
}

TEST_CASE("load_corpus") {
    TempDir tmp;
    SUBCASE("empty file") {
        write_file(tmp / "c.jsonl", "");
        CHECK(load_corpus(tmp / "c.jsonl").empty());
    }
    SUBCASE("two documents in file order, blank lines skipped") {
        write_file(tmp / "c.jsonl",
                   R"({"doc_id":"b","title":"B","text":"second","source":"TS 23","metadata":{"release":"18"}})"
                   "\n\n"
                   R"({"doc_id":"a","text":"first"})"
                   "\n");
        const auto docs = load_corpus(tmp / "c.jsonl");
        REQUIRE(docs.size() == 2);
        CHECK(docs[0].doc_id == "b");
        CHECK(docs[0].metadata.at("release") == "18");
        CHECK(docs[1].doc_id == "a");
        CHECK(docs[1].title.empty());
    }
    SUBCASE("duplicate doc_id names its line") {
        write_file(tmp / "c.jsonl",
                   "{\"doc_id\":\"x\",\"text\":\"1\"}\n{\"doc_id\":\"y\",\"text\":\"2\"}\n{\"doc_id\":\"x\",\"text\":"
                   "\"3\"}\n");
        try {
            load_corpus(tmp / "c.jsonl");
            FAIL("expected a duplicate error");
        } catch (const FormatError& e) {
            CHECK(e.line() == 3);
            CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
        }
    }
    SUBCASE("malformed line") {
        write_file(tmp / "c.jsonl", "{\"doc_id\":\"x\",\"text\":\"1\"}\n{not json\n");
        try {
            load_corpus(tmp / "c.jsonl");
            FAIL("expected a format error");
        } catch (const FormatError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("graph doc_id is reserved") {
        write_file(tmp / "c.jsonl", "{\"doc_id\":\"kg\",\"text\":\"1\"}\n");
        CHECK_THROWS_AS(load_corpus(tmp / "c.jsonl"), FormatError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(load_corpus(tmp / "absent.jsonl"), Error); }
}

TEST_CASE("chunks file round-trip") {
    TempDir tmp;
    Document d;
    d.doc_id = "rt";
    d.text = "Ñandú \"quoted\"\nnew line\ttab";
    const auto chunks = chunk_document(d, {7, 2});
    write_chunks(tmp / "chunks", chunks);
    CHECK(read_chunks(tmp / "chunks") == chunks);

    ChunkCatalog catalog(chunks);
    REQUIRE(catalog.find("rt#1") != nullptr);
    CHECK(catalog.find("rt#1")->char_start == 5);
    CHECK(catalog.find("missing") == nullptr);
}
