#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acr/corpus.hpp"
#include "acr/error.hpp"
#include "acr/ranking.hpp"
#include "acr/text.hpp"

namespace acr {

struct Posting {
    std::uint32_t chunk = 0;  // row in LexicalIndex::chunk_ids()
    std::uint32_t tf = 0;
};

/// Inverted index with smoothed TF-IDF weights:
///   idf(t)    = ln((1 + N) / (1 + df(t))) + 1
///   w(t, c)   = tf(t, c) * idf(t)
/// Every per-chunk sum (norms, dot products) runs in ascending term order,
/// so results are reproducible bit-for-bit.
class LexicalIndex {
public:
    LexicalIndex() = default;

    /// Throws Error on duplicate chunk_id.
    static LexicalIndex build(const std::vector<Chunk>& chunks);

    std::size_t n_chunks() const noexcept { return chunk_ids_.size(); }
    const std::vector<std::string>& chunk_ids() const noexcept { return chunk_ids_; }
    std::size_t vocabulary_size() const noexcept { return postings_.size(); }

    std::size_t doc_freq(std::string_view term) const;
    /// Also defined for unseen terms (df = 0).
    double idf(std::string_view term) const;
    double idf_for_df(std::size_t df) const;
    std::span<const Posting> postings(std::string_view term) const;
    /// L2 norm of chunk `row`'s TF-IDF vector; 0 for token-less chunks.
    double chunk_norm(std::size_t row) const { return norms_.at(row); }

    const std::map<std::string, std::vector<Posting>, std::less<>>& all_postings() const noexcept { return postings_; }

    /// Versioned line-delimited text form.
    void save(const std::filesystem::path& path) const;
    static LexicalIndex load(const std::filesystem::path& path);

private:
    void finalize();

    std::vector<std::string> chunk_ids_;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
    std::vector<double> norms_;
};

inline LexicalIndex build_lexical_index(const std::vector<Chunk>& chunks) { return LexicalIndex::build(chunks); }

/// Cosine between query and chunk TF-IDF vectors; zero scores are dropped.
Ranking search_lexical(const LexicalIndex& index, std::string_view query, std::size_t k);

/// Boolean query tree. And/Or have two children, Not one, Term none.
struct BooleanExpr {
    enum class Kind { Term, And, Or, Not };

    Kind kind = Kind::Term;
    std::string term;
    std::vector<BooleanExpr> children;

    static BooleanExpr make_term(std::string t) { return {Kind::Term, std::move(t), {}}; }
    static BooleanExpr make_not(BooleanExpr e);
    static BooleanExpr make_binary(Kind k, BooleanExpr lhs, BooleanExpr rhs);

    friend bool operator==(const BooleanExpr&, const BooleanExpr&) = default;
};

/// e.g. AND(TERM latency, NOT(TERM throughput))
std::string to_string(const BooleanExpr& expr);

class BooleanSyntaxError : public Error {
public:
    BooleanSyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Grammar (keywords case-insensitive, NOT > AND > OR, left-associative):
///   expr := or ; or := and (OR and)* ; and := not (AND not)*
///   not  := NOT not | atom ; atom := TERM | "(" expr ")"
/// Each TERM must tokenize to exactly one token.
BooleanExpr parse_boolean(std::string_view expr);

/// Set algebra over posting lists; NOT complements against every chunk.
std::set<std::string> eval_boolean(const LexicalIndex& index, const BooleanExpr& expr);

}  // namespace acr
