#pragma once

// Brute-force reference implementations for the property tests. They share
// no code with the library beyond plain data types: tokenization, hashing
// and scoring are re-derived here for ASCII inputs.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

/// ASCII-only stand-in for the library tokenizer.
inline std::vector<std::string> tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct Span {
    std::size_t start, end;
    bool operator==(const Span&) const = default;
};

/// Chunk windows by stepping a cursor until the text is covered.
inline std::vector<Span> chunk_spans(std::size_t length, std::size_t chunk_size, std::size_t overlap) {
    std::vector<Span> out;
    if (length == 0) return out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = std::min(start + chunk_size, length);
        out.push_back({start, end});
        if (end == length) break;
        start += chunk_size - overlap;
    }
    return out;
}

struct Scored {
    std::string id;
    double score;
};

inline void sort_ranked(std::vector<Scored>& v) {
    std::sort(v.begin(), v.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
}

/// Scores every chunk from the TF-IDF cosine definition, then sorts.
inline std::vector<Scored> tfidf_search(const std::vector<std::pair<std::string, std::string>>& chunks,
                                        const std::string& query, std::size_t k) {
    const double n = static_cast<double>(chunks.size());
    std::vector<std::map<std::string, int>> tf(chunks.size());
    std::map<std::string, int> df;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        for (const auto& t : tokens(chunks[i].second)) ++tf[i][t];
        for (const auto& [t, c] : tf[i]) ++df[t];
    }
    auto idf = [&](const std::string& t) {
        auto it = df.find(t);
        const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
        return std::log((1.0 + n) / (1.0 + d)) + 1.0;
    };
    std::map<std::string, int> qtf;
    for (const auto& t : tokens(query)) ++qtf[t];

    double q_sq = 0.0;
    for (const auto& [t, c] : qtf) q_sq += (c * idf(t)) * (c * idf(t));

    std::vector<Scored> out;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        double c_sq = 0.0, dot = 0.0;
        for (const auto& [t, c] : tf[i]) c_sq += (c * idf(t)) * (c * idf(t));
        for (const auto& [t, c] : qtf) {
            auto it = tf[i].find(t);
            if (it != tf[i].end()) dot += (c * idf(t)) * (it->second * idf(t));
        }
        if (dot <= 0.0 || c_sq == 0.0) continue;
        out.push_back({chunks[i].first, std::min(1.0, dot / (std::sqrt(q_sq) * std::sqrt(c_sq)))});
    }
    sort_ranked(out);
    if (out.size() > k) out.resize(k);
    return out;
}

/// Boolean expression over single terms, evaluated per chunk.
struct Expr {
    enum Kind { Term, And, Or, Not } kind = Term;
    std::string term;
    std::vector<Expr> kids;
};

inline bool holds(const Expr& e, const std::set<std::string>& chunk_tokens) {
    switch (e.kind) {
        case Expr::Term:
            return chunk_tokens.count(e.term) != 0;
        case Expr::And:
            return holds(e.kids[0], chunk_tokens) && holds(e.kids[1], chunk_tokens);
        case Expr::Or:
            return holds(e.kids[0], chunk_tokens) || holds(e.kids[1], chunk_tokens);
        case Expr::Not:
            return !holds(e.kids[0], chunk_tokens);
    }
    return false;
}

/// Fully parenthesized rendering, so the parse is unambiguous.
inline std::string render(const Expr& e) {
    switch (e.kind) {
        case Expr::Term:
            return e.term;
        case Expr::And:
            return "(" + render(e.kids[0]) + " AND " + render(e.kids[1]) + ")";
        case Expr::Or:
            return "(" + render(e.kids[0]) + " or " + render(e.kids[1]) + ")";
        case Expr::Not:
            return "NOT " + render(e.kids[0]);
    }
    return {};
}

inline Expr random_expr(std::mt19937_64& rng, const std::vector<std::string>& vocab, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 3);
    Expr e;
    switch (pick(rng)) {
        case 0:
            e.kind = Expr::Term;
            e.term = vocab[std::uniform_int_distribution<std::size_t>(0, vocab.size() - 1)(rng)];
            break;
        case 1:
            e.kind = Expr::And;
            break;
        case 2:
            e.kind = Expr::Or;
            break;
        default:
            e.kind = Expr::Not;
            break;
    }
    if (e.kind == Expr::Not) e.kids.push_back(random_expr(rng, vocab, depth - 1));
    if (e.kind == Expr::And || e.kind == Expr::Or) {
        e.kids.push_back(random_expr(rng, vocab, depth - 1));
        e.kids.push_back(random_expr(rng, vocab, depth - 1));
    }
    return e;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

/// Hashed signed bag of words, recomputed from its definition.
inline std::vector<double> stub_embed(const std::string& text, int dim) {
    std::vector<double> v(static_cast<std::size_t>(dim), 0.0);
    for (const auto& t : tokens(text)) {
        const auto slot = fnv1a(t) % static_cast<std::uint64_t>(dim);
        v[slot] += fnv1a(t + '\xFF') % 2 == 0 ? 1.0 : -1.0;
    }
    double sq = 0.0;
    for (double x : v) sq += x * x;
    if (sq > 0.0) {
        const double norm = std::sqrt(sq);
        for (double& x : v) x /= norm;
    }
    return v;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Full scan over float rows; dot products summed over dimensions in order.
inline std::vector<Scored> dense_scan(const std::vector<std::string>& ids, const std::vector<std::vector<float>>& rows,
                                      const std::vector<double>& query, std::size_t k) {
    std::vector<Scored> out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double dot = 0.0;
        for (std::size_t d = 0; d < query.size(); ++d) dot += static_cast<double>(rows[r][d]) * query[d];
        out.push_back({ids[r], dot});
    }
    sort_ranked(out);
    if (out.size() > k) out.resize(k);
    return out;
}

/// Reciprocal-rank fusion with each chunk's terms summed smallest first.
inline std::vector<Scored> rrf(const std::vector<std::vector<std::string>>& lists, double k) {
    std::map<std::string, std::vector<double>> terms;
    for (const auto& list : lists) {
        for (std::size_t r = 0; r < list.size(); ++r) terms[list[r]].push_back(1.0 / (k + static_cast<double>(r + 1)));
    }
    std::vector<Scored> out;
    for (auto& [id, parts] : terms) {
        std::sort(parts.begin(), parts.end());
        double s = 0.0;
        for (double p : parts) s += p;
        out.push_back({id, s});
    }
    sort_ranked(out);
    return out;
}

/// Token multiset F1 by explicit counting.
inline double token_f1(const std::string& pred, const std::string& gold) {
    const auto p = tokens(pred), g = tokens(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    std::map<std::string, int> gc;
    for (const auto& t : g) ++gc[t];
    int overlap = 0;
    for (const auto& t : p) {
        if (gc[t] > 0) {
            --gc[t];
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double prec = static_cast<double>(overlap) / static_cast<double>(p.size());
    const double rec = static_cast<double>(overlap) / static_cast<double>(g.size());
    return 2 * prec * rec / (prec + rec);
}

/// Greedy max-cosine matching over per-token stub embeddings.
inline double embed_f1(const std::string& pred, const std::string& gold, int dim) {
    const auto p = tokens(pred), g = tokens(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;
    auto best = [&](const std::vector<std::string>& from, const std::vector<std::string>& to) {
        double sum = 0.0;
        for (const auto& a : from) {
            double m = 0.0;
            for (const auto& b : to) m = std::max(m, cosine(stub_embed(a, dim), stub_embed(b, dim)));
            sum += m;
        }
        return sum / static_cast<double>(from.size());
    };
    const double prec = best(p, g), rec = best(g, p);
    if (prec + rec == 0.0) return 0.0;
    return 2 * prec * rec / (prec + rec);
}

}  // namespace oracle

/// Scratch directory removed on scope exit.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("acr-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::filesystem::path operator/(const std::string& name) const { return path / name; }
};
