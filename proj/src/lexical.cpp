#include "acr/lexical.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "acr/error.hpp"

namespace acr {

namespace {

constexpr std::string_view kLexicalMagic = "ACR-LEXICAL";
constexpr int kLexicalVersion = 1;

}  // namespace

LexicalIndex LexicalIndex::build(const std::vector<Chunk>& chunks) {
    LexicalIndex index;
    index.chunk_ids_.reserve(chunks.size());
    std::unordered_set<std::string_view> seen;
    seen.reserve(chunks.size());
    for (std::size_t row = 0; row < chunks.size(); ++row) {
        const auto& chunk = chunks[row];
        if (!seen.insert(chunk.chunk_id).second) throw Error("duplicate chunk_id in lexical build: " + chunk.chunk_id);
        index.chunk_ids_.push_back(chunk.chunk_id);

        std::map<std::string, std::uint32_t, std::less<>> counts;
        for (auto& token : tokenize(chunk.text)) ++counts[std::move(token)];
        for (auto& [term, tf] : counts) {
            auto it = index.postings_.find(term);
            if (it == index.postings_.end()) it = index.postings_.emplace(term, std::vector<Posting>{}).first;
            it->second.push_back({static_cast<std::uint32_t>(row), tf});
        }
    }
    index.finalize();
    return index;
}

void LexicalIndex::finalize() {
    norms_.assign(chunk_ids_.size(), 0.0);
    // Map iteration is ascending by term, which fixes each chunk's summation order.
    for (const auto& [term, list] : postings_) {
        const double w_idf = idf_for_df(list.size());
        for (const auto& p : list) {
            const double w = static_cast<double>(p.tf) * w_idf;
            norms_[p.chunk] += w * w;
        }
    }
    for (double& n : norms_) n = std::sqrt(n);
}

std::size_t LexicalIndex::doc_freq(std::string_view term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

double LexicalIndex::idf_for_df(std::size_t df) const {
    const double n = static_cast<double>(chunk_ids_.size());
    return std::log((1.0 + n) / (1.0 + static_cast<double>(df))) + 1.0;
}

double LexicalIndex::idf(std::string_view term) const { return idf_for_df(doc_freq(term)); }

std::span<const Posting> LexicalIndex::postings(std::string_view term) const {
    auto it = postings_.find(term);
    if (it == postings_.end()) return {};
    return it->second;
}

Ranking search_lexical(const LexicalIndex& index, std::string_view query, std::size_t k) {
    if (k == 0) throw ConfigError("k must be >= 1");
    std::map<std::string, std::uint32_t, std::less<>> counts;
    for (auto& token : tokenize(query)) ++counts[std::move(token)];
    if (counts.empty() || index.n_chunks() == 0) return {};

    std::vector<double> dot(index.n_chunks(), 0.0);
    std::vector<std::uint32_t> touched;
    double q_sq = 0.0;
    for (const auto& [term, tf] : counts) {
        const auto list = index.postings(term);
        const double term_idf = index.idf_for_df(list.size());
        const double q_w = static_cast<double>(tf) * term_idf;
        q_sq += q_w * q_w;
        for (const auto& p : list) {
            if (dot[p.chunk] == 0.0) touched.push_back(p.chunk);
            dot[p.chunk] += q_w * (static_cast<double>(p.tf) * term_idf);
        }
    }
    const double q_norm = std::sqrt(q_sq);

    Ranking hits;
    hits.reserve(touched.size());
    for (auto row : touched) {
        const double score = std::min(1.0, dot[row] / (q_norm * index.chunk_norm(row)));
        if (score > 0.0) hits.push_back({index.chunk_ids()[row], score});
    }
    return top_k(std::move(hits), k);
}

void LexicalIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write lexical index: " + path.string());
    out << kLexicalMagic << ' ' << kLexicalVersion << '\n';
    out << "chunks " << chunk_ids_.size() << '\n';
    for (const auto& id : chunk_ids_) out << id << '\n';
    out << "terms " << postings_.size() << '\n';
    for (const auto& [term, list] : postings_) {
        out << term << '\t' << list.size() << '\t';
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i) out << ' ';
            out << list[i].chunk << ':' << list[i].tf;
        }
        out << '\n';
    }
    if (!out) throw Error("failed writing lexical index: " + path.string());
}

LexicalIndex LexicalIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open lexical index: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    auto next = [&]() -> std::string& {
        if (!std::getline(in, line)) throw FormatError("lexical index truncated", line_no + 1);
        ++line_no;
        return line;
    };

    {
        std::istringstream header(next());
        std::string magic;
        int version = 0;
        header >> magic >> version;
        if (magic != kLexicalMagic) throw FormatError("bad magic in lexical index", line_no);
        if (version != kLexicalVersion) {
            throw FormatError("unsupported lexical index version " + std::to_string(version), line_no);
        }
    }
    auto read_count = [&](std::string_view label) {
        std::istringstream s(next());
        std::string word;
        std::size_t n = 0;
        if (!(s >> word >> n) || word != label) throw FormatError("expected '" + std::string(label) + " <n>'", line_no);
        return n;
    };

    LexicalIndex index;
    const std::size_t n_chunks = read_count("chunks");
    index.chunk_ids_.reserve(n_chunks);
    for (std::size_t i = 0; i < n_chunks; ++i) index.chunk_ids_.push_back(next());

    const std::size_t n_terms = read_count("terms");
    for (std::size_t i = 0; i < n_terms; ++i) {
        std::istringstream s(next());
        std::string term;
        std::size_t df = 0;
        if (!std::getline(s, term, '\t') || !(s >> df)) throw FormatError("malformed term line", line_no);
        std::vector<Posting> list;
        list.reserve(df);
        std::string entry;
        while (s >> entry) {
            const auto colon = entry.find(':');
            if (colon == std::string::npos) throw FormatError("malformed posting", line_no);
            Posting p;
            p.chunk = static_cast<std::uint32_t>(std::stoul(entry.substr(0, colon)));
            p.tf = static_cast<std::uint32_t>(std::stoul(entry.substr(colon + 1)));
            if (p.chunk >= n_chunks || p.tf == 0) throw FormatError("posting out of range", line_no);
            if (!list.empty() && list.back().chunk >= p.chunk) throw FormatError("postings not ascending", line_no);
            list.push_back(p);
        }
        if (list.size() != df) throw FormatError("doc_freq does not match posting count", line_no);
        if (term.empty() || !index.postings_.emplace(std::move(term), std::move(list)).second) {
            throw FormatError("empty or duplicate term", line_no);
        }
    }
    index.finalize();
    return index;
}

}  // namespace acr
