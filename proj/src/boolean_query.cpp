#include <cctype>

#include "acr/lexical.hpp"

namespace acr {

BooleanExpr BooleanExpr::make_not(BooleanExpr e) {
    BooleanExpr n{Kind::Not, {}, {}};
    n.children.push_back(std::move(e));
    return n;
}

BooleanExpr BooleanExpr::make_binary(Kind k, BooleanExpr lhs, BooleanExpr rhs) {
    BooleanExpr n{k, {}, {}};
    n.children.push_back(std::move(lhs));
    n.children.push_back(std::move(rhs));
    return n;
}

std::string to_string(const BooleanExpr& expr) {
    switch (expr.kind) {
        case BooleanExpr::Kind::Term:
            return "TERM " + expr.term;
        case BooleanExpr::Kind::Not:
            return "NOT(" + to_string(expr.children[0]) + ")";
        case BooleanExpr::Kind::And:
            return "AND(" + to_string(expr.children[0]) + ", " + to_string(expr.children[1]) + ")";
        case BooleanExpr::Kind::Or:
            return "OR(" + to_string(expr.children[0]) + ", " + to_string(expr.children[1]) + ")";
    }
    return {};
}

namespace {

struct Lexeme {
    enum class Kind { Word, And, Or, Not, LParen, RParen, End };
    Kind kind;
    std::string_view text;
    std::size_t offset;
};

std::vector<Lexeme> lex(std::string_view s) {
    std::vector<Lexeme> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(' || c == ')') {
            out.push_back({c == '(' ? Lexeme::Kind::LParen : Lexeme::Kind::RParen, s.substr(i, 1), i});
            ++i;
        } else {
            const std::size_t start = i;
            while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')') ++i;
            const auto word = s.substr(start, i - start);
            std::string upper;
            for (char ch : word) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
            auto kind = Lexeme::Kind::Word;
            if (upper == "AND")
                kind = Lexeme::Kind::And;
            else if (upper == "OR")
                kind = Lexeme::Kind::Or;
            else if (upper == "NOT")
                kind = Lexeme::Kind::Not;
            out.push_back({kind, word, start});
        }
    }
    out.push_back({Lexeme::Kind::End, {}, s.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view source) : lexemes_(lex(source)) {}

    BooleanExpr parse() {
        if (peek().kind == Lexeme::Kind::End) throw BooleanSyntaxError("empty expression", 0);
        auto e = parse_or();
        if (peek().kind == Lexeme::Kind::RParen) throw BooleanSyntaxError("unbalanced parentheses", peek().offset);
        if (peek().kind != Lexeme::Kind::End) throw BooleanSyntaxError("unexpected token", peek().offset);
        return e;
    }

private:
    const Lexeme& peek() const { return lexemes_[pos_]; }
    const Lexeme& take() { return lexemes_[pos_++]; }

    BooleanExpr parse_or() {
        auto lhs = parse_and();
        while (peek().kind == Lexeme::Kind::Or) {
            take();
            lhs = BooleanExpr::make_binary(BooleanExpr::Kind::Or, std::move(lhs), parse_and());
        }
        return lhs;
    }

    BooleanExpr parse_and() {
        auto lhs = parse_not();
        while (peek().kind == Lexeme::Kind::And) {
            take();
            lhs = BooleanExpr::make_binary(BooleanExpr::Kind::And, std::move(lhs), parse_not());
        }
        return lhs;
    }

    BooleanExpr parse_not() {
        if (peek().kind == Lexeme::Kind::Not) {
            take();
            return BooleanExpr::make_not(parse_not());
        }
        return parse_atom();
    }

    BooleanExpr parse_atom() {
        const Lexeme& lx = take();
        switch (lx.kind) {
            case Lexeme::Kind::Word: {
                auto tokens = tokenize(lx.text);
                if (tokens.size() != 1) {
                    throw BooleanSyntaxError("term '" + std::string(lx.text) + "' is not a single token", lx.offset);
                }
                return BooleanExpr::make_term(std::move(tokens.front()));
            }
            case Lexeme::Kind::LParen: {
                auto inner = parse_or();
                if (peek().kind != Lexeme::Kind::RParen) throw BooleanSyntaxError("unbalanced parentheses", lx.offset);
                take();
                return inner;
            }
            case Lexeme::Kind::End:
                throw BooleanSyntaxError("unexpected end of expression", lx.offset);
            default:
                throw BooleanSyntaxError("expected a term or '('", lx.offset);
        }
    }

    std::vector<Lexeme> lexemes_;
    std::size_t pos_ = 0;
};

using Bits = std::vector<char>;

Bits eval_bits(const LexicalIndex& index, const BooleanExpr& e) {
    const std::size_t n = index.n_chunks();
    switch (e.kind) {
        case BooleanExpr::Kind::Term: {
            Bits bits(n, 0);
            for (const auto& p : index.postings(e.term)) bits[p.chunk] = 1;
            return bits;
        }
        case BooleanExpr::Kind::Not: {
            Bits bits = eval_bits(index, e.children[0]);
            for (auto& b : bits) b = !b;
            return bits;
        }
        case BooleanExpr::Kind::And:
        case BooleanExpr::Kind::Or: {
            Bits lhs = eval_bits(index, e.children[0]);
            const Bits rhs = eval_bits(index, e.children[1]);
            const bool is_and = e.kind == BooleanExpr::Kind::And;
            for (std::size_t i = 0; i < n; ++i) lhs[i] = is_and ? (lhs[i] && rhs[i]) : (lhs[i] || rhs[i]);
            return lhs;
        }
    }
    return {};
}

}  // namespace

BooleanExpr parse_boolean(std::string_view expr) { return Parser(expr).parse(); }

std::set<std::string> eval_boolean(const LexicalIndex& index, const BooleanExpr& expr) {
    const Bits bits = eval_bits(index, expr);
    std::set<std::string> out;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) out.insert(index.chunk_ids()[i]);
    }
    return out;
}

}  // namespace acr
