#include "acr/stub_providers.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

#include "acr/error.hpp"
#include "acr/text.hpp"

namespace acr {

Embedding stub_embed(std::string_view text, int dim) {
    if (dim < 1) throw ConfigError("stub embedding dimension must be >= 1");
    Embedding v(static_cast<std::size_t>(dim), 0.0);
    for (const auto& token : tokenize(text)) {
        const auto slot = fnv1a64(token) % static_cast<std::uint64_t>(dim);
        std::string salted = token;
        salted.push_back(static_cast<char>(0xFF));
        v[slot] += (fnv1a64(salted) % 2 == 0) ? 1.0 : -1.0;
    }
    normalize(v);
    return v;
}

StubEmbedder::StubEmbedder(int dim) : dim_(dim) {
    if (dim < 1) throw ConfigError("stub embedding dimension must be >= 1");
}

std::vector<Embedding> StubEmbedder::embed(std::span<const std::string> texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(stub_embed(t, dim_));
    return out;
}

std::string StubEmbedder::id() const { return "stub-fnv1a-" + std::to_string(dim_); }

StubDecision stub_decide(std::string_view /*question*/, const OptionList& options, std::string_view evidence) {
    const auto ev_tokens = tokenize(evidence);
    const std::unordered_set<std::string> ev(ev_tokens.begin(), ev_tokens.end());

    const std::pair<std::string, std::string>* best = nullptr;
    std::vector<std::string> best_shared;
    std::size_t best_distinct = 0;
    for (const auto& option : options) {
        std::vector<std::string> distinct;
        for (auto& t : tokenize(option.second)) {
            if (std::find(distinct.begin(), distinct.end(), t) == distinct.end()) distinct.push_back(std::move(t));
        }
        std::vector<std::string> shared;
        for (const auto& t : distinct) {
            if (ev.count(t)) shared.push_back(t);
        }
        const bool better = !best || shared.size() > best_shared.size() ||
                            (shared.size() == best_shared.size() && label_less(option.first, best->first));
        if (better) {
            best = &option;
            best_shared = std::move(shared);
            best_distinct = distinct.size();
        }
    }

    StubDecision d;
    if (!best) return d;
    d.label = best->first;
    d.confidence =
        static_cast<double>(best_shared.size()) / static_cast<double>(std::max<std::size_t>(1, best_distinct));
    if (best_shared.empty()) {
        d.explanation = "No option shares tokens with the evidence; defaulting to " + d.label + ".";
    } else {
        d.explanation = "Evidence supports " + d.label + " via:";
        for (const auto& t : best_shared) d.explanation += " " + t;
        d.explanation += ".";
    }
    return d;
}

SynonymLexicon::SynonymLexicon(std::vector<std::pair<std::string, std::string>> entries)
    : entries_(std::move(entries)) {
    phrase_tokens_.reserve(entries_.size());
    for (const auto& [phrase, expansion] : entries_) {
        auto tokens = tokenize(phrase);
        if (tokens.empty()) throw ConfigError("lexicon phrase has no tokens: '" + phrase + "'");
        phrase_tokens_.push_back(std::move(tokens));
    }
}

SynonymLexicon SynonymLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open lexicon file: " + path.string());
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
        if (trim(line).empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError("lexicon line needs phrase<TAB>expansion", line_no);
        auto phrase = trim(std::string_view(line).substr(0, tab));
        auto expansion = trim(std::string_view(line).substr(tab + 1));
        if (phrase.empty() || expansion.empty()) throw FormatError("empty lexicon phrase or expansion", line_no);
        entries.emplace_back(std::move(phrase), std::move(expansion));
    }
    return SynonymLexicon(std::move(entries));
}

std::vector<std::string> SynonymLexicon::expansions_for(std::string_view text) const {
    const auto tokens = tokenize(text);
    std::vector<std::string> out;
    for (std::size_t e = 0; e < entries_.size(); ++e) {
        const auto& phrase = phrase_tokens_[e];
        const bool hit = std::search(tokens.begin(), tokens.end(), phrase.begin(), phrase.end()) != tokens.end();
        if (hit && std::find(out.begin(), out.end(), entries_[e].second) == out.end()) {
            out.push_back(entries_[e].second);
        }
    }
    return out;
}

StubChatProvider& StubChatProvider::on(std::string tag, ChatHandler handler) {
    handlers_[std::move(tag)] = std::move(handler);
    return *this;
}

ChatResponse StubChatProvider::complete(const ChatRequest& request) {
    auto it = handlers_.find(request.tag);
    if (it == handlers_.end()) throw ProviderError("stub provider has no script for tag '" + request.tag + "'");
    ChatResponse response;
    response.text = it->second(request);
    return response;
}

namespace stub {

namespace {

std::string field(const ChatRequest& r, const char* name) {
    auto it = r.fields.find(name);
    return it == r.fields.end() ? std::string{} : it->second;
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

std::string encode_options(const OptionList& options) {
    std::string out;
    for (const auto& [label, text] : options) {
        out += one_line(label) + '\t' + one_line(text) + '\n';
    }
    return out;
}

OptionList decode_options(std::string_view encoded) {
    OptionList options;
    while (!encoded.empty()) {
        auto nl = encoded.find('\n');
        auto line = encoded.substr(0, nl);
        encoded = nl == std::string_view::npos ? std::string_view{} : encoded.substr(nl + 1);
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) {
            options.emplace_back(std::string(line), std::string{});
        } else {
            options.emplace_back(std::string(line.substr(0, tab)), std::string(line.substr(tab + 1)));
        }
    }
    return options;
}

ChatHandler identity_reformulator() {
    return [](const ChatRequest& r) { return "REWRITTEN: " + one_line(field(r, kQuery)) + "\nCONCEPTS:\n"; };
}

ChatHandler lexicon_reformulator(SynonymLexicon lexicon) {
    return [lexicon = std::move(lexicon)](const ChatRequest& r) {
        const std::string query = one_line(field(r, kQuery));
        const auto expansions = lexicon.expansions_for(query);
        std::string rewritten = query;
        for (const auto& e : expansions) rewritten += " " + e;
        std::string out = "REWRITTEN: " + rewritten + "\nCONCEPTS:\n";
        for (const auto& e : expansions) out += e + "\n";
        return out;
    };
}

ChatHandler overlap_decider() {
    return [](const ChatRequest& r) {
        const auto d = stub_decide(field(r, kQuestion), decode_options(field(r, kOptions)), field(r, kEvidence));
        return "Reasoning: compare each option's terms against the evidence.\nANSWER: " + d.label +
               "\nEXPLANATION: " + d.explanation + "\nCONFIDENCE: " + format_real(d.confidence) + "\n";
    };
}

ChatHandler accept_validator() {
    return [](const ChatRequest&) { return std::string("VERDICT: ACCEPT\nCRITIQUE: none\n"); };
}

ChatHandler revise_validator() {
    return [](const ChatRequest&) {
        return std::string("VERDICT: REVISE\nCRITIQUE: Re-check the explanation against the cited evidence.\n");
    };
}

ChatHandler threshold_validator() {
    return [](const ChatRequest& r) {
        double confidence = 0.0, threshold = 0.0;
        const auto c = field(r, kConfidence), t = field(r, kThreshold);
        std::from_chars(c.data(), c.data() + c.size(), confidence);
        std::from_chars(t.data(), t.data() + t.size(), threshold);
        if (confidence >= threshold) return std::string("VERDICT: ACCEPT\nCRITIQUE: none\n");
        return "VERDICT: REVISE\nCRITIQUE: Confidence " + format_real(confidence) + " is below " +
               format_real(threshold) + "; find stronger support in the evidence.\n";
    };
}

ChatHandler echo_condenser() {
    return [](const ChatRequest& r) { return "CONDENSED: " + field(r, kText) + "\n"; };
}

std::unique_ptr<StubChatProvider> make_stub_chat(const SynonymLexicon& lexicon) {
    auto chat = std::make_unique<StubChatProvider>();
    chat->on(task::kReformulate, lexicon.entries().empty() ? identity_reformulator() : lexicon_reformulator(lexicon))
        .on(task::kDecide, overlap_decider())
        .on(task::kValidate, threshold_validator())
        .on(task::kCondense, echo_condenser());
    return chat;
}

}  // namespace stub

}  // namespace acr
