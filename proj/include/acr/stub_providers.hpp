#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "acr/providers.hpp"

namespace acr {

inline constexpr int kStubEmbedDim = 64;

/// Hashed signed bag-of-words embedding. Each token t adds +/-1 at
/// fnv1a64(t) mod dim, the sign taken from the parity of fnv1a64(t + 0xFF).
/// The sum is L2-normalized; no tokens gives the zero vector.
Embedding stub_embed(std::string_view text, int dim = kStubEmbedDim);

class StubEmbedder final : public Embedder {
public:
    explicit StubEmbedder(int dim = kStubEmbedDim);
    std::vector<Embedding> embed(std::span<const std::string> texts) override;
    std::string id() const override;
    std::optional<int> dim() const override { return dim_; }

private:
    int dim_;
};

struct StubDecision {
    std::string label;
    std::string explanation;
    double confidence = 0.0;
};

/// Picks the option sharing the most distinct tokens with the evidence.
/// confidence = shared / max(1, distinct option tokens); ties go to the
/// lowest label.
StubDecision stub_decide(std::string_view question, const OptionList& options, std::string_view evidence);

/// Phrase -> expansion table used by the scripted reformulator.
class SynonymLexicon {
public:
    SynonymLexicon() = default;
    explicit SynonymLexicon(std::vector<std::pair<std::string, std::string>> entries);

    /// Tab-separated `phrase<TAB>expansion` lines; '#' starts a comment line.
    static SynonymLexicon load(const std::filesystem::path& path);

    /// Expansions whose phrase occurs as a contiguous token run in `text`,
    /// in table order, each once.
    std::vector<std::string> expansions_for(std::string_view text) const;

    const auto& entries() const noexcept { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::vector<std::vector<std::string>> phrase_tokens_;
};

using ChatHandler = std::function<std::string(const ChatRequest&)>;

/// Deterministic chat provider answering by request tag.
class StubChatProvider final : public ChatProvider {
public:
    StubChatProvider() = default;

    StubChatProvider& on(std::string tag, ChatHandler handler);
    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override { return "stub"; }

private:
    std::map<std::string, ChatHandler, std::less<>> handlers_;
};

/// Request tags for the pipeline's model calls.
namespace task {
inline constexpr const char* kReformulate = "reformulate";
inline constexpr const char* kCondense = "condense";
inline constexpr const char* kDecide = "decide";
inline constexpr const char* kValidate = "validate";
}  // namespace task

namespace stub {

/// Field names shared between prompt builders and stub handlers.
inline constexpr const char* kQuery = "query";
inline constexpr const char* kQuestion = "question";
inline constexpr const char* kOptions = "options";  // "label\ttext" lines
inline constexpr const char* kEvidence = "evidence";
inline constexpr const char* kCritique = "critique";
inline constexpr const char* kAnswer = "answer";
inline constexpr const char* kExplanation = "explanation";
inline constexpr const char* kConfidence = "confidence";
inline constexpr const char* kThreshold = "threshold";
inline constexpr const char* kText = "text";

std::string encode_options(const OptionList& options);
OptionList decode_options(std::string_view encoded);

ChatHandler identity_reformulator();
ChatHandler lexicon_reformulator(SynonymLexicon lexicon);
/// Applies stub_decide to the question/options/evidence fields.
ChatHandler overlap_decider();
ChatHandler accept_validator();
ChatHandler revise_validator();
/// ACCEPT iff the decision's confidence reaches the request's threshold.
ChatHandler threshold_validator();
ChatHandler echo_condenser();

/// reformulate (lexicon, or identity when empty) + decide + validate + condense.
std::unique_ptr<StubChatProvider> make_stub_chat(const SynonymLexicon& lexicon = {});

}  // namespace stub

}  // namespace acr
