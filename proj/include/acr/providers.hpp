#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace acr {

/// Connection settings for an external chat/embedding service.
struct ProviderConfig {
    std::string base_url;
    std::string api_key;
    std::string model_name;
    double timeout_s = 60.0;
    int max_retries = 2;
    /// First retry delay; each further retry doubles it.
    double backoff_base_s = 0.5;

    void validate() const;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

/// `tag` and `fields` never go over the wire. They name the task and carry
/// the structured inputs the messages were rendered from, so deterministic
/// stand-in providers can answer without re-parsing prompt text.
struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::string tag;
    std::map<std::string, std::string> fields;
};

struct ChatResponse {
    std::string text;
    /// Labeled sections ("ANSWER", "CONFIDENCE", ...) found in `text`.
    std::map<std::string, std::string> sections;
};

/// Dense text embedding. Unit L2 norm, or all zeros for empty input.
using Embedding = std::vector<double>;

/// Ordered label -> text options of a multiple-choice question.
using OptionList = std::vector<std::pair<std::string, std::string>>;

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
    virtual std::string id() const = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    /// One vector per input, same order, all of one dimension.
    virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
    /// Identifies the embedding space; indexes pin it.
    virtual std::string id() const = 0;
    /// Output dimension when known without a request.
    virtual std::optional<int> dim() const { return std::nullopt; }
};

/// POST {base_url}/chat/completions; returns choices[0].message.content.
/// Retries transport failures up to max_retries times with exponential backoff.
ChatResponse chat_complete(const ProviderConfig& cfg, const ChatRequest& request);

/// POST {base_url}/embeddings; returns L2-normalized data[i].embedding.
std::vector<Embedding> embed_texts(const ProviderConfig& cfg, std::span<const std::string> texts);

class HttpChatProvider final : public ChatProvider {
public:
    explicit HttpChatProvider(ProviderConfig cfg);
    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override;

private:
    ProviderConfig cfg_;
};

class HttpEmbedder final : public Embedder {
public:
    explicit HttpEmbedder(ProviderConfig cfg);
    std::vector<Embedding> embed(std::span<const std::string> texts) override;
    std::string id() const override;

private:
    ProviderConfig cfg_;
};

/// In-place L2 normalization; zero vectors stay zero.
void normalize(Embedding& v);

/// Cosine similarity; 0 when either side is the zero vector.
double cosine(std::span<const double> a, std::span<const double> b);

/// Extracts "NAME: value" sections from model output. Section names match
/// case-insensitively at line starts; a section runs until the next known
/// name. Keys in the result are the upper-cased names given.
std::map<std::string, std::string> parse_sections(std::string_view text, std::span<const std::string_view> names);

/// Natural ordering for option labels ("option 2" < "option 10").
bool label_less(std::string_view a, std::string_view b);

}  // namespace acr
