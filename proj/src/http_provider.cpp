#include <chrono>
#include <cmath>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "acr/error.hpp"
#include "acr/providers.hpp"

namespace acr {

using nlohmann::json;

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path below the origin, no trailing slash
};

Endpoint split_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("provider base_url needs a scheme: " + base_url);
    const auto path_start = base_url.find('/', scheme_end + 3);
    Endpoint ep;
    ep.origin = base_url.substr(0, path_start);
    if (path_start != std::string::npos) ep.prefix = base_url.substr(path_start);
    while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
    return ep;
}

std::string excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

// POSTs a JSON body and returns the parsed 2xx response.
json post_json(const ProviderConfig& cfg, const std::string& route, const json& body) {
    cfg.validate();
    const Endpoint ep = split_base_url(cfg.base_url);
    httplib::Client client(ep.origin);
    const auto secs = static_cast<time_t>(cfg.timeout_s);
    const auto usecs = static_cast<time_t>((cfg.timeout_s - std::floor(cfg.timeout_s)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
    const std::string payload = body.dump();
    const std::string path = ep.prefix + route;

    std::string last_error;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        if (attempt > 0) {
            const double delay = cfg.backoff_base_s * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " + excerpt(res->body),
                                res->status);
        }
        try {
            return json::parse(res->body);
        } catch (const json::parse_error& e) {
            throw ProviderError(std::string("provider returned invalid JSON: ") + e.what(), res->status);
        }
    }
    throw ProviderError("transport failure after " + std::to_string(cfg.max_retries + 1) + " attempts to " + ep.origin +
                        path + ": " + last_error);
}

}  // namespace

ChatResponse chat_complete(const ProviderConfig& cfg, const ChatRequest& request) {
    if (request.messages.empty()) throw Error("chat request has no messages");
    json messages = json::array();
    for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    const json body = {{"model", cfg.model_name}, {"messages", messages}, {"temperature", request.temperature}};
    const json reply = post_json(cfg, "/chat/completions", body);

    ChatResponse out;
    try {
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        if (content.is_string()) out.text = content.get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected chat response shape: ") + e.what());
    }
    if (out.text.empty()) throw ProviderError("provider returned an empty completion");
    return out;
}

std::vector<Embedding> embed_texts(const ProviderConfig& cfg, std::span<const std::string> texts) {
    if (texts.empty()) throw Error("embedding request has no inputs");
    const json body = {{"model", cfg.model_name}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    const json reply = post_json(cfg, "/embeddings", body);

    std::vector<Embedding> out;
    try {
        const auto& data = reply.at("data");
        if (data.size() != texts.size()) {
            throw ProviderError("provider returned " + std::to_string(data.size()) + " embeddings for " +
                                std::to_string(texts.size()) + " inputs");
        }
        out.resize(texts.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            // Honor an explicit index field when present; otherwise list order.
            const std::size_t slot = data[i].contains("index") ? data[i].at("index").get<std::size_t>() : i;
            if (slot >= out.size()) throw ProviderError("embedding index out of range");
            out[slot] = data[i].at("embedding").get<Embedding>();
        }
    } catch (const json::exception& e) {
        throw ProviderError(std::string("unexpected embedding response shape: ") + e.what());
    }
    for (auto& v : out) {
        if (v.size() != out.front().size()) throw ProviderError("embedding dimension mismatch within batch");
        normalize(v);
    }
    return out;
}

HttpChatProvider::HttpChatProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

ChatResponse HttpChatProvider::complete(const ChatRequest& request) { return chat_complete(cfg_, request); }

std::string HttpChatProvider::id() const { return "http:" + cfg_.model_name; }

HttpEmbedder::HttpEmbedder(ProviderConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

std::vector<Embedding> HttpEmbedder::embed(std::span<const std::string> texts) { return embed_texts(cfg_, texts); }

std::string HttpEmbedder::id() const { return "http:" + cfg_.model_name; }

}  // namespace acr
