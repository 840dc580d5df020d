#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "acr/error.hpp"
#include "acr/stub_providers.hpp"
#include "oracles.hpp"

using namespace acr;

namespace {

using Entries = std::vector<std::pair<std::string, std::string>>;

double norm(const Embedding& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// Local server speaking the chat/embeddings wire format.
class MockServer {
public:
    /// Routes are installed before the listener thread starts.
    explicit MockServer(const std::function<void(httplib::Server&)>& routes) {
        routes(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockServer() {
        server_.stop();
        thread_.join();
    }
    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

ProviderConfig config_for(const std::string& base_url) {
    ProviderConfig cfg;
    cfg.base_url = base_url;
    cfg.api_key = "test-key";
    cfg.model_name = "mock-model";
    cfg.timeout_s = 2.0;
    cfg.max_retries = 2;
    cfg.backoff_base_s = 0.01;
    return cfg;
}

ChatRequest one_message(const std::string& text) {
    ChatRequest req;
    req.messages.push_back({"user", text});
    return req;
}

}  // namespace

TEST_CASE("stub embedding conventions") {
    CHECK(stub_embed("") == Embedding(64, 0.0));
    CHECK(stub_embed("---") == Embedding(64, 0.0));
    CHECK(stub_embed("low latency") == stub_embed("latency low"));
    CHECK(stub_embed("Low LATENCY") == stub_embed("low latency"));
    CHECK(norm(stub_embed("handover")) == doctest::Approx(1.0).epsilon(1e-12));

    const auto single = stub_embed("handover");
    int nonzero = 0;
    for (double x : single) nonzero += x != 0.0;
    CHECK(nonzero == 1);

    const std::string a = "beam failure recovery procedure";
    CHECK(cosine(stub_embed(a), stub_embed(a + " " + a)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(stub_embed("x", 7).size() == 7);
    CHECK_THROWS_AS(stub_embed("x", 0), ConfigError);
}

TEST_CASE("stub embedding equals its definition") {
    for (const char* text : {"carrier aggregation", "a b c d e f g", "5G NR sidelink sidelink", "x"}) {
        const auto got = stub_embed(text, 16);
        const auto want = oracle::stub_embed(text, 16);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-15));
    }
}

TEST_CASE("StubEmbedder preserves order and cardinality") {
    StubEmbedder e;
    const std::vector<std::string> texts{"alpha", "", "alpha", "beta gamma"};
    const auto out = e.embed(texts);
    REQUIRE(out.size() == 4);
    CHECK(out[0] == out[2]);
    CHECK(out[1] == Embedding(64, 0.0));
    CHECK(out[3] == stub_embed("beta gamma"));
    CHECK(e.id() == "stub-fnv1a-64");
    CHECK(e.dim() == 64);
}

TEST_CASE("stub_decide") {
    const OptionList opts{{"option 1", "high throughput"}, {"option 2", "one millisecond latency"}};
    SUBCASE("worked example") {
        const auto d = stub_decide("q", opts, "URLLC targets one millisecond latency");
        CHECK(d.label == "option 2");
        CHECK(d.confidence == 1.0);
        CHECK(d.explanation.find("millisecond") != std::string::npos);
    }
    SUBCASE("empty evidence picks the lowest label") {
        const auto d = stub_decide("q", opts, "");
        CHECK(d.label == "option 1");
        CHECK(d.confidence == 0.0);
    }
    SUBCASE("partial overlap") {
        const auto d = stub_decide("q", opts, "high latency links");
        // Both options share one token; the tie goes to option 1 (1 of 2 tokens).
        CHECK(d.label == "option 1");
        CHECK(d.confidence == 0.5);
    }
    SUBCASE("labels order naturally") {
        const OptionList many{{"option 10", "x"}, {"option 2", "x"}};
        CHECK(stub_decide("q", many, "").label == "option 2");
    }
}

TEST_CASE("label_less is a natural order") {
    CHECK(label_less("option 2", "option 10"));
    CHECK_FALSE(label_less("option 10", "option 2"));
    CHECK(label_less("option 1", "option 2"));
    CHECK_FALSE(label_less("option 3", "option 3"));
    CHECK(label_less("a", "b"));
}

TEST_CASE("parse_sections") {
    const std::string_view names[] = {"ANSWER", "EXPLANATION", "CONFIDENCE"};
    const auto s = parse_sections(
        "Let me think.\n**Answer**: option 3\nexplanation: first line\nsecond line\n"
        "## CONFIDENCE: 0.8\n",
        names);
    CHECK(s.at("ANSWER") == "option 3");
    CHECK(s.at("EXPLANATION") == "first line\nsecond line");
    CHECK(s.at("CONFIDENCE") == "0.8");
    CHECK(parse_sections("nothing here", names).empty());
}

TEST_CASE("cosine and normalize") {
    Embedding z{0, 0};
    normalize(z);
    CHECK(z == Embedding{0, 0});
    Embedding v{3, 4};
    normalize(v);
    CHECK(v[0] == doctest::Approx(0.6));
    CHECK(cosine(Embedding{1, 0}, Embedding{0, 0}) == 0.0);
    CHECK(cosine(Embedding{1, 1}, Embedding{2, 2}) == doctest::Approx(1.0));
}

TEST_CASE("synonym lexicon expansions") {
    SynonymLexicon lex({{"low latency", "low delay"}, {"phone", "user equipment"}, {"latency", "low delay"}});
    CHECK(lex.expansions_for("I need Low-Latency links") == std::vector<std::string>{"low delay"});
    CHECK(lex.expansions_for("my phone") == std::vector<std::string>{"user equipment"});
    CHECK(lex.expansions_for("latency low").size() == 1);  // only the single-token phrase matches
    CHECK(lex.expansions_for("nothing").empty());
    CHECK_THROWS_AS(SynonymLexicon(Entries{{"--", "x"}}), ConfigError);
}

TEST_CASE("stub chat provider answers by tag") {
    auto chat = stub::make_stub_chat(SynonymLexicon(Entries{{"low latency", "low delay"}}));
    ChatRequest req = one_message("rewrite");
    req.tag = task::kReformulate;
    req.fields[stub::kQuery] = "low latency control";
    const auto first = chat->complete(req).text;
    CHECK(first == chat->complete(req).text);
    CHECK(first.find("REWRITTEN: low latency control low delay") != std::string::npos);

    req.tag = "unknown";
    CHECK_THROWS_AS(chat->complete(req), ProviderError);
}

TEST_CASE("options encode/decode round-trip") {
    const OptionList opts{{"option 1", "a\tb"}, {"option 2", "multi\nline"}};
    const auto back = stub::decode_options(stub::encode_options(opts));
    REQUIRE(back.size() == 2);
    CHECK(back[1].first == "option 2");
    CHECK(back[1].second == "multi line");
}

TEST_CASE("provider config validation") {
    ProviderConfig cfg = config_for("http://localhost:1");
    CHECK_NOTHROW(cfg.validate());
    cfg.timeout_s = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = config_for("http://localhost:1");
    cfg.max_retries = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = config_for("");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("chat_complete against a local server") {
    std::string seen_auth, seen_model;
    MockServer mock([&](httplib::Server& srv) {
        srv.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
            seen_auth = req.get_header_value("Authorization");
            seen_model = nlohmann::json::parse(req.body).at("model");
            res.set_content(R"({"choices":[{"index":0,"message":{"role":"assistant","content":"option 2"}}]})",
                            "application/json");
        });
    });
    const auto cfg = config_for(mock.base_url());
    CHECK(chat_complete(cfg, one_message("Which option?")).text == "option 2");
    CHECK(seen_auth == "Bearer test-key");
    CHECK(seen_model == "mock-model");

    HttpChatProvider provider(cfg);
    CHECK(provider.complete(one_message("again")).text == "option 2");
    CHECK(provider.id() == "http:mock-model");
}

TEST_CASE("chat_complete surfaces HTTP errors and empty completions") {
    std::atomic<int> calls{0};
    MockServer mock([&](httplib::Server& srv) {
        srv.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
            ++calls;
            res.status = 429;
            res.set_content("rate limited, slow down", "text/plain");
        });
        srv.Post("/empty/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"choices":[{"message":{"content":""}}]})", "application/json");
        });
    });
    try {
        chat_complete(config_for(mock.base_url()), one_message("x"));
        FAIL("expected a provider error");
    } catch (const ProviderError& e) {
        CHECK(e.status() == 429);
        CHECK(std::string(e.what()).find("rate limited") != std::string::npos);
    }
    CHECK(calls == 1);  // HTTP errors are not retried

    auto cfg = config_for(mock.base_url());
    cfg.base_url = cfg.base_url.substr(0, cfg.base_url.size() - 3) + "/empty";
    CHECK_THROWS_WITH_AS(chat_complete(cfg, one_message("x")), doctest::Contains("empty completion"), ProviderError);
}

TEST_CASE("transport failures retry max_retries + 1 times") {
    std::atomic<int> calls{0};
    MockServer mock([&](httplib::Server& srv) {
        srv.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
            ++calls;
            std::this_thread::sleep_for(std::chrono::milliseconds(400));
            res.set_content("{}", "application/json");
        });
    });
    auto cfg = config_for(mock.base_url());
    cfg.timeout_s = 0.1;
    cfg.max_retries = 2;
    CHECK_THROWS_WITH_AS(chat_complete(cfg, one_message("x")), doctest::Contains("after 3 attempts"), ProviderError);
    CHECK(calls == 3);
}

TEST_CASE("unreachable base_url fails with a transport error") {
    // Bind a port, then close it, so nothing listens there.
    int port = 0;
    {
        httplib::Server s;
        port = s.bind_to_any_port("127.0.0.1");
    }
    auto cfg = config_for("http://127.0.0.1:" + std::to_string(port));
    cfg.max_retries = 1;
    try {
        chat_complete(cfg, one_message("x"));
        FAIL("expected a transport error");
    } catch (const ProviderError& e) {
        CHECK(e.status() == 0);
        CHECK(std::string(e.what()).find("after 2 attempts") != std::string::npos);
    }
}

TEST_CASE("embed_texts normalizes, honors index order and checks dimensions") {
    MockServer mock([&](httplib::Server& srv) {
        srv.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
            const auto body = nlohmann::json::parse(req.body);
            const auto inputs = body.at("input");
            if (inputs[0] == "ragged") {
                res.set_content(R"({"data":[{"index":0,"embedding":[1,2]},{"index":1,"embedding":[1]}]})",
                                "application/json");
                return;
            }
            nlohmann::json data = nlohmann::json::array();
            // Reply in reverse order with explicit indexes.
            for (std::size_t i = inputs.size(); i-- > 0;) {
                data.push_back({{"index", i}, {"embedding", {3.0 * static_cast<double>(i + 1), 4.0}}});
            }
            res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
        });
    });
    const auto cfg = config_for(mock.base_url());
    const std::vector<std::string> texts{"a", "b"};
    const auto out = embed_texts(cfg, texts);
    REQUIRE(out.size() == 2);
    CHECK(out[0][0] == doctest::Approx(0.6));
    CHECK(out[0][1] == doctest::Approx(0.8));
    CHECK(norm(out[1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out[1][0] == doctest::Approx(6.0 / std::sqrt(52.0)));

    const std::vector<std::string> ragged{"ragged", "x"};
    CHECK_THROWS_WITH_AS(embed_texts(cfg, ragged), doctest::Contains("dimension mismatch"), ProviderError);
}
