#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace cogtrace {

/// What a request is for; scripted clients route on it.
namespace purpose {
inline constexpr const char* describe = "describe";
inline constexpr const char* judge_description = "judge_description";
inline constexpr const char* thought = "thought";
inline constexpr const char* plan = "plan";
inline constexpr const char* ground = "ground";
inline constexpr const char* validate = "validate";
}  // namespace purpose

struct ChatImage {
    /// Lossless image file attached to the message.
    std::string path;
};

struct ChatMessage {
    std::string role = "user";
    std::string text;
    std::vector<ChatImage> images;
};

struct ChatRequest {
    std::string purpose;
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 1024;

    /// Concatenated text of every message, for assertions and matching.
    std::string all_text() const;
    std::size_t image_count() const;
};

struct ChatResponse {
    std::string text;
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

/// Chat-model transport. Implementations throw Error(client_error) on
/// transport or model failure.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Canned replies for tests and offline runs. Each rule may restrict the
/// request purpose and require a substring of the request text; the first
/// matching rule with uses left answers. A rule with `error` set fails the
/// call instead. Every request is recorded.
class ScriptedChatClient : public ChatClient {
public:
    struct Rule {
        std::optional<std::string> purpose;
        std::optional<std::string> contains;
        std::string reply;
        std::optional<std::string> error;
        /// Remaining uses; nullopt is unlimited.
        std::optional<int> times;
    };
    struct Exchange {
        ChatRequest request;
        std::optional<ChatResponse> response;  // empty when the call failed
    };
    using Responder = std::function<ChatResponse(const ChatRequest&)>;

    explicit ScriptedChatClient(std::vector<Rule> rules);
    explicit ScriptedChatClient(Responder responder);

    /// JSONL rules: {"purpose", "contains", "reply", "error", "times"}.
    static std::unique_ptr<ScriptedChatClient> from_file(const std::filesystem::path& path);

    ChatResponse complete(const ChatRequest& request) override;

    std::vector<Exchange> ledger() const;
    std::size_t calls(std::string_view purpose_filter = {}) const;
    void clear_ledger();

private:
    mutable std::mutex mutex_;
    std::vector<Rule> rules_;
    Responder responder_;
    std::vector<Exchange> ledger_;
};

struct HttpChatConfig {
    /// Full URL of a chat-completions endpoint, http or https.
    std::string endpoint;
    std::string model = "default";
    /// Name of the environment variable holding the bearer token; the token
    /// itself never appears in configs or logs.
    std::string api_key_env = "COGTRACE_API_KEY";
    std::chrono::seconds timeout{120};
};

/// Speaks the common chat-completions JSON format; images go inline as
/// base64 data URLs.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(HttpChatConfig config);
    ChatResponse complete(const ChatRequest& request) override;

    const HttpChatConfig& config() const noexcept { return config_; }

private:
    HttpChatConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
};

/// Retries client_error failures with exponential backoff, then rethrows the
/// last error.
class RetryingChatClient : public ChatClient {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    RetryingChatClient(std::shared_ptr<ChatClient> inner, RetryPolicy policy = {}, Sleeper sleeper = {});
    ChatResponse complete(const ChatRequest& request) override;

private:
    std::shared_ptr<ChatClient> inner_;
    RetryPolicy policy_;
    Sleeper sleeper_;
};

/// "mock:<file>" or an http(s) URL, wrapped in the default retry policy.
std::shared_ptr<ChatClient> make_chat_client(const std::string& spec, const std::string& model = "default");

}  // namespace cogtrace
