#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cogtrace/chat.hpp>
#include <cogtrace/errors.hpp>
#include <cogtrace/serialization.hpp>
#include <cogtrace/util.hpp>

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <thread>

namespace cogtrace {

std::string ChatRequest::all_text() const {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out += "\n";
        out += m.text;
    }
    return out;
}

std::size_t ChatRequest::image_count() const {
    std::size_t n = 0;
    for (const auto& m : messages) n += m.images.size();
    return n;
}

// ============================================================================
// Scripted
// ============================================================================

ScriptedChatClient::ScriptedChatClient(std::vector<Rule> rules) : rules_(std::move(rules)) {}
ScriptedChatClient::ScriptedChatClient(Responder responder) : responder_(std::move(responder)) {}

std::unique_ptr<ScriptedChatClient> ScriptedChatClient::from_file(const std::filesystem::path& path) {
    std::vector<Rule> rules;
    for (const auto& j : read_jsonl_file(path)) {
        Rule r;
        try {
            if (j.contains("purpose")) r.purpose = j.at("purpose").get<std::string>();
            if (j.contains("contains")) r.contains = j.at("contains").get<std::string>();
            if (j.contains("error")) r.error = j.at("error").get<std::string>();
            if (j.contains("times")) r.times = j.at("times").get<int>();
            r.reply = j.value("reply", std::string{});
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::parse_error, path.string() + ": bad script rule: " + e.what());
        }
        if (!r.error && !j.contains("reply")) throw Error(ErrorCode::parse_error, path.string() + ": rule needs reply or error");
        rules.push_back(std::move(r));
    }
    return std::make_unique<ScriptedChatClient>(std::move(rules));
}

ChatResponse ScriptedChatClient::complete(const ChatRequest& request) {
    std::lock_guard lock(mutex_);
    ledger_.push_back({request, std::nullopt});
    if (responder_) {
        ChatResponse r = responder_(request);
        ledger_.back().response = r;
        return r;
    }
    const std::string text = request.all_text();
    for (auto& rule : rules_) {
        if (rule.times && *rule.times <= 0) continue;
        if (rule.purpose && *rule.purpose != request.purpose) continue;
        if (rule.contains && text.find(*rule.contains) == std::string::npos) continue;
        if (rule.times) --*rule.times;
        if (rule.error) throw Error(ErrorCode::client_error, *rule.error);
        ChatResponse r{rule.reply, static_cast<int>(text.size() / 4), static_cast<int>(rule.reply.size() / 4)};
        ledger_.back().response = r;
        return r;
    }
    throw Error(ErrorCode::client_error, "no scripted reply for a '" + request.purpose + "' request");
}

std::vector<ScriptedChatClient::Exchange> ScriptedChatClient::ledger() const {
    std::lock_guard lock(mutex_);
    return ledger_;
}

std::size_t ScriptedChatClient::calls(std::string_view purpose_filter) const {
    std::lock_guard lock(mutex_);
    if (purpose_filter.empty()) return ledger_.size();
    std::size_t n = 0;
    for (const auto& e : ledger_) n += e.request.purpose == purpose_filter ? 1 : 0;
    return n;
}

void ScriptedChatClient::clear_ledger() {
    std::lock_guard lock(mutex_);
    ledger_.clear();
}

// ============================================================================
// HTTP
// ============================================================================

HttpChatClient::HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {
    const std::string& url = config_.endpoint;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos || (url.compare(0, scheme_end, "http") != 0 && url.compare(0, scheme_end, "https") != 0)) {
        throw Error(ErrorCode::invalid_argument, "chat endpoint must be an http or https URL");
    }
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/v1/chat/completions" : url.substr(path_start);
}

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
    Json messages = Json::array();
    for (const auto& m : request.messages) {
        Json content = Json::array();
        content.push_back({{"type", "text"}, {"text", m.text}});
        for (const auto& img : m.images) {
            const std::string bytes = read_file(img.path);
            const std::string b64 =
                base64_encode(std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
            content.push_back({{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + b64}}}});
        }
        messages.push_back({{"role", m.role}, {"content", content}});
    }
    const Json body{{"model", request.model.empty() ? config_.model : request.model},
                    {"messages", messages},
                    {"temperature", request.temperature},
                    {"max_tokens", request.max_tokens}};

    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key != nullptr && *key != '\0') {
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
        throw Error(ErrorCode::client_error, "chat endpoint unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::client_error, "chat endpoint answered HTTP " + std::to_string(res->status));
    }
    try {
        const Json reply = Json::parse(res->body);
        ChatResponse out;
        const Json& content = reply.at("choices").at(0).at("message").at("content");
        if (content.is_string()) {
            out.text = content.get<std::string>();
        } else {
            for (const auto& part : content) {
                if (part.value("type", "") == "text") out.text += part.value("text", "");
            }
        }
        if (reply.contains("usage")) {
            out.prompt_tokens = reply["usage"].value("prompt_tokens", 0);
            out.completion_tokens = reply["usage"].value("completion_tokens", 0);
        }
        return out;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::client_error, std::string("malformed chat response: ") + e.what());
    }
}

// ============================================================================
// Retry
// ============================================================================

RetryingChatClient::RetryingChatClient(std::shared_ptr<ChatClient> inner, RetryPolicy policy, Sleeper sleeper)
    : inner_(std::move(inner)), policy_(policy), sleeper_(std::move(sleeper)) {
    if (policy_.attempts < 1) throw Error(ErrorCode::invalid_argument, "retry policy needs at least one attempt");
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ChatResponse RetryingChatClient::complete(const ChatRequest& request) {
    auto backoff = policy_.initial_backoff;
    for (int attempt = 1;; ++attempt) {
        try {
            return inner_->complete(request);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::client_error || attempt >= policy_.attempts) throw;
            spdlog::warn("{} request failed (attempt {}/{}): {}", request.purpose, attempt, policy_.attempts, e.what());
            sleeper_(backoff);
            backoff = std::chrono::milliseconds(static_cast<long long>(backoff.count() * policy_.multiplier));
        }
    }
}

std::shared_ptr<ChatClient> make_chat_client(const std::string& spec, const std::string& model) {
    if (spec.rfind("mock:", 0) == 0) {
        return std::make_shared<RetryingChatClient>(std::shared_ptr<ChatClient>(ScriptedChatClient::from_file(spec.substr(5))));
    }
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
        HttpChatConfig cfg;
        cfg.endpoint = spec;
        cfg.model = model;
        return std::make_shared<RetryingChatClient>(std::make_shared<HttpChatClient>(cfg));
    }
    throw Error(ErrorCode::invalid_argument, "client must be mock:<file> or an http(s) URL, got '" + spec + "'");
}

}  // namespace cogtrace
