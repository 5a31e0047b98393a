#include <cogtrace/errors.hpp>
#include <cogtrace/prompts.hpp>
#include <cogtrace/util.hpp>

namespace cogtrace {

PromptLibrary::PromptLibrary() {
    for (const auto& [name, text] : assets::embedded_prompts()) {
        std::string body(text);
        // Asset files end with a newline; the template is the text before it.
        while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
        templates_.emplace(std::string(name), std::move(body));
    }
}

const PromptLibrary& PromptLibrary::builtin() {
    static const PromptLibrary lib;
    return lib;
}

void PromptLibrary::load_overrides(const std::filesystem::path& dir) {
    for (auto& [name, text] : templates_) {
        const auto file = dir / (name + ".txt");
        if (!std::filesystem::exists(file)) continue;
        std::string body = read_file(file);
        while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
        text = std::move(body);
    }
}

void PromptLibrary::set(std::string name, std::string text) { templates_[std::move(name)] = std::move(text); }

const std::string& PromptLibrary::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw Error(ErrorCode::not_found, "no prompt template named " + std::string(name));
    return it->second;
}

std::string PromptLibrary::checksum(std::string_view name) const { return sha256_hex(std::string_view(get(name))); }

std::vector<std::string> PromptLibrary::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : templates_) out.push_back(name);
    return out;
}

std::string fill_placeholders(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values) {
    std::string out(tmpl);
    for (const auto& [key, value] : values) {
        const std::string token = "{" + key + "}";
        for (std::size_t pos = out.find(token); pos != std::string::npos; pos = out.find(token, pos + value.size())) {
            out.replace(pos, token.size(), value);
        }
    }
    return out;
}

}  // namespace cogtrace
