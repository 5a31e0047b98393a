#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cogtrace {

namespace assets {
/// Generated at build time from core/assets/prompts/*.txt.
const std::vector<std::pair<std::string_view, std::string_view>>& embedded_prompts();
}  // namespace assets

namespace prompt_names {
inline constexpr std::string_view click_description = "click_description.v1";
inline constexpr std::string_view click_refinement = "click_refinement.v1";
inline constexpr std::string_view thought_completion = "thought_completion.v1";
inline constexpr std::string_view system_prompt = "system_prompt.v1";
inline constexpr std::string_view grounding = "grounding.v1";
inline constexpr std::string_view grounding_validation = "grounding_validation.v1";
inline constexpr std::string_view reformulation_notice = "reformulation_notice.v1";
}  // namespace prompt_names

/// Versioned prompt templates. Starts from the compiled-in set; a directory of
/// `<name>.txt` files may replace individual entries.
class PromptLibrary {
public:
    PromptLibrary();

    static const PromptLibrary& builtin();

    /// Replaces every template that has a matching file in `dir`.
    void load_overrides(const std::filesystem::path& dir);
    void set(std::string name, std::string text);

    /// Throws Error(not_found) for an unknown name.
    const std::string& get(std::string_view name) const;
    std::string checksum(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

/// Replaces `{key}` placeholders. Only used for our own templates; the
/// completion templates contain literal braces and are never substituted.
std::string fill_placeholders(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace cogtrace
