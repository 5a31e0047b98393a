#include <cogtrace/trajectory.hpp>

#include <array>
#include <utility>

namespace cogtrace {

namespace {

constexpr std::array<std::pair<TaskMode, std::string_view>, 3> kModes = {{
    {TaskMode::given_task, "given_task"},
    {TaskMode::free_task, "free_task"},
    {TaskMode::non_task, "non_task"},
}};
constexpr std::array<std::pair<Difficulty, std::string_view>, 3> kDifficulties = {{
    {Difficulty::easy, "easy"},
    {Difficulty::medium, "medium"},
    {Difficulty::hard, "hard"},
}};
constexpr std::array<std::pair<Outcome, std::string_view>, 4> kOutcomes = {{
    {Outcome::finished, "finished"},
    {Outcome::failed, "failed"},
    {Outcome::discarded, "discarded"},
    {Outcome::open, "open"},
}};

template <typename E, std::size_t N>
std::string_view name_in(const std::array<std::pair<E, std::string_view>, N>& table, E value) noexcept {
    for (const auto& [v, name] : table) {
        if (v == value) return name;
    }
    return "unknown";
}

template <typename E, std::size_t N>
std::optional<E> value_in(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view name) noexcept {
    for (const auto& [v, n] : table) {
        if (n == name) return v;
    }
    return std::nullopt;
}

}  // namespace

std::string_view task_mode_name(TaskMode mode) noexcept { return name_in(kModes, mode); }
std::string_view difficulty_name(Difficulty d) noexcept { return name_in(kDifficulties, d); }
std::string_view outcome_name(Outcome o) noexcept { return name_in(kOutcomes, o); }
std::optional<TaskMode> task_mode_from_name(std::string_view name) noexcept { return value_in(kModes, name); }
std::optional<Difficulty> difficulty_from_name(std::string_view name) noexcept { return value_in(kDifficulties, name); }
std::optional<Outcome> outcome_from_name(std::string_view name) noexcept { return value_in(kOutcomes, name); }

}  // namespace cogtrace
