#pragma once

#include <cogtrace/cognition.hpp>
#include <cogtrace/prompts.hpp>

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cogtrace {

/// One previous step as the planner sees it.
struct HistoryItem {
    std::string thought;
    std::string action_line;
    /// Environment feedback for this step, e.g. a grounding failure notice.
    std::optional<std::string> feedback;

    friend bool operator==(const HistoryItem&, const HistoryItem&) = default;
};

/// Planner query text. Shared by training export and the live planner so the
/// two are byte-identical for the same task and history.
std::string render_planner_query(const PromptLibrary& prompts, const std::string& task,
                                 std::span<const HistoryItem> history);

/// "Thought: ...\nAction: ..."
std::string render_planner_response(const std::string& thought, const std::string& action_line);

struct TrainingExample {
    std::string query;
    std::string response;
    /// Unmarked screenshot of the step.
    std::string image;

    friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

nlohmann::json training_example_json(const TrainingExample& example);

std::vector<HistoryItem> history_of(std::span<const CognitiveStep> steps);

/// Example for step `index`: the history is every earlier step.
TrainingExample render_training_example(const PromptLibrary& prompts, const std::string& task,
                                        std::span<const CognitiveStep> steps, std::size_t index,
                                        const std::string& image_ref);

}  // namespace cogtrace
