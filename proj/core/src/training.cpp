#include <cogtrace/training.hpp>

#include <sstream>

namespace cogtrace {

std::string render_planner_query(const PromptLibrary& prompts, const std::string& task,
                                 std::span<const HistoryItem> history) {
    std::ostringstream out;
    out << prompts.get(prompt_names::system_prompt) << "\n\n";
    out << "Task: " << task << "\n\n";
    out << "History:\n";
    if (history.empty()) out << "None\n";
    for (std::size_t k = 0; k < history.size(); ++k) {
        out << "Step " << (k + 1) << ":\n";
        out << "Thought: " << history[k].thought << "\n";
        out << "Action: " << history[k].action_line << "\n";
        if (history[k].feedback) out << "Feedback: " << *history[k].feedback << "\n";
    }
    out << "\nThe screenshot of the current screen is attached.";
    return out.str();
}

std::string render_planner_response(const std::string& thought, const std::string& action_line) {
    return "Thought: " + thought + "\nAction: " + action_line;
}

nlohmann::json training_example_json(const TrainingExample& example) {
    return {{"query", example.query}, {"response", example.response}, {"image", example.image}};
}

std::vector<HistoryItem> history_of(std::span<const CognitiveStep> steps) {
    std::vector<HistoryItem> out;
    out.reserve(steps.size());
    for (const auto& s : steps) out.push_back({s.thought, s.action_line(), std::nullopt});
    return out;
}

TrainingExample render_training_example(const PromptLibrary& prompts, const std::string& task,
                                        std::span<const CognitiveStep> steps, std::size_t index,
                                        const std::string& image_ref) {
    const auto history = history_of(steps.first(index));
    const auto& step = steps[index];
    return {render_planner_query(prompts, task, history), render_planner_response(step.thought, step.action_line()),
            image_ref};
}

}  // namespace cogtrace
