#include <cogtrace/action_dsl.hpp>
#include <cogtrace/markdown.hpp>

#include <sstream>

namespace cogtrace {

std::string export_markdown(const Trajectory& t) {
    std::ostringstream md;
    md << "# " << (t.task.description ? *t.task.description : std::string("Untitled recording")) << "\n\n";
    md << "- Trajectory: `" << t.id << "`\n";
    md << "- Mode: " << task_mode_name(t.task.mode) << "\n";
    if (t.task.difficulty) md << "- Difficulty: " << difficulty_name(*t.task.difficulty) << "\n";
    md << "- Outcome: " << outcome_name(t.task.outcome) << "\n";
    md << "- Screen: " << t.screen.width << "x" << t.screen.height << "\n";
    if (!t.created_at.empty()) md << "- Recorded: " << t.created_at << "\n";
    md << "- Steps: " << t.steps.size() << "\n";

    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& step = t.steps[i];
        md << "\n## Step " << (i + 1) << "\n\n";
        md << "`" << render_tracker_action(step.action) << "`\n\n";
        if (step.action.semantics) {
            const auto& sem = *step.action.semantics;
            if (sem.element_name) md << "Element: " << *sem.element_name << "\n\n";
            if (sem.description) md << "Target: " << *sem.description << "\n\n";
        }
        if (step.thought) md << "Thought: " << *step.thought << "\n\n";
        const std::string& image = step.marked_image_ref ? *step.marked_image_ref : step.observation.image_ref;
        md << "![step " << (i + 1) << "](" << image << ")\n";
    }
    return md.str();
}

}  // namespace cogtrace
