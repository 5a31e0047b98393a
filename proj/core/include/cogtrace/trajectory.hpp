#pragma once

#include <cogtrace/event_model.hpp>
#include <cogtrace/observer.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cogtrace {

enum class TaskMode { given_task, free_task, non_task };
enum class Difficulty { easy, medium, hard };
enum class Outcome { finished, failed, discarded, open };

std::string_view task_mode_name(TaskMode mode) noexcept;
std::string_view difficulty_name(Difficulty d) noexcept;
std::string_view outcome_name(Outcome o) noexcept;
std::optional<TaskMode> task_mode_from_name(std::string_view name) noexcept;
std::optional<Difficulty> difficulty_from_name(std::string_view name) noexcept;
std::optional<Outcome> outcome_from_name(std::string_view name) noexcept;

struct TaskMetadata {
    TaskMode mode = TaskMode::non_task;
    std::optional<std::string> description;
    std::optional<Difficulty> difficulty;
    Outcome outcome = Outcome::open;
    /// Library entry the session was started from (given_task only).
    std::optional<std::string> task_id;

    friend bool operator==(const TaskMetadata&, const TaskMetadata&) = default;
};

/// Critical event: an action and the observation taken just before it.
struct TrajectoryStep {
    Millis ts = 0;
    UnifiedAction action;
    Observation observation;
    std::optional<std::string> thought;
    /// Red-marked copy of the observation for click-related steps, relative to
    /// the trajectory directory.
    std::optional<std::string> marked_image_ref;

    friend bool operator==(const TrajectoryStep&, const TrajectoryStep&) = default;
};

struct Trajectory {
    std::string id;
    TaskMetadata task;
    ScreenSize screen;
    std::vector<TrajectoryStep> steps;
    /// Wall-clock creation time, ISO-8601 UTC.
    std::string created_at;
    /// Screen region covered by the tracker's own window; clicks inside it are
    /// tracker self-interactions.
    std::optional<Rect> tracker_ui_region;

    bool ends_with_terminal() const noexcept {
        return !steps.empty() &&
               (steps.back().action.kind == ActionKind::finish || steps.back().action.kind == ActionKind::fail);
    }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

}  // namespace cogtrace
