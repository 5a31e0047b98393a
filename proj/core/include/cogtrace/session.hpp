#pragma once

#include <cogtrace/capture.hpp>
#include <cogtrace/encapsulator.hpp>
#include <cogtrace/observer.hpp>
#include <cogtrace/store.hpp>
#include <cogtrace/task_library.hpp>
#include <cogtrace/trajectory.hpp>

#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace cogtrace {

struct SessionOptions {
    EncapsulatorConfig encapsulator;
    Millis capture_period_ms = 100;
    /// Number of recent action lines kept for the live ticker.
    std::size_t ticker_size = 20;
    std::function<std::string()> id_factory = new_trajectory_id;
    std::function<std::string()> clock = utc_now_string;

    static std::string utc_now_string();
};

struct SessionStart {
    TaskMode mode = TaskMode::non_task;
    std::optional<TaskEntry> task;
    ScreenSize screen{1920, 1080};
    std::optional<Rect> tracker_ui_region;
    /// Element lookup for click targets; null records clicks without element info.
    std::shared_ptr<ElementProvider> provider;
};

struct SessionInfo {
    std::string id;
    TaskMetadata task;
    ScreenSize screen;
    std::size_t step_count = 0;
    std::vector<std::string> recent_actions;
};

/// Recording session lifecycle over one store: at most one open session.
///
/// The recorder feeds frames into an ObservationCache and raw events into the
/// Encapsulator; every emitted action becomes a step paired with the newest
/// frame captured at or before it and appended to the staging area. Finish
/// publishes the trajectory atomically; discard deletes everything.
class SessionManager {
public:
    explicit SessionManager(TrajectoryStore& store, SessionOptions options = {});
    ~SessionManager();

    /// Throws Error(session_already_active); Error(invalid_argument) when a
    /// given_task session has no task or a non_task session has one.
    SessionInfo start_session(SessionStart start);

    /// Frame from an image file (copied into the trajectory when used).
    void record_frame(const std::string& id, Observation obs);
    /// Frame from encoded image bytes.
    void record_frame_bytes(const std::string& id, Millis capture_ts, std::string_view png_bytes,
                            std::optional<std::string> screen_state = std::nullopt);
    /// Returns the actions completed by this event (already appended as steps).
    std::vector<TimedAction> record_event(const std::string& id, const RawInputEvent& event);

    /// Throws Error(session_not_active), Error(missing_description) for a
    /// free_task without description, Error(invalid_argument) for a revised
    /// description on a non_task session. The session stays open on error.
    Trajectory finish_session(const std::string& id, Outcome outcome,
                              std::optional<std::string> revised_description = std::nullopt,
                              std::optional<Difficulty> difficulty = std::nullopt);
    void discard_session(const std::string& id);
    /// Discards whatever is open; used on shutdown.
    void discard_active();

    std::optional<SessionInfo> active() const;

private:
    struct Active;
    Active& require_active(const std::string& id);
    void append_action(Active& a, const TimedAction& action);

    TrajectoryStore& store_;
    SessionOptions options_;
    mutable std::mutex mutex_;
    std::unique_ptr<Active> active_;
};

/// Drives a recorded capture log through a session: frames are cached before
/// any event with an equal or later timestamp.
void replay_capture(SessionManager& sessions, const std::string& session_id, const CaptureLog& log);

}  // namespace cogtrace
