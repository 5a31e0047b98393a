#include <cogtrace/action_dsl.hpp>
#include <cogtrace/errors.hpp>
#include <cogtrace/session.hpp>
#include <cogtrace/util.hpp>

#include <spdlog/spdlog.h>

#include <limits>

namespace cogtrace {

namespace fs = std::filesystem;

std::string SessionOptions::utc_now_string() { return utc_timestamp_now(); }

struct SessionManager::Active {
    std::string id;
    TaskMetadata task;
    ScreenSize screen;
    std::optional<Rect> tracker_ui_region;
    std::shared_ptr<ElementProvider> provider;
    Encapsulator encapsulator;
    ObservationCache cache;
    std::unique_ptr<TrajectoryStore::Staging> staging;
    std::vector<TrajectoryStep> steps;
    std::deque<std::string> recent;
    std::string created_at;
    Millis last_input_ts = 0;

    Active(EncapsulatorConfig cfg, Millis period) : encapsulator(cfg), cache(period) {}
};

SessionManager::SessionManager(TrajectoryStore& store, SessionOptions options)
    : store_(store), options_(std::move(options)) {}

SessionManager::~SessionManager() {
    try {
        discard_active();
    } catch (...) {
    }
}

SessionInfo SessionManager::start_session(SessionStart start) {
    std::lock_guard lock(mutex_);
    if (active_) throw Error(ErrorCode::session_already_active, "session " + active_->id + " is already recording");
    if (!start.screen.valid()) throw Error(ErrorCode::invalid_argument, "screen size must be positive");
    if (start.mode == TaskMode::given_task && !start.task) {
        throw Error(ErrorCode::invalid_argument, "given_task sessions need a task from the library");
    }
    if (start.mode != TaskMode::given_task && start.task) {
        throw Error(ErrorCode::invalid_argument, "only given_task sessions take a library task");
    }
    auto a = std::make_unique<Active>(options_.encapsulator, options_.capture_period_ms);
    a->id = options_.id_factory();
    a->task.mode = start.mode;
    a->task.outcome = Outcome::open;
    if (start.task) {
        a->task.description = start.task->description;
        a->task.task_id = start.task->id;
    }
    a->screen = start.screen;
    a->tracker_ui_region = start.tracker_ui_region;
    a->provider = std::move(start.provider);
    a->created_at = options_.clock();
    a->staging = store_.begin(a->id);
    active_ = std::move(a);
    spdlog::info("session {} started ({})", active_->id, task_mode_name(start.mode));
    return SessionInfo{active_->id, active_->task, active_->screen, 0, {}};
}

SessionManager::Active& SessionManager::require_active(const std::string& id) {
    if (!active_ || active_->id != id) throw Error(ErrorCode::session_not_active, "no open session with id '" + id + "'");
    return *active_;
}

void SessionManager::record_frame(const std::string& id, Observation obs) {
    std::lock_guard lock(mutex_);
    Active& a = require_active(id);
    if (obs.width == 0 || obs.height == 0) {
        obs.width = a.screen.width;
        obs.height = a.screen.height;
    }
    a.cache.cache_observation(std::move(obs));
}

void SessionManager::record_frame_bytes(const std::string& id, Millis capture_ts, std::string_view png_bytes,
                                        std::optional<std::string> screen_state) {
    std::lock_guard lock(mutex_);
    Active& a = require_active(id);
    if (const auto latest = a.cache.latest(); latest && capture_ts < latest->capture_ts) {
        throw Error(ErrorCode::stale_observation, "frame at " + std::to_string(capture_ts) + " ms is older than the cached one");
    }
    const std::string rel = a.staging->put_image(png_bytes);
    a.cache.cache_observation(Observation{capture_ts, (a.staging->dir() / rel).string(), a.screen.width,
                                          a.screen.height, std::move(screen_state)});
}

void SessionManager::append_action(Active& a, const TimedAction& timed) {
    TrajectoryStep step;
    step.action = timed.action;
    step.observation = a.cache.observation_before(timed.ts);
    const Millis prev = a.steps.empty() ? std::numeric_limits<Millis>::min() : a.steps.back().ts;
    step.ts = a.steps.empty() ? timed.ts : std::max(timed.ts, prev + 1);

    const fs::path src(step.observation.image_ref);
    step.observation.image_ref = a.staging->put_image_file(src);

    if (is_click_related(step.action.kind) && a.provider) {
        try {
            a.provider->sync_to(step.observation);
            if (auto info = a.provider->element_info_at(step.action.point)) {
                step.action.semantics = ClickSemantics{info->name, info->rect, std::nullopt};
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::provider_unavailable) throw;
            spdlog::warn("element lookup failed at ({}, {}): {}", step.action.point.x, step.action.point.y, e.what());
        }
    }
    a.staging->append_step(step);
    a.recent.push_back(render_tracker_action(step.action));
    while (a.recent.size() > options_.ticker_size) a.recent.pop_front();
    a.steps.push_back(std::move(step));
}

std::vector<TimedAction> SessionManager::record_event(const std::string& id, const RawInputEvent& event) {
    std::lock_guard lock(mutex_);
    Active& a = require_active(id);
    if (event.is_mouse() && !a.screen.contains(event.pos)) {
        throw Error(ErrorCode::invalid_argument, "mouse event outside the recorded screen");
    }
    auto actions = a.encapsulator.ingest(event);
    a.last_input_ts = event.ts;
    for (const auto& action : actions) append_action(a, action);
    const auto& st = a.encapsulator.state();
    a.cache.set_retention_horizon(st.earliest_pending_ts().value_or(std::numeric_limits<Millis>::max()));
    a.cache.set_pin(st.has_activity ? std::optional<Millis>(st.last_activity_ts + options_.encapsulator.idle_wait_ms)
                                    : std::nullopt);
    return actions;
}

Trajectory SessionManager::finish_session(const std::string& id, Outcome outcome,
                                          std::optional<std::string> revised_description,
                                          std::optional<Difficulty> difficulty) {
    std::lock_guard lock(mutex_);
    Active& a = require_active(id);
    if (outcome != Outcome::finished && outcome != Outcome::failed) {
        throw Error(ErrorCode::invalid_argument, "a session finishes as finished or failed");
    }
    if (revised_description) *revised_description = trim(*revised_description);
    if (revised_description && revised_description->empty()) revised_description.reset();
    TaskMetadata task = a.task;
    switch (task.mode) {
        case TaskMode::non_task:
            if (revised_description) throw Error(ErrorCode::invalid_argument, "non_task recordings carry no description");
            break;
        case TaskMode::free_task:
            if (!revised_description && !task.description) {
                throw Error(ErrorCode::missing_description, "fill in the task description before saving");
            }
            [[fallthrough]];
        case TaskMode::given_task:
            if (revised_description) task.description = revised_description;
            break;
    }
    task.outcome = outcome;
    task.difficulty = difficulty;

    for (const auto& action : a.encapsulator.flush()) append_action(a, action);
    a.cache.set_retention_horizon(std::numeric_limits<Millis>::max());
    const auto latest = a.cache.latest();
    if (!latest) throw Error(ErrorCode::no_observation, "no screenshot was captured during this session");
    Millis terminal_ts = std::max(a.last_input_ts, latest->capture_ts);
    if (!a.steps.empty()) terminal_ts = std::max(terminal_ts, a.steps.back().ts + 1);
    const TimedAction terminal{terminal_ts, outcome == Outcome::finished ? UnifiedAction::finish() : UnifiedAction::fail(), {}};
    append_action(a, terminal);

    Trajectory t;
    t.id = a.id;
    t.task = task;
    t.screen = a.screen;
    t.steps = a.steps;
    t.created_at = a.created_at;
    t.tracker_ui_region = a.tracker_ui_region;
    store_.commit(*a.staging, t);
    spdlog::info("session {} saved with {} steps", a.id, t.steps.size());
    active_.reset();
    return t;
}

void SessionManager::discard_session(const std::string& id) {
    std::lock_guard lock(mutex_);
    Active& a = require_active(id);
    store_.abort(*a.staging);
    spdlog::info("session {} discarded", a.id);
    active_.reset();
}

void SessionManager::discard_active() {
    std::lock_guard lock(mutex_);
    if (!active_) return;
    store_.abort(*active_->staging);
    spdlog::info("session {} discarded", active_->id);
    active_.reset();
}

std::optional<SessionInfo> SessionManager::active() const {
    std::lock_guard lock(mutex_);
    if (!active_) return std::nullopt;
    return SessionInfo{active_->id, active_->task, active_->screen, active_->steps.size(),
                       std::vector<std::string>(active_->recent.begin(), active_->recent.end())};
}

void replay_capture(SessionManager& sessions, const std::string& session_id, const CaptureLog& log) {
    std::size_t next_frame = 0;
    auto push_frames_until = [&](Millis ts) {
        while (next_frame < log.frames.size() && log.frames[next_frame].capture_ts <= ts) {
            const auto& f = log.frames[next_frame++];
            sessions.record_frame(session_id, Observation{f.capture_ts, log.frame_path(f).string(), log.screen.width,
                                                          log.screen.height, f.screen_state});
        }
    };
    for (const auto& e : log.events) {
        push_frames_until(e.ts);
        sessions.record_event(session_id, e);
    }
    push_frames_until(std::numeric_limits<Millis>::max());
}

}  // namespace cogtrace
