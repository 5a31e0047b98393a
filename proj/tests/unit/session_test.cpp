#include <cogtrace/errors.hpp>
#include <cogtrace/markdown.hpp>
#include <cogtrace/session.hpp>
#include <cogtrace/action_dsl.hpp>
#include <cogtrace/util.hpp>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sample_capture.hpp"

namespace cogtrace {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::invalid_argument;
}

std::size_t count_files(const fs::path& dir) {
    if (!fs::exists(dir)) return 0;
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.is_regular_file() ? 1 : 0;
    return n;
}

struct SessionFixture : ::testing::Test {
    TempDir tmp;
    fs::path capture_dir = tmp / "capture";
    CaptureLog log = testing::write_sample_capture(capture_dir);
    TrajectoryStore store{tmp / "store"};
};

TEST_F(SessionFixture, SampleCaptureRecordsTenSteps) {
    const Trajectory t = testing::record_sample_trajectory(store, capture_dir);
    std::vector<std::string> lines;
    for (const auto& s : t.steps) lines.push_back(render_tracker_action(s.action));
    const std::vector<std::string> expected = {
        "click (1161, 1065)", "click (700, 64)",    "type text: eiffel tower", "press key: enter",
        "scroll (0, 10)",     "click (400, 300)",   "hotkey (ctrl, c)",        "double click (400, 500)",
        "wait",               "finish",
    };
    EXPECT_EQ(lines, expected);
    ASSERT_TRUE(t.steps[0].action.semantics);
    EXPECT_EQ(t.steps[0].action.semantics->element_name, "Google Chrome");
    EXPECT_EQ(t.steps[1].action.semantics->element_name, "Address and search bar");
    EXPECT_EQ(t.steps[5].action.semantics->element_name, "Le Jules Verne - Restaurant");
    EXPECT_EQ(t.task.description, testing::kSampleTask);
    EXPECT_EQ(t.task.difficulty, Difficulty::easy);
    EXPECT_EQ(t.tracker_ui_region, log.tracker_ui_region);
}

TEST_F(SessionFixture, ObservationsPrecedeActionsAndTimestampsIncrease) {
    const Trajectory t = testing::record_sample_trajectory(store, capture_dir);
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        EXPECT_LE(t.steps[i].observation.capture_ts, t.steps[i].ts) << i;
        if (i > 0) EXPECT_LT(t.steps[i - 1].ts, t.steps[i].ts);
        EXPECT_TRUE(fs::exists(store.dir_of(t.id) / t.steps[i].observation.image_ref));
    }
    // the first click is captured on the desktop, the typed text on the browser frame
    EXPECT_EQ(t.steps[0].observation.screen_state, "desktop");
    EXPECT_EQ(t.steps[2].observation.capture_ts, 2200);
}

TEST_F(SessionFixture, PersistedTrajectoryLoadsBackEqual) {
    const Trajectory t = testing::record_sample_trajectory(store, capture_dir);
    EXPECT_EQ(store.list(), std::vector<std::string>{t.id});
    EXPECT_EQ(store.load(t.id), t);
    EXPECT_TRUE(fs::exists(store.dir_of(t.id) / "trajectory.md"));
    EXPECT_EQ(read_file(store.dir_of(t.id) / "trajectory.md"), export_markdown(t));
}

TEST_F(SessionFixture, SecondStartIsRejected) {
    SessionManager sessions(store, testing::fixed_session_options());
    sessions.start_session({});
    EXPECT_EQ(code_of([&] { sessions.start_session({}); }), ErrorCode::session_already_active);
}

TEST_F(SessionFixture, GivenTaskCarriesLibraryDescription) {
    SessionManager sessions(store, testing::fixed_session_options());
    SessionStart start;
    start.mode = TaskMode::given_task;
    start.task = TaskEntry{"task-3", "Open the Recycle Bin", false};
    const auto info = sessions.start_session(start);
    EXPECT_EQ(info.task.description, "Open the Recycle Bin");
    EXPECT_EQ(info.task.task_id, "task-3");
    EXPECT_EQ(info.task.outcome, Outcome::open);

    SessionStart bad;
    bad.mode = TaskMode::given_task;
    sessions.discard_active();
    EXPECT_EQ(code_of([&] { sessions.start_session(bad); }), ErrorCode::invalid_argument);
}

TEST_F(SessionFixture, NonTaskHasNoDescription) {
    SessionManager sessions(store, testing::fixed_session_options());
    const auto info = sessions.start_session({});
    EXPECT_FALSE(info.task.description);
    sessions.record_frame(info.id, Observation{0, (capture_dir / "frames/desktop.png").string(), 1920, 1080, std::nullopt});
    EXPECT_EQ(code_of([&] { sessions.finish_session(info.id, Outcome::finished, "something"); }),
              ErrorCode::invalid_argument);
    const Trajectory t = sessions.finish_session(info.id, Outcome::finished);
    EXPECT_FALSE(t.task.description);
    ASSERT_EQ(t.steps.size(), 1u);
    EXPECT_EQ(t.steps[0].action.kind, ActionKind::finish);
}

TEST_F(SessionFixture, FreeTaskNeedsDescriptionAndStaysOpen) {
    SessionManager sessions(store, testing::fixed_session_options());
    SessionStart start;
    start.mode = TaskMode::free_task;
    const auto info = sessions.start_session(start);
    sessions.record_frame(info.id, Observation{0, (capture_dir / "frames/desktop.png").string(), 1920, 1080, std::nullopt});
    EXPECT_EQ(code_of([&] { sessions.finish_session(info.id, Outcome::finished); }), ErrorCode::missing_description);
    EXPECT_EQ(code_of([&] { sessions.finish_session(info.id, Outcome::finished, "   "); }), ErrorCode::missing_description);
    ASSERT_TRUE(sessions.active());
    const Trajectory t = sessions.finish_session(info.id, Outcome::failed, "Create a poster for the workshop");
    EXPECT_EQ(t.task.description, "Create a poster for the workshop");
    EXPECT_EQ(t.task.outcome, Outcome::failed);
    EXPECT_EQ(t.steps.back().action.kind, ActionKind::fail);
    EXPECT_FALSE(sessions.active());
}

TEST_F(SessionFixture, RevisedDescriptionReplacesGivenTask) {
    SessionManager sessions(store, testing::fixed_session_options());
    SessionStart start;
    start.mode = TaskMode::given_task;
    start.task = TaskEntry{"t1", "Create a poster", false};
    const auto info = sessions.start_session(start);
    sessions.record_frame(info.id, Observation{0, (capture_dir / "frames/desktop.png").string(), 1920, 1080, std::nullopt});
    const Trajectory t = sessions.finish_session(info.id, Outcome::finished, "Create a poster about the ACL conference");
    EXPECT_EQ(store.load(t.id).task.description, "Create a poster about the ACL conference");
}

TEST_F(SessionFixture, DiscardLeavesStoreUntouched) {
    testing::record_sample_trajectory(store, capture_dir);
    const auto before = store.list();
    SessionManager sessions(store, testing::fixed_session_options("20261016T110000Z-abcdef"));
    const auto info = sessions.start_session({});
    for (const auto& f : log.frames) {
        sessions.record_frame(info.id, Observation{f.capture_ts, log.frame_path(f).string(), 1920, 1080, f.screen_state});
        if (f.capture_ts == 900) break;
    }
    sessions.record_event(info.id, RawInputEvent::mouse_down(1000, {5, 5}));
    sessions.record_event(info.id, RawInputEvent::mouse_up(1080, {5, 5}));
    sessions.record_event(info.id, RawInputEvent::key_down(1700, "a"));
    sessions.discard_session(info.id);
    EXPECT_EQ(store.list(), before);
    EXPECT_EQ(count_files(store.staging_root()), 0u);
    EXPECT_EQ(code_of([&] { sessions.discard_session(info.id); }), ErrorCode::session_not_active);
    EXPECT_EQ(code_of([&] { sessions.finish_session(info.id, Outcome::finished); }), ErrorCode::session_not_active);
}

TEST_F(SessionFixture, EventsOutsideScreenAreRejected) {
    SessionManager sessions(store, testing::fixed_session_options());
    const auto info = sessions.start_session({});
    EXPECT_EQ(code_of([&] { sessions.record_event(info.id, RawInputEvent::mouse_down(10, {1920, 5})); }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([&] { sessions.record_event("other", RawInputEvent::key_down(10, "a")); }),
              ErrorCode::session_not_active);
}

TEST_F(SessionFixture, FinishWithoutFramesFails) {
    SessionManager sessions(store, testing::fixed_session_options());
    const auto info = sessions.start_session({});
    EXPECT_EQ(code_of([&] { sessions.finish_session(info.id, Outcome::finished); }), ErrorCode::no_observation);
    EXPECT_TRUE(sessions.active());
}

TEST_F(SessionFixture, TickerKeepsRecentActions) {
    SessionOptions opts = testing::fixed_session_options();
    opts.ticker_size = 3;
    SessionManager sessions(store, opts);
    const auto info = sessions.start_session({});
    sessions.record_frame(info.id, Observation{0, (capture_dir / "frames/desktop.png").string(), 1920, 1080, std::nullopt});
    for (int i = 0; i < 5; ++i) {
        sessions.record_event(info.id, RawInputEvent::key_down(100 + i * 10, "f" + std::to_string(i + 1)));
        sessions.record_event(info.id, RawInputEvent::key_up(105 + i * 10, "f" + std::to_string(i + 1)));
    }
    const auto active = sessions.active();
    ASSERT_TRUE(active);
    EXPECT_EQ(active->step_count, 5u);
    EXPECT_EQ(active->recent_actions,
              (std::vector<std::string>{"press key: f3", "press key: f4", "press key: f5"}));
}

TEST_F(SessionFixture, FramesFromBytesAreStoredOnce) {
    SessionManager sessions(store, testing::fixed_session_options());
    const auto info = sessions.start_session({});
    const std::string png = read_file(capture_dir / "frames/desktop.png");
    sessions.record_frame_bytes(info.id, 0, png);
    sessions.record_frame_bytes(info.id, 100, png);
    EXPECT_EQ(code_of([&] { sessions.record_frame_bytes(info.id, 50, png); }), ErrorCode::stale_observation);
    sessions.record_event(info.id, RawInputEvent::key_down(150, "f5"));
    const Trajectory t = sessions.finish_session(info.id, Outcome::finished);
    EXPECT_EQ(count_files(store.dir_of(t.id) / "screenshots"), 1u);
}

}  // namespace
}  // namespace cogtrace
