#include <cogtrace/errors.hpp>
#include <cogtrace/image.hpp>
#include <cogtrace/refine.hpp>
#include <cogtrace/serialization.hpp>
#include <cogtrace/util.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "fixtures.hpp"
#include "generators.hpp"
#include "sample_capture.hpp"

namespace cogtrace {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
    }
    return files;
}

std::vector<UnifiedAction> five_steps() {
    return {UnifiedAction::click({100, 100}), UnifiedAction::type_text("hello"), UnifiedAction::press_key("enter"),
            UnifiedAction::scroll_by(0, -5), UnifiedAction::finish()};
}

std::vector<std::size_t> removed_indices(const std::vector<ActionRemoval>& removed) {
    std::vector<std::size_t> out;
    for (const auto& r : removed) out.push_back(r.step_index);
    return out;
}

// ---------------------------------------------------------------------------
// filter_trajectory
// ---------------------------------------------------------------------------

TEST(FilterTrajectory, IntactTrajectoryIsKept) {
    TempDir tmp;
    const auto t = testing::synthetic_trajectory(tmp.path(), {320, 180}, five_steps());
    const auto r = filter_trajectory(t, "/");
    EXPECT_TRUE(r.kept) << r.detail;
    EXPECT_FALSE(r.dropped_reason);
}

TEST(FilterTrajectory, MissingScreenshotIsIncomplete) {
    TempDir tmp;
    const auto t = testing::synthetic_trajectory(tmp.path(), {320, 180}, five_steps());
    fs::remove(t.steps[2].observation.image_ref);
    const auto r = filter_trajectory(t, "/");
    EXPECT_FALSE(r.kept);
    EXPECT_EQ(r.dropped_reason, DropReason::incomplete_files);
    EXPECT_TRUE(r.removed_actions.empty());
}

TEST(FilterTrajectory, UndecodableScreenshotIsIncomplete) {
    TempDir tmp;
    const auto t = testing::synthetic_trajectory(tmp.path(), {320, 180}, five_steps());
    { std::ofstream(t.steps[1].observation.image_ref, std::ios::trunc) << "not an image"; }
    EXPECT_EQ(filter_trajectory(t, "/").dropped_reason, DropReason::incomplete_files);
}

TEST(FilterTrajectory, NonMonotonicStepsAreCorrupt) {
    TempDir tmp;
    auto t = testing::synthetic_trajectory(tmp.path(), {320, 180}, five_steps());
    std::swap(t.steps[1].ts, t.steps[2].ts);
    t.steps[1].observation.capture_ts = t.steps[2].observation.capture_ts = 0;
    EXPECT_EQ(filter_trajectory(t, "/").dropped_reason, DropReason::corrupt_steps);
}

TEST(FilterTrajectory, TruncatedTrajectoryIsIncomplete) {
    TempDir tmp;
    auto t = testing::synthetic_trajectory(tmp.path(), {320, 180}, five_steps());
    t.steps.pop_back();
    EXPECT_EQ(filter_trajectory(t, "/").dropped_reason, DropReason::incomplete_files);
}

TEST(FilterTrajectory, NonWidescreenIsDropped) {
    TempDir tmp;
    const auto t = testing::synthetic_trajectory(tmp.path(), {320, 240}, five_steps());
    EXPECT_EQ(filter_trajectory(t, "/").dropped_reason, DropReason::bad_aspect_ratio);
}

// Brute-force oracle for corrupt step order: any adjacent non-increasing pair.
TEST(FilterTrajectoryProperty, CorruptOrderMatchesScan) {
    TempDir tmp;
    auto base = testing::synthetic_trajectory(tmp.path(), {64, 36}, five_steps());
    testing::Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        auto t = base;
        for (auto& s : t.steps) {
            s.ts = testing::uniform_int(rng, 0, 8) * 100;
            s.observation.capture_ts = 0;
        }
        bool increasing = true;
        for (std::size_t i = 1; i < t.steps.size(); ++i) increasing = increasing && t.steps[i].ts > t.steps[i - 1].ts;
        const auto r = filter_trajectory(t, "/");
        EXPECT_EQ(r.kept, increasing) << trial;
        if (!increasing) EXPECT_EQ(r.dropped_reason, DropReason::corrupt_steps);
    }
}

// ---------------------------------------------------------------------------
// filter_actions
// ---------------------------------------------------------------------------

Trajectory steps_of(const std::vector<UnifiedAction>& actions, std::vector<Millis> ts = {}) {
    Trajectory t;
    t.screen = {1920, 1080};
    for (std::size_t i = 0; i < actions.size(); ++i) {
        TrajectoryStep s;
        s.ts = ts.empty() ? 1000 * static_cast<Millis>(i + 1) : ts[i];
        s.action = actions[i];
        t.steps.push_back(s);
    }
    return t;
}

TEST(FilterActions, TrackerStartClickRemoved) {
    UnifiedAction start = UnifiedAction::click({1800, 20});
    start.semantics = ClickSemantics{"Start", Rect{1760, 5, 1840, 35}, std::nullopt};
    const auto t = steps_of({start, UnifiedAction::type_text("hi"), UnifiedAction::finish()});
    const auto [out, removed] = filter_actions(t, Rect{1720, 0, 1920, 40});
    ASSERT_EQ(removed.size(), 1u);
    EXPECT_EQ(removed[0], (ActionRemoval{0, FilterRule::tracker_click}));
    EXPECT_EQ(out.steps.size(), 2u);
}

TEST(FilterActions, TrackerButtonNameRemovedWithoutRegion) {
    UnifiedAction stop = UnifiedAction::click({30, 30});
    stop.semantics = ClickSemantics{"Stop Recording", std::nullopt, std::nullopt};
    UnifiedAction start_menu = UnifiedAction::click({10, 1060});
    start_menu.semantics = ClickSemantics{"Start", std::nullopt, std::nullopt};
    const auto [out, removed] = filter_actions(steps_of({start_menu, stop, UnifiedAction::finish()}), std::nullopt);
    EXPECT_EQ(removed_indices(removed), std::vector<std::size_t>{1});
}

TEST(FilterActions, WaitRunCollapses) {
    const auto [out, removed] =
        filter_actions(steps_of({UnifiedAction::wait(), UnifiedAction::wait(), UnifiedAction::wait()}), std::nullopt);
    ASSERT_EQ(out.steps.size(), 1u);
    EXPECT_EQ(out.steps[0].ts, 1000);
    EXPECT_EQ(removed_indices(removed), (std::vector<std::size_t>{1, 2}));
}

TEST(FilterActions, HotkeyPrefixRemoved) {
    const auto [out, removed] =
        filter_actions(steps_of({UnifiedAction::press_key("ctrl"), UnifiedAction::hotkey("ctrl", "c")}), std::nullopt);
    ASSERT_EQ(out.steps.size(), 1u);
    EXPECT_EQ(out.steps[0].action.kind, ActionKind::hotkey);
    EXPECT_EQ(removed[0].rule, FilterRule::hotkey_prefix);
}

TEST(FilterActions, PrefixWithOtherModifierSurvives) {
    const auto [out, removed] =
        filter_actions(steps_of({UnifiedAction::press_key("alt"), UnifiedAction::hotkey("ctrl", "c")}), std::nullopt);
    EXPECT_TRUE(removed.empty());
}

TEST(FilterActions, RepeatClickKeepsLater) {
    const auto t = steps_of({UnifiedAction::click({5, 5}), UnifiedAction::click({5, 5}), UnifiedAction::click({5, 5})},
                            {1000, 1300, 2000});
    const auto [out, removed] = filter_actions(t, std::nullopt);
    EXPECT_EQ(removed_indices(removed), std::vector<std::size_t>{0});
    ASSERT_EQ(out.steps.size(), 2u);
    EXPECT_EQ(out.steps[0].ts, 1300);
}

TEST(FilterActionsProperty, RemovesExactlyTheInjectedArtifacts) {
    testing::Rng rng(2024);
    const Rect region{1720, 0, 1920, 40};
    for (int trial = 0; trial < 500; ++trial) {
        const auto c = testing::random_refine_case(rng, {1920, 1080}, region, 40);
        const auto [out, removed] = filter_actions(c.trajectory, region);
        ASSERT_EQ(removed_indices(removed), c.injected) << "trial " << trial;
        // order preserved and semantic steps all survive
        std::size_t j = 0;
        for (const auto& s : out.steps) {
            while (j < c.trajectory.steps.size() && c.trajectory.steps[j] != s) ++j;
            ASSERT_LT(j, c.trajectory.steps.size());
        }
        for (std::size_t idx : c.semantic) {
            EXPECT_NE(std::find(out.steps.begin(), out.steps.end(), c.trajectory.steps[idx]), out.steps.end());
        }
        const auto [again, removed_again] = filter_actions(out, region);
        EXPECT_EQ(again, out);
        EXPECT_TRUE(removed_again.empty());
    }
}

// ---------------------------------------------------------------------------
// standardize
// ---------------------------------------------------------------------------

TEST(Standardize, CenterClickOf1440pMapsToCenterOf1080p) {
    TempDir tmp;
    auto t = testing::synthetic_trajectory(tmp / "src", {2560, 1440}, {UnifiedAction::click({1280, 720}), UnifiedAction::finish()});
    const auto out = standardize(t, "/", tmp / "out");
    EXPECT_EQ(out.steps[0].action.point, (ScreenPoint{960, 540}));
    EXPECT_EQ(out.screen, (ScreenSize{1920, 1080}));
    EXPECT_EQ(probe_image(tmp / "out" / out.steps[0].observation.image_ref), (ScreenSize{1920, 1080}));
}

TEST(Standardize, FullScreenRectOf2160p) {
    EXPECT_EQ(scale_rect({0, 0, 3840, 2160}, {3840, 2160}, {1920, 1080}), (Rect{0, 0, 1920, 1080}));
    EXPECT_EQ(scale_point({3839, 2159}, {3840, 2160}, {1920, 1080}), (ScreenPoint{1919, 1079}));
}

TEST(Standardize, NativeResolutionIsByteIdentical) {
    TempDir tmp;
    auto t = testing::synthetic_trajectory(tmp / "src", {1920, 1080}, {UnifiedAction::click({17, 33}), UnifiedAction::finish()});
    const auto out = standardize(t, "/", tmp / "out");
    EXPECT_EQ(out.steps[0].action, t.steps[0].action);
    EXPECT_EQ(read_file(tmp / "out" / out.steps[0].observation.image_ref), read_file(t.steps[0].observation.image_ref));
}

TEST(Standardize, RejectsOtherAspectRatios) {
    TempDir tmp;
    auto t = testing::synthetic_trajectory(tmp / "src", {1600, 1200}, {UnifiedAction::finish()});
    try {
        standardize(t, "/", tmp / "out");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::aspect_ratio_mismatch);
    }
}

TEST(StandardizeProperty, ContainmentPreservedWithinOnePixel) {
    testing::Rng rng(77);
    const ScreenSize sources[] = {{2560, 1440}, {3840, 2160}, {1280, 720}, {1366, 768}, {1600, 900}};
    const ScreenSize target{1920, 1080};
    for (int trial = 0; trial < 5000; ++trial) {
        const ScreenSize from = sources[testing::uniform_int(rng, 0, 4)];
        const int l = testing::uniform_int(rng, 0, from.width - 2);
        const int t = testing::uniform_int(rng, 0, from.height - 2);
        const Rect r{l, t, testing::uniform_int(rng, l + 1, from.width), testing::uniform_int(rng, t + 1, from.height)};
        const ScreenPoint p{testing::uniform_int(rng, r.left, r.right - 1), testing::uniform_int(rng, r.top, r.bottom - 1)};
        const Rect r2 = scale_rect(r, from, target);
        const ScreenPoint p2 = scale_point(p, from, target);
        EXPECT_GE(p2.x, r2.left - 1);
        EXPECT_LE(p2.x, r2.right);
        EXPECT_GE(p2.y, r2.top - 1);
        EXPECT_LE(p2.y, r2.bottom);
        EXPECT_TRUE(target.contains(p2));
    }
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

TEST(RefinePipeline, StoredRefineIsIdempotent) {
    TempDir tmp;
    TrajectoryStore store(tmp / "store");
    auto t = testing::synthetic_trajectory(tmp / "img", {2560, 1440},
                                           {UnifiedAction::click({2500, 10}), UnifiedAction::press_key("ctrl"),
                                            UnifiedAction::hotkey("ctrl", "v"), UnifiedAction::wait(), UnifiedAction::wait(),
                                            UnifiedAction::click({1280, 720}), UnifiedAction::finish()});
    t.tracker_ui_region = Rect{2300, 0, 2560, 50};
    t = store.save(t);
    const auto first = refine_stored(store, t.id);
    ASSERT_TRUE(first.report.kept);
    EXPECT_EQ(removed_indices(first.report.removed_actions), (std::vector<std::size_t>{0, 1, 4}));
    const auto snap1 = snapshot(store.dir_of(t.id));
    const auto second = refine_stored(store, t.id);
    EXPECT_EQ(snapshot(store.dir_of(t.id)), snap1);

    // refining the refined output changes nothing either
    const fs::path refined = store.dir_of(t.id) / "refined";
    const Trajectory r1 = load_trajectory_dir(refined);
    const auto again = refine_trajectory(r1, refined, tmp / "again");
    ASSERT_TRUE(again.refined);
    EXPECT_TRUE(again.report.removed_actions.empty());
    EXPECT_EQ(snapshot(tmp / "again"), snapshot(refined));
    EXPECT_EQ(r1.steps[2].action.point, (ScreenPoint{960, 540}));
}

TEST(RefinePipeline, DroppedTrajectoryWritesOnlyReport) {
    TempDir tmp;
    TrajectoryStore store(tmp / "store");
    auto t = store.save(testing::synthetic_trajectory(tmp / "img", {320, 240}, five_steps()));
    const auto result = refine_stored(store, t.id);
    EXPECT_FALSE(result.refined);
    EXPECT_FALSE(fs::exists(store.dir_of(t.id) / "refined"));
    const Json report = read_json_file(store.dir_of(t.id) / "refine_report.json");
    EXPECT_EQ(report["kept"], false);
    EXPECT_EQ(report["dropped_reason"], "bad_aspect_ratio");
    EXPECT_TRUE(report["removed_actions"].empty());
}

TEST(RefinePipeline, SampleTrajectoryKeepsAllTenSteps) {
    TempDir tmp;
    testing::write_sample_capture(tmp / "capture");
    TrajectoryStore store(tmp / "store");
    const auto t = testing::record_sample_trajectory(store, tmp / "capture");
    const auto r = refine_stored(store, t.id);
    ASSERT_TRUE(r.refined);
    EXPECT_EQ(r.refined->steps.size(), 10u);
    EXPECT_FALSE(r.report.rescale);
}

}  // namespace
}  // namespace cogtrace
