#include <cogtrace/errors.hpp>
#include <cogtrace/store.hpp>
#include <cogtrace/util.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include <sys/wait.h>
#include <unistd.h>

#include "fixtures.hpp"
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

TEST(TrajectoryStore, SaveLoadRoundTrip) {
    TempDir tmp;
    TrajectoryStore store(tmp / "store");
    Trajectory t = testing::synthetic_trajectory(tmp / "img", {320, 180}, five_steps());
    t.steps[1].thought = "I type the query.";
    t.tracker_ui_region = Rect{0, 0, 40, 20};
    t.steps[0].action.semantics = ClickSemantics{"OK", Rect{90, 90, 120, 110}, std::nullopt};
    const Trajectory saved = store.save(t);
    EXPECT_EQ(store.load(saved.id), saved);
    EXPECT_TRUE(saved.steps[0].marked_image_ref);
    EXPECT_FALSE(saved.steps[1].marked_image_ref);
    EXPECT_EQ(saved.steps[1].thought, "I type the query.");
    for (const auto& s : saved.steps) EXPECT_TRUE(s.observation.image_ref.starts_with("screenshots/"));
}

TEST(TrajectoryStore, ScreenshotsAreContentAddressed) {
    TempDir tmp;
    TrajectoryStore store(tmp / "store");
    Trajectory t = testing::synthetic_trajectory(tmp / "img", {64, 36}, five_steps());
    for (auto& s : t.steps) s.observation.image_ref = t.steps[0].observation.image_ref;
    const Trajectory saved = store.save(t);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(store.dir_of(saved.id) / "screenshots")) ++files;
    EXPECT_EQ(files, 1u);
    const std::string bytes = read_file(store.dir_of(saved.id) / saved.steps[0].observation.image_ref);
    EXPECT_EQ(saved.steps[0].observation.image_ref, "screenshots/" + sha256_hex(bytes) + ".png");
}

TEST(TrajectoryStore, UnknownAndMalformedIds) {
    TempDir tmp;
    TrajectoryStore store(tmp / "store");
    EXPECT_TRUE(store.list().empty());
    EXPECT_THROW(store.load("nope"), Error);
    EXPECT_THROW(store.begin("../escape"), Error);
    EXPECT_FALSE(store.exists("../escape"));
}

TEST(TrajectoryStore, UnwritableRootIsUnavailable) {
    TempDir tmp;
    const fs::path file = tmp / "plain-file";
    { std::ofstream(file) << "x"; }
    try {
        TrajectoryStore store(file);
        FAIL() << "expected store_unavailable";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::store_unavailable);
    }
}

TEST(TrajectoryStore, AbortRemovesStaging) {
    TempDir tmp;
    TrajectoryStore store(tmp / "store");
    auto staging = store.begin("20261016T120000Z-000001");
    staging->put_image(read_file(fs::path(testing::synthetic_trajectory(tmp / "img", {32, 18}, five_steps())
                                              .steps[0]
                                              .observation.image_ref)));
    EXPECT_TRUE(fs::exists(staging->dir()));
    store.abort(*staging);
    EXPECT_FALSE(fs::exists(staging->dir()));
    EXPECT_TRUE(store.list().empty());
}

TEST(TrajectoryStore, LeftoverStagingOfDeadProcessIsRemovedOnOpen) {
    TempDir tmp;
    fs::create_directories(tmp / "store/.staging/20261016T120000Z-000002");
    { std::ofstream(tmp / "store/.staging/20261016T120000Z-000002/.owner") << 999999999; }
    TrajectoryStore store(tmp / "store");
    EXPECT_FALSE(fs::exists(tmp / "store/.staging/20261016T120000Z-000002"));
}

// Forks a child that saves a trajectory and dies at the given checkpoint; the
// store must then hold either nothing new or the complete trajectory.
TEST(TrajectoryStore, KillDuringSaveLeavesOldOrCompleteState) {
    TempDir tmp;
    const Trajectory t = testing::synthetic_trajectory(tmp / "img", {160, 90}, five_steps(), "20261016T130000Z-00000a");
    TrajectoryStore reference_store(tmp / "reference");
    const Trajectory reference = reference_store.save(t);
    const auto complete = snapshot(reference_store.dir_of(reference.id));

    const std::vector<std::string> points = {"staging_created", "image_written",    "step_appended",
                                             "marked_written",  "steps_written",    "metadata_written",
                                             "markdown_written", "before_publish",  "published"};
    for (const auto& point : points) {
        const fs::path root = tmp / ("store-" + point);
        TrajectoryStore(root).save(testing::synthetic_trajectory(tmp / "img", {160, 90}, five_steps(),
                                                                 "20261016T120000Z-0000ff"));
        const auto before = TrajectoryStore(root).list();
        const pid_t pid = ::fork();
        ASSERT_GE(pid, 0);
        if (pid == 0) {
            set_store_checkpoint_hook([&](std::string_view name) {
                if (name == point) ::_exit(0);
            });
            TrajectoryStore child(root);
            child.save(t);
            ::_exit(3);
        }
        int status = 0;
        ::waitpid(pid, &status, 0);
        ASSERT_TRUE(WIFEXITED(status)) << point;
        ASSERT_EQ(WEXITSTATUS(status), 0) << point;

        TrajectoryStore reopened(root);
        const auto after = reopened.list();
        if (after == before) {
            EXPECT_NE(point, "published");
        } else {
            EXPECT_EQ(after.size(), before.size() + 1) << point;
            EXPECT_EQ(snapshot(reopened.dir_of(t.id)), complete) << point;
        }
        EXPECT_TRUE(fs::is_empty(reopened.staging_root())) << point;
    }
}

}  // namespace
}  // namespace cogtrace
