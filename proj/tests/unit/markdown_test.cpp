#include <cogtrace/markdown.hpp>
#include <cogtrace/util.hpp>

#include <gtest/gtest.h>

#include <cstdlib>

#include "fixtures.hpp"
#include "golden.hpp"
#include "sample_capture.hpp"

namespace cogtrace {
namespace {

namespace fs = std::filesystem;

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

TEST(Markdown, SingleClickStep) {
    Trajectory t;
    t.id = "20261016T093000Z-000001";
    t.task.mode = TaskMode::free_task;
    t.task.description = "Open the browser";
    t.screen = {1920, 1080};
    TrajectoryStep s;
    s.ts = 10;
    s.action = UnifiedAction::click({1161, 1065});
    s.observation = Observation{0, "screenshots/a.png", 1920, 1080, std::nullopt};
    s.marked_image_ref = "marked/b.png";
    t.steps.push_back(s);
    const std::string md = export_markdown(t);
    EXPECT_TRUE(md.starts_with("# Open the browser\n"));
    EXPECT_EQ(count(md, "## Step "), 1u);
    EXPECT_EQ(count(md, "!["), 1u);
    EXPECT_NE(md.find("`click (1161, 1065)`"), std::string::npos);
    EXPECT_NE(md.find("(marked/b.png)"), std::string::npos);
    EXPECT_EQ(md.find("screenshots/a.png"), std::string::npos);
}

TEST(Markdown, TerminalStepIsLast) {
    Trajectory t;
    t.id = "x";
    TrajectoryStep s;
    s.action = UnifiedAction::finish();
    s.observation.image_ref = "screenshots/a.png";
    t.steps.push_back(s);
    const std::string md = export_markdown(t);
    EXPECT_TRUE(md.starts_with("# Untitled recording\n"));
    const auto last = md.rfind("## Step");
    EXPECT_NE(md.find("`finish`", last), std::string::npos);
}

TEST(Markdown, SampleTrajectoryMatchesGolden) {
    testing::TempDir tmp;
    testing::write_sample_capture(tmp / "capture");
    TrajectoryStore store(tmp / "store");
    const Trajectory t = testing::record_sample_trajectory(store, tmp / "capture");
    ASSERT_EQ(t.steps.size(), 10u);
    testing::expect_golden("sample_trajectory.md", read_file(store.dir_of(t.id) / "trajectory.md"));
}

}  // namespace
}  // namespace cogtrace
