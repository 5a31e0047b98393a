#pragma once

#include <cogtrace/store.hpp>
#include <cogtrace/trajectory.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cogtrace {

enum class DropReason { incomplete_files, corrupt_steps, bad_aspect_ratio };
std::string_view drop_reason_name(DropReason r) noexcept;

/// Action-filter rule ids.
///   T  click on the tracker's own UI (by region or by element name)
///   P  bare modifier press_key right before a hotkey led by that modifier
///   W  run of consecutive waits collapsed to its first wait
///   M  click repeated at the same point within the double-click window; the
///      later click is kept
enum class FilterRule { tracker_click, hotkey_prefix, wait_run, repeat_click };
char filter_rule_id(FilterRule r) noexcept;

struct ActionRemoval {
    std::size_t step_index = 0;  // index in the input trajectory
    FilterRule rule = FilterRule::tracker_click;

    friend bool operator==(const ActionRemoval&, const ActionRemoval&) = default;
};

struct RefineReport {
    std::string trajectory_id;
    bool kept = true;
    std::optional<DropReason> dropped_reason;
    std::string detail;
    std::vector<ActionRemoval> removed_actions;
    std::optional<std::pair<ScreenSize, ScreenSize>> rescale;
};

nlohmann::json refine_report_json(const RefineReport& report);

struct RefineConfig {
    ScreenSize target{1920, 1080};
    /// Element names that identify tracker controls when no region is recorded.
    std::vector<std::string> tracker_button_names = {
        "Start Recording", "Stop Recording", "Bad Task",    "Next Task",         "Previous Task",
        "Finish Task",     "Fail Task",      "Save Record", "Discard Recording", "cogtrace",
    };
    Millis double_click_ms = 500;
};

/// Completeness verdict; `dir` is the directory image refs are relative to.
RefineReport filter_trajectory(const Trajectory& trajectory, const std::filesystem::path& dir,
                               const RefineConfig& config = {});

/// Applies rules T, P, W and M until nothing changes. Surviving steps keep
/// their order.
std::pair<Trajectory, std::vector<ActionRemoval>> filter_actions(const Trajectory& trajectory,
                                                                 const std::optional<Rect>& tracker_ui_region,
                                                                 const RefineConfig& config = {});

/// Integer rescale of a coordinate: round(v * to / from), clamped for points.
int scale_coord(int v, int from, int to);
ScreenPoint scale_point(ScreenPoint p, ScreenSize from, ScreenSize to);
Rect scale_rect(const Rect& r, ScreenSize from, ScreenSize to);

/// Rescales every point, rect and screenshot to `target`. Images are read
/// relative to `src_dir` and written under `out_dir`/screenshots/. A trajectory
/// already at the target has its images copied byte for byte. Throws
/// Error(aspect_ratio_mismatch) when the source is not 16:9.
Trajectory standardize(const Trajectory& trajectory, const std::filesystem::path& src_dir,
                       const std::filesystem::path& out_dir, ScreenSize target = {1920, 1080});

struct RefineResult {
    RefineReport report;
    std::optional<Trajectory> refined;
};

/// Full pipeline for one trajectory directory: verdict, action filtering,
/// standardization, marked screenshots and Markdown, written to `out_dir`.
/// Nothing is written for dropped trajectories.
RefineResult refine_trajectory(const Trajectory& trajectory, const std::filesystem::path& src_dir,
                               const std::filesystem::path& out_dir, const RefineConfig& config = {});

/// Refines a committed trajectory into <id>/refined/ and writes
/// <id>/refine_report.json. Re-running replaces the previous output.
RefineResult refine_stored(TrajectoryStore& store, const std::string& id, const RefineConfig& config = {});

}  // namespace cogtrace
