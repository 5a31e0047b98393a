#include <cogtrace/errors.hpp>
#include <cogtrace/image.hpp>
#include <cogtrace/refine.hpp>
#include <cogtrace/serialization.hpp>
#include <cogtrace/util.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace cogtrace {

namespace fs = std::filesystem;

std::string_view drop_reason_name(DropReason r) noexcept {
    switch (r) {
        case DropReason::incomplete_files: return "incomplete_files";
        case DropReason::corrupt_steps: return "corrupt_steps";
        case DropReason::bad_aspect_ratio: return "bad_aspect_ratio";
    }
    return "unknown";
}

char filter_rule_id(FilterRule r) noexcept {
    switch (r) {
        case FilterRule::tracker_click: return 'T';
        case FilterRule::hotkey_prefix: return 'P';
        case FilterRule::wait_run: return 'W';
        case FilterRule::repeat_click: return 'M';
    }
    return '?';
}

Json refine_report_json(const RefineReport& report) {
    Json removed = Json::array();
    for (const auto& r : report.removed_actions) {
        removed.push_back({{"step", r.step_index}, {"rule", std::string(1, filter_rule_id(r.rule))}});
    }
    Json j{{"trajectory_id", report.trajectory_id},
           {"kept", report.kept},
           {"dropped_reason", report.dropped_reason ? Json(drop_reason_name(*report.dropped_reason)) : Json(nullptr)},
           {"removed_actions", removed},
           {"rescale", nullptr}};
    if (!report.detail.empty()) j["detail"] = report.detail;
    if (report.rescale) j["rescale"] = {{"from", report.rescale->first}, {"to", report.rescale->second}};
    return j;
}

// ============================================================================
// Trajectory filtering
// ============================================================================

namespace {

bool is_16_by_9(ScreenSize s) {
    return s.valid() && static_cast<std::int64_t>(s.width) * 9 == static_cast<std::int64_t>(s.height) * 16;
}

RefineReport drop(const Trajectory& t, DropReason reason, std::string detail) {
    RefineReport r;
    r.trajectory_id = t.id;
    r.kept = false;
    r.dropped_reason = reason;
    r.detail = std::move(detail);
    return r;
}

}  // namespace

RefineReport filter_trajectory(const Trajectory& t, const fs::path& dir, const RefineConfig&) {
    if (t.steps.empty()) return drop(t, DropReason::incomplete_files, "trajectory has no steps");
    if (!t.ends_with_terminal()) return drop(t, DropReason::incomplete_files, "trajectory does not end in finish or fail");
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& s = t.steps[i];
        if (i > 0 && s.ts <= t.steps[i - 1].ts) {
            return drop(t, DropReason::corrupt_steps, "step " + std::to_string(i) + " does not come after its predecessor");
        }
        if (s.observation.capture_ts > s.ts) {
            return drop(t, DropReason::corrupt_steps, "step " + std::to_string(i) + " observation is newer than its action");
        }
        if (is_click_related(s.action.kind) && !t.screen.contains(s.action.point)) {
            return drop(t, DropReason::corrupt_steps, "step " + std::to_string(i) + " point lies outside the screen");
        }
        try {
            s.action.validate();
        } catch (const Error& e) {
            return drop(t, DropReason::corrupt_steps, "step " + std::to_string(i) + ": " + e.what());
        }
    }
    std::map<std::string, std::optional<ScreenSize>> probed;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& obs = t.steps[i].observation;
        auto [it, fresh] = probed.try_emplace(obs.image_ref);
        if (fresh) it->second = probe_image(dir / obs.image_ref);
        if (!it->second) {
            return drop(t, DropReason::incomplete_files, "step " + std::to_string(i) + " screenshot " + obs.image_ref + " is missing or unreadable");
        }
        if (*it->second != obs.size() || *it->second != t.screen) {
            return drop(t, DropReason::incomplete_files, "step " + std::to_string(i) + " screenshot size does not match the screen");
        }
    }
    if (!is_16_by_9(t.screen)) {
        return drop(t, DropReason::bad_aspect_ratio,
                    std::to_string(t.screen.width) + "x" + std::to_string(t.screen.height) + " is not 16:9");
    }
    RefineReport r;
    r.trajectory_id = t.id;
    return r;
}

// ============================================================================
// Action filtering
// ============================================================================

namespace {

bool is_plain_click(ActionKind k) {
    return k == ActionKind::click || k == ActionKind::right_click || k == ActionKind::double_click;
}

struct Indexed {
    std::size_t original;
    const TrajectoryStep* step;
};

bool tracker_click(const TrajectoryStep& s, const std::optional<Rect>& region, const RefineConfig& cfg) {
    if (!is_plain_click(s.action.kind)) return false;
    if (region && region->contains(s.action.point)) return true;
    if (s.action.semantics && s.action.semantics->element_name) {
        const auto& name = *s.action.semantics->element_name;
        return std::find(cfg.tracker_button_names.begin(), cfg.tracker_button_names.end(), name) !=
               cfg.tracker_button_names.end();
    }
    return false;
}

// One pass of every rule; returns false when nothing was removed.
bool apply_rules(std::vector<Indexed>& steps, std::vector<ActionRemoval>& removed, const std::optional<Rect>& region,
                 const RefineConfig& cfg) {
    bool changed = false;
    auto erase_if = [&](FilterRule rule, auto pred) {
        std::vector<bool> drop(steps.size(), false);
        for (std::size_t i = 0; i < steps.size(); ++i) drop[i] = pred(i);
        std::vector<Indexed> kept;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            if (drop[i]) {
                removed.push_back({steps[i].original, rule});
                changed = true;
            } else {
                kept.push_back(steps[i]);
            }
        }
        steps = std::move(kept);
    };

    erase_if(FilterRule::tracker_click, [&](std::size_t i) { return tracker_click(*steps[i].step, region, cfg); });

    erase_if(FilterRule::hotkey_prefix, [&](std::size_t i) {
        const auto& a = steps[i].step->action;
        if (a.kind != ActionKind::press_key || !is_hotkey_modifier(a.key)) return false;
        // skip over a run of the same bare modifier to find what follows it
        std::size_t j = i + 1;
        while (j < steps.size() && steps[j].step->action.kind == ActionKind::press_key && steps[j].step->action.key == a.key) ++j;
        return j < steps.size() && steps[j].step->action.kind == ActionKind::hotkey && steps[j].step->action.modifier == a.key;
    });

    erase_if(FilterRule::wait_run, [&](std::size_t i) {
        return i > 0 && steps[i].step->action.kind == ActionKind::wait && steps[i - 1].step->action.kind == ActionKind::wait;
    });

    erase_if(FilterRule::repeat_click, [&](std::size_t i) {
        if (i + 1 >= steps.size()) return false;
        const auto& a = *steps[i].step;
        const auto& b = *steps[i + 1].step;
        return a.action.kind == ActionKind::click && b.action.kind == ActionKind::click && a.action.point == b.action.point &&
               b.ts - a.ts <= cfg.double_click_ms;
    });
    return changed;
}

}  // namespace

std::pair<Trajectory, std::vector<ActionRemoval>> filter_actions(const Trajectory& t, const std::optional<Rect>& region,
                                                                 const RefineConfig& config) {
    std::vector<Indexed> steps;
    steps.reserve(t.steps.size());
    for (std::size_t i = 0; i < t.steps.size(); ++i) steps.push_back({i, &t.steps[i]});
    std::vector<ActionRemoval> removed;
    while (apply_rules(steps, removed, region, config)) {
    }
    std::sort(removed.begin(), removed.end(),
              [](const ActionRemoval& a, const ActionRemoval& b) { return a.step_index < b.step_index; });
    Trajectory out = t;
    out.steps.clear();
    for (const auto& s : steps) out.steps.push_back(*s.step);
    return {std::move(out), std::move(removed)};
}

// ============================================================================
// Standardization
// ============================================================================

int scale_coord(int v, int from, int to) {
    return static_cast<int>(std::llround(static_cast<double>(v) * to / from));
}

ScreenPoint scale_point(ScreenPoint p, ScreenSize from, ScreenSize to) {
    return {std::clamp(scale_coord(p.x, from.width, to.width), 0, to.width - 1),
            std::clamp(scale_coord(p.y, from.height, to.height), 0, to.height - 1)};
}

Rect scale_rect(const Rect& r, ScreenSize from, ScreenSize to) {
    return {scale_coord(r.left, from.width, to.width), scale_coord(r.top, from.height, to.height),
            scale_coord(r.right, from.width, to.width), scale_coord(r.bottom, from.height, to.height)};
}

Trajectory standardize(const Trajectory& t, const fs::path& src_dir, const fs::path& out_dir, ScreenSize target) {
    if (!is_16_by_9(t.screen) || !is_16_by_9(target)) {
        throw Error(ErrorCode::aspect_ratio_mismatch, "cannot standardize " + std::to_string(t.screen.width) + "x" +
                                                          std::to_string(t.screen.height) + " to " +
                                                          std::to_string(target.width) + "x" + std::to_string(target.height));
    }
    fs::create_directories(out_dir / "screenshots");
    const bool identity = t.screen == target;
    Trajectory out = t;
    out.screen = target;
    if (out.tracker_ui_region) out.tracker_ui_region = scale_rect(*out.tracker_ui_region, t.screen, target);

    std::map<std::string, std::string> converted;  // source ref -> output ref
    for (auto& s : out.steps) {
        auto [it, fresh] = converted.try_emplace(s.observation.image_ref);
        if (fresh) {
            std::string bytes;
            if (identity) {
                bytes = read_file(src_dir / s.observation.image_ref);
            } else {
                const auto png = encode_png(resize_image(load_image(src_dir / s.observation.image_ref), target));
                bytes.assign(png.begin(), png.end());
            }
            it->second = "screenshots/" + sha256_hex(bytes) + ".png";
            if (!fs::exists(out_dir / it->second)) write_file_atomic(out_dir / it->second, bytes);
        }
        s.observation.image_ref = it->second;
        s.observation.width = target.width;
        s.observation.height = target.height;
        s.marked_image_ref.reset();
        if (identity) continue;
        if (is_click_related(s.action.kind)) s.action.point = scale_point(s.action.point, t.screen, target);
        if (s.action.semantics && s.action.semantics->element_rect) {
            s.action.semantics->element_rect = scale_rect(*s.action.semantics->element_rect, t.screen, target);
        }
    }
    return out;
}

// ============================================================================
// Pipeline
// ============================================================================

RefineResult refine_trajectory(const Trajectory& t, const fs::path& src_dir, const fs::path& out_dir,
                               const RefineConfig& config) {
    RefineResult result;
    result.report = filter_trajectory(t, src_dir, config);
    if (!result.report.kept) return result;
    auto [filtered, removed] = filter_actions(t, t.tracker_ui_region, config);
    result.report.removed_actions = std::move(removed);
    if (t.screen != config.target) result.report.rescale = std::make_pair(t.screen, config.target);
    Trajectory refined = standardize(filtered, src_dir, out_dir, config.target);
    render_marked_screenshots(out_dir, refined);
    write_trajectory_files(out_dir, refined);
    result.refined = std::move(refined);
    return result;
}

RefineResult refine_stored(TrajectoryStore& store, const std::string& id, const RefineConfig& config) {
    const Trajectory t = store.load(id);
    const fs::path dir = store.dir_of(id);
    const fs::path tmp = dir / ".refined.tmp";
    std::error_code ec;
    fs::remove_all(tmp, ec);
    RefineResult result = refine_trajectory(t, dir, tmp, config);
    const fs::path old = dir / ".refined.old";
    fs::remove_all(old, ec);
    if (fs::exists(dir / "refined")) fs::rename(dir / "refined", old);
    if (result.refined) {
        sync_directory(tmp);
        fs::rename(tmp, dir / "refined");
    }
    fs::remove_all(old, ec);
    fs::remove_all(tmp, ec);
    write_json_file(dir / "refine_report.json", refine_report_json(result.report));
    sync_directory(dir);
    return result;
}

}  // namespace cogtrace
