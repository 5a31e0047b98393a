#include <cogtrace/errors.hpp>
#include <cogtrace/image.hpp>
#include <cogtrace/markdown.hpp>
#include <cogtrace/marks.hpp>
#include <cogtrace/serialization.hpp>
#include <cogtrace/store.hpp>
#include <cogtrace/util.hpp>

#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <set>

namespace cogtrace {

namespace fs = std::filesystem;

namespace {

std::mutex g_hook_mutex;
StoreCheckpointHook g_hook;

void checkpoint(std::string_view name) {
    StoreCheckpointHook hook;
    {
        std::lock_guard lock(g_hook_mutex);
        hook = g_hook;
    }
    if (hook) hook(name);
}

constexpr const char* kOwnerFile = ".owner";

bool process_alive(pid_t pid) { return pid > 0 && (::kill(pid, 0) == 0 || errno == EPERM); }

void remove_dead_staging(const fs::path& staging_root) {
    std::error_code ec;
    if (!fs::exists(staging_root, ec)) return;
    for (const auto& entry : fs::directory_iterator(staging_root, ec)) {
        pid_t owner = 0;
        try {
            owner = static_cast<pid_t>(std::stol(trim(read_file(entry.path() / kOwnerFile))));
        } catch (...) {
            owner = 0;
        }
        if (owner == ::getpid() || !process_alive(owner)) fs::remove_all(entry.path(), ec);
    }
}

std::string digest_name(std::string_view bytes) { return sha256_hex(bytes) + ".png"; }

}  // namespace

void set_store_checkpoint_hook(StoreCheckpointHook hook) {
    std::lock_guard lock(g_hook_mutex);
    g_hook = std::move(hook);
}

std::string new_trajectory_id() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
    thread_local std::mt19937_64 rng{std::random_device{}()};
    char suffix[8];
    std::snprintf(suffix, sizeof suffix, "%06llx", static_cast<unsigned long long>(rng() & 0xffffff));
    return std::string(stamp) + "-" + suffix;
}

bool valid_trajectory_id(std::string_view id) {
    if (id.empty() || id.size() > 128 || id.front() == '.') return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
               c == '.';
    });
}

// ============================================================================
// TrajectoryStore
// ============================================================================

TrajectoryStore::TrajectoryStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (!fs::is_directory(root_, ec) || ::access(root_.c_str(), W_OK) != 0) {
        throw Error(ErrorCode::store_unavailable, "store path " + root_.string() + " is not a writable directory");
    }
    root_ = fs::canonical(root_);
    fs::create_directories(staging_root(), ec);
    remove_dead_staging(staging_root());
}

fs::path TrajectoryStore::dir_of(const std::string& id) const { return root_ / id; }

std::vector<std::string> TrajectoryStore::list() const {
    std::vector<std::string> ids;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root_, ec)) {
        const std::string name = entry.path().filename().string();
        if (name.empty() || name.front() == '.' || !entry.is_directory()) continue;
        if (fs::exists(entry.path() / "metadata.json")) ids.push_back(name);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

bool TrajectoryStore::exists(const std::string& id) const {
    return valid_trajectory_id(id) && fs::exists(dir_of(id) / "metadata.json");
}

Trajectory TrajectoryStore::load(const std::string& id) const {
    if (!exists(id)) throw Error(ErrorCode::not_found, "no trajectory '" + id + "' in " + root_.string());
    return load_trajectory_dir(dir_of(id));
}

Trajectory load_trajectory_dir(const fs::path& dir) {
    Trajectory t;
    apply_trajectory_metadata(read_json_file(dir / "metadata.json"), t);
    for (const auto& record : read_jsonl_file(dir / "steps.jsonl")) {
        try {
            t.steps.push_back(record.get<TrajectoryStep>());
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::parse_error, (dir / "steps.jsonl").string() + ": " + e.what());
        }
    }
    return t;
}

void write_trajectory_files(const fs::path& dir, const Trajectory& trajectory) {
    std::vector<Json> records;
    records.reserve(trajectory.steps.size());
    for (const auto& s : trajectory.steps) records.push_back(s);
    write_jsonl_file(dir / "steps.jsonl", records);
    write_json_file(dir / "metadata.json", trajectory_metadata_json(trajectory));
    write_file_atomic(dir / "trajectory.md", export_markdown(trajectory));
}

std::unique_ptr<TrajectoryStore::Staging> TrajectoryStore::begin(const std::string& id) {
    std::lock_guard lock(mutex_);
    if (!valid_trajectory_id(id)) throw Error(ErrorCode::invalid_argument, "malformed trajectory id '" + id + "'");
    if (fs::exists(dir_of(id)) || fs::exists(staging_root() / id)) {
        throw Error(ErrorCode::invalid_argument, "trajectory id '" + id + "' already in use");
    }
    return std::unique_ptr<Staging>(new Staging(*this, id));
}

TrajectoryStore::Staging::Staging(TrajectoryStore& store, std::string id)
    : store_(store), id_(std::move(id)), dir_(store.staging_root() / id_) {
    fs::create_directories(dir_ / "screenshots");
    write_file_atomic(dir_ / kOwnerFile, std::to_string(::getpid()) + "\n");
    steps_ = std::fopen((dir_ / "steps.jsonl").c_str(), "ab");
    if (steps_ == nullptr) throw Error(ErrorCode::io_error, "cannot open steps log in " + dir_.string());
    checkpoint("staging_created");
}

TrajectoryStore::Staging::~Staging() {
    if (steps_ != nullptr) std::fclose(steps_);
    if (open_) {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }
}

std::string TrajectoryStore::Staging::put_image(std::string_view png_bytes) {
    const std::string name = digest_name(png_bytes);
    const fs::path target = dir_ / "screenshots" / name;
    if (!fs::exists(target)) {
        write_file_atomic(target, png_bytes);
        checkpoint("image_written");
    }
    return "screenshots/" + name;
}

std::string TrajectoryStore::Staging::put_image_file(const fs::path& src) { return put_image(read_file(src)); }

void TrajectoryStore::Staging::append_step(const TrajectoryStep& step) {
    const std::string line = to_jsonl_line(Json(step));
    if (std::fwrite(line.data(), 1, line.size(), steps_) != line.size() || std::fflush(steps_) != 0) {
        throw Error(ErrorCode::io_error, "cannot append step to " + dir_.string());
    }
    checkpoint("step_appended");
}

void TrajectoryStore::commit(Staging& staging, Trajectory& trajectory) {
    std::lock_guard lock(mutex_);
    if (!staging.open_) throw Error(ErrorCode::invalid_argument, "staging area already closed");
    trajectory.id = staging.id_;
    if (staging.steps_ != nullptr) {
        std::fclose(staging.steps_);
        staging.steps_ = nullptr;
    }
    // Frames pushed during recording that no step ended up using.
    std::set<std::string> referenced;
    for (const auto& s : trajectory.steps) referenced.insert(s.observation.image_ref);
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(staging.dir_ / "screenshots", ec)) {
        if (!referenced.count("screenshots/" + entry.path().filename().string())) fs::remove(entry.path(), ec);
    }
    render_marked_screenshots(staging.dir_, trajectory);
    checkpoint("marked_written");

    std::vector<Json> records;
    records.reserve(trajectory.steps.size());
    for (const auto& s : trajectory.steps) records.push_back(s);
    write_jsonl_file(staging.dir_ / "steps.jsonl", records);
    checkpoint("steps_written");
    write_json_file(staging.dir_ / "metadata.json", trajectory_metadata_json(trajectory));
    checkpoint("metadata_written");
    write_file_atomic(staging.dir_ / "trajectory.md", export_markdown(trajectory));
    checkpoint("markdown_written");
    fs::remove(staging.dir_ / kOwnerFile);
    sync_directory(staging.dir_);
    checkpoint("before_publish");

    const fs::path target = dir_of(staging.id_);
    if (::rename(staging.dir_.c_str(), target.c_str()) != 0) {
        throw Error(ErrorCode::io_error, "cannot publish trajectory " + staging.id_ + ": " + std::strerror(errno));
    }
    staging.open_ = false;
    sync_directory(root_);
    checkpoint("published");
}

void TrajectoryStore::abort(Staging& staging) {
    std::lock_guard lock(mutex_);
    if (staging.steps_ != nullptr) {
        std::fclose(staging.steps_);
        staging.steps_ = nullptr;
    }
    std::error_code ec;
    fs::remove_all(staging.dir_, ec);
    staging.open_ = false;
}

Trajectory TrajectoryStore::save(Trajectory trajectory) {
    if (trajectory.id.empty()) trajectory.id = new_trajectory_id();
    auto staging = begin(trajectory.id);
    for (auto& step : trajectory.steps) {
        step.observation.image_ref = staging->put_image_file(step.observation.image_ref);
        step.marked_image_ref.reset();
        staging->append_step(step);
    }
    commit(*staging, trajectory);
    return trajectory;
}

void TrajectoryStore::write_artifact(const std::string& id, const fs::path& rel, std::string_view content) {
    if (!exists(id)) throw Error(ErrorCode::not_found, "no trajectory '" + id + "'");
    const fs::path target = dir_of(id) / rel;
    fs::create_directories(target.parent_path());
    write_file_atomic(target, content);
}

// ============================================================================
// Marked screenshots
// ============================================================================

void render_marked_screenshots(const fs::path& dir, Trajectory& trajectory) {
    for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
        auto& step = trajectory.steps[i];
        step.marked_image_ref.reset();
        if (!is_click_related(step.action.kind)) continue;
        const fs::path src = dir / step.observation.image_ref;
        Image base;
        try {
            base = load_image(src);
        } catch (const Error&) {
            continue;
        }
        if (!base.size().contains(step.action.point)) continue;
        Image marked;
        const bool drag_end = step.action.kind == ActionKind::drag_to && i > 0 &&
                              trajectory.steps[i - 1].action.kind == ActionKind::press;
        if (drag_end) {
            marked = draw_drag_marks(base, DragMarks{trajectory.steps[i - 1].action.point, step.action.point});
        } else {
            std::optional<Rect> rect;
            if (step.action.semantics) rect = step.action.semantics->element_rect;
            marked = draw_click_marks(base, click_marks(base.size(), step.action.point, rect));
        }
        const auto bytes = encode_png(marked);
        const std::string_view view(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        const std::string rel = "marked/" + digest_name(view);
        fs::create_directories(dir / "marked");
        if (!fs::exists(dir / rel)) write_file_atomic(dir / rel, view);
        step.marked_image_ref = rel;
    }
}

}  // namespace cogtrace
