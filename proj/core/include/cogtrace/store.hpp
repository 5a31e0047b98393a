#pragma once

#include <cogtrace/trajectory.hpp>

#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace cogtrace {

/// Test seam: called with a checkpoint name at every step of a save. Crash
/// tests install a hook that kills the process at a chosen checkpoint.
using StoreCheckpointHook = std::function<void(std::string_view)>;
void set_store_checkpoint_hook(StoreCheckpointHook hook);

/// Local trajectory store.
///
///   <root>/<id>/metadata.json
///   <root>/<id>/steps.jsonl
///   <root>/<id>/screenshots/<sha256>.png
///   <root>/<id>/marked/<sha256>.png
///   <root>/<id>/trajectory.md
///
/// New trajectories are assembled under <root>/.staging/<id>/ and renamed into
/// place in one step, so a reader (or a restart after a crash) sees either no
/// trajectory or a complete one. Leftover staging directories are removed
/// when the store is opened.
class TrajectoryStore {
public:
    /// Creates `root` if needed. Throws Error(store_unavailable) when it is not
    /// a writable directory.
    explicit TrajectoryStore(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path dir_of(const std::string& id) const;

    /// Committed trajectory ids, sorted.
    std::vector<std::string> list() const;
    bool exists(const std::string& id) const;
    /// Throws Error(not_found) for unknown ids, Error(parse_error) for corrupt records.
    Trajectory load(const std::string& id) const;

    class Staging {
    public:
        Staging(const Staging&) = delete;
        Staging& operator=(const Staging&) = delete;
        ~Staging();

        const std::string& id() const noexcept { return id_; }
        const std::filesystem::path& dir() const noexcept { return dir_; }

        /// Copies image bytes under screenshots/, named by content digest.
        /// Returns the trajectory-relative reference.
        std::string put_image(std::string_view png_bytes);
        std::string put_image_file(const std::filesystem::path& src);
        /// Appends one line to steps.jsonl.
        void append_step(const TrajectoryStep& step);

    private:
        friend class TrajectoryStore;
        Staging(TrajectoryStore& store, std::string id);

        TrajectoryStore& store_;
        std::string id_;
        std::filesystem::path dir_;
        std::FILE* steps_ = nullptr;
        bool open_ = true;
    };

    /// Throws Error(invalid_argument) if the id is taken or malformed.
    std::unique_ptr<Staging> begin(const std::string& id);
    /// Writes metadata, marked screenshots and trajectory.md, then publishes the
    /// staging directory. The trajectory's steps must be exactly those appended.
    void commit(Staging& staging, Trajectory& trajectory);
    void abort(Staging& staging);

    /// Convenience for tools and tests: stages and commits a finished
    /// trajectory whose observation image_refs point at readable files.
    Trajectory save(Trajectory trajectory);

    /// Writes a derived file inside a committed trajectory (atomic per file).
    void write_artifact(const std::string& id, const std::filesystem::path& rel, std::string_view content);

    std::filesystem::path staging_root() const { return root_ / ".staging"; }

private:
    std::filesystem::path root_;
    mutable std::mutex mutex_;
};

/// Reads metadata.json + steps.jsonl from any trajectory-shaped directory
/// (a committed trajectory or a derived copy such as refined/).
Trajectory load_trajectory_dir(const std::filesystem::path& dir);
/// Writes steps.jsonl, metadata.json and trajectory.md into `dir`.
void write_trajectory_files(const std::filesystem::path& dir, const Trajectory& trajectory);

/// Id of the form 20261016T093000Z-1a2b3c.
std::string new_trajectory_id();
bool valid_trajectory_id(std::string_view id);

/// Renders red-marked copies for click-related steps into `dir`/marked/ and
/// sets each step's marked_image_ref. Steps without a readable image are
/// skipped.
void render_marked_screenshots(const std::filesystem::path& dir, Trajectory& trajectory);

}  // namespace cogtrace
