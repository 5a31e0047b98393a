#pragma once

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cogtrace {

struct TaskEntry {
    std::string id;
    std::string description;
    bool bad = false;

    friend bool operator==(const TaskEntry&, const TaskEntry&) = default;
};

/// Predefined tasks handed out at random. Entries marked bad are never drawn
/// again, and the mark is written back to the backing file when there is one.
class TaskLibrary {
public:
    explicit TaskLibrary(std::vector<TaskEntry> entries, std::uint64_t seed = std::random_device{}());
    /// JSONL, one {id, description, bad} per line.
    static TaskLibrary load(const std::filesystem::path& path, std::uint64_t seed = std::random_device{}());
    void save(const std::filesystem::path& path) const;

    /// Uniform over non-bad entries. Throws Error(library_exhausted).
    const TaskEntry& draw();
    /// The entry drawn before the current one, if any.
    std::optional<TaskEntry> previous();
    /// Throws Error(not_found).
    void mark_bad(const std::string& id);
    /// Throws Error(not_found).
    const TaskEntry& find(const std::string& id) const;

    const std::vector<TaskEntry>& entries() const noexcept { return entries_; }
    std::size_t good_count() const;

private:
    std::vector<TaskEntry> entries_;
    std::mt19937_64 rng_;
    std::vector<std::size_t> history_;
    std::optional<std::filesystem::path> backing_;
};

}  // namespace cogtrace
