#include <cogtrace/errors.hpp>
#include <cogtrace/serialization.hpp>
#include <cogtrace/task_library.hpp>

#include <algorithm>
#include <set>

namespace cogtrace {

TaskLibrary::TaskLibrary(std::vector<TaskEntry> entries, std::uint64_t seed) : entries_(std::move(entries)), rng_(seed) {
    std::set<std::string> ids;
    for (const auto& e : entries_) {
        if (e.id.empty() || e.description.empty()) {
            throw Error(ErrorCode::invalid_argument, "task entries need an id and a description");
        }
        if (!ids.insert(e.id).second) throw Error(ErrorCode::invalid_argument, "duplicate task id '" + e.id + "'");
    }
}

TaskLibrary TaskLibrary::load(const std::filesystem::path& path, std::uint64_t seed) {
    std::vector<TaskEntry> entries;
    for (const auto& record : read_jsonl_file(path)) {
        try {
            entries.push_back({record.at("id").get<std::string>(), record.at("description").get<std::string>(),
                               record.value("bad", false)});
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::parse_error, path.string() + ": bad task record: " + e.what());
        }
    }
    TaskLibrary lib(std::move(entries), seed);
    lib.backing_ = path;
    return lib;
}

void TaskLibrary::save(const std::filesystem::path& path) const {
    std::vector<Json> records;
    for (const auto& e : entries_) records.push_back(Json{{"id", e.id}, {"description", e.description}, {"bad", e.bad}});
    write_jsonl_file(path, records);
}

std::size_t TaskLibrary::good_count() const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](const TaskEntry& e) { return !e.bad; }));
}

const TaskEntry& TaskLibrary::draw() {
    std::vector<std::size_t> good;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!entries_[i].bad) good.push_back(i);
    }
    if (good.empty()) throw Error(ErrorCode::library_exhausted, "every task in the library is marked bad");
    std::uniform_int_distribution<std::size_t> pick(0, good.size() - 1);
    const std::size_t index = good[pick(rng_)];
    history_.push_back(index);
    return entries_[index];
}

std::optional<TaskEntry> TaskLibrary::previous() {
    // Walk back past the current entry and anything marked bad since.
    if (!history_.empty()) history_.pop_back();
    while (!history_.empty() && entries_[history_.back()].bad) history_.pop_back();
    if (history_.empty()) return std::nullopt;
    return entries_[history_.back()];
}

void TaskLibrary::mark_bad(const std::string& id) {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const TaskEntry& e) { return e.id == id; });
    if (it == entries_.end()) throw Error(ErrorCode::not_found, "no task with id '" + id + "'");
    it->bad = true;
    if (backing_) save(*backing_);
}

const TaskEntry& TaskLibrary::find(const std::string& id) const {
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const TaskEntry& e) { return e.id == id; });
    if (it == entries_.end()) throw Error(ErrorCode::not_found, "no task with id '" + id + "'");
    return *it;
}

}  // namespace cogtrace
