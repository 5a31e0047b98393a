#pragma once

// JSON mapping for the domain types. Field names are part of the on-disk and
// wire formats; readers ignore unknown fields.

#include <cogtrace/event_model.hpp>
#include <cogtrace/observer.hpp>
#include <cogtrace/trajectory.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cogtrace {

using Json = nlohmann::json;

void to_json(Json& j, const ScreenPoint& p);
void from_json(const Json& j, ScreenPoint& p);
void to_json(Json& j, const ScreenSize& s);
void from_json(const Json& j, ScreenSize& s);
// Rects serialize as [left, top, right, bottom].
void to_json(Json& j, const Rect& r);
void from_json(const Json& j, Rect& r);

void to_json(Json& j, const RawInputEvent& e);
void from_json(const Json& j, RawInputEvent& e);
void to_json(Json& j, const ClickSemantics& s);
void from_json(const Json& j, ClickSemantics& s);
void to_json(Json& j, const UnifiedAction& a);
void from_json(const Json& j, UnifiedAction& a);
void to_json(Json& j, const AgentAction& a);
void from_json(const Json& j, AgentAction& a);

void to_json(Json& j, const Observation& o);
void from_json(const Json& j, Observation& o);
void to_json(Json& j, const ElementInfo& e);
void from_json(const Json& j, ElementInfo& e);
void to_json(Json& j, const RegistryElement& e);
void from_json(const Json& j, RegistryElement& e);
void to_json(Json& j, const ScreenRegistry& s);
void from_json(const Json& j, ScreenRegistry& s);
void to_json(Json& j, const ElementRegistry& r);
void from_json(const Json& j, ElementRegistry& r);

void to_json(Json& j, const TaskMetadata& t);
void from_json(const Json& j, TaskMetadata& t);
void to_json(Json& j, const TrajectoryStep& s);
void from_json(const Json& j, TrajectoryStep& s);

/// Trajectory metadata document (everything except steps).
Json trajectory_metadata_json(const Trajectory& t);
void apply_trajectory_metadata(const Json& j, Trajectory& t);

// ============================================================================
// Files
// ============================================================================

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);

/// Line-delimited JSON. Blank lines are skipped; a malformed line throws
/// Error(parse_error) naming the line number.
std::vector<Json> read_jsonl_file(const std::filesystem::path& path);
void write_jsonl_file(const std::filesystem::path& path, const std::vector<Json>& records);
std::string to_jsonl_line(const Json& record);

/// Raw event log: one RawInputEvent per line.
std::vector<RawInputEvent> read_raw_event_log(const std::filesystem::path& path);
void write_raw_event_log(const std::filesystem::path& path, const std::vector<RawInputEvent>& events);

}  // namespace cogtrace
