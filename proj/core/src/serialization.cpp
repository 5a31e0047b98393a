#include <cogtrace/action_dsl.hpp>
#include <cogtrace/errors.hpp>
#include <cogtrace/serialization.hpp>
#include <cogtrace/util.hpp>

#include <fstream>

namespace cogtrace {

namespace {

[[noreturn]] void bad_record(const std::string& what) { throw Error(ErrorCode::parse_error, what); }

const Json& require(const Json& j, const char* field) {
    if (!j.is_object()) bad_record(std::string("expected an object holding '") + field + "'");
    auto it = j.find(field);
    if (it == j.end()) bad_record(std::string("missing field '") + field + "'");
    return *it;
}

template <typename T>
std::optional<T> optional_field(const Json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

std::string_view raw_kind_name(RawEventKind k) {
    switch (k) {
        case RawEventKind::mouse_down: return "mouse_down";
        case RawEventKind::mouse_up: return "mouse_up";
        case RawEventKind::mouse_move: return "mouse_move";
        case RawEventKind::wheel: return "wheel";
        case RawEventKind::key_down: return "key_down";
        case RawEventKind::key_up: return "key_up";
    }
    return "";
}

RawEventKind raw_kind_from(const std::string& s) {
    if (s == "mouse_down") return RawEventKind::mouse_down;
    if (s == "mouse_up") return RawEventKind::mouse_up;
    if (s == "mouse_move") return RawEventKind::mouse_move;
    if (s == "wheel") return RawEventKind::wheel;
    if (s == "key_down") return RawEventKind::key_down;
    if (s == "key_up") return RawEventKind::key_up;
    bad_record("unknown raw event kind '" + s + "'");
}

std::string_view button_name(MouseButton b) {
    switch (b) {
        case MouseButton::left: return "left";
        case MouseButton::right: return "right";
        case MouseButton::middle: return "middle";
    }
    return "";
}

MouseButton button_from(const std::string& s) {
    if (s == "left") return MouseButton::left;
    if (s == "right") return MouseButton::right;
    if (s == "middle") return MouseButton::middle;
    bad_record("unknown mouse button '" + s + "'");
}

Json pair_json(int a, int b) { return Json::array({a, b}); }

std::pair<int, int> pair_from(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 2) bad_record(std::string(what) + " must be a 2-element array");
    return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

void to_json(Json& j, const ScreenPoint& p) { j = Json{{"x", p.x}, {"y", p.y}}; }
void from_json(const Json& j, ScreenPoint& p) {
    p.x = require(j, "x").get<int>();
    p.y = require(j, "y").get<int>();
}

void to_json(Json& j, const ScreenSize& s) { j = Json{{"width", s.width}, {"height", s.height}}; }
void from_json(const Json& j, ScreenSize& s) {
    s.width = require(j, "width").get<int>();
    s.height = require(j, "height").get<int>();
}

void to_json(Json& j, const Rect& r) { j = Json::array({r.left, r.top, r.right, r.bottom}); }
void from_json(const Json& j, Rect& r) {
    if (!j.is_array() || j.size() != 4) bad_record("rect must be [left, top, right, bottom]");
    r = Rect{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

// ============================================================================
// Raw events
// ============================================================================

void to_json(Json& j, const RawInputEvent& e) {
    j = Json{{"ts", e.ts}, {"kind", raw_kind_name(e.kind)}};
    switch (e.kind) {
        case RawEventKind::mouse_down:
        case RawEventKind::mouse_up:
            j["button"] = button_name(e.button);
            j["pos"] = e.pos;
            break;
        case RawEventKind::mouse_move: j["pos"] = e.pos; break;
        case RawEventKind::wheel:
            j["pos"] = e.pos;
            j["wheel_delta"] = pair_json(e.wheel_dx, e.wheel_dy);
            break;
        case RawEventKind::key_down:
        case RawEventKind::key_up: j["key"] = e.key; break;
    }
    if (!e.modifiers.empty()) {
        Json mods = Json::array();
        for (auto [m, name] : {std::pair{Modifier::ctrl, "ctrl"}, std::pair{Modifier::shift, "shift"},
                               std::pair{Modifier::alt, "alt"}, std::pair{Modifier::meta, "meta"}}) {
            if (e.modifiers.has(m)) mods.push_back(name);
        }
        j["modifiers"] = std::move(mods);
    }
}

void from_json(const Json& j, RawInputEvent& e) {
    e = RawInputEvent{};
    e.ts = require(j, "ts").get<Millis>();
    e.kind = raw_kind_from(require(j, "kind").get<std::string>());
    switch (e.kind) {
        case RawEventKind::mouse_down:
        case RawEventKind::mouse_up:
            e.button = button_from(require(j, "button").get<std::string>());
            e.pos = require(j, "pos").get<ScreenPoint>();
            break;
        case RawEventKind::mouse_move: e.pos = require(j, "pos").get<ScreenPoint>(); break;
        case RawEventKind::wheel: {
            e.pos = j.contains("pos") ? j["pos"].get<ScreenPoint>() : ScreenPoint{};
            auto [dx, dy] = pair_from(require(j, "wheel_delta"), "wheel_delta");
            e.wheel_dx = dx;
            e.wheel_dy = dy;
            break;
        }
        case RawEventKind::key_down:
        case RawEventKind::key_up: e.key = require(j, "key").get<std::string>(); break;
    }
    if (auto it = j.find("modifiers"); it != j.end()) {
        for (const auto& m : *it) {
            auto mod = modifier_of(normalize_key(m.get<std::string>()));
            if (!mod) bad_record("unknown modifier " + m.dump());
            e.modifiers.set(*mod);
        }
    }
}

// ============================================================================
// Actions
// ============================================================================

void to_json(Json& j, const ClickSemantics& s) {
    j = Json::object();
    if (s.element_name) j["element_name"] = *s.element_name;
    if (s.element_rect) j["element_rect"] = *s.element_rect;
    if (s.description) j["description"] = *s.description;
}

void from_json(const Json& j, ClickSemantics& s) {
    s.element_name = optional_field<std::string>(j, "element_name");
    s.element_rect = optional_field<Rect>(j, "element_rect");
    s.description = optional_field<std::string>(j, "description");
}

void to_json(Json& j, const UnifiedAction& a) {
    j = Json{{"kind", action_kind_name(a.kind)}};
    if (is_click_related(a.kind)) j["point"] = a.point;
    switch (a.kind) {
        case ActionKind::scroll: j["scroll_offset"] = pair_json(a.scroll.dx, a.scroll.dy); break;
        case ActionKind::press_key: j["key"] = a.key; break;
        case ActionKind::hotkey: j["keys"] = Json::array({a.modifier, a.key}); break;
        case ActionKind::type_text: j["text"] = a.text; break;
        default: break;
    }
    if (a.semantics) j["click_semantics"] = *a.semantics;
}

void from_json(const Json& j, UnifiedAction& a) {
    const auto name = require(j, "kind").get<std::string>();
    const auto kind = action_kind_from_name(name);
    if (!kind) bad_record("unknown action kind '" + name + "'");
    a = UnifiedAction{};
    a.kind = *kind;
    if (is_click_related(a.kind)) a.point = require(j, "point").get<ScreenPoint>();
    switch (a.kind) {
        case ActionKind::scroll: {
            auto [dx, dy] = pair_from(require(j, "scroll_offset"), "scroll_offset");
            a.scroll = {dx, dy};
            break;
        }
        case ActionKind::press_key: a.key = require(j, "key").get<std::string>(); break;
        case ActionKind::hotkey: {
            const Json& keys = require(j, "keys");
            if (!keys.is_array() || keys.size() != 2) bad_record("hotkey keys must be a 2-element array");
            a.modifier = keys[0].get<std::string>();
            a.key = keys[1].get<std::string>();
            break;
        }
        case ActionKind::type_text: a.text = require(j, "text").get<std::string>(); break;
        default: break;
    }
    if (is_click_related(a.kind)) a.semantics = optional_field<ClickSemantics>(j, "click_semantics");
    try {
        a.validate();
    } catch (const Error& err) {
        bad_record(err.what());
    }
}

void to_json(Json& j, const AgentAction& a) {
    j = Json{{"kind", agent_action_kind_name(a.kind)}};
    switch (a.kind) {
        case AgentActionKind::click:
        case AgentActionKind::right_click:
        case AgentActionKind::double_click: j["target_description"] = a.target_description; break;
        case AgentActionKind::drag:
            j["from"] = a.from;
            j["to"] = a.to;
            break;
        case AgentActionKind::scroll: j["scroll_offset"] = pair_json(a.scroll.dx, a.scroll.dy); break;
        case AgentActionKind::press_key: j["key"] = a.key; break;
        case AgentActionKind::hotkey: j["keys"] = Json::array({a.modifier, a.key}); break;
        case AgentActionKind::type_text: j["text"] = a.text; break;
        default: break;
    }
}

void from_json(const Json& j, AgentAction& a) {
    // The DSL line is the canonical agent-action encoding; structured fields
    // are accepted too.
    if (j.is_string()) {
        a = parse_agent_action(j.get<std::string>());
        return;
    }
    if (auto it = j.find("line"); it != j.end() && !j.contains("kind")) {
        a = parse_agent_action(it->get<std::string>());
        return;
    }
    const auto name = require(j, "kind").get<std::string>();
    a = AgentAction{};
    bool found = false;
    for (int i = 0; i < kAgentActionKindCount; ++i) {
        if (agent_action_kind_name(static_cast<AgentActionKind>(i)) == name) {
            a.kind = static_cast<AgentActionKind>(i);
            found = true;
        }
    }
    if (!found) bad_record("unknown agent action kind '" + name + "'");
    switch (a.kind) {
        case AgentActionKind::click:
        case AgentActionKind::right_click:
        case AgentActionKind::double_click: a.target_description = require(j, "target_description").get<std::string>(); break;
        case AgentActionKind::drag:
            a.from = require(j, "from").get<ScreenPoint>();
            a.to = require(j, "to").get<ScreenPoint>();
            break;
        case AgentActionKind::scroll: {
            auto [dx, dy] = pair_from(require(j, "scroll_offset"), "scroll_offset");
            a.scroll = {dx, dy};
            break;
        }
        case AgentActionKind::press_key: a.key = require(j, "key").get<std::string>(); break;
        case AgentActionKind::hotkey: {
            const Json& keys = require(j, "keys");
            if (!keys.is_array() || keys.size() != 2) bad_record("hotkey keys must be a 2-element array");
            a.modifier = keys[0].get<std::string>();
            a.key = keys[1].get<std::string>();
            break;
        }
        case AgentActionKind::type_text: a.text = require(j, "text").get<std::string>(); break;
        default: break;
    }
    try {
        a.validate();
    } catch (const Error& err) {
        bad_record(err.what());
    }
}

// ============================================================================
// Observations and elements
// ============================================================================

void to_json(Json& j, const Observation& o) {
    j = Json{{"capture_ts", o.capture_ts}, {"image_ref", o.image_ref}, {"width", o.width}, {"height", o.height}};
    if (o.screen_state) j["screen_state"] = *o.screen_state;
}

void from_json(const Json& j, Observation& o) {
    o.capture_ts = require(j, "capture_ts").get<Millis>();
    o.image_ref = require(j, "image_ref").get<std::string>();
    o.width = j.value("width", 0);
    o.height = j.value("height", 0);
    o.screen_state = optional_field<std::string>(j, "screen_state");
}

void to_json(Json& j, const ElementInfo& e) {
    j = Json{{"rect", e.rect}, {"source", e.source}};
    j["name"] = e.name ? Json(*e.name) : Json(nullptr);
}

void from_json(const Json& j, ElementInfo& e) {
    e.name = optional_field<std::string>(j, "name");
    e.rect = require(j, "rect").get<Rect>();
    e.source = j.value("source", std::string{});
}

void to_json(Json& j, const RegistryElement& e) {
    j = Json{{"rect", e.rect}};
    j["name"] = e.name ? Json(*e.name) : Json(nullptr);
}

void from_json(const Json& j, RegistryElement& e) {
    e.name = optional_field<std::string>(j, "name");
    e.rect = require(j, "rect").get<Rect>();
}

void to_json(Json& j, const ScreenRegistry& s) { j = Json{{"id", s.id}, {"elements", s.elements}}; }

void from_json(const Json& j, ScreenRegistry& s) {
    s.id = require(j, "id").get<std::string>();
    s.elements = j.value("elements", std::vector<RegistryElement>{});
}

void to_json(Json& j, const ElementRegistry& r) { j = Json{{"screen", r.screen}, {"screens", r.screens}}; }

void from_json(const Json& j, ElementRegistry& r) {
    r.screen = require(j, "screen").get<ScreenSize>();
    r.screens = require(j, "screens").get<std::vector<ScreenRegistry>>();
    for (const auto& s : r.screens) {
        for (const auto& e : s.elements) {
            if (e.rect.degenerate() || !e.rect.within(r.screen)) {
                bad_record("element rect out of bounds or degenerate on screen '" + s.id + "'");
            }
        }
    }
}

// ============================================================================
// Trajectories
// ============================================================================

void to_json(Json& j, const TaskMetadata& t) {
    j = Json{{"mode", task_mode_name(t.mode)}, {"outcome", outcome_name(t.outcome)}};
    j["description"] = t.description ? Json(*t.description) : Json(nullptr);
    j["difficulty"] = t.difficulty ? Json(difficulty_name(*t.difficulty)) : Json(nullptr);
    if (t.task_id) j["task_id"] = *t.task_id;
}

void from_json(const Json& j, TaskMetadata& t) {
    const auto mode = task_mode_from_name(require(j, "mode").get<std::string>());
    if (!mode) bad_record("unknown task mode");
    t.mode = *mode;
    const auto outcome = outcome_from_name(require(j, "outcome").get<std::string>());
    if (!outcome) bad_record("unknown outcome");
    t.outcome = *outcome;
    t.description = optional_field<std::string>(j, "description");
    t.difficulty.reset();
    if (auto d = optional_field<std::string>(j, "difficulty")) {
        t.difficulty = difficulty_from_name(*d);
        if (!t.difficulty) bad_record("unknown difficulty '" + *d + "'");
    }
    t.task_id = optional_field<std::string>(j, "task_id");
}

void to_json(Json& j, const TrajectoryStep& s) {
    j = Json{{"ts", s.ts}, {"action", s.action}, {"line", render_tracker_action(s.action)}, {"observation", s.observation}};
    if (s.thought) j["thought"] = *s.thought;
    if (s.marked_image_ref) j["marked_image"] = *s.marked_image_ref;
}

void from_json(const Json& j, TrajectoryStep& s) {
    s.ts = require(j, "ts").get<Millis>();
    s.action = require(j, "action").get<UnifiedAction>();
    s.observation = require(j, "observation").get<Observation>();
    s.thought = optional_field<std::string>(j, "thought");
    s.marked_image_ref = optional_field<std::string>(j, "marked_image");
}

Json trajectory_metadata_json(const Trajectory& t) {
    Json j{{"format", "cogtrace.trajectory/1"},
           {"id", t.id},
           {"task", t.task},
           {"screen", t.screen},
           {"created_at", t.created_at},
           {"step_count", t.steps.size()}};
    if (t.tracker_ui_region) j["tracker_ui_region"] = *t.tracker_ui_region;
    return j;
}

void apply_trajectory_metadata(const Json& j, Trajectory& t) {
    t.id = require(j, "id").get<std::string>();
    t.task = require(j, "task").get<TaskMetadata>();
    t.screen = require(j, "screen").get<ScreenSize>();
    t.created_at = j.value("created_at", std::string{});
    t.tracker_ui_region = optional_field<Rect>(j, "tracker_ui_region");
}

// ============================================================================
// Files
// ============================================================================

Json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
    write_file_atomic(path, value.dump(2) + "\n");
}

std::vector<Json> read_jsonl_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
    std::vector<Json> records;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        try {
            records.push_back(Json::parse(line));
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::parse_error, path.string() + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return records;
}

std::string to_jsonl_line(const Json& record) {
    return record.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n";
}

void write_jsonl_file(const std::filesystem::path& path, const std::vector<Json>& records) {
    std::string content;
    for (const auto& r : records) content += to_jsonl_line(r);
    write_file_atomic(path, content);
}

std::vector<RawInputEvent> read_raw_event_log(const std::filesystem::path& path) {
    std::vector<RawInputEvent> events;
    std::size_t index = 0;
    for (const auto& record : read_jsonl_file(path)) {
        ++index;
        try {
            events.push_back(record.get<RawInputEvent>());
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::parse_error, path.string() + ": record " + std::to_string(index) + ": " + e.what());
        }
    }
    return events;
}

void write_raw_event_log(const std::filesystem::path& path, const std::vector<RawInputEvent>& events) {
    std::vector<Json> records;
    records.reserve(events.size());
    for (const auto& e : events) records.emplace_back(e);
    write_jsonl_file(path, records);
}

}  // namespace cogtrace
