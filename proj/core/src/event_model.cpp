#include <cogtrace/errors.hpp>
#include <cogtrace/event_model.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_map>
#include <utility>

namespace cogtrace {

// ============================================================================
// Errors
// ============================================================================

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::io_error: return "IoError";
        case ErrorCode::not_found: return "NotFound";
        case ErrorCode::parse_error: return "ParseError";
        case ErrorCode::out_of_order_event: return "OutOfOrderEvent";
        case ErrorCode::stale_observation: return "StaleObservation";
        case ErrorCode::no_observation: return "NoObservation";
        case ErrorCode::provider_unavailable: return "ProviderUnavailable";
        case ErrorCode::session_already_active: return "SessionAlreadyActive";
        case ErrorCode::session_not_active: return "SessionNotActive";
        case ErrorCode::missing_description: return "MissingDescription";
        case ErrorCode::library_exhausted: return "LibraryExhausted";
        case ErrorCode::aspect_ratio_mismatch: return "AspectRatioMismatch";
        case ErrorCode::client_error: return "ClientError";
        case ErrorCode::planner_malformed: return "PlannerMalformed";
        case ErrorCode::env_error: return "EnvError";
        case ErrorCode::address_in_use: return "AddressInUse";
        case ErrorCode::store_unavailable: return "StoreUnavailable";
    }
    return "Unknown";
}

ParseError::ParseError(std::size_t position, std::string expected, const std::string& input)
    : Error(ErrorCode::parse_error,
            "at column " + std::to_string(position) + ": expected " + expected + " in \"" + input + "\""),
      position_(position),
      expected_(std::move(expected)) {}

// ============================================================================
// Raw events
// ============================================================================

RawInputEvent RawInputEvent::mouse_down(Millis ts, ScreenPoint pos, MouseButton button) {
    RawInputEvent e;
    e.ts = ts;
    e.kind = RawEventKind::mouse_down;
    e.pos = pos;
    e.button = button;
    return e;
}

RawInputEvent RawInputEvent::mouse_up(Millis ts, ScreenPoint pos, MouseButton button) {
    RawInputEvent e = mouse_down(ts, pos, button);
    e.kind = RawEventKind::mouse_up;
    return e;
}

RawInputEvent RawInputEvent::mouse_move(Millis ts, ScreenPoint pos) {
    RawInputEvent e;
    e.ts = ts;
    e.kind = RawEventKind::mouse_move;
    e.pos = pos;
    return e;
}

RawInputEvent RawInputEvent::wheel(Millis ts, ScreenPoint pos, int dx, int dy) {
    RawInputEvent e;
    e.ts = ts;
    e.kind = RawEventKind::wheel;
    e.pos = pos;
    e.wheel_dx = dx;
    e.wheel_dy = dy;
    return e;
}

RawInputEvent RawInputEvent::key_down(Millis ts, std::string key) {
    RawInputEvent e;
    e.ts = ts;
    e.kind = RawEventKind::key_down;
    e.key = std::move(key);
    return e;
}

RawInputEvent RawInputEvent::key_up(Millis ts, std::string key) {
    RawInputEvent e = key_down(ts, std::move(key));
    e.kind = RawEventKind::key_up;
    return e;
}

// ============================================================================
// Key symbols
// ============================================================================

namespace {

const std::unordered_map<std::string, std::string>& key_aliases() {
    static const std::unordered_map<std::string, std::string> aliases = {
        {"return", "enter"},       {"kp_enter", "enter"},     {"escape", "esc"},
        {"control", "ctrl"},       {"control_l", "ctrl"},     {"control_r", "ctrl"},
        {"ctrl_l", "ctrl"},        {"ctrl_r", "ctrl"},        {"lcontrol", "ctrl"},
        {"rcontrol", "ctrl"},      {"alt_l", "alt"},          {"alt_r", "alt"},
        {"alt_gr", "alt"},         {"option", "alt"},         {"menu", "alt"},
        {"lmenu", "alt"},          {"rmenu", "alt"},          {"cmd", "meta"},
        {"cmd_l", "meta"},         {"cmd_r", "meta"},         {"command", "meta"},
        {"super", "meta"},         {"super_l", "meta"},       {"super_r", "meta"},
        {"win", "meta"},           {"lwin", "meta"},          {"rwin", "meta"},
        {"meta_l", "meta"},        {"meta_r", "meta"},        {"shift_l", "shift"},
        {"shift_r", "shift"},      {"lshift", "shift"},       {"rshift", "shift"},
        {"capslock", "caps_lock"}, {"caps", "caps_lock"},     {"back_space", "backspace"},
        {"back", "backspace"},     {"del", "delete"},         {"pgup", "page_up"},
        {"prior", "page_up"},      {"pageup", "page_up"},     {"pgdn", "page_down"},
        {"next", "page_down"},     {"pagedown", "page_down"}, {"arrowup", "up"},
        {"arrowdown", "down"},     {"arrowleft", "left"},     {"arrowright", "right"},
        {"ins", "insert"},         {"spacebar", "space"},
    };
    return aliases;
}

constexpr std::array<std::pair<char, char>, 21> kShiftedSymbols = {{
    {'1', '!'}, {'2', '@'}, {'3', '#'}, {'4', '$'}, {'5', '%'}, {'6', '^'}, {'7', '&'},
    {'8', '*'}, {'9', '('}, {'0', ')'}, {'-', '_'}, {'=', '+'}, {'[', '{'}, {']', '}'},
    {'\\', '|'}, {';', ':'}, {'\'', '"'}, {',', '<'}, {'.', '>'}, {'/', '?'}, {'`', '~'},
}};

bool is_single_char(std::string_view s) {
    if (s.empty()) return false;
    const auto lead = static_cast<unsigned char>(s[0]);
    std::size_t len = 1;
    if (lead >= 0xF0) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    return s.size() == len;
}

}  // namespace

std::string normalize_key(std::string_view key) {
    if (key == " ") return "space";
    if (is_single_char(key)) return std::string(key);
    std::string lower;
    lower.reserve(key.size());
    for (char c : key) {
        if (c == ' ' || c == '-') lower.push_back('_');
        else lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (lower.starts_with("key.")) lower.erase(0, 4);
    const auto& aliases = key_aliases();
    if (auto it = aliases.find(lower); it != aliases.end()) return it->second;
    return lower;
}

bool is_modifier_key(std::string_view k) {
    return k == "ctrl" || k == "alt" || k == "meta" || k == "shift";
}

bool is_hotkey_modifier(std::string_view k) { return k == "ctrl" || k == "alt" || k == "meta"; }

std::optional<Modifier> modifier_of(std::string_view k) {
    if (k == "ctrl") return Modifier::ctrl;
    if (k == "alt") return Modifier::alt;
    if (k == "meta") return Modifier::meta;
    if (k == "shift") return Modifier::shift;
    return std::nullopt;
}

bool is_typing_key(std::string_view k) {
    if (k == "space") return true;
    if (!is_single_char(k)) return false;
    const auto c = static_cast<unsigned char>(k[0]);
    return c >= 0x80 || (c > 0x20 && c < 0x7f);
}

std::string typed_text(std::string_view k, bool shift, bool caps_lock) {
    if (k == "space") return " ";
    if (k.size() != 1) return std::string(k);
    const char c = k[0];
    if (c >= 'a' && c <= 'z') {
        return std::string(1, (shift != caps_lock) ? static_cast<char>(c - 'a' + 'A') : c);
    }
    if (shift) {
        for (const auto& [plain, shifted] : kShiftedSymbols) {
            if (plain == c) return std::string(1, shifted);
        }
    }
    return std::string(1, c);
}

bool is_valid_key_symbol(std::string_view key) {
    if (key.empty()) return false;
    if (is_single_char(key)) {
        const auto c = static_cast<unsigned char>(key[0]);
        return c >= 0x80 || (c > 0x20 && c < 0x7f);
    }
    return std::all_of(key.begin(), key.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

// ============================================================================
// Unified actions
// ============================================================================

namespace {

constexpr std::array<std::string_view, kActionKindCount> kActionNames = {
    "click", "right_click", "double_click", "press", "drag_to", "scroll",
    "press_key", "hotkey", "type_text", "wait", "finish", "fail",
};

constexpr std::array<std::string_view, kAgentActionKindCount> kAgentActionNames = {
    "click", "right_click", "double_click", "drag", "scroll", "press_key",
    "hotkey", "type_text", "wait", "finish", "fail",
};

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::invalid_argument, what); }

bool has_line_break(std::string_view s) { return s.find_first_of("\r\n") != std::string_view::npos; }

UnifiedAction with_point(ActionKind kind, ScreenPoint p) {
    UnifiedAction a;
    a.kind = kind;
    a.point = p;
    return a;
}

UnifiedAction bare(ActionKind kind) {
    UnifiedAction a;
    a.kind = kind;
    return a;
}

}  // namespace

std::string_view action_kind_name(ActionKind kind) noexcept { return kActionNames[static_cast<std::size_t>(kind)]; }

std::optional<ActionKind> action_kind_from_name(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kActionNames.size(); ++i) {
        if (kActionNames[i] == name) return static_cast<ActionKind>(i);
    }
    return std::nullopt;
}

bool is_click_related(ActionKind kind) noexcept {
    switch (kind) {
        case ActionKind::click:
        case ActionKind::right_click:
        case ActionKind::double_click:
        case ActionKind::press:
        case ActionKind::drag_to: return true;
        default: return false;
    }
}

bool needs_target_description(ActionKind kind) noexcept {
    return kind == ActionKind::click || kind == ActionKind::right_click || kind == ActionKind::double_click;
}

UnifiedAction UnifiedAction::click(ScreenPoint p) { return with_point(ActionKind::click, p); }
UnifiedAction UnifiedAction::right_click(ScreenPoint p) { return with_point(ActionKind::right_click, p); }
UnifiedAction UnifiedAction::double_click(ScreenPoint p) { return with_point(ActionKind::double_click, p); }
UnifiedAction UnifiedAction::press(ScreenPoint p) { return with_point(ActionKind::press, p); }
UnifiedAction UnifiedAction::drag_to(ScreenPoint p) { return with_point(ActionKind::drag_to, p); }

UnifiedAction UnifiedAction::scroll_by(int dx, int dy) {
    UnifiedAction a = bare(ActionKind::scroll);
    a.scroll = {dx, dy};
    return a;
}

UnifiedAction UnifiedAction::press_key(std::string key) {
    UnifiedAction a = bare(ActionKind::press_key);
    a.key = std::move(key);
    return a;
}

UnifiedAction UnifiedAction::hotkey(std::string modifier, std::string key) {
    UnifiedAction a = bare(ActionKind::hotkey);
    a.modifier = std::move(modifier);
    a.key = std::move(key);
    return a;
}

UnifiedAction UnifiedAction::type_text(std::string text) {
    UnifiedAction a = bare(ActionKind::type_text);
    a.text = std::move(text);
    return a;
}

UnifiedAction UnifiedAction::wait() { return bare(ActionKind::wait); }
UnifiedAction UnifiedAction::finish() { return bare(ActionKind::finish); }
UnifiedAction UnifiedAction::fail() { return bare(ActionKind::fail); }

void UnifiedAction::validate() const {
    const std::string name(action_kind_name(kind));
    if (!is_click_related(kind)) {
        if (semantics) invalid(name + " cannot carry click semantics");
        if (point != ScreenPoint{}) invalid(name + " cannot carry a point");
    }
    if (kind != ActionKind::scroll && scroll != ScrollOffset{}) invalid(name + " cannot carry a scroll offset");
    if (kind != ActionKind::press_key && kind != ActionKind::hotkey && !key.empty()) invalid(name + " cannot carry a key");
    if (kind != ActionKind::hotkey && !modifier.empty()) invalid(name + " cannot carry a modifier");
    if (kind != ActionKind::type_text && !text.empty()) invalid(name + " cannot carry text");

    switch (kind) {
        case ActionKind::press_key:
            if (!is_valid_key_symbol(key)) invalid("press_key needs a valid key symbol, got '" + key + "'");
            break;
        case ActionKind::hotkey:
            if (!is_hotkey_modifier(modifier)) invalid("hotkey must start with ctrl, alt or meta, got '" + modifier + "'");
            if (!is_valid_key_symbol(key) || is_modifier_key(key)) invalid("hotkey second key must be a non-modifier key, got '" + key + "'");
            break;
        case ActionKind::type_text:
            if (text.empty()) invalid("type_text text must be non-empty");
            if (has_line_break(text)) invalid("type_text text must be a single line");
            break;
        default: break;
    }
    if (semantics) {
        if (semantics->element_rect && !semantics->element_rect->contains(point)) {
            invalid("element rect does not contain the action point");
        }
        if (semantics->description && semantics->description->empty()) invalid("click description must be non-empty");
    }
}

// ============================================================================
// Agent actions
// ============================================================================

namespace {

AgentAction described(AgentActionKind kind, std::string description) {
    AgentAction a;
    a.kind = kind;
    a.target_description = std::move(description);
    return a;
}

AgentAction bare_agent(AgentActionKind kind) {
    AgentAction a;
    a.kind = kind;
    return a;
}

}  // namespace

std::string_view agent_action_kind_name(AgentActionKind kind) noexcept {
    return kAgentActionNames[static_cast<std::size_t>(kind)];
}

bool is_click_related(AgentActionKind kind) noexcept {
    return kind == AgentActionKind::click || kind == AgentActionKind::right_click ||
           kind == AgentActionKind::double_click;
}

AgentAction AgentAction::click(std::string d) { return described(AgentActionKind::click, std::move(d)); }
AgentAction AgentAction::right_click(std::string d) { return described(AgentActionKind::right_click, std::move(d)); }
AgentAction AgentAction::double_click(std::string d) { return described(AgentActionKind::double_click, std::move(d)); }

AgentAction AgentAction::drag(ScreenPoint from, ScreenPoint to) {
    AgentAction a = bare_agent(AgentActionKind::drag);
    a.from = from;
    a.to = to;
    return a;
}

AgentAction AgentAction::scroll_by(int dx, int dy) {
    AgentAction a = bare_agent(AgentActionKind::scroll);
    a.scroll = {dx, dy};
    return a;
}

AgentAction AgentAction::press_key(std::string key) {
    AgentAction a = bare_agent(AgentActionKind::press_key);
    a.key = std::move(key);
    return a;
}

AgentAction AgentAction::hotkey(std::string modifier, std::string key) {
    AgentAction a = bare_agent(AgentActionKind::hotkey);
    a.modifier = std::move(modifier);
    a.key = std::move(key);
    return a;
}

AgentAction AgentAction::type_text(std::string text) {
    AgentAction a = bare_agent(AgentActionKind::type_text);
    a.text = std::move(text);
    return a;
}

AgentAction AgentAction::wait() { return bare_agent(AgentActionKind::wait); }
AgentAction AgentAction::finish() { return bare_agent(AgentActionKind::finish); }
AgentAction AgentAction::fail() { return bare_agent(AgentActionKind::fail); }

void AgentAction::validate() const {
    const std::string name(agent_action_kind_name(kind));
    if (is_click_related(kind)) {
        if (target_description.empty()) invalid(name + " needs a non-empty target description");
        if (has_line_break(target_description)) invalid(name + " target description must be a single line");
    } else if (!target_description.empty()) {
        invalid(name + " cannot carry a target description");
    }
    if (kind != AgentActionKind::drag && (from != ScreenPoint{} || to != ScreenPoint{})) invalid(name + " cannot carry points");
    if (kind != AgentActionKind::scroll && scroll != ScrollOffset{}) invalid(name + " cannot carry a scroll offset");
    if (kind != AgentActionKind::press_key && kind != AgentActionKind::hotkey && !key.empty()) invalid(name + " cannot carry a key");
    if (kind != AgentActionKind::hotkey && !modifier.empty()) invalid(name + " cannot carry a modifier");
    if (kind != AgentActionKind::type_text && !text.empty()) invalid(name + " cannot carry text");

    switch (kind) {
        case AgentActionKind::drag:
            if (from.x < 0 || from.y < 0 || to.x < 0 || to.y < 0) invalid("drag points must be non-negative");
            break;
        case AgentActionKind::press_key:
            if (!is_valid_key_symbol(key)) invalid("press_key needs a valid key symbol, got '" + key + "'");
            break;
        case AgentActionKind::hotkey:
            if (!is_hotkey_modifier(modifier)) invalid("hotkey must start with ctrl, alt or meta, got '" + modifier + "'");
            if (!is_valid_key_symbol(key) || is_modifier_key(key)) invalid("hotkey second key must be a non-modifier key, got '" + key + "'");
            break;
        case AgentActionKind::type_text:
            if (text.empty()) invalid("type_text text must be non-empty");
            if (has_line_break(text)) invalid("type_text text must be a single line");
            break;
        default: break;
    }
}

}  // namespace cogtrace
