#pragma once

#include <cogtrace/geometry.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cogtrace {

using Millis = std::int64_t;

// ============================================================================
// Raw input events
// ============================================================================

enum class RawEventKind { mouse_down, mouse_up, mouse_move, wheel, key_down, key_up };
enum class MouseButton { left, right, middle };

enum class Modifier : std::uint8_t { ctrl = 1, shift = 2, alt = 4, meta = 8 };

class ModifierSet {
public:
    constexpr ModifierSet() = default;

    constexpr bool has(Modifier m) const noexcept { return (bits_ & static_cast<std::uint8_t>(m)) != 0; }
    constexpr void set(Modifier m) noexcept { bits_ |= static_cast<std::uint8_t>(m); }
    constexpr void clear(Modifier m) noexcept { bits_ &= static_cast<std::uint8_t>(~static_cast<std::uint8_t>(m)); }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr std::uint8_t bits() const noexcept { return bits_; }

    friend constexpr bool operator==(ModifierSet, ModifierSet) = default;

private:
    std::uint8_t bits_ = 0;
};

/// One timestamped keyboard/mouse/wheel primitive from a capture source.
/// Only the fields belonging to `kind` are meaningful; the factories below
/// leave the others at their defaults.
struct RawInputEvent {
    Millis ts = 0;
    RawEventKind kind = RawEventKind::mouse_move;
    MouseButton button = MouseButton::left;
    ScreenPoint pos;
    int wheel_dx = 0;
    int wheel_dy = 0;
    std::string key;
    ModifierSet modifiers;

    static RawInputEvent mouse_down(Millis ts, ScreenPoint pos, MouseButton button = MouseButton::left);
    static RawInputEvent mouse_up(Millis ts, ScreenPoint pos, MouseButton button = MouseButton::left);
    static RawInputEvent mouse_move(Millis ts, ScreenPoint pos);
    static RawInputEvent wheel(Millis ts, ScreenPoint pos, int dx, int dy);
    static RawInputEvent key_down(Millis ts, std::string key);
    static RawInputEvent key_up(Millis ts, std::string key);

    bool is_mouse() const noexcept {
        return kind == RawEventKind::mouse_down || kind == RawEventKind::mouse_up ||
               kind == RawEventKind::mouse_move || kind == RawEventKind::wheel;
    }
    bool is_key() const noexcept { return kind == RawEventKind::key_down || kind == RawEventKind::key_up; }

    friend bool operator==(const RawInputEvent&, const RawInputEvent&) = default;
};

// ============================================================================
// Key symbols
// ============================================================================

/// Lowercase canonical key name ("Return" -> "enter", "Control_L" -> "ctrl").
/// Single characters are returned unchanged.
std::string normalize_key(std::string_view key);

/// ctrl, alt, meta or shift.
bool is_modifier_key(std::string_view canonical);
/// The modifiers that may lead a hotkey: ctrl, alt, meta.
bool is_hotkey_modifier(std::string_view canonical);
std::optional<Modifier> modifier_of(std::string_view canonical);

/// Keys that enter the type buffer: single printable characters and "space".
bool is_typing_key(std::string_view canonical);

/// Character produced by a typing key under the given shift/caps-lock state
/// (US layout).
std::string typed_text(std::string_view canonical, bool shift, bool caps_lock);

/// Well-formed key symbol: one non-space character, or a lowercase name made
/// of [a-z0-9_].
bool is_valid_key_symbol(std::string_view key);

// ============================================================================
// Unified (tracker) actions
// ============================================================================

enum class ActionKind {
    click,
    right_click,
    double_click,
    press,
    drag_to,
    scroll,
    press_key,
    hotkey,
    type_text,
    wait,
    finish,
    fail,
};

inline constexpr int kActionKindCount = 12;

std::string_view action_kind_name(ActionKind kind) noexcept;
std::optional<ActionKind> action_kind_from_name(std::string_view name) noexcept;

/// click, right_click, double_click, press, drag_to.
bool is_click_related(ActionKind kind) noexcept;
/// The click-related kinds whose agent form names a target by description.
bool needs_target_description(ActionKind kind) noexcept;

struct ClickSemantics {
    std::optional<std::string> element_name;
    std::optional<Rect> element_rect;
    std::optional<std::string> description;

    friend bool operator==(const ClickSemantics&, const ClickSemantics&) = default;
};

struct ScrollOffset {
    int dx = 0;
    int dy = 0;

    friend bool operator==(const ScrollOffset&, const ScrollOffset&) = default;
};

/// One element of the 12-action tracker vocabulary. Use the factories; they
/// set exactly the payload for the chosen kind.
struct UnifiedAction {
    ActionKind kind = ActionKind::wait;
    ScreenPoint point;
    ScrollOffset scroll;
    std::string key;       // press_key key, or hotkey second key
    std::string modifier;  // hotkey first key
    std::string text;
    std::optional<ClickSemantics> semantics;

    static UnifiedAction click(ScreenPoint p);
    static UnifiedAction right_click(ScreenPoint p);
    static UnifiedAction double_click(ScreenPoint p);
    static UnifiedAction press(ScreenPoint p);
    static UnifiedAction drag_to(ScreenPoint p);
    static UnifiedAction scroll_by(int dx, int dy);
    static UnifiedAction press_key(std::string key);
    static UnifiedAction hotkey(std::string modifier, std::string key);
    static UnifiedAction type_text(std::string text);
    static UnifiedAction wait();
    static UnifiedAction finish();
    static UnifiedAction fail();

    /// Throws Error(invalid_argument) when the payload breaks the kind's invariants.
    void validate() const;

    friend bool operator==(const UnifiedAction&, const UnifiedAction&) = default;
};

// ============================================================================
// Agent actions
// ============================================================================

enum class AgentActionKind {
    click,
    right_click,
    double_click,
    drag,
    scroll,
    press_key,
    hotkey,
    type_text,
    wait,
    finish,
    fail,
};

inline constexpr int kAgentActionKindCount = 11;

std::string_view agent_action_kind_name(AgentActionKind kind) noexcept;
bool is_click_related(AgentActionKind kind) noexcept;

/// Description-based action used by the planner and in training data.
struct AgentAction {
    AgentActionKind kind = AgentActionKind::wait;
    std::string target_description;
    ScreenPoint from;
    ScreenPoint to;
    ScrollOffset scroll;
    std::string key;
    std::string modifier;
    std::string text;

    static AgentAction click(std::string description);
    static AgentAction right_click(std::string description);
    static AgentAction double_click(std::string description);
    static AgentAction drag(ScreenPoint from, ScreenPoint to);
    static AgentAction scroll_by(int dx, int dy);
    static AgentAction press_key(std::string key);
    static AgentAction hotkey(std::string modifier, std::string key);
    static AgentAction type_text(std::string text);
    static AgentAction wait();
    static AgentAction finish();
    static AgentAction fail();

    void validate() const;

    friend bool operator==(const AgentAction&, const AgentAction&) = default;
};

/// Timestamped action as emitted by the encapsulator. `sources` holds the
/// sequence numbers of the raw events that produced it (empty for synthesized
/// waits).
struct TimedAction {
    Millis ts = 0;
    UnifiedAction action;
    std::vector<std::uint64_t> sources;

    friend bool operator==(const TimedAction&, const TimedAction&) = default;
};

}  // namespace cogtrace
