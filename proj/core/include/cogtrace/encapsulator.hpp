#pragma once

#include <cogtrace/event_model.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cogtrace {

/// Thresholds for the encapsulation heuristics. All must be positive.
struct EncapsulatorConfig {
    Millis double_click_ms = 500;
    int double_click_radius_px = 4;
    int drag_threshold_px = 5;
    Millis scroll_merge_ms = 200;
    Millis type_flush_idle_ms = 2000;
    Millis idle_wait_ms = 3000;

    void validate() const;
};

/// Everything the state machine remembers between raw events. Plain value:
/// copy it to snapshot, move it between threads.
struct EncapsulatorState {
    struct PendingPress {
        ScreenPoint point;
        Millis ts = 0;
        MouseButton button = MouseButton::left;
        std::uint64_t seq = 0;
        bool completes_double = false;  // second press of a double-click candidate
        bool press_emitted = false;     // press already emitted; release can only drag or be absorbed
    };
    struct PendingClick {
        ScreenPoint point;
        Millis ts = 0;
        std::vector<std::uint64_t> sources;
    };
    struct ScrollAccum {
        int dx = 0;
        int dy = 0;
        Millis first_ts = 0;
        Millis last_ts = 0;
        std::vector<std::uint64_t> sources;
    };
    struct HeldModifier {
        bool held = false;
        Millis down_ts = 0;
        std::uint64_t seq = 0;
        bool used = false;        // took part in a hotkey or a modified click/scroll
        bool attributed = false;  // key_down counted as a source of an emitted action
    };

    std::string type_buffer;
    bool typing = false;
    Millis type_start_ts = 0;
    Millis last_key_ts = 0;
    std::vector<std::uint64_t> type_sources;

    std::optional<PendingPress> pending_press;
    std::optional<PendingClick> last_click;
    std::optional<ScrollAccum> scroll_accum;

    std::array<HeldModifier, 4> modifiers{};  // ctrl, shift, alt, meta
    bool caps_lock = false;

    Millis last_activity_ts = 0;
    bool has_activity = false;

    std::uint64_t next_seq = 0;
    std::uint64_t absorbed = 0;

    /// Timestamp of the oldest action still being assembled, if any.
    std::optional<Millis> earliest_pending_ts() const;
    bool buffers_empty() const;
};

std::pair<EncapsulatorState, std::vector<TimedAction>> ingest(EncapsulatorState state, const RawInputEvent& event,
                                                              const EncapsulatorConfig& config);
std::pair<EncapsulatorState, std::vector<TimedAction>> flush(EncapsulatorState state);

/// Stateful convenience wrapper over ingest/flush.
class Encapsulator {
public:
    explicit Encapsulator(EncapsulatorConfig config = {});

    /// Throws Error(out_of_order_event) if the event's timestamp regresses; the
    /// state is unchanged in that case.
    std::vector<TimedAction> ingest(const RawInputEvent& event);
    std::vector<TimedAction> flush();

    const EncapsulatorState& state() const noexcept { return state_; }
    const EncapsulatorConfig& config() const noexcept { return config_; }

private:
    EncapsulatorConfig config_;
    EncapsulatorState state_;
};

/// Ingest every event then flush.
std::vector<TimedAction> encapsulate(std::span<const RawInputEvent> events, const EncapsulatorConfig& config = {});

}  // namespace cogtrace
