#include <cogtrace/encapsulator.hpp>
#include <cogtrace/errors.hpp>

#include <algorithm>

namespace cogtrace {

void EncapsulatorConfig::validate() const {
    if (double_click_ms <= 0 || double_click_radius_px <= 0 || drag_threshold_px <= 0 || scroll_merge_ms <= 0 ||
        type_flush_idle_ms <= 0 || idle_wait_ms <= 0) {
        throw Error(ErrorCode::invalid_argument, "encapsulator thresholds must all be positive");
    }
}

std::optional<Millis> EncapsulatorState::earliest_pending_ts() const {
    std::optional<Millis> earliest;
    auto consider = [&](Millis ts) {
        if (!earliest || ts < *earliest) earliest = ts;
    };
    if (typing) consider(type_start_ts);
    if (pending_press && !pending_press->press_emitted) consider(pending_press->ts);
    if (last_click) consider(last_click->ts);
    if (scroll_accum) consider(scroll_accum->first_ts);
    for (const auto& m : modifiers) {
        if (m.held && !m.used) consider(m.down_ts);
    }
    return earliest;
}

bool EncapsulatorState::buffers_empty() const {
    return !typing && type_buffer.empty() && type_sources.empty() && !pending_press && !last_click && !scroll_accum &&
           std::none_of(modifiers.begin(), modifiers.end(), [](const HeldModifier& m) { return m.held; });
}

namespace {

using State = EncapsulatorState;
using Out = std::vector<TimedAction>;

constexpr std::size_t kCtrl = 0;
constexpr std::size_t kShift = 1;
constexpr std::size_t kAlt = 2;
constexpr std::size_t kMeta = 3;
constexpr std::array<std::size_t, 3> kHotkeyPriority = {kCtrl, kAlt, kMeta};
constexpr std::array<std::string_view, 4> kModifierNames = {"ctrl", "shift", "alt", "meta"};

std::optional<std::size_t> modifier_slot(std::string_view key) {
    for (std::size_t i = 0; i < kModifierNames.size(); ++i) {
        if (kModifierNames[i] == key) return i;
    }
    return std::nullopt;
}

void emit(Out& out, Millis ts, UnifiedAction action, std::vector<std::uint64_t> sources) {
    out.push_back(TimedAction{ts, std::move(action), std::move(sources)});
}

std::int64_t distance_sq(ScreenPoint a, ScreenPoint b) {
    const std::int64_t dx = a.x - b.x;
    const std::int64_t dy = a.y - b.y;
    return dx * dx + dy * dy;
}

void pop_utf8_char(std::string& s) {
    if (s.empty()) return;
    std::size_t i = s.size() - 1;
    while (i > 0 && (static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) --i;
    s.erase(i);
}

void flush_type(State& st, Out& out) {
    if (!st.typing) return;
    if (st.type_buffer.empty()) {
        // Everything typed was erased again: nothing to emit.
        st.absorbed += st.type_sources.size();
    } else {
        emit(out, st.type_start_ts, UnifiedAction::type_text(std::move(st.type_buffer)), std::move(st.type_sources));
    }
    st.type_buffer.clear();
    st.type_sources.clear();
    st.typing = false;
}

void flush_click(State& st, Out& out) {
    if (!st.last_click) return;
    emit(out, st.last_click->ts, UnifiedAction::click(st.last_click->point), std::move(st.last_click->sources));
    st.last_click.reset();
}

void flush_scroll(State& st, Out& out) {
    if (!st.scroll_accum) return;
    emit(out, st.scroll_accum->first_ts, UnifiedAction::scroll_by(st.scroll_accum->dx, st.scroll_accum->dy),
         std::move(st.scroll_accum->sources));
    st.scroll_accum.reset();
}

// Emits the pending items in timestamp order. At most one is normally pending,
// but thresholds are configurable, so order explicitly.
void flush_pending(State& st, Out& out) {
    struct Item {
        Millis ts;
        int which;
    };
    std::vector<Item> items;
    if (st.typing) items.push_back({st.type_start_ts, 0});
    if (st.last_click) items.push_back({st.last_click->ts, 1});
    if (st.scroll_accum) items.push_back({st.scroll_accum->first_ts, 2});
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.ts < b.ts; });
    for (const auto& item : items) {
        switch (item.which) {
            case 0: flush_type(st, out); break;
            case 1: flush_click(st, out); break;
            case 2: flush_scroll(st, out); break;
        }
    }
}

// A held button must not be overtaken by later actions: commit it as a press
// before anything else is emitted.
void commit_press(State& st, Out& out) {
    if (!st.pending_press || st.pending_press->press_emitted) return;
    flush_pending(st, out);
    emit(out, st.pending_press->ts, UnifiedAction::press(st.pending_press->point), {st.pending_press->seq});
    st.pending_press->press_emitted = true;
    st.pending_press->completes_double = false;
}

void mark_modifiers_used(State& st) {
    for (std::size_t slot : kHotkeyPriority) {
        if (st.modifiers[slot].held) st.modifiers[slot].used = true;
    }
}

bool hotkey_modifier_held(const State& st) {
    return std::any_of(kHotkeyPriority.begin(), kHotkeyPriority.end(),
                       [&](std::size_t slot) { return st.modifiers[slot].held; });
}

void time_based_flush(State& st, const RawInputEvent& ev, const EncapsulatorConfig& cfg, Out& out) {
    std::vector<std::pair<Millis, int>> due;
    if (st.last_click && !(st.pending_press && st.pending_press->completes_double) &&
        ev.ts - st.last_click->ts > cfg.double_click_ms) {
        due.emplace_back(st.last_click->ts, 1);
    }
    if (st.typing && ev.ts - st.last_key_ts >= cfg.type_flush_idle_ms) due.emplace_back(st.type_start_ts, 0);
    if (st.scroll_accum && ev.ts - st.scroll_accum->last_ts > cfg.scroll_merge_ms) {
        due.emplace_back(st.scroll_accum->first_ts, 2);
    }
    std::stable_sort(due.begin(), due.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [ts, which] : due) {
        switch (which) {
            case 0: flush_type(st, out); break;
            case 1: flush_click(st, out); break;
            case 2: flush_scroll(st, out); break;
        }
    }
}

void on_mouse_down(State& st, const RawInputEvent& ev, const EncapsulatorConfig& cfg, Out& out, std::uint64_t seq) {
    flush_type(st, out);
    flush_scroll(st, out);
    if (st.pending_press) {
        // Second button pressed while one is held: the first becomes a press.
        commit_press(st, out);
        st.pending_press.reset();
    }
    bool completes_double = false;
    if (st.last_click) {
        const std::int64_t r = cfg.double_click_radius_px;
        if (ev.button == MouseButton::left && distance_sq(st.last_click->point, ev.pos) <= r * r &&
            ev.ts - st.last_click->ts <= cfg.double_click_ms) {
            completes_double = true;
        } else {
            flush_click(st, out);
        }
    }
    mark_modifiers_used(st);
    st.pending_press = State::PendingPress{ev.pos, ev.ts, ev.button, seq, completes_double, false};
}

void on_mouse_up(State& st, const RawInputEvent& ev, const EncapsulatorConfig& cfg, Out& out, std::uint64_t seq) {
    if (!st.pending_press || st.pending_press->button != ev.button) {
        ++st.absorbed;  // stray release
        return;
    }
    const State::PendingPress press = *st.pending_press;
    st.pending_press.reset();
    mark_modifiers_used(st);
    const std::int64_t t = cfg.drag_threshold_px;
    const bool dragged = distance_sq(press.point, ev.pos) > t * t;

    if (press.press_emitted) {
        if (dragged) {
            flush_pending(st, out);
            emit(out, ev.ts, UnifiedAction::drag_to(ev.pos), {seq});
        } else {
            ++st.absorbed;
        }
        return;
    }
    if (dragged) {
        flush_click(st, out);
        emit(out, press.ts, UnifiedAction::press(press.point), {press.seq});
        emit(out, ev.ts, UnifiedAction::drag_to(ev.pos), {seq});
        return;
    }
    switch (press.button) {
        case MouseButton::left:
            if (press.completes_double && st.last_click) {
                auto sources = std::move(st.last_click->sources);
                sources.push_back(press.seq);
                sources.push_back(seq);
                emit(out, st.last_click->ts, UnifiedAction::double_click(st.last_click->point), std::move(sources));
                st.last_click.reset();
            } else {
                flush_click(st, out);
                st.last_click = State::PendingClick{press.point, press.ts, {press.seq, seq}};
            }
            break;
        case MouseButton::right:
            flush_click(st, out);
            emit(out, press.ts, UnifiedAction::right_click(press.point), {press.seq, seq});
            break;
        case MouseButton::middle:
            flush_click(st, out);
            emit(out, press.ts, UnifiedAction::click(press.point), {press.seq, seq});
            break;
    }
}

void on_wheel(State& st, const RawInputEvent& ev, const EncapsulatorConfig& cfg, Out& out, std::uint64_t seq) {
    commit_press(st, out);
    flush_type(st, out);
    flush_click(st, out);
    mark_modifiers_used(st);
    if (st.scroll_accum && ev.ts - st.scroll_accum->last_ts <= cfg.scroll_merge_ms) {
        st.scroll_accum->dx += ev.wheel_dx;
        st.scroll_accum->dy += ev.wheel_dy;
        st.scroll_accum->last_ts = ev.ts;
        st.scroll_accum->sources.push_back(seq);
        return;
    }
    flush_scroll(st, out);
    st.scroll_accum = State::ScrollAccum{ev.wheel_dx, ev.wheel_dy, ev.ts, ev.ts, {seq}};
}

void on_key_down(State& st, const RawInputEvent& ev, Out& out, std::uint64_t seq) {
    const std::string key = normalize_key(ev.key);

    if (auto slot = modifier_slot(key)) {
        auto& m = st.modifiers[*slot];
        if (m.held || *slot == kShift) {
            // Auto-repeat, or shift (consumed by typing, never an action).
            m.held = true;
            ++st.absorbed;
            return;
        }
        const bool combo = hotkey_modifier_held(st);
        m = State::HeldModifier{true, ev.ts, seq, false, false};
        // ctrl+alt and similar chords are never a lone modifier tap.
        if (combo) mark_modifiers_used(st);
        return;
    }
    if (key == "caps_lock") {
        st.caps_lock = !st.caps_lock;
        ++st.absorbed;
        return;
    }

    // Hotkey: a non-modifier key while ctrl/alt/meta is held, tracked or reported.
    std::optional<std::size_t> lead;
    for (std::size_t slot : kHotkeyPriority) {
        if (st.modifiers[slot].held) {
            lead = slot;
            break;
        }
    }
    std::optional<std::string> reported_lead;
    if (!lead) {
        for (auto [m, name] : {std::pair{Modifier::ctrl, "ctrl"}, std::pair{Modifier::alt, "alt"},
                               std::pair{Modifier::meta, "meta"}}) {
            if (ev.modifiers.has(m)) {
                reported_lead = name;
                break;
            }
        }
    }
    if (lead || reported_lead) {
        commit_press(st, out);
        flush_pending(st, out);
        if (!is_valid_key_symbol(key)) {
            ++st.absorbed;
            return;
        }
        std::vector<std::uint64_t> sources;
        std::string modifier;
        if (lead) {
            auto& m = st.modifiers[*lead];
            modifier = std::string(kModifierNames[*lead]);
            if (!m.attributed) {
                sources.push_back(m.seq);
                m.attributed = true;
            }
        } else {
            modifier = *reported_lead;
        }
        sources.push_back(seq);
        mark_modifiers_used(st);
        emit(out, ev.ts, UnifiedAction::hotkey(std::move(modifier), key), std::move(sources));
        return;
    }

    const bool shift = st.modifiers[kShift].held || ev.modifiers.has(Modifier::shift);
    if (is_typing_key(key)) {
        commit_press(st, out);
        flush_click(st, out);
        flush_scroll(st, out);
        if (!st.typing) {
            st.typing = true;
            st.type_start_ts = ev.ts;
        }
        st.type_buffer += typed_text(key, shift, st.caps_lock);
        st.type_sources.push_back(seq);
        st.last_key_ts = ev.ts;
        return;
    }
    if (key == "backspace" && st.typing && !st.type_buffer.empty()) {
        pop_utf8_char(st.type_buffer);
        st.type_sources.push_back(seq);
        st.last_key_ts = ev.ts;
        return;
    }

    commit_press(st, out);
    flush_pending(st, out);
    if (!is_valid_key_symbol(key)) {
        ++st.absorbed;
        return;
    }
    emit(out, ev.ts, UnifiedAction::press_key(key), {seq});
}

void on_key_up(State& st, const RawInputEvent& ev, Out& out, std::uint64_t seq) {
    const std::string key = normalize_key(ev.key);
    const auto slot = modifier_slot(key);
    if (!slot || !st.modifiers[*slot].held) {
        ++st.absorbed;
        return;
    }
    auto& m = st.modifiers[*slot];
    if (*slot == kShift) {
        m = {};
        ++st.absorbed;
        return;
    }
    if (!m.used) {
        // A lone tap of ctrl/alt/meta is a key press in its own right.
        commit_press(st, out);
        flush_pending(st, out);
        emit(out, m.down_ts, UnifiedAction::press_key(std::string(kModifierNames[*slot])), {m.seq, seq});
    } else {
        st.absorbed += m.attributed ? 1 : 2;
    }
    m = {};
}

void ingest_into(State& st, const RawInputEvent& ev, const EncapsulatorConfig& cfg, Out& out) {
    if (st.has_activity && ev.ts < st.last_activity_ts) {
        throw Error(ErrorCode::out_of_order_event, "raw event at " + std::to_string(ev.ts) +
                                                       " ms precedes previous event at " +
                                                       std::to_string(st.last_activity_ts) + " ms");
    }
    const std::uint64_t seq = st.next_seq++;

    time_based_flush(st, ev, cfg, out);

    if (st.has_activity && ev.ts - st.last_activity_ts >= cfg.idle_wait_ms && !st.pending_press &&
        !hotkey_modifier_held(st)) {
        flush_pending(st, out);
        emit(out, st.last_activity_ts + cfg.idle_wait_ms, UnifiedAction::wait(), {});
    }

    switch (ev.kind) {
        case RawEventKind::mouse_down: on_mouse_down(st, ev, cfg, out, seq); break;
        case RawEventKind::mouse_up: on_mouse_up(st, ev, cfg, out, seq); break;
        case RawEventKind::mouse_move:
            flush_type(st, out);
            ++st.absorbed;
            break;
        case RawEventKind::wheel: on_wheel(st, ev, cfg, out, seq); break;
        case RawEventKind::key_down: on_key_down(st, ev, out, seq); break;
        case RawEventKind::key_up: on_key_up(st, ev, out, seq); break;
    }

    st.last_activity_ts = ev.ts;
    st.has_activity = true;
}

void flush_into(State& st, Out& out) {
    if (st.pending_press) {
        const auto press = *st.pending_press;
        st.pending_press.reset();
        if (press.press_emitted) {
            // press already emitted; nothing left to attribute
        } else if (press.completes_double) {
            // Release never arrived: the second press is dropped, the first
            // click stands.
            ++st.absorbed;
        } else {
            flush_pending(st, out);
            emit(out, press.ts, UnifiedAction::press(press.point), {press.seq});
        }
    }
    flush_pending(st, out);
    for (std::size_t slot = 0; slot < st.modifiers.size(); ++slot) {
        auto& m = st.modifiers[slot];
        if (!m.held) continue;
        if (slot != kShift && !m.attributed) ++st.absorbed;
        m = {};
    }
}

}  // namespace

std::pair<EncapsulatorState, std::vector<TimedAction>> ingest(EncapsulatorState state, const RawInputEvent& event,
                                                              const EncapsulatorConfig& config) {
    std::vector<TimedAction> out;
    ingest_into(state, event, config, out);
    return {std::move(state), std::move(out)};
}

std::pair<EncapsulatorState, std::vector<TimedAction>> flush(EncapsulatorState state) {
    std::vector<TimedAction> out;
    flush_into(state, out);
    return {std::move(state), std::move(out)};
}

Encapsulator::Encapsulator(EncapsulatorConfig config) : config_(config) { config_.validate(); }

std::vector<TimedAction> Encapsulator::ingest(const RawInputEvent& event) {
    // The order check is the only throw before mutation, so the state can be
    // updated in place. Copying it per event made long typing runs quadratic.
    std::vector<TimedAction> out;
    ingest_into(state_, event, config_, out);
    return out;
}

std::vector<TimedAction> Encapsulator::flush() {
    std::vector<TimedAction> out;
    flush_into(state_, out);
    return out;
}

std::vector<TimedAction> encapsulate(std::span<const RawInputEvent> events, const EncapsulatorConfig& config) {
    Encapsulator enc(config);
    std::vector<TimedAction> all;
    for (const auto& e : events) {
        auto produced = enc.ingest(e);
        all.insert(all.end(), std::make_move_iterator(produced.begin()), std::make_move_iterator(produced.end()));
    }
    auto tail = enc.flush();
    all.insert(all.end(), std::make_move_iterator(tail.begin()), std::make_move_iterator(tail.end()));
    return all;
}

}  // namespace cogtrace
