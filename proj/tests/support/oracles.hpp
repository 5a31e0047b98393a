#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond the plain data types.

#include <cogtrace/event_model.hpp>

#include <string>
#include <vector>

namespace cogtrace::testing {

/// Plain text editor: printable keys append (shift and caps lock applied with
/// a US keymap), space appends ' ', backspace deletes the last character.
/// Other keys are ignored.
std::string editor_oracle(const std::vector<RawInputEvent>& events);

/// Replays emitted actions into the same editor: type_text appends, press_key
/// backspace deletes the last character.
std::string replay_typed_text(const std::vector<TimedAction>& actions);

/// Brute-force reading of a left-button click stream (down/up pairs with
/// optional moves in between) under the given thresholds.
std::vector<TimedAction> click_stream_oracle(const std::vector<RawInputEvent>& events, Millis double_click_ms = 500,
                                             int radius_px = 4, int drag_px = 5, Millis idle_wait_ms = 3000);

}  // namespace cogtrace::testing
