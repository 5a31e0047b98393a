#pragma once

#include <cogtrace/event_model.hpp>

#include <string>
#include <string_view>

// Textual action language.
//
// Tracker form (coordinates):      Agent form (descriptions):
//   click (x, y)                     click element: <description>
//   right click (x, y)               right click element: <description>
//   double click (x, y)              double click element: <description>
//   press (x, y)                     drag from (x1, y1) to (x2, y2)
//   drag to (x, y)
//   scroll (dx, dy)                  scroll (dx, dy)
//   press key: enter                 press key: enter
//   hotkey (ctrl, c)                 hotkey (ctrl, c)
//   type text: hello                 type text: hello
//   wait / finish / fail             wait / finish / fail
//
// Coordinates use a single space after the comma. Text payloads run to the
// end of the line verbatim.

namespace cogtrace {

std::string render_tracker_action(const UnifiedAction& action);
std::string render_agent_action(const AgentAction& action);

/// Throws ParseError on malformed input.
UnifiedAction parse_tracker_action(std::string_view line);
AgentAction parse_agent_action(std::string_view line);

}  // namespace cogtrace
