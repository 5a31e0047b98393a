#pragma once

// Hand-rolled generators for property tests. Every generator takes the RNG by
// reference so a failing case can be replayed from its seed.

#include <cogtrace/event_model.hpp>
#include <cogtrace/trajectory.hpp>

#include <random>
#include <string>
#include <vector>

namespace cogtrace::testing {

using Rng = std::mt19937_64;

int uniform_int(Rng& rng, int lo, int hi);
bool coin(Rng& rng, double p = 0.5);

/// Printable single-line text, mixing ASCII punctuation, the DSL's own
/// delimiters and a few multi-byte characters. Never empty.
std::string random_line_text(Rng& rng, int max_len = 40);
std::string random_key_symbol(Rng& rng);
AgentAction random_agent_action(Rng& rng);
UnifiedAction random_unified_action(Rng& rng, ScreenSize screen = {1920, 1080});

/// Keyboard-only stream: printable keys (with and without shift), space,
/// caps lock and backspace, plus optional mouse moves that split typing.
std::vector<RawInputEvent> random_key_stream(Rng& rng, int max_events = 200, bool with_mouse_moves = false);

/// Left-button down/up pairs with small and large displacements and gaps.
std::vector<RawInputEvent> random_click_stream(Rng& rng, int pairs);

/// Mixed stream over every raw event kind, well-formed timestamps.
std::vector<RawInputEvent> random_mixed_stream(Rng& rng, int max_events = 120);

/// Refinement corpus: a clean trajectory of semantic actions with injected
/// artifacts. `injected` lists the indices of every injected step, which is
/// exactly what the action filter must remove.
struct RefineCase {
    Trajectory trajectory;
    std::vector<std::size_t> injected;
    std::vector<std::size_t> semantic;  // type_text, drag_to, scroll, hotkey steps
};

/// Steps carry no screenshots; `image_ref` is left empty for the caller to fill.
RefineCase random_refine_case(Rng& rng, ScreenSize screen, Rect tracker_region, int base_steps = 30);

}  // namespace cogtrace::testing
