#include <cogtrace/action_dsl.hpp>
#include <cogtrace/encapsulator.hpp>
#include <cogtrace/errors.hpp>

#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"

namespace cogtrace {
namespace {

using E = RawInputEvent;

std::vector<std::string> lines(const std::vector<TimedAction>& actions) {
    std::vector<std::string> out;
    for (const auto& a : actions) out.push_back(render_tracker_action(a.action));
    return out;
}

std::vector<std::string> run(const std::vector<E>& events, EncapsulatorConfig cfg = {}) {
    return lines(encapsulate(events, cfg));
}

using Lines = std::vector<std::string>;

TEST(Encapsulator, HelloFixtureIsOneTypeAction) {
    const auto events = testing::hello_typing_stream();
    ASSERT_EQ(events.size(), 9u);
    const auto out = encapsulate(events);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].action, UnifiedAction::type_text("Hello"));
    EXPECT_EQ(out[0].ts, 1120);
}

TEST(Encapsulator, SingleClick) {
    EXPECT_EQ(run({E::mouse_down(0, {100, 100}), E::mouse_up(80, {100, 100})}), Lines{"click (100, 100)"});
}

TEST(Encapsulator, ClickEmittedOnlyAfterDoubleClickWindow) {
    Encapsulator enc;
    EXPECT_TRUE(enc.ingest(E::mouse_down(0, {100, 100})).empty());
    EXPECT_TRUE(enc.ingest(E::mouse_up(80, {100, 100})).empty());
    EXPECT_TRUE(enc.ingest(E::mouse_move(500, {120, 100})).empty());
    const auto out = enc.ingest(E::mouse_move(501, {140, 100}));
    EXPECT_EQ(lines(out), Lines{"click (100, 100)"});
}

TEST(Encapsulator, DragIsPressThenDragTo) {
    EXPECT_EQ(run({E::mouse_down(0, {10, 10}), E::mouse_move(50, {150, 150}), E::mouse_up(100, {300, 300})}),
              (Lines{"press (10, 10)", "drag to (300, 300)"}));
}

TEST(Encapsulator, DragThresholdIsStrict) {
    // Displacement of exactly 5 px stays a click.
    EXPECT_EQ(run({E::mouse_down(0, {10, 10}), E::mouse_up(100, {13, 14})}), Lines{"click (10, 10)"});
    EXPECT_EQ(run({E::mouse_down(0, {10, 10}), E::mouse_up(100, {16, 10})}),
              (Lines{"press (10, 10)", "drag to (16, 10)"}));
}

TEST(Encapsulator, DoubleClick) {
    EXPECT_EQ(run({E::mouse_down(0, {50, 50}), E::mouse_up(60, {50, 50}), E::mouse_down(200, {50, 50}),
                   E::mouse_up(260, {50, 50})}),
              Lines{"double click (50, 50)"});
}

TEST(Encapsulator, TripleClickIsDoubleThenClick) {
    EXPECT_EQ(run({E::mouse_down(0, {50, 50}), E::mouse_up(40, {50, 50}), E::mouse_down(120, {50, 50}),
                   E::mouse_up(160, {50, 50}), E::mouse_down(240, {50, 50}), E::mouse_up(280, {50, 50})}),
              (Lines{"double click (50, 50)", "click (50, 50)"}));
}

TEST(Encapsulator, SlowOrDistantSecondClickStaysSeparate) {
    EXPECT_EQ(run({E::mouse_down(0, {50, 50}), E::mouse_up(60, {50, 50}), E::mouse_down(501, {50, 50}),
                   E::mouse_up(560, {50, 50})}),
              (Lines{"click (50, 50)", "click (50, 50)"}));
    EXPECT_EQ(run({E::mouse_down(0, {50, 50}), E::mouse_up(60, {50, 50}), E::mouse_down(200, {55, 50}),
                   E::mouse_up(260, {55, 50})}),
              (Lines{"click (50, 50)", "click (55, 50)"}));
}

TEST(Encapsulator, RightAndMiddleButtons) {
    EXPECT_EQ(run({E::mouse_down(0, {5, 6}, MouseButton::right), E::mouse_up(50, {5, 6}, MouseButton::right)}),
              Lines{"right click (5, 6)"});
    // Right clicks never merge into a double-click.
    EXPECT_EQ(run({E::mouse_down(0, {5, 6}, MouseButton::right), E::mouse_up(50, {5, 6}, MouseButton::right),
                   E::mouse_down(100, {5, 6}, MouseButton::right), E::mouse_up(150, {5, 6}, MouseButton::right)}),
              (Lines{"right click (5, 6)", "right click (5, 6)"}));
    EXPECT_EQ(run({E::mouse_down(0, {5, 6}, MouseButton::middle), E::mouse_up(50, {5, 6}, MouseButton::middle)}),
              Lines{"click (5, 6)"});
}

TEST(Encapsulator, Hotkey) {
    EXPECT_EQ(run({E::key_down(0, "ctrl"), E::key_down(50, "c"), E::key_up(90, "c"), E::key_up(120, "ctrl")}),
              Lines{"hotkey (ctrl, c)"});
}

TEST(Encapsulator, HotkeyFromRawKeyNames) {
    EXPECT_EQ(run({E::key_down(0, "Control_L"), E::key_down(50, "V"), E::key_up(120, "Control_L")}),
              Lines{"hotkey (ctrl, V)"});
}

TEST(Encapsulator, ThreeKeyComboKeepsLeadingModifier) {
    EXPECT_EQ(run({E::key_down(0, "ctrl"), E::key_down(10, "shift"), E::key_down(20, "t"), E::key_up(30, "t"),
                   E::key_up(40, "shift"), E::key_up(50, "ctrl")}),
              Lines{"hotkey (ctrl, t)"});
}

TEST(Encapsulator, LoneModifierTapIsPressKey) {
    EXPECT_EQ(run({E::key_down(0, "meta"), E::key_up(80, "meta")}), Lines{"press key: meta"});
    EXPECT_EQ(run({E::key_down(0, "ctrl"), E::key_down(10, "alt"), E::key_up(20, "alt"), E::key_up(30, "ctrl")}),
              Lines{});
}

TEST(Encapsulator, ModifiedClickAbsorbsModifier) {
    EXPECT_EQ(run({E::key_down(0, "ctrl"), E::mouse_down(50, {9, 9}), E::mouse_up(90, {9, 9}), E::key_up(700, "ctrl")}),
              Lines{"click (9, 9)"});
}

TEST(Encapsulator, ScrollMerging) {
    EXPECT_EQ(run({E::wheel(0, {1, 1}, 0, 3), E::wheel(80, {1, 1}, 0, 4), E::wheel(160, {1, 1}, 0, 3)}),
              Lines{"scroll (0, 10)"});
    EXPECT_EQ(run({E::wheel(0, {1, 1}, 0, 3), E::wheel(201, {1, 1}, 0, -2)}),
              (Lines{"scroll (0, 3)", "scroll (0, -2)"}));
}

TEST(Encapsulator, EnterFlushesTypingFirst) {
    EXPECT_EQ(run({E::key_down(0, "h"), E::key_down(100, "i"), E::key_down(200, "Return")}),
              (Lines{"type text: hi", "press key: enter"}));
}

TEST(Encapsulator, BackspaceOnEmptyBufferIsPressKey) {
    EXPECT_EQ(run({E::key_down(0, "backspace")}), Lines{"press key: backspace"});
    EXPECT_EQ(run({E::key_down(0, "a"), E::key_down(50, "backspace"), E::key_down(100, "backspace")}),
              Lines{"press key: backspace"});
}

TEST(Encapsulator, ShiftCapitalizes) {
    EXPECT_EQ(run({E::key_down(0, "shift"), E::key_down(10, "h"), E::key_up(20, "shift"), E::key_down(30, "i"),
                   E::key_down(40, "shift"), E::key_down(50, "1"), E::key_up(60, "shift")}),
              Lines{"type text: Hi!"});
}

TEST(Encapsulator, TypingIdleFlush) {
    Encapsulator enc;
    enc.ingest(E::key_down(0, "a"));
    EXPECT_TRUE(enc.ingest(E::key_down(1999, "b")).empty());
    EXPECT_EQ(lines(enc.ingest(E::key_down(3999, "c"))), Lines{"type text: ab"});
    EXPECT_EQ(lines(enc.flush()), Lines{"type text: c"});
}

TEST(Encapsulator, IdleGapInsertsOneWait) {
    const auto out = encapsulate(std::vector<E>{E::key_down(0, "enter"), E::key_down(10000, "enter")});
    EXPECT_EQ(lines(out), (Lines{"press key: enter", "wait", "press key: enter"}));
    EXPECT_EQ(out[1].ts, 3000);
    EXPECT_EQ(run({E::key_down(0, "enter"), E::key_down(2999, "enter")}),
              (Lines{"press key: enter", "press key: enter"}));
}

TEST(Encapsulator, NoWaitWhileButtonHeld) {
    EXPECT_EQ(run({E::mouse_down(0, {10, 10}), E::mouse_up(5000, {400, 400})}),
              (Lines{"press (10, 10)", "drag to (400, 400)"}));
}

TEST(Encapsulator, KeyWhileButtonHeldCommitsPress) {
    EXPECT_EQ(run({E::mouse_down(0, {10, 10}), E::key_down(50, "esc"), E::mouse_up(100, {10, 10})}),
              (Lines{"press (10, 10)", "press key: esc"}));
    EXPECT_EQ(run({E::mouse_down(0, {10, 10}), E::key_down(50, "esc"), E::mouse_up(100, {200, 10})}),
              (Lines{"press (10, 10)", "press key: esc", "drag to (200, 10)"}));
}

TEST(Encapsulator, OutOfOrderEventRejectedAndStateUnchanged) {
    Encapsulator enc;
    enc.ingest(E::key_down(100, "a"));
    const auto before = enc.state();
    try {
        enc.ingest(E::key_down(99, "b"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::out_of_order_event);
    }
    EXPECT_EQ(enc.state().type_buffer, before.type_buffer);
    EXPECT_EQ(lines(enc.flush()), Lines{"type text: a"});
}

TEST(Encapsulator, FlushIsIdempotentAndDrains) {
    Encapsulator enc;
    enc.ingest(E::key_down(0, "h"));
    enc.ingest(E::key_down(10, "i"));
    EXPECT_EQ(lines(enc.flush()), Lines{"type text: hi"});
    EXPECT_TRUE(enc.flush().empty());
    EXPECT_TRUE(enc.state().buffers_empty());

    Encapsulator scroll;
    scroll.ingest(E::wheel(0, {0, 0}, 0, 4));
    EXPECT_EQ(lines(scroll.flush()), Lines{"scroll (0, 4)"});
    EXPECT_TRUE(Encapsulator{}.flush().empty());
}

TEST(Encapsulator, ConfigValidation) {
    EncapsulatorConfig cfg;
    cfg.scroll_merge_ms = 0;
    EXPECT_THROW(Encapsulator{cfg}, Error);
}

TEST(Encapsulator, FreeFunctionsArePure) {
    const EncapsulatorConfig cfg;
    EncapsulatorState s;
    auto [s1, out1] = ingest(s, E::key_down(0, "a"), cfg);
    auto [s2, out2] = ingest(s, E::key_down(0, "a"), cfg);
    EXPECT_EQ(s1.type_buffer, s2.type_buffer);
    EXPECT_TRUE(s.type_buffer.empty());
    auto [s3, tail] = flush(s1);
    EXPECT_EQ(lines(tail), Lines{"type text: a"});
}

TEST(Encapsulator, EarliestPendingTimestamp) {
    Encapsulator enc;
    EXPECT_FALSE(enc.state().earliest_pending_ts());
    enc.ingest(E::mouse_down(100, {1, 1}));
    enc.ingest(E::mouse_up(150, {1, 1}));
    EXPECT_EQ(enc.state().earliest_pending_ts(), 100);
}

// ---------------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------------

void check_conservation(const std::vector<E>& events, const EncapsulatorConfig& cfg = {}) {
    Encapsulator enc(cfg);
    std::vector<TimedAction> out;
    for (const auto& e : events) {
        auto produced = enc.ingest(e);
        out.insert(out.end(), produced.begin(), produced.end());
    }
    auto tail = enc.flush();
    out.insert(out.end(), tail.begin(), tail.end());

    std::set<std::uint64_t> attributed;
    std::size_t total = 0;
    for (const auto& a : out) {
        ASSERT_NO_THROW(a.action.validate()) << render_tracker_action(a.action);
        for (auto s : a.sources) {
            EXPECT_TRUE(attributed.insert(s).second) << "event " << s << " used twice";
            EXPECT_LT(s, events.size());
        }
        total += a.sources.size();
        if (a.action.kind != ActionKind::wait) EXPECT_FALSE(a.sources.empty()) << render_tracker_action(a.action);
    }
    EXPECT_EQ(total + enc.state().absorbed, events.size());
    for (std::size_t i = 1; i < out.size(); ++i) {
        EXPECT_LE(out[i - 1].ts, out[i].ts) << render_tracker_action(out[i - 1].action) << " then "
                                            << render_tracker_action(out[i].action);
    }
    EXPECT_TRUE(enc.state().buffers_empty());
}

TEST(EncapsulatorProperty, TypingOracle) {
    testing::Rng rng(1234);
    for (int trial = 0; trial < 500; ++trial) {
        const auto events = testing::random_key_stream(rng, 200, trial % 2 == 1);
        const auto out = encapsulate(events);
        ASSERT_EQ(testing::replay_typed_text(out), testing::editor_oracle(events)) << "trial " << trial;
    }
}

TEST(EncapsulatorProperty, ClickStreamsMatchReferenceInterpreter) {
    testing::Rng rng(77);
    for (int trial = 0; trial < 500; ++trial) {
        const auto events = testing::random_click_stream(rng, testing::uniform_int(rng, 1, 12));
        const auto expected = testing::click_stream_oracle(events);
        const auto actual = encapsulate(events);
        ASSERT_EQ(lines(actual), lines(expected)) << "trial " << trial;
        for (std::size_t i = 0; i < actual.size(); ++i) EXPECT_EQ(actual[i].ts, expected[i].ts);
    }
}

TEST(EncapsulatorProperty, ConservationAndMonotonicityOnMixedStreams) {
    testing::Rng rng(4242);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto events = testing::random_mixed_stream(rng);
        SCOPED_TRACE("trial " + std::to_string(trial));
        check_conservation(events);
        if (::testing::Test::HasFailure()) return;
    }
}

TEST(EncapsulatorProperty, ConservationOnKeyAndClickStreams) {
    testing::Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        check_conservation(testing::random_key_stream(rng, 100, true));
        check_conservation(testing::random_click_stream(rng, 8));
        if (::testing::Test::HasFailure()) return;
    }
}

TEST(EncapsulatorProperty, Deterministic) {
    testing::Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
        const auto events = testing::random_mixed_stream(rng);
        EXPECT_EQ(encapsulate(events), encapsulate(events));
    }
}

TEST(EncapsulatorProperty, FlushAfterAnyPrefixLeavesEmptyBuffers) {
    testing::Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        const auto events = testing::random_mixed_stream(rng);
        Encapsulator enc;
        for (const auto& e : events) enc.ingest(e);
        enc.flush();
        EXPECT_TRUE(enc.state().buffers_empty());
        EXPECT_TRUE(enc.flush().empty());
    }
}

}  // namespace
}  // namespace cogtrace
