#include <cogtrace/errors.hpp>
#include <cogtrace/event_model.hpp>
#include <cogtrace/serialization.hpp>

#include <gtest/gtest.h>

#include "generators.hpp"

namespace cogtrace {
namespace {

TEST(KeyNormalization, CanonicalNames) {
    EXPECT_EQ(normalize_key("Return"), "enter");
    EXPECT_EQ(normalize_key("Control_L"), "ctrl");
    EXPECT_EQ(normalize_key("Escape"), "esc");
    EXPECT_EQ(normalize_key("BackSpace"), "backspace");
    EXPECT_EQ(normalize_key("A"), "A");
    EXPECT_EQ(normalize_key("a"), "a");
}

TEST(KeyNormalization, Classification) {
    EXPECT_TRUE(is_modifier_key("shift"));
    EXPECT_FALSE(is_hotkey_modifier("shift"));
    EXPECT_TRUE(is_hotkey_modifier("meta"));
    EXPECT_TRUE(is_typing_key("space"));
    EXPECT_TRUE(is_typing_key("x"));
    EXPECT_FALSE(is_typing_key("enter"));
    EXPECT_FALSE(is_valid_key_symbol("Page Up"));
    EXPECT_TRUE(is_valid_key_symbol("page_up"));
}

TEST(TypedText, ShiftAndCaps) {
    EXPECT_EQ(typed_text("a", false, false), "a");
    EXPECT_EQ(typed_text("a", true, false), "A");
    EXPECT_EQ(typed_text("a", false, true), "A");
    EXPECT_EQ(typed_text("a", true, true), "a");
    EXPECT_EQ(typed_text("1", true, false), "!");
    EXPECT_EQ(typed_text("1", false, true), "1");
    EXPECT_EQ(typed_text("space", true, false), " ");
}

TEST(UnifiedActionValidate, RejectsBrokenPayloads) {
    EXPECT_THROW(UnifiedAction::type_text("").validate(), Error);
    EXPECT_THROW(UnifiedAction::hotkey("shift", "a").validate(), Error);
    EXPECT_THROW(UnifiedAction::hotkey("ctrl", "alt").validate(), Error);
    auto click = UnifiedAction::click({5, 5});
    click.semantics = ClickSemantics{"OK", Rect{10, 10, 20, 20}, std::nullopt};
    EXPECT_THROW(click.validate(), Error);
    click.semantics->element_rect = Rect{0, 0, 20, 20};
    EXPECT_NO_THROW(click.validate());
    auto wait = UnifiedAction::wait();
    wait.text = "x";
    EXPECT_THROW(wait.validate(), Error);
}

TEST(AgentActionValidate, RejectsBrokenPayloads) {
    EXPECT_THROW(AgentAction::click("").validate(), Error);
    EXPECT_THROW(AgentAction::click("two\nlines").validate(), Error);
    EXPECT_THROW(AgentAction::drag({-1, 0}, {1, 1}).validate(), Error);
    EXPECT_NO_THROW(AgentAction::hotkey("ctrl", "c").validate());
}

TEST(ActionKinds, NamesRoundTrip) {
    for (int i = 0; i < kActionKindCount; ++i) {
        const auto kind = static_cast<ActionKind>(i);
        EXPECT_EQ(action_kind_from_name(action_kind_name(kind)), kind);
    }
    EXPECT_FALSE(action_kind_from_name("hover").has_value());
}

TEST(Serialization, RawEventRoundTrip) {
    testing::Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        for (const auto& e : testing::random_mixed_stream(rng, 20)) {
            const Json j = e;
            EXPECT_EQ(j.get<RawInputEvent>(), e) << j.dump();
        }
    }
}

TEST(Serialization, UnifiedActionRoundTrip) {
    testing::Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const auto a = testing::random_unified_action(rng);
        const Json j = a;
        EXPECT_EQ(j.get<UnifiedAction>(), a) << j.dump();
    }
}

TEST(Serialization, UnknownFieldsIgnored) {
    const Json j = Json::parse(R"({"kind":"click","point":{"x":3,"y":4},"future_field":1})");
    EXPECT_EQ(j.get<UnifiedAction>(), UnifiedAction::click({3, 4}));
}

TEST(Serialization, MalformedRecordIsParseError) {
    const Json j = Json::parse(R"({"kind":"teleport"})");
    try {
        (void)j.get<UnifiedAction>();
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::parse_error);
    }
}

}  // namespace
}  // namespace cogtrace
