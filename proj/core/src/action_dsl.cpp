#include <cogtrace/action_dsl.hpp>
#include <cogtrace/errors.hpp>

#include <charconv>
#include <limits>

namespace cogtrace {

namespace {

std::string coords(int x, int y) { return "(" + std::to_string(x) + ", " + std::to_string(y) + ")"; }
std::string coords(ScreenPoint p) { return coords(p.x, p.y); }

class Cursor {
public:
    explicit Cursor(std::string_view input) : input_(input) {}

    bool consume(std::string_view literal) {
        if (input_.substr(pos_).starts_with(literal)) {
            pos_ += literal.size();
            return true;
        }
        return false;
    }

    void expect(std::string_view literal) {
        if (!consume(literal)) fail("'" + std::string(literal) + "'");
    }

    int integer() {
        const char* begin = input_.data() + pos_;
        const char* end = input_.data() + input_.size();
        const char* digits = begin;
        if (digits != end && *digits == '-') ++digits;
        if (digits == end || *digits < '0' || *digits > '9') fail("integer");
        long long value = 0;
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc{} || value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
            fail("integer in range");
        }
        pos_ += static_cast<std::size_t>(ptr - begin);
        return static_cast<int>(value);
    }

    ScreenPoint point_pair() {
        expect("(");
        const int x = integer();
        expect(", ");
        const int y = integer();
        expect(")");
        return {x, y};
    }

    std::string_view rest() const { return input_.substr(pos_); }
    std::size_t position() const { return pos_; }
    void advance_to_end() { pos_ = input_.size(); }

    void expect_end() {
        if (pos_ != input_.size()) fail("end of line");
    }

    [[noreturn]] void fail(const std::string& expected) const { throw ParseError(pos_, expected, std::string(input_)); }
    [[noreturn]] void fail_at(std::size_t pos, const std::string& expected) const {
        throw ParseError(pos, expected, std::string(input_));
    }

private:
    std::string_view input_;
    std::size_t pos_ = 0;
};

void reject_line_breaks(std::string_view line) {
    if (auto nl = line.find_first_of("\r\n"); nl != std::string_view::npos) {
        throw ParseError(nl, "a single line", std::string(line));
    }
}

std::string key_payload(Cursor& cur) {
    const std::size_t start = cur.position();
    std::string key(cur.rest());
    if (!is_valid_key_symbol(key)) cur.fail_at(start, "key symbol");
    cur.advance_to_end();
    return key;
}

std::string text_payload(Cursor& cur) {
    std::string text(cur.rest());
    if (text.empty()) cur.fail("non-empty text");
    cur.advance_to_end();
    return text;
}

// "(mod, key)". The key may itself be ',' or ')', so split on the first ", "
// and strip the final ')'.
std::pair<std::string, std::string> hotkey_payload(Cursor& cur) {
    cur.expect("(");
    const std::size_t inner_start = cur.position();
    std::string_view inner = cur.rest();
    const auto sep = inner.find(", ");
    if (sep == std::string_view::npos) cur.fail("', '");
    std::string modifier(inner.substr(0, sep));
    if (!is_hotkey_modifier(modifier)) cur.fail_at(inner_start, "hotkey modifier (ctrl, alt, meta)");
    inner.remove_prefix(sep + 2);
    const std::size_t key_start = inner_start + sep + 2;
    if (inner.empty() || inner.back() != ')') cur.fail_at(inner_start + sep + 2 + inner.size(), "')'");
    std::string key(inner.substr(0, inner.size() - 1));
    if (!is_valid_key_symbol(key)) cur.fail_at(key_start, "key symbol");
    if (is_modifier_key(key)) cur.fail_at(key_start, "non-modifier key");
    cur.advance_to_end();
    return {std::move(modifier), std::move(key)};
}

std::string description_payload(Cursor& cur) {
    cur.expect("<");
    std::string_view inner = cur.rest();
    if (inner.empty() || inner.back() != '>') cur.fail_at(cur.position() + inner.size(), "'>'");
    std::string description(inner.substr(0, inner.size() - 1));
    if (description.empty()) cur.fail("non-empty target description");
    cur.advance_to_end();
    return description;
}

constexpr std::string_view kTrackerKeywords =
    "action keyword (click, right click, double click, press, drag to, scroll, press key, hotkey, type text, wait, "
    "finish, fail)";
constexpr std::string_view kAgentKeywords =
    "action keyword (click element, right click element, double click element, drag from, scroll, press key, hotkey, "
    "type text, wait, finish, fail)";

}  // namespace

std::string render_tracker_action(const UnifiedAction& a) {
    switch (a.kind) {
        case ActionKind::click: return "click " + coords(a.point);
        case ActionKind::right_click: return "right click " + coords(a.point);
        case ActionKind::double_click: return "double click " + coords(a.point);
        case ActionKind::press: return "press " + coords(a.point);
        case ActionKind::drag_to: return "drag to " + coords(a.point);
        case ActionKind::scroll: return "scroll " + coords(a.scroll.dx, a.scroll.dy);
        case ActionKind::press_key: return "press key: " + a.key;
        case ActionKind::hotkey: return "hotkey (" + a.modifier + ", " + a.key + ")";
        case ActionKind::type_text: return "type text: " + a.text;
        case ActionKind::wait: return "wait";
        case ActionKind::finish: return "finish";
        case ActionKind::fail: return "fail";
    }
    return {};
}

std::string render_agent_action(const AgentAction& a) {
    switch (a.kind) {
        case AgentActionKind::click: return "click element: <" + a.target_description + ">";
        case AgentActionKind::right_click: return "right click element: <" + a.target_description + ">";
        case AgentActionKind::double_click: return "double click element: <" + a.target_description + ">";
        case AgentActionKind::drag: return "drag from " + coords(a.from) + " to " + coords(a.to);
        case AgentActionKind::scroll: return "scroll " + coords(a.scroll.dx, a.scroll.dy);
        case AgentActionKind::press_key: return "press key: " + a.key;
        case AgentActionKind::hotkey: return "hotkey (" + a.modifier + ", " + a.key + ")";
        case AgentActionKind::type_text: return "type text: " + a.text;
        case AgentActionKind::wait: return "wait";
        case AgentActionKind::finish: return "finish";
        case AgentActionKind::fail: return "fail";
    }
    return {};
}

UnifiedAction parse_tracker_action(std::string_view line) {
    reject_line_breaks(line);
    Cursor cur(line);
    UnifiedAction action;
    // Longer keywords first: "press key:" before "press (".
    if (cur.consume("click ")) {
        action = UnifiedAction::click(cur.point_pair());
    } else if (cur.consume("right click ")) {
        action = UnifiedAction::right_click(cur.point_pair());
    } else if (cur.consume("double click ")) {
        action = UnifiedAction::double_click(cur.point_pair());
    } else if (cur.consume("press key: ")) {
        action = UnifiedAction::press_key(key_payload(cur));
    } else if (cur.consume("press ")) {
        action = UnifiedAction::press(cur.point_pair());
    } else if (cur.consume("drag to ")) {
        action = UnifiedAction::drag_to(cur.point_pair());
    } else if (cur.consume("scroll ")) {
        const ScreenPoint offset = cur.point_pair();
        action = UnifiedAction::scroll_by(offset.x, offset.y);
    } else if (cur.consume("hotkey ")) {
        auto [modifier, key] = hotkey_payload(cur);
        action = UnifiedAction::hotkey(std::move(modifier), std::move(key));
    } else if (cur.consume("type text: ")) {
        action = UnifiedAction::type_text(text_payload(cur));
    } else if (cur.consume("wait")) {
        action = UnifiedAction::wait();
    } else if (cur.consume("finish")) {
        action = UnifiedAction::finish();
    } else if (cur.consume("fail")) {
        action = UnifiedAction::fail();
    } else {
        cur.fail(std::string(kTrackerKeywords));
    }
    cur.expect_end();
    return action;
}

AgentAction parse_agent_action(std::string_view line) {
    reject_line_breaks(line);
    Cursor cur(line);
    AgentAction action;
    if (cur.consume("click element: ")) {
        action = AgentAction::click(description_payload(cur));
    } else if (cur.consume("right click element: ")) {
        action = AgentAction::right_click(description_payload(cur));
    } else if (cur.consume("double click element: ")) {
        action = AgentAction::double_click(description_payload(cur));
    } else if (cur.consume("drag from ")) {
        const ScreenPoint from = cur.point_pair();
        cur.expect(" to ");
        const ScreenPoint to = cur.point_pair();
        if (from.x < 0 || from.y < 0) cur.fail_at(10, "non-negative coordinates");
        if (to.x < 0 || to.y < 0) cur.fail("non-negative coordinates");
        action = AgentAction::drag(from, to);
    } else if (cur.consume("scroll ")) {
        const ScreenPoint offset = cur.point_pair();
        action = AgentAction::scroll_by(offset.x, offset.y);
    } else if (cur.consume("press key: ")) {
        action = AgentAction::press_key(key_payload(cur));
    } else if (cur.consume("hotkey ")) {
        auto [modifier, key] = hotkey_payload(cur);
        action = AgentAction::hotkey(std::move(modifier), std::move(key));
    } else if (cur.consume("type text: ")) {
        action = AgentAction::type_text(text_payload(cur));
    } else if (cur.consume("wait")) {
        action = AgentAction::wait();
    } else if (cur.consume("finish")) {
        action = AgentAction::finish();
    } else if (cur.consume("fail")) {
        action = AgentAction::fail();
    } else {
        cur.fail(std::string(kAgentKeywords));
    }
    cur.expect_end();
    return action;
}

}  // namespace cogtrace
