#include <cogtrace/action_dsl.hpp>
#include <cogtrace/agent.hpp>
#include <cogtrace/cognition.hpp>
#include <cogtrace/errors.hpp>
#include <cogtrace/screen_render.hpp>
#include <cogtrace/serialization.hpp>
#include <cogtrace/util.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <regex>
#include <sstream>

namespace cogtrace {

namespace fs = std::filesystem;

namespace {

std::string write_png_content_addressed(const fs::path& dir, const std::string& sub, const Image& image) {
    const auto bytes = encode_png(image);
    const std::string_view view(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    const std::string rel = sub + "/" + sha256_hex(view) + ".png";
    fs::create_directories(dir / sub);
    if (!fs::exists(dir / rel)) write_file_atomic(dir / rel, view);
    return rel;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

// ============================================================================
// Planner
// ============================================================================

PlannerOutput parse_planner_reply(std::string_view reply) {
    const std::string text(reply);
    // Last line that starts with "Action:".
    std::size_t action_pos = std::string::npos;
    for (std::size_t pos = 0; pos < text.size();) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        const std::string line = trim(std::string_view(text).substr(pos, eol - pos));
        if (line.rfind("Action:", 0) == 0) action_pos = pos;
        pos = eol + 1;
    }
    if (action_pos == std::string::npos) throw Error(ErrorCode::parse_error, "reply has no 'Action:' line");
    const std::size_t thought_pos = text.find("Thought:");
    if (thought_pos == std::string::npos || thought_pos > action_pos) {
        throw Error(ErrorCode::parse_error, "reply has no 'Thought:' before its action");
    }
    PlannerOutput out;
    out.thought = trim(std::string_view(text).substr(thought_pos + 8, action_pos - thought_pos - 8));
    const std::size_t eol = std::min(text.find('\n', action_pos), text.size());
    std::string line = trim(std::string_view(text).substr(action_pos, eol - action_pos));
    line = trim(std::string_view(line).substr(7));
    try {
        out.action = parse_agent_action(line);
    } catch (const Error& e) {
        throw Error(ErrorCode::parse_error, std::string("bad action '") + line + "': " + e.what());
    }
    return out;
}

PlannerOutput plan_step(const std::string& task, std::span<const HistoryItem> history, const fs::path& screenshot,
                        ChatClient& planner, const PlannerConfig& config) {
    ChatRequest request;
    request.purpose = purpose::plan;
    request.model = config.model;
    request.messages.push_back(
        ChatMessage{"user", render_planner_query(config.prompt_library(), task, history), {ChatImage{screenshot.string()}}});
    std::string first_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string reply = planner.complete(request).text;
        try {
            return parse_planner_reply(reply);
        } catch (const Error& e) {
            if (attempt == 1) {
                throw Error(ErrorCode::planner_malformed,
                            "planner reply unparseable twice: " + first_error + "; " + e.what());
            }
            first_error = e.what();
            spdlog::warn("planner reply unparseable, asking again: {}", e.what());
            request.messages.push_back(ChatMessage{"assistant", reply, {}});
            request.messages.push_back(ChatMessage{
                "user",
                std::string("Your reply could not be parsed (") + e.what() +
                    "). Reply with a line starting with 'Thought:' and then one line starting with 'Action:'.",
                {}});
        }
    }
    throw Error(ErrorCode::planner_malformed, "unreachable");
}

// ============================================================================
// Grounding
// ============================================================================

std::optional<ScreenPoint> parse_grounding_reply(std::string_view reply) {
    if (lower(reply).find("there are none") != std::string::npos) return std::nullopt;
    static const std::regex point_re(R"(\(\s*(-?\d{1,6})\s*,\s*(-?\d{1,6})\s*\))");
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(reply.begin(), reply.end(), m, point_re)) {
        return ScreenPoint{std::stoi(m[1].str()), std::stoi(m[2].str())};
    }
    throw Error(ErrorCode::parse_error, "grounding reply has neither a point nor 'there are none'");
}

namespace {

bool judge_says_yes(std::string_view reply) {
    std::string a = trim(reply);
    if (const auto pos = a.rfind("Answer:"); pos != std::string::npos) a = trim(std::string_view(a).substr(pos + 7));
    return lower(a).rfind("yes", 0) == 0;
}

}  // namespace

GroundingOutcome ground_target(const std::string& description, const Observation& observation, const fs::path& image_dir,
                               ChatClient& grounder, ElementProvider& elements, const GroundingConfig& config) {
    if (trim(description).empty()) throw Error(ErrorCode::invalid_argument, "grounding needs a description");
    const auto& prompts = config.prompt_library();
    const fs::path screenshot = image_dir / observation.image_ref;
    elements.sync_to(observation);

    GroundingOutcome out;
    std::vector<ScreenPoint> rejected;
    const int limit = std::max(1, config.retry_limit);
    while (out.attempts < limit) {
        ++out.attempts;
        ValidationAttempt attempt;

        std::string prompt = fill_placeholders(prompts.get(prompt_names::grounding), {{"description", description}});
        if (!rejected.empty()) {
            prompt += "\nThese positions were checked and do not match:";
            for (const auto& p : rejected) prompt += " (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
        }
        ChatRequest request;
        request.purpose = purpose::ground;
        request.model = config.model;
        request.messages.push_back(ChatMessage{"user", prompt, {ChatImage{screenshot.string()}}});
        const std::string reply = grounder.complete(request).text;

        std::optional<ScreenPoint> point;
        try {
            point = parse_grounding_reply(reply);
        } catch (const Error& e) {
            attempt.note = e.what();
            out.trace.push_back(std::move(attempt));
            continue;
        }
        if (!point) {
            attempt.note = "there are none";
            out.trace.push_back(std::move(attempt));
            return out;
        }
        attempt.point = point;
        if (!observation.size().contains(*point)) {
            attempt.note = "point off screen";
            rejected.push_back(*point);
            out.trace.push_back(std::move(attempt));
            continue;
        }
        try {
            attempt.element = elements.element_info_at(*point);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::provider_unavailable) throw;
            spdlog::warn("element lookup failed during grounding: {}", e.what());
        }
        if (!config.validate) {
            attempt.passed = true;
            attempt.note = "validation disabled";
        } else {
            std::optional<Rect> rect;
            if (attempt.element) rect = attempt.element->rect;
            const auto marked = mark_click_screenshot(observation, image_dir, *point, rect);
            const std::string marked_ref = write_png_content_addressed(image_dir, "marked", marked.image);
            const std::string name =
                attempt.element && attempt.element->name ? *attempt.element->name : std::string("Unknown");
            ChatRequest judge;
            judge.purpose = purpose::validate;
            judge.model = config.model;
            judge.messages.push_back(ChatMessage{
                "user",
                fill_placeholders(prompts.get(prompt_names::grounding_validation),
                                  {{"element_name", name}, {"description", description}}),
                {ChatImage{(image_dir / marked_ref).string()}}});
            try {
                attempt.passed = judge_says_yes(grounder.complete(judge).text);
                if (!attempt.passed) attempt.note = "judge rejected";
            } catch (const Error& e) {
                if (e.code() != ErrorCode::client_error) throw;
                attempt.note = std::string("judge error: ") + e.what();
            }
        }
        if (attempt.passed) {
            out.located = true;
            out.point = attempt.point;
            out.element = attempt.element;
            out.trace.push_back(std::move(attempt));
            return out;
        }
        rejected.push_back(*point);
        out.trace.push_back(std::move(attempt));
    }
    return out;
}

nlohmann::json grounding_outcome_json(const GroundingOutcome& outcome) {
    Json trace = Json::array();
    for (const auto& a : outcome.trace) {
        Json j{{"passed", a.passed}, {"note", a.note}};
        j["point"] = a.point ? Json(*a.point) : Json(nullptr);
        j["element"] = a.element ? Json(*a.element) : Json(nullptr);
        trace.push_back(std::move(j));
    }
    Json j{{"result", outcome.located ? "located" : "not_found"}, {"attempts", outcome.attempts}, {"trace", trace}};
    j["point"] = outcome.point ? Json(*outcome.point) : Json(nullptr);
    j["element"] = outcome.element ? Json(*outcome.element) : Json(nullptr);
    return j;
}

// ============================================================================
// Environment
// ============================================================================

ExecutorResult execute(Environment& env, const AgentAction& action, std::optional<ScreenPoint> point) {
    auto need_point = [&] {
        if (!point) throw Error(ErrorCode::invalid_argument, "click-like action executed without a point");
        return *point;
    };
    switch (action.kind) {
        case AgentActionKind::click: return env.apply(UnifiedAction::click(need_point()));
        case AgentActionKind::right_click: return env.apply(UnifiedAction::right_click(need_point()));
        case AgentActionKind::double_click: return env.apply(UnifiedAction::double_click(need_point()));
        case AgentActionKind::drag: {
            const auto first = env.apply(UnifiedAction::press(action.from));
            auto second = env.apply(UnifiedAction::drag_to(action.to));
            second.screen_before = first.screen_before;
            return second;
        }
        case AgentActionKind::scroll: return env.apply(UnifiedAction::scroll_by(action.scroll.dx, action.scroll.dy));
        case AgentActionKind::press_key: return env.apply(UnifiedAction::press_key(action.key));
        case AgentActionKind::hotkey: return env.apply(UnifiedAction::hotkey(action.modifier, action.key));
        case AgentActionKind::type_text: return env.apply(UnifiedAction::type_text(action.text));
        case AgentActionKind::wait: return env.apply(UnifiedAction::wait());
        case AgentActionKind::finish: return env.apply(UnifiedAction::finish());
        case AgentActionKind::fail: return env.apply(UnifiedAction::fail());
    }
    throw Error(ErrorCode::invalid_argument, "unknown agent action");
}

SimulatedEnvironment::Fixture SimulatedEnvironment::Fixture::load(const fs::path& path) {
    try {
        return from_json(read_json_file(path));
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

SimulatedEnvironment::Fixture SimulatedEnvironment::Fixture::from_json(const nlohmann::json& j) {
    Fixture f;
    try {
        if (j.contains("screen")) f.screen = j["screen"].get<ScreenSize>();
        f.start = j.at("start").get<std::string>();
        const std::string undefined = j.value("undefined", "ignore");
        if (undefined != "ignore" && undefined != "error") {
            throw Error(ErrorCode::parse_error, "'undefined' must be ignore or error");
        }
        f.undefined_is_error = undefined == "error";
        for (const auto& s : j.at("screens")) {
            Screen screen;
            screen.id = s.at("id").get<std::string>();
            for (const auto& e : s.at("elements")) {
                screen.elements.push_back(Element{e.at("name").get<std::string>(), e.at("rect").get<Rect>(),
                                                  e.value("editable", false), e.value("text", "")});
            }
            f.screens.push_back(std::move(screen));
        }
        for (const auto& t : j.value("transitions", Json::array())) {
            Transition tr;
            tr.screen = t.at("screen").get<std::string>();
            const auto kind = action_kind_from_name(t.at("action").get<std::string>());
            if (!kind) throw Error(ErrorCode::parse_error, "unknown transition action " + t["action"].dump());
            tr.action = *kind;
            auto opt = [&](const char* key) -> std::optional<std::string> {
                if (!t.contains(key) || t[key].is_null()) return std::nullopt;
                return t[key].get<std::string>();
            };
            tr.element = opt("element");
            tr.key = opt("key");
            tr.modifier = opt("modifier");
            tr.focus = opt("focus");
            tr.to = t.at("to").get<std::string>();
            f.transitions.push_back(std::move(tr));
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("environment fixture: ") + e.what());
    }
    if (!f.screen.valid()) throw Error(ErrorCode::parse_error, "environment fixture: screen size must be positive");
    auto known = [&](const std::string& id) {
        return std::any_of(f.screens.begin(), f.screens.end(), [&](const Screen& s) { return s.id == id; });
    };
    if (!known(f.start)) throw Error(ErrorCode::parse_error, "environment fixture: unknown start screen " + f.start);
    for (const auto& t : f.transitions) {
        if (!known(t.screen) || !known(t.to)) {
            throw Error(ErrorCode::parse_error, "environment fixture: transition names an unknown screen");
        }
    }
    return f;
}

SimulatedEnvironment::SimulatedEnvironment(Fixture fixture, fs::path work_dir)
    : fixture_(std::move(fixture)), work_dir_(std::move(work_dir)), current_(fixture_.start) {
    fs::create_directories(work_dir_);
    for (const auto& s : fixture_.screens) {
        for (const auto& e : s.elements) {
            if (!e.text.empty()) text_[e.name] = e.text;
        }
    }
}

const SimulatedEnvironment::Screen& SimulatedEnvironment::screen() const {
    for (const auto& s : fixture_.screens) {
        if (s.id == current_) return s;
    }
    throw Error(ErrorCode::env_error, "unknown screen " + current_);
}

const SimulatedEnvironment::Element* SimulatedEnvironment::element_at(ScreenPoint point) const {
    const auto& s = screen();
    std::vector<RegistryElement> regs;
    regs.reserve(s.elements.size());
    for (const auto& e : s.elements) regs.push_back({e.name, e.rect});
    const auto idx = innermost_element(regs, point);
    return idx ? &s.elements[*idx] : nullptr;
}

std::optional<ElementInfo> SimulatedEnvironment::element_info_at(ScreenPoint point) const {
    const auto* e = element_at(point);
    if (!e) return std::nullopt;
    return ElementInfo{e->name, e->rect, "simulated"};
}

std::string SimulatedEnvironment::text_of(const std::string& element) const {
    const auto it = text_.find(element);
    return it == text_.end() ? std::string() : it->second;
}

Observation SimulatedEnvironment::observe() {
    const auto& s = screen();
    ScreenRegistry reg;
    reg.id = s.id;
    std::map<std::string, std::string> texts;
    for (const auto& e : s.elements) {
        reg.elements.push_back({e.name, e.rect});
        const auto t = text_of(e.name);
        if (!t.empty()) texts[e.name] = t;
    }
    const Image img = render_registry_screen(fixture_.screen, reg, texts);
    const std::string ref = write_png_content_addressed(work_dir_, "screens", img);
    return Observation{clock_, ref, fixture_.screen.width, fixture_.screen.height, current_};
}

const SimulatedEnvironment::Transition* SimulatedEnvironment::find_transition(const UnifiedAction& action,
                                                                              const Element* target) const {
    for (const auto& t : fixture_.transitions) {
        if (t.screen != current_ || t.action != action.kind) continue;
        if (t.element && (!target || target->name != *t.element)) continue;
        if (t.key && *t.key != action.key) continue;
        if (t.modifier && *t.modifier != action.modifier) continue;
        return &t;
    }
    return nullptr;
}

ExecutorResult SimulatedEnvironment::undefined(const UnifiedAction& action, const ExecutorResult& result) {
    const std::string what = "no transition for '" + render_tracker_action(action) + "' on screen " + current_;
    if (fixture_.undefined_is_error) throw Error(ErrorCode::env_error, what);
    auto out = result;
    out.note = what + " (ignored)";
    return out;
}

ExecutorResult SimulatedEnvironment::apply(const UnifiedAction& action) {
    action.validate();
    clock_ += 1000;
    ExecutorResult result{current_, current_, ""};
    const Element* target = nullptr;
    if (is_click_related(action.kind)) {
        if (!fixture_.screen.contains(action.point)) {
            throw Error(ErrorCode::env_error, "point (" + std::to_string(action.point.x) + ", " +
                                                  std::to_string(action.point.y) + ") is off screen");
        }
        target = element_at(action.point);
    }
    const Transition* t = find_transition(action, target);
    if (t) {
        current_ = t->to;
        focus_ = t->focus;
        result.screen_after = current_;
        result.note = "transition";
        return result;
    }
    switch (action.kind) {
        case ActionKind::click:
        case ActionKind::double_click:
            if (target && target->editable) {
                focus_ = target->name;
                result.note = "focused " + target->name;
                return result;
            }
            return undefined(action, result);
        case ActionKind::type_text:
            if (!focus_) return undefined(action, result);
            text_[*focus_] += action.text;
            result.note = "typed into " + *focus_;
            return result;
        case ActionKind::press:
        case ActionKind::drag_to:
        case ActionKind::scroll:
        case ActionKind::wait:
        case ActionKind::finish:
        case ActionKind::fail:
            return result;
        default:
            return undefined(action, result);
    }
}

// ============================================================================
// Episodes
// ============================================================================

std::string_view episode_terminal_name(EpisodeTerminal t) noexcept {
    switch (t) {
        case EpisodeTerminal::finished: return "finished";
        case EpisodeTerminal::failed: return "failed";
        case EpisodeTerminal::step_limit: return "step_limit";
        case EpisodeTerminal::error: return "error";
    }
    return "error";
}

std::vector<HistoryItem> episode_history(const EpisodeRecord& record, std::size_t upto) {
    std::vector<HistoryItem> out;
    for (std::size_t i = 0; i < std::min(upto, record.steps.size()); ++i) {
        const auto& s = record.steps[i];
        out.push_back({s.thought, render_agent_action(s.action), s.feedback});
    }
    return out;
}

EpisodeRecord run_episode(const std::string& task, Environment& env, ChatClient& planner, ChatClient& grounder,
                          const EpisodeConfig& config) {
    EpisodeRecord record;
    record.task = task;
    std::vector<HistoryItem> history;
    try {
        while (static_cast<int>(record.steps.size()) < config.step_limit) {
            EpisodeStep step;
            step.observation = env.observe();
            step.query = render_planner_query(config.planner.prompt_library(), task, history);
            const auto plan = plan_step(task, history, env.image_dir() / step.observation.image_ref, planner,
                                        config.planner);
            step.thought = plan.thought;
            step.action = plan.action;

            std::optional<ScreenPoint> point;
            if (!plan.action.target_description.empty() &&
                (plan.action.kind == AgentActionKind::click || plan.action.kind == AgentActionKind::right_click ||
                 plan.action.kind == AgentActionKind::double_click)) {
                step.grounding = ground_target(plan.action.target_description, step.observation, env.image_dir(),
                                               grounder, env.elements(), config.grounding);
                if (!step.grounding->located) {
                    step.feedback = fill_placeholders(config.planner.prompt_library().get(prompt_names::reformulation_notice),
                                                      {{"description", plan.action.target_description}});
                }
                point = step.grounding->point;
            }
            if (!step.feedback) step.executed = execute(env, plan.action, point);

            history.push_back({step.thought, render_agent_action(step.action), step.feedback});
            record.steps.push_back(std::move(step));
            if (plan.action.kind == AgentActionKind::finish) {
                record.terminal = EpisodeTerminal::finished;
                return record;
            }
            if (plan.action.kind == AgentActionKind::fail) {
                record.terminal = EpisodeTerminal::failed;
                return record;
            }
        }
        record.terminal = EpisodeTerminal::step_limit;
    } catch (const Error& e) {
        record.terminal = EpisodeTerminal::error;
        record.error = std::string(error_code_name(e.code())) + ": " + e.what();
        spdlog::warn("episode ended with error: {}", record.error);
    }
    return record;
}

nlohmann::json episode_step_json(const EpisodeStep& step) {
    Json j{{"observation", step.observation},
           {"thought", step.thought},
           {"action", render_agent_action(step.action)}};
    j["grounding"] = step.grounding ? grounding_outcome_json(*step.grounding) : Json(nullptr);
    if (step.executed) {
        j["executed"] = {{"screen_before", step.executed->screen_before},
                         {"screen_after", step.executed->screen_after},
                         {"note", step.executed->note}};
    } else {
        j["executed"] = nullptr;
    }
    j["feedback"] = step.feedback ? Json(*step.feedback) : Json(nullptr);
    return j;
}

void write_episode_jsonl(const fs::path& path, const EpisodeRecord& record) {
    std::vector<Json> lines;
    for (std::size_t i = 0; i < record.steps.size(); ++i) {
        Json j = episode_step_json(record.steps[i]);
        j["step"] = i + 1;
        lines.push_back(std::move(j));
    }
    lines.push_back(Json{{"task", record.task},
                         {"terminal", episode_terminal_name(record.terminal)},
                         {"steps", record.steps.size()},
                         {"error", record.error.empty() ? Json(nullptr) : Json(record.error)}});
    write_jsonl_file(path, lines);
}

}  // namespace cogtrace
