#pragma once

#include <cogtrace/chat.hpp>
#include <cogtrace/observer.hpp>
#include <cogtrace/prompts.hpp>
#include <cogtrace/training.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cogtrace {

// ============================================================================
// Planner
// ============================================================================

struct PlannerOutput {
    std::string thought;
    AgentAction action;

    friend bool operator==(const PlannerOutput&, const PlannerOutput&) = default;
};

/// "Thought: ..." then a line "Action: <agent action>". The thought may span
/// several lines. Throws Error(parse_error) when either part is missing or the
/// action does not parse.
PlannerOutput parse_planner_reply(std::string_view reply);

struct PlannerConfig {
    std::string model = "default";
    const PromptLibrary* prompts = nullptr;

    const PromptLibrary& prompt_library() const { return prompts ? *prompts : PromptLibrary::builtin(); }
};

/// One planning call over the unmarked screenshot at `screenshot`. An
/// unparseable reply gets one re-ask carrying the parse error; a second
/// failure throws Error(planner_malformed).
PlannerOutput plan_step(const std::string& task, std::span<const HistoryItem> history,
                        const std::filesystem::path& screenshot, ChatClient& planner, const PlannerConfig& config = {});

// ============================================================================
// Grounding
// ============================================================================

/// A point "(x, y)" anywhere in the reply, or nullopt for "there are none".
/// Throws Error(parse_error) for anything else.
std::optional<ScreenPoint> parse_grounding_reply(std::string_view reply);

struct ValidationAttempt {
    std::optional<ScreenPoint> point;  // empty when the reply was unusable
    std::optional<ElementInfo> element;
    bool passed = false;
    std::string note;

    friend bool operator==(const ValidationAttempt&, const ValidationAttempt&) = default;
};

struct GroundingOutcome {
    bool located = false;
    std::optional<ScreenPoint> point;
    std::optional<ElementInfo> element;
    int attempts = 0;
    std::vector<ValidationAttempt> trace;

    friend bool operator==(const GroundingOutcome&, const GroundingOutcome&) = default;
};

struct GroundingConfig {
    int retry_limit = 3;
    bool validate = true;
    std::string model = "default";
    const PromptLibrary* prompts = nullptr;

    const PromptLibrary& prompt_library() const { return prompts ? *prompts : PromptLibrary::builtin(); }
};

/// Asks for a point, looks up the element there, and has the judge confirm it
/// on a marked copy of the screenshot (written next to it under marked/).
/// "there are none" ends the loop at once. Unusable replies, off-screen
/// points, rejections and judge errors each use up one attempt. Grounder
/// transport errors propagate.
GroundingOutcome ground_target(const std::string& description, const Observation& observation,
                               const std::filesystem::path& image_dir, ChatClient& grounder, ElementProvider& elements,
                               const GroundingConfig& config = {});

nlohmann::json grounding_outcome_json(const GroundingOutcome& outcome);

// ============================================================================
// Environment
// ============================================================================

struct ExecutorResult {
    std::string screen_before;
    std::string screen_after;
    std::string note;

    friend bool operator==(const ExecutorResult&, const ExecutorResult&) = default;
};

/// Where agent actions land. Image refs of observations are relative to
/// image_dir().
class Environment {
public:
    virtual ~Environment() = default;

    virtual Observation observe() = 0;
    virtual std::filesystem::path image_dir() const = 0;
    virtual ElementProvider& elements() = 0;
    /// Applies one coordinate-level action. Throws Error(env_error).
    virtual ExecutorResult apply(const UnifiedAction& action) = 0;
};

/// Lowers an agent action to tracker actions and applies them. Click-like
/// actions need `point`.
ExecutorResult execute(Environment& env, const AgentAction& action, std::optional<ScreenPoint> point);

/// Declarative desktop: screens of named elements and transitions keyed by
/// (screen, element, action). Screenshots are wireframes of the current
/// screen with the text typed so far.
///
/// Fixture JSON:
///   {"screen": {"width", "height"}, "start": "<screen>", "undefined": "ignore" | "error",
///    "screens": [{"id", "elements": [{"name", "rect": [l, t, r, b], "editable", "text"}]}],
///    "transitions": [{"screen", "action", "element"?, "key"?, "modifier"?, "to", "focus"?}]}
///
/// A click on an editable element focuses it; type_text appends to the
/// focused element. Typed text belongs to the element name, so an address bar
/// keeps its text when the page changes. Scroll, wait, finish and fail never fail. Any other action
/// without a matching transition is handled per "undefined".
class SimulatedEnvironment : public Environment, public ElementProvider {
public:
    struct Element {
        std::string name;
        Rect rect;
        bool editable = false;
        std::string text;
    };
    struct Screen {
        std::string id;
        std::vector<Element> elements;
    };
    struct Transition {
        std::string screen;
        ActionKind action = ActionKind::click;
        std::optional<std::string> element;
        std::optional<std::string> key;
        std::optional<std::string> modifier;
        std::string to;
        std::optional<std::string> focus;
    };
    struct Fixture {
        ScreenSize screen{1920, 1080};
        std::string start;
        bool undefined_is_error = false;
        std::vector<Screen> screens;
        std::vector<Transition> transitions;

        static Fixture load(const std::filesystem::path& path);
        static Fixture from_json(const nlohmann::json& j);
    };

    /// Screenshots go to `work_dir`/screens.
    SimulatedEnvironment(Fixture fixture, std::filesystem::path work_dir);

    Observation observe() override;
    std::filesystem::path image_dir() const override { return work_dir_; }
    ElementProvider& elements() override { return *this; }
    ExecutorResult apply(const UnifiedAction& action) override;

    std::optional<ElementInfo> element_info_at(ScreenPoint point) const override;

    const std::string& current_screen() const noexcept { return current_; }
    std::optional<std::string> focused() const { return focus_; }
    /// Text typed into elements of this name so far, on any screen.
    std::string text_of(const std::string& element) const;
    Millis now() const noexcept { return clock_; }

private:
    const Screen& screen() const;
    const Element* element_at(ScreenPoint point) const;
    const Transition* find_transition(const UnifiedAction& action, const Element* target) const;
    ExecutorResult undefined(const UnifiedAction& action, const ExecutorResult& result);

    Fixture fixture_;
    std::filesystem::path work_dir_;
    std::string current_;
    std::optional<std::string> focus_;
    std::map<std::string, std::string> text_;  // by element name, shared across screens
    Millis clock_ = 0;
};

// ============================================================================
// Episodes
// ============================================================================

enum class EpisodeTerminal { finished, failed, step_limit, error };
std::string_view episode_terminal_name(EpisodeTerminal t) noexcept;

struct EpisodeStep {
    Observation observation;
    std::string query;  // planner query text, for symmetry checks
    std::string thought;
    AgentAction action;
    std::optional<GroundingOutcome> grounding;
    std::optional<ExecutorResult> executed;
    /// Reformulation notice fed into the next query.
    std::optional<std::string> feedback;
};

struct EpisodeRecord {
    std::string task;
    std::vector<EpisodeStep> steps;
    EpisodeTerminal terminal = EpisodeTerminal::error;
    std::string error;
};

struct EpisodeConfig {
    int step_limit = 50;
    PlannerConfig planner;
    GroundingConfig grounding;
};

/// observe, plan, ground click-like actions, execute. A target the grounder
/// cannot locate costs one step and produces a reformulation notice. Errors
/// end the episode with terminal = error.
EpisodeRecord run_episode(const std::string& task, Environment& env, ChatClient& planner, ChatClient& grounder,
                          const EpisodeConfig& config = {});

std::vector<HistoryItem> episode_history(const EpisodeRecord& record, std::size_t upto);

nlohmann::json episode_step_json(const EpisodeStep& step);
/// One line per step followed by a terminal record.
void write_episode_jsonl(const std::filesystem::path& path, const EpisodeRecord& record);

}  // namespace cogtrace
