#pragma once

#include <cogtrace/chat.hpp>
#include <cogtrace/image.hpp>
#include <cogtrace/marks.hpp>
#include <cogtrace/prompts.hpp>
#include <cogtrace/store.hpp>
#include <cogtrace/trajectory.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cogtrace {

struct MarkedScreenshot {
    Observation base;
    ClickMarks marks;
    Image image;
};

/// Red quadruplet over the observation's screenshot (read relative to `dir`).
MarkedScreenshot mark_click_screenshot(const Observation& obs, const std::filesystem::path& dir, ScreenPoint point,
                                       const std::optional<Rect>& rect, const MarkStyle& style = {});

/// One agent-level step of a cognitive trajectory. A press followed by its
/// drag_to becomes a single drag step.
struct CognitiveStep {
    std::vector<std::size_t> source_steps;
    Millis ts = 0;
    Observation observation;
    std::optional<std::string> marked_image_ref;
    /// For a drag this is the press; the release point is in `drag_end`.
    UnifiedAction action;
    std::optional<ScreenPoint> drag_end;
    /// Set once the step is expressible in the agent language (click-like
    /// steps need their description first).
    std::optional<AgentAction> agent_action;
    std::optional<std::string> element_name;
    std::optional<std::string> description;
    bool description_flagged = false;
    std::string thought;

    bool needs_description() const noexcept { return needs_target_description(action.kind); }
    /// Agent DSL line; throws Error(invalid_argument) before the description
    /// of a click-like step exists.
    std::string action_line() const;

    friend bool operator==(const CognitiveStep&, const CognitiveStep&) = default;
};

nlohmann::json cognitive_step_json(const CognitiveStep& step);
CognitiveStep cognitive_step_from_json(const nlohmann::json& j);

/// Agent-level skeleton of a trajectory: press + drag_to merged, a press
/// without its drag_to dropped, everything else one to one.
std::vector<CognitiveStep> cognitive_skeleton(const Trajectory& trajectory);

struct CognitionConfig {
    std::string model = "default";
    /// Most recent completed steps serialized into a thought prompt.
    std::size_t history_window = 50;
    /// Workers for stage-1 calls; stage 2 is always sequential.
    int stage1_workers = 1;
    const PromptLibrary* prompts = nullptr;  // null means the built-in set

    const PromptLibrary& prompt_library() const { return prompts ? *prompts : PromptLibrary::builtin(); }
};

// ============================================================================
// Prompts
// ============================================================================

std::string render_description_prompt(const PromptLibrary& prompts, const std::optional<std::string>& element_name);
std::string render_refinement_prompt(const PromptLibrary& prompts, ScreenPoint point,
                                     const std::optional<std::string>& element_name, const std::string& candidate);
std::string render_thought_prompt(const PromptLibrary& prompts, const std::string& task,
                                  std::span<const CognitiveStep> history, std::span<const CognitiveStep> future,
                                  const CognitiveStep& current, std::size_t history_window = 50);

enum class JudgeVerdict { good, wrong, malformed };
struct JudgeReply {
    JudgeVerdict verdict = JudgeVerdict::malformed;
    std::string correction;
};

/// Reads the answer part ("Answer:" onward when present). Prefixes are
/// matched case-sensitively: "Good" or "Wrong. Correct Description: X".
JudgeReply parse_judge_reply(std::string_view reply);

// ============================================================================
// Calls
// ============================================================================

/// Stage 1a. Throws Error(client_error).
std::string describe_click_target(const CognitiveStep& step, const std::filesystem::path& marked_image,
                                  ChatClient& client, const CognitionConfig& config = {});

struct RefinedDescription {
    std::string description;
    bool flagged = false;  // judge never gave a usable answer; candidate kept
};

/// Stage 1b: judge the candidate; one re-ask on a malformed verdict.
RefinedDescription refine_click_description(const CognitiveStep& step, const std::filesystem::path& marked_image,
                                            const std::string& candidate, ChatClient& client,
                                            const CognitionConfig& config = {});

/// Stage 2 for one step.
std::string complete_thought(const std::string& task, std::span<const CognitiveStep> history,
                             std::span<const CognitiveStep> future, const CognitiveStep& current,
                             const std::filesystem::path& image, ChatClient& client, const CognitionConfig& config = {});

/// Both stages over a trajectory whose image refs are relative to `dir`.
/// With a checkpoint path, finished calls are appended there as they complete
/// and skipped on the next run over the same trajectory.
std::vector<CognitiveStep> complete_trajectory(const Trajectory& trajectory, const std::filesystem::path& dir,
                                               ChatClient& client, const CognitionConfig& config = {},
                                               const std::optional<std::filesystem::path>& checkpoint = std::nullopt);

/// Runs complete_trajectory over a trajectory directory and writes
/// cognitive.jsonl next to its steps; the checkpoint lives in the same
/// directory until the run finishes.
std::vector<CognitiveStep> cognify_dir(const std::filesystem::path& dir, ChatClient& client,
                                       const CognitionConfig& config = {});

/// The directory cognition works on for a stored trajectory: refined/ when it
/// exists, else the raw trajectory.
std::filesystem::path cognition_dir(const TrajectoryStore& store, const std::string& id);

std::vector<CognitiveStep> load_cognitive_steps(const std::filesystem::path& dir);

}  // namespace cogtrace
