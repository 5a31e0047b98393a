#include <cogtrace/action_dsl.hpp>
#include <cogtrace/cognition.hpp>
#include <cogtrace/errors.hpp>
#include <cogtrace/serialization.hpp>
#include <cogtrace/util.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace cogtrace {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCheckpointName = ".cognition.checkpoint.jsonl";
constexpr const char* kOutputName = "cognitive.jsonl";

std::string strip_quotes(std::string s) {
    s = trim(s);
    while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
        s = trim(std::string_view(s).substr(1, s.size() - 2));
    }
    return s;
}

std::string write_png_content_addressed(const fs::path& dir, const Image& image) {
    const auto bytes = encode_png(image);
    const std::string_view view(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    const std::string rel = "marked/" + sha256_hex(view) + ".png";
    fs::create_directories(dir / "marked");
    if (!fs::exists(dir / rel)) write_file_atomic(dir / rel, view);
    return rel;
}

AgentAction agent_action_for(const CognitiveStep& step) {
    const auto& a = step.action;
    switch (a.kind) {
        case ActionKind::click: return AgentAction::click(step.description.value_or(""));
        case ActionKind::right_click: return AgentAction::right_click(step.description.value_or(""));
        case ActionKind::double_click: return AgentAction::double_click(step.description.value_or(""));
        case ActionKind::press: return AgentAction::drag(a.point, step.drag_end.value_or(a.point));
        case ActionKind::drag_to: break;
        case ActionKind::scroll: return AgentAction::scroll_by(a.scroll.dx, a.scroll.dy);
        case ActionKind::press_key: return AgentAction::press_key(a.key);
        case ActionKind::hotkey: return AgentAction::hotkey(a.modifier, a.key);
        case ActionKind::type_text: return AgentAction::type_text(a.text);
        case ActionKind::wait: return AgentAction::wait();
        case ActionKind::finish: return AgentAction::finish();
        case ActionKind::fail: return AgentAction::fail();
    }
    throw Error(ErrorCode::invalid_argument, "drag_to without its press has no agent form");
}

ChatRequest single_message(const char* purpose_name, const CognitionConfig& config, std::string text,
                           const fs::path& image) {
    ChatRequest request;
    request.purpose = purpose_name;
    request.model = config.model;
    ChatMessage message;
    message.text = std::move(text);
    message.images.push_back(ChatImage{image.string()});
    request.messages.push_back(std::move(message));
    return request;
}

}  // namespace

// ============================================================================
// Steps
// ============================================================================

std::string CognitiveStep::action_line() const {
    if (agent_action) return render_agent_action(*agent_action);
    throw Error(ErrorCode::invalid_argument,
                "step " + std::to_string(ts) + " has no agent action yet (description missing)");
}

nlohmann::json cognitive_step_json(const CognitiveStep& step) {
    Json j{{"source_steps", step.source_steps},
           {"ts", step.ts},
           {"observation", step.observation},
           {"action", step.action},
           {"thought", step.thought},
           {"description_flagged", step.description_flagged}};
    j["marked_image"] = step.marked_image_ref ? Json(*step.marked_image_ref) : Json(nullptr);
    j["drag_end"] = step.drag_end ? Json(*step.drag_end) : Json(nullptr);
    j["agent_action"] = step.agent_action ? Json(*step.agent_action) : Json(nullptr);
    j["action_line"] = step.agent_action ? Json(render_agent_action(*step.agent_action)) : Json(nullptr);
    j["element_name"] = step.element_name ? Json(*step.element_name) : Json(nullptr);
    j["description"] = step.description ? Json(*step.description) : Json(nullptr);
    return j;
}

CognitiveStep cognitive_step_from_json(const nlohmann::json& j) {
    CognitiveStep s;
    try {
        s.source_steps = j.at("source_steps").get<std::vector<std::size_t>>();
        s.ts = j.at("ts").get<Millis>();
        s.observation = j.at("observation").get<Observation>();
        s.action = j.at("action").get<UnifiedAction>();
        s.thought = j.value("thought", "");
        s.description_flagged = j.value("description_flagged", false);
        auto opt_string = [&](const char* key) -> std::optional<std::string> {
            if (!j.contains(key) || j[key].is_null()) return std::nullopt;
            return j[key].get<std::string>();
        };
        s.marked_image_ref = opt_string("marked_image");
        s.element_name = opt_string("element_name");
        s.description = opt_string("description");
        if (j.contains("drag_end") && !j["drag_end"].is_null()) s.drag_end = j["drag_end"].get<ScreenPoint>();
        if (j.contains("agent_action") && !j["agent_action"].is_null()) {
            s.agent_action = j["agent_action"].get<AgentAction>();
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("cognitive step: ") + e.what());
    }
    return s;
}

std::vector<CognitiveStep> cognitive_skeleton(const Trajectory& trajectory) {
    std::vector<CognitiveStep> out;
    const auto& steps = trajectory.steps;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& step = steps[i];
        if (step.action.kind == ActionKind::drag_to) continue;  // consumed by its press, or stray
        if (step.action.kind == ActionKind::press) {
            if (i + 1 >= steps.size() || steps[i + 1].action.kind != ActionKind::drag_to) continue;
        }
        CognitiveStep c;
        c.source_steps = {i};
        c.ts = step.ts;
        c.observation = step.observation;
        c.action = step.action;
        if (step.action.kind == ActionKind::press) {
            c.source_steps.push_back(i + 1);
            c.drag_end = steps[i + 1].action.point;
        }
        if (step.action.semantics) c.element_name = step.action.semantics->element_name;
        if (step.action.semantics && step.action.semantics->description) {
            c.description = step.action.semantics->description;
        }
        if (!c.needs_description() || c.description) c.agent_action = agent_action_for(c);
        out.push_back(std::move(c));
    }
    return out;
}

MarkedScreenshot mark_click_screenshot(const Observation& obs, const fs::path& dir, ScreenPoint point,
                                       const std::optional<Rect>& rect, const MarkStyle& style) {
    MarkedScreenshot m;
    m.base = obs;
    const Image base = load_image(dir / obs.image_ref);
    m.marks = click_marks(base.size(), point, rect, style);
    m.image = draw_click_marks(base, m.marks, style);
    return m;
}

namespace {

/// Image the models see for a step: red marks for clicks and drags, the
/// plain screenshot otherwise. Written under `dir`/marked when needed.
fs::path step_image(CognitiveStep& step, const fs::path& dir) {
    if (step.action.kind == ActionKind::press && step.drag_end) {
        if (!step.marked_image_ref) {
            const Image base = load_image(dir / step.observation.image_ref);
            step.marked_image_ref =
                write_png_content_addressed(dir, draw_drag_marks(base, DragMarks{step.action.point, *step.drag_end}));
        }
        return dir / *step.marked_image_ref;
    }
    if (needs_target_description(step.action.kind)) {
        if (!step.marked_image_ref) {
            std::optional<Rect> rect;
            if (step.action.semantics) rect = step.action.semantics->element_rect;
            step.marked_image_ref =
                write_png_content_addressed(dir, mark_click_screenshot(step.observation, dir, step.action.point, rect).image);
        }
        return dir / *step.marked_image_ref;
    }
    return dir / step.observation.image_ref;
}

}  // namespace

// ============================================================================
// Prompts
// ============================================================================

std::string render_description_prompt(const PromptLibrary& prompts, const std::optional<std::string>& element_name) {
    std::string out = prompts.get(prompt_names::click_description);
    out += "\n\nName of the clicked target: ";
    out += element_name && !element_name->empty() ? *element_name : "Unknown";
    return out;
}

std::string render_refinement_prompt(const PromptLibrary& prompts, ScreenPoint point,
                                     const std::optional<std::string>& element_name, const std::string& candidate) {
    std::ostringstream out;
    out << prompts.get(prompt_names::click_refinement) << "\n\n";
    out << "Click coordinates: (" << point.x << ", " << point.y << ")\n";
    out << "Element name: " << (element_name && !element_name->empty() ? *element_name : "unknown") << "\n";
    out << "Pre-generated description: " << candidate;
    return out.str();
}

std::string render_thought_prompt(const PromptLibrary& prompts, const std::string& task,
                                  std::span<const CognitiveStep> history, std::span<const CognitiveStep> future,
                                  const CognitiveStep& current, std::size_t history_window) {
    std::ostringstream out;
    out << prompts.get(prompt_names::thought_completion) << "\n\n";
    out << "Task: " << task << "\n\n";
    out << "History:\n";
    const std::size_t first = history.size() > history_window ? history.size() - history_window : 0;
    if (first == history.size()) out << "None\n";
    for (std::size_t k = first; k < history.size(); ++k) {
        out << "Step " << (k + 1) << ":\n";
        out << "Thought: " << history[k].thought << "\n";
        out << "Action: " << history[k].action_line() << "\n";
    }
    out << "\nSubsequent actions:\n";
    if (future.empty()) out << "None\n";
    const std::size_t current_number = history.size() + 1;
    for (std::size_t k = 0; k < future.size(); ++k) {
        out << "Step " << (current_number + 1 + k) << ": " << future[k].action_line() << "\n";
    }
    out << "\nCurrent action: " << current.action_line();
    return out.str();
}

JudgeReply parse_judge_reply(std::string_view reply) {
    std::string_view answer = reply;
    if (const auto pos = reply.rfind("Answer:"); pos != std::string_view::npos) {
        answer = reply.substr(pos + 7);
    }
    const std::string a = strip_quotes(std::string(answer));
    constexpr std::string_view wrong = "Wrong. Correct Description:";
    JudgeReply out;
    if (a.rfind(wrong, 0) == 0) {
        out.correction = strip_quotes(a.substr(wrong.size()));
        out.verdict = out.correction.empty() ? JudgeVerdict::malformed : JudgeVerdict::wrong;
        return out;
    }
    if (a.rfind("Good", 0) == 0) {
        // "Good", "Good." and nothing longer that could hide another verdict.
        const std::string rest = trim(std::string_view(a).substr(4));
        if (rest.empty() || rest == ".") out.verdict = JudgeVerdict::good;
    }
    return out;
}

// ============================================================================
// Calls
// ============================================================================

std::string describe_click_target(const CognitiveStep& step, const fs::path& marked_image, ChatClient& client,
                                  const CognitionConfig& config) {
    const auto request = single_message(purpose::describe, config,
                                        render_description_prompt(config.prompt_library(), step.element_name),
                                        marked_image);
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string d = strip_quotes(client.complete(request).text);
        if (!d.empty()) return d;
        spdlog::warn("empty description for step at {}", step.ts);
    }
    throw Error(ErrorCode::client_error, "model returned no description for step at " + std::to_string(step.ts));
}

RefinedDescription refine_click_description(const CognitiveStep& step, const fs::path& marked_image,
                                            const std::string& candidate, ChatClient& client,
                                            const CognitionConfig& config) {
    const auto request = single_message(
        purpose::judge_description, config,
        render_refinement_prompt(config.prompt_library(), step.action.point, step.element_name, candidate),
        marked_image);
    for (int attempt = 0; attempt < 2; ++attempt) {
        const JudgeReply verdict = parse_judge_reply(client.complete(request).text);
        if (verdict.verdict == JudgeVerdict::good) return {candidate, false};
        if (verdict.verdict == JudgeVerdict::wrong) return {verdict.correction, false};
        spdlog::warn("malformed judge reply for step at {}", step.ts);
    }
    return {candidate, true};
}

std::string complete_thought(const std::string& task, std::span<const CognitiveStep> history,
                             std::span<const CognitiveStep> future, const CognitiveStep& current,
                             const fs::path& image, ChatClient& client, const CognitionConfig& config) {
    const auto request =
        single_message(purpose::thought, config,
                       render_thought_prompt(config.prompt_library(), task, history, future, current,
                                             config.history_window),
                       image);
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string t = strip_quotes(client.complete(request).text);
        if (t.rfind("Thought:", 0) == 0) t = trim(std::string_view(t).substr(8));
        if (!t.empty()) return t;
        spdlog::warn("empty thought for step at {}", current.ts);
    }
    throw Error(ErrorCode::client_error, "model returned no thought for step at " + std::to_string(current.ts));
}

// ============================================================================
// Pipeline
// ============================================================================

namespace {

class Checkpoint {
public:
    struct Description {
        std::string text;
        bool flagged = false;
    };

    Checkpoint(std::optional<fs::path> path, std::string fingerprint)
        : path_(std::move(path)), fingerprint_(std::move(fingerprint)) {
        if (!path_) return;
        bool valid = false;
        if (fs::exists(*path_)) {
            std::ifstream in(*path_);
            std::string line;
            bool header = true;
            while (std::getline(in, line)) {
                Json j;
                try {
                    j = Json::parse(line);
                } catch (const Json::exception&) {
                    break;  // torn tail from an interrupted append
                }
                if (header) {
                    valid = j.value("fingerprint", "") == fingerprint_;
                    header = false;
                    if (!valid) break;
                    continue;
                }
                const auto step = j.value("step", std::size_t{0});
                const auto kind = j.value("kind", "");
                if (kind == "description") {
                    descriptions_[step] = {j.value("description", ""), j.value("flagged", false)};
                } else if (kind == "thought") {
                    thoughts_[step] = j.value("thought", "");
                }
            }
        }
        if (!valid) {
            descriptions_.clear();
            thoughts_.clear();
            write_file_atomic(*path_, Json{{"fingerprint", fingerprint_}}.dump() + "\n");
        } else {
            // Rewrite without a possibly torn tail so new appends start on a fresh line.
            std::string body = Json{{"fingerprint", fingerprint_}}.dump() + "\n";
            for (const auto& [k, d] : descriptions_) {
                body += Json{{"kind", "description"}, {"step", k}, {"description", d.text}, {"flagged", d.flagged}}
                            .dump() +
                        "\n";
            }
            for (const auto& [k, t] : thoughts_) {
                body += Json{{"kind", "thought"}, {"step", k}, {"thought", t}}.dump() + "\n";
            }
            write_file_atomic(*path_, body);
        }
    }

    const Description* description(std::size_t k) const {
        const auto it = descriptions_.find(k);
        return it == descriptions_.end() ? nullptr : &it->second;
    }
    const std::string* thought(std::size_t k) const {
        const auto it = thoughts_.find(k);
        return it == thoughts_.end() ? nullptr : &it->second;
    }

    void add_description(std::size_t k, const Description& d) {
        append(Json{{"kind", "description"}, {"step", k}, {"description", d.text}, {"flagged", d.flagged}});
    }
    void add_thought(std::size_t k, const std::string& t) {
        append(Json{{"kind", "thought"}, {"step", k}, {"thought", t}});
    }

private:
    void append(const Json& record) {
        if (!path_) return;
        std::lock_guard lock(mutex_);
        std::ofstream out(*path_, std::ios::app);
        out << record.dump() << "\n";
        out.flush();
        if (!out) throw Error(ErrorCode::io_error, "cannot append to " + path_->string());
    }

    std::optional<fs::path> path_;
    std::string fingerprint_;
    std::map<std::size_t, Description> descriptions_;
    std::map<std::size_t, std::string> thoughts_;
    std::mutex mutex_;
};

std::string fingerprint_of(const Trajectory& t, const CognitionConfig& config) {
    Json j;
    j["id"] = t.id;
    j["task"] = t.task.description.value_or("");
    Json steps = Json::array();
    for (const auto& s : t.steps) steps.push_back(s);
    j["steps"] = std::move(steps);
    j["model"] = config.model;
    j["history_window"] = config.history_window;
    const auto& prompts = config.prompt_library();
    for (const auto name : {prompt_names::click_description, prompt_names::click_refinement,
                            prompt_names::thought_completion}) {
        j["prompts"][std::string(name)] = prompts.checksum(name);
    }
    return sha256_hex(j.dump());
}

}  // namespace

std::vector<CognitiveStep> complete_trajectory(const Trajectory& trajectory, const fs::path& dir, ChatClient& client,
                                               const CognitionConfig& config,
                                               const std::optional<fs::path>& checkpoint_path) {
    auto steps = cognitive_skeleton(trajectory);
    Checkpoint checkpoint(checkpoint_path, fingerprint_of(trajectory, config));

    std::vector<fs::path> images(steps.size());
    for (std::size_t k = 0; k < steps.size(); ++k) images[k] = step_image(steps[k], dir);

    // Stage 1: descriptions for click-like steps, independent of each other.
    std::vector<std::size_t> pending;
    for (std::size_t k = 0; k < steps.size(); ++k) {
        if (!steps[k].needs_description() || steps[k].agent_action) continue;
        if (const auto* done = checkpoint.description(k)) {
            steps[k].description = done->text;
            steps[k].description_flagged = done->flagged;
            steps[k].agent_action = agent_action_for(steps[k]);
            continue;
        }
        pending.push_back(k);
    }
    auto describe_one = [&](std::size_t k) {
        auto& step = steps[k];
        const std::string candidate = describe_click_target(step, images[k], client, config);
        const auto refined = refine_click_description(step, images[k], candidate, client, config);
        checkpoint.add_description(k, {refined.description, refined.flagged});
        step.description = refined.description;
        step.description_flagged = refined.flagged;
        step.agent_action = agent_action_for(step);
    };
    const int workers = std::clamp(config.stage1_workers, 1, 64);
    if (workers == 1 || pending.size() < 2) {
        for (const auto k : pending) describe_one(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::mutex error_mutex;
        std::exception_ptr first_error;
        std::vector<std::thread> pool;
        for (int w = 0; w < std::min<int>(workers, static_cast<int>(pending.size())); ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= pending.size()) return;
                    try {
                        describe_one(pending[i]);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                        next = pending.size();
                        return;
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    // Stage 2: thoughts in order; each prompt carries the thoughts before it.
    const std::string task = trajectory.task.description.value_or("");
    const std::span<const CognitiveStep> all(steps);
    for (std::size_t k = 0; k < steps.size(); ++k) {
        if (const auto* done = checkpoint.thought(k)) {
            steps[k].thought = *done;
            continue;
        }
        steps[k].thought =
            complete_thought(task, all.first(k), all.subspan(k + 1), steps[k], images[k], client, config);
        checkpoint.add_thought(k, steps[k].thought);
    }
    return steps;
}

std::vector<CognitiveStep> cognify_dir(const fs::path& dir, ChatClient& client, const CognitionConfig& config) {
    const Trajectory trajectory = load_trajectory_dir(dir);
    const fs::path checkpoint = dir / kCheckpointName;
    auto steps = complete_trajectory(trajectory, dir, client, config, checkpoint);
    std::vector<Json> records;
    records.reserve(steps.size());
    for (const auto& s : steps) records.push_back(cognitive_step_json(s));
    write_jsonl_file(dir / kOutputName, records);
    std::error_code ec;
    fs::remove(checkpoint, ec);
    spdlog::info("cognified {} ({} steps)", trajectory.id, steps.size());
    return steps;
}

fs::path cognition_dir(const TrajectoryStore& store, const std::string& id) {
    if (!store.exists(id)) throw Error(ErrorCode::not_found, "no trajectory '" + id + "'");
    const fs::path refined = store.dir_of(id) / "refined";
    if (fs::exists(refined / "steps.jsonl")) return refined;
    return store.dir_of(id);
}

std::vector<CognitiveStep> load_cognitive_steps(const fs::path& dir) {
    std::vector<CognitiveStep> out;
    for (const auto& j : read_jsonl_file(dir / kOutputName)) out.push_back(cognitive_step_from_json(j));
    return out;
}

}  // namespace cogtrace
