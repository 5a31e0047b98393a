// cogtrace: record, refine, cognify, export training data, run agent episodes
// and serve the HTTP API.

#include <cogtrace/agent.hpp>
#include <cogtrace/capture.hpp>
#include <cogtrace/cognition.hpp>
#include <cogtrace/errors.hpp>
#include <cogtrace/refine.hpp>
#include <cogtrace/serialization.hpp>
#include <cogtrace/service.hpp>
#include <cogtrace/session.hpp>
#include <cogtrace/store.hpp>
#include <cogtrace/training.hpp>
#include <cogtrace/util.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace cogtrace;

namespace {

void print_line(const Json& j) { std::cout << j.dump() << std::endl; }

std::vector<std::string> selected_ids(const TrajectoryStore& store, const std::vector<std::string>& ids) {
    return ids.empty() ? store.list() : ids;
}

// ---------------------------------------------------------------------------

struct RecordArgs {
    fs::path store;
    fs::path capture;
    std::string mode = "free_task";
    std::string task_id;
    fs::path tasks;
    std::string description;
    std::string outcome = "finished";
    std::string difficulty;
    fs::path elements;
};

int cmd_record(const RecordArgs& a) {
    const auto mode = task_mode_from_name(a.mode);
    if (!mode) throw Error(ErrorCode::invalid_argument, "unknown mode " + a.mode);
    const auto outcome = outcome_from_name(a.outcome);
    if (!outcome) throw Error(ErrorCode::invalid_argument, "unknown outcome " + a.outcome);
    std::optional<Difficulty> difficulty;
    if (!a.difficulty.empty()) {
        difficulty = difficulty_from_name(a.difficulty);
        if (!difficulty) throw Error(ErrorCode::invalid_argument, "unknown difficulty " + a.difficulty);
    }

    const CaptureLog log = CaptureLog::load(a.capture);
    TrajectoryStore store(a.store);
    SessionManager sessions(store);
    SessionStart start;
    start.mode = *mode;
    start.screen = log.screen;
    start.tracker_ui_region = log.tracker_ui_region;
    if (!a.elements.empty()) {
        start.provider = std::make_shared<MockElementProvider>(ElementRegistry::load(a.elements));
    } else if (log.elements) {
        start.provider = std::make_shared<MockElementProvider>(*log.elements);
    }
    if (!a.task_id.empty()) {
        if (a.tasks.empty()) throw Error(ErrorCode::invalid_argument, "--task-id needs --tasks");
        start.task = TaskLibrary::load(a.tasks).find(a.task_id);
    }
    const auto info = sessions.start_session(std::move(start));
    try {
        replay_capture(sessions, info.id, log);
        std::optional<std::string> description;
        if (!a.description.empty()) description = a.description;
        const Trajectory t = sessions.finish_session(info.id, *outcome, description, difficulty);
        Json j = trajectory_metadata_json(t);
        j["id"] = t.id;
        j["step_count"] = t.steps.size();
        j["dir"] = store.dir_of(t.id).string();
        print_line(j);
    } catch (...) {
        sessions.discard_active();
        throw;
    }
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_refine(const fs::path& store_dir, const std::vector<std::string>& ids) {
    TrajectoryStore store(store_dir);
    for (const auto& id : selected_ids(store, ids)) print_line(refine_report_json(refine_stored(store, id).report));
    return 0;
}

int cmd_cognify(const fs::path& store_dir, const std::vector<std::string>& ids, const std::string& client_spec,
                const std::string& model, int workers) {
    TrajectoryStore store(store_dir);
    const auto client = make_chat_client(client_spec, model);
    CognitionConfig config;
    config.model = model;
    config.stage1_workers = workers;
    for (const auto& id : selected_ids(store, ids)) {
        const fs::path dir = cognition_dir(store, id);
        const auto steps = cognify_dir(dir, *client, config);
        print_line(Json{{"id", id},
                        {"source", dir == store.dir_of(id) ? "raw" : "refined"},
                        {"steps", steps.size()},
                        {"output", (dir / "cognitive.jsonl").string()}});
    }
    return 0;
}

int cmd_export_training(const fs::path& store_dir, const fs::path& out) {
    TrajectoryStore store(store_dir);
    std::vector<Json> records;
    std::size_t trajectories = 0;
    for (const auto& id : store.list()) {
        const fs::path dir = cognition_dir(store, id);
        if (!fs::exists(dir / "cognitive.jsonl")) {
            spdlog::info("{} has no cognitive trajectory, skipped", id);
            continue;
        }
        const Trajectory t = load_trajectory_dir(dir);
        const auto steps = load_cognitive_steps(dir);
        const std::string task = t.task.description.value_or("");
        const fs::path rel_dir = fs::relative(dir, store.root());
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const std::string image = (rel_dir / steps[i].observation.image_ref).generic_string();
            records.push_back(
                training_example_json(render_training_example(PromptLibrary::builtin(), task, steps, i, image)));
        }
        ++trajectories;
    }
    write_jsonl_file(out, records);
    print_line(Json{{"trajectories", trajectories}, {"examples", records.size()}, {"output", out.string()}});
    return 0;
}

// ---------------------------------------------------------------------------

struct EpisodeArgs {
    std::string task;
    fs::path env;
    std::string planner;
    std::string grounder;
    int step_limit = 50;
    int retry_limit = 3;
    bool no_validate = false;
    std::string model = "default";
    fs::path out;
    fs::path work;
};

int cmd_run_episode(const EpisodeArgs& a) {
    std::string task = a.task;
    if (fs::is_regular_file(a.task)) task = trim(read_file(a.task));
    if (task.empty()) throw Error(ErrorCode::invalid_argument, "empty task");
    const fs::path work = a.work.empty() ? fs::temp_directory_path() / ("cogtrace-episode-" + sha256_hex(task).substr(0, 12))
                                         : a.work;
    SimulatedEnvironment env(SimulatedEnvironment::Fixture::load(a.env), work);
    const auto planner = make_chat_client(a.planner, a.model);
    const auto grounder = make_chat_client(a.grounder, a.model);
    EpisodeConfig config;
    config.step_limit = a.step_limit;
    config.planner.model = a.model;
    config.grounding.model = a.model;
    config.grounding.retry_limit = a.retry_limit;
    config.grounding.validate = !a.no_validate;
    const auto record = run_episode(task, env, *planner, *grounder, config);
    if (!a.out.empty()) write_episode_jsonl(a.out, record);
    Json summary{{"terminal", episode_terminal_name(record.terminal)},
                 {"steps", record.steps.size()},
                 {"screen", env.current_screen()}};
    summary["error"] = record.error.empty() ? Json(nullptr) : Json(record.error);
    print_line(summary);
    return record.terminal == EpisodeTerminal::error ? 1 : 0;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
    fs::path store;
    std::string host = "127.0.0.1";
    int port = 8765;
    fs::path tasks;
    fs::path elements;
    std::string client;
    std::string model = "default";
};

int cmd_serve(const ServeArgs& a) {
    // Signals are taken synchronously by this thread; the server runs on another.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    ServiceConfig config;
    config.host = a.host;
    config.port = a.port;
    config.store = a.store;
    if (!a.tasks.empty()) config.task_library = a.tasks;
    if (!a.elements.empty()) config.elements = a.elements;
    if (!a.client.empty()) config.chat = make_chat_client(a.client, a.model);
    config.cognition.model = a.model;
    config.seed = std::random_device{}();
    Service service(config);
    const int port = service.bind();
    print_line(Json{{"listening", "http://" + a.host + ":" + std::to_string(port)}, {"port", port}});
    std::thread server([&] { service.run(); });
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {} received, shutting down", sig);
    service.stop();
    server.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("cogtrace");
    spdlog::set_default_logger(logger);

    CLI::App app{"Record, refine and annotate computer-use trajectories; run agent episodes."};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    RecordArgs rec;
    auto* record = app.add_subcommand("record", "Replay a capture through a recording session into a store");
    record->add_option("--store", rec.store, "Store directory")->required();
    record->add_option("--capture", rec.capture, "Capture directory (capture.json, events.jsonl, frames.jsonl)")
        ->required()
        ->check(CLI::ExistingDirectory);
    record->add_option("--mode", rec.mode, "given_task, free_task or non_task")
        ->check(CLI::IsMember({"given_task", "free_task", "non_task"}));
    record->add_option("--task-id", rec.task_id, "Library task for given_task sessions");
    record->add_option("--tasks", rec.tasks, "Task library (JSONL)")->check(CLI::ExistingFile);
    record->add_option("--description", rec.description, "Task description saved with the trajectory");
    record->add_option("--outcome", rec.outcome, "finished or failed")->check(CLI::IsMember({"finished", "failed"}));
    record->add_option("--difficulty", rec.difficulty, "easy, medium or hard")
        ->check(CLI::IsMember({"easy", "medium", "hard"}));
    record->add_option("--elements", rec.elements, "Element registry overriding the capture's")->check(CLI::ExistingFile);

    fs::path store_dir;
    std::vector<std::string> ids;
    auto* refine = app.add_subcommand("refine", "Filter, clean and standardize stored trajectories");
    refine->add_option("store", store_dir, "Store directory")->required()->check(CLI::ExistingDirectory);
    refine->add_option("--id", ids, "Only these trajectories");

    std::string client_spec;
    std::string model = "default";
    int workers = 1;
    auto* cognify = app.add_subcommand("cognify", "Add click descriptions and thoughts to stored trajectories");
    cognify->add_option("store", store_dir, "Store directory")->required()->check(CLI::ExistingDirectory);
    cognify->add_option("--id", ids, "Only these trajectories");
    cognify->add_option("--client", client_spec, "mock:<rules.jsonl> or an http(s) chat-completions URL")->required();
    cognify->add_option("--model", model, "Model name sent with each request");
    cognify->add_option("--workers", workers, "Parallel description requests")->check(CLI::Range(1, 64));

    fs::path out;
    auto* export_training = app.add_subcommand("export-training", "Write planner training examples as JSONL");
    export_training->add_option("store", store_dir, "Store directory")->required()->check(CLI::ExistingDirectory);
    export_training->add_option("--out", out, "Output file")->required();

    EpisodeArgs ep;
    auto* episode = app.add_subcommand("run-episode", "Run the planner and grounder against a simulated desktop");
    episode->add_option("--task", ep.task, "Task text or a file containing it")->required();
    episode->add_option("--env", ep.env, "Environment fixture (JSON)")->required()->check(CLI::ExistingFile);
    episode->add_option("--planner", ep.planner, "mock:<rules.jsonl> or URL")->required();
    episode->add_option("--grounder", ep.grounder, "mock:<rules.jsonl> or URL")->required();
    episode->add_option("--step-limit", ep.step_limit, "Maximum steps")->check(CLI::Range(1, 1000));
    episode->add_option("--retry-limit", ep.retry_limit, "Grounding attempts per target")->check(CLI::Range(1, 20));
    episode->add_flag("--no-validate", ep.no_validate, "Accept the first grounded point");
    episode->add_option("--model", ep.model, "Model name sent with each request");
    episode->add_option("--out", ep.out, "Episode record (JSONL)");
    episode->add_option("--work", ep.work, "Directory for rendered screenshots");

    ServeArgs sv;
    auto* serve = app.add_subcommand("serve", "Run the local HTTP API");
    serve->add_option("--store", sv.store, "Store directory")->required();
    serve->add_option("--host", sv.host, "Listen address (loopback by default)");
    serve->add_option("--port", sv.port, "Listen port; 0 picks one")->check(CLI::Range(0, 65535));
    serve->add_option("--tasks", sv.tasks, "Task library (JSONL)")->check(CLI::ExistingFile);
    serve->add_option("--elements", sv.elements, "Element registry for click lookups")->check(CLI::ExistingFile);
    serve->add_option("--client", sv.client, "Chat client for /cognify");
    serve->add_option("--model", sv.model, "Model name sent with each request");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*record) return cmd_record(rec);
        if (*refine) return cmd_refine(store_dir, ids);
        if (*cognify) return cmd_cognify(store_dir, ids, client_spec, model, workers);
        if (*export_training) return cmd_export_training(store_dir, out);
        if (*episode) return cmd_run_episode(ep);
        if (*serve) return cmd_serve(sv);
    } catch (const Error& e) {
        std::cerr << Json{{"error", {{"code", error_code_name(e.code())}, {"message", e.what()}}}}.dump() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << Json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump() << std::endl;
        return 1;
    }
    return 2;
}
