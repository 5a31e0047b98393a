#include <cogtrace/action_dsl.hpp>
#include <cogtrace/errors.hpp>
#include <cogtrace/serialization.hpp>
#include <cogtrace/service.hpp>
#include <cogtrace/util.hpp>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <regex>

namespace cogtrace {

namespace fs = std::filesystem;

int http_status_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_argument:
        case ErrorCode::parse_error:
        case ErrorCode::out_of_order_event:
        case ErrorCode::stale_observation:
        case ErrorCode::aspect_ratio_mismatch: return 400;
        case ErrorCode::not_found: return 404;
        case ErrorCode::session_already_active:
        case ErrorCode::session_not_active:
        case ErrorCode::library_exhausted: return 409;
        case ErrorCode::missing_description:
        case ErrorCode::no_observation: return 422;
        case ErrorCode::client_error:
        case ErrorCode::planner_malformed: return 502;
        case ErrorCode::provider_unavailable:
        case ErrorCode::store_unavailable: return 503;
        case ErrorCode::io_error:
        case ErrorCode::env_error:
        case ErrorCode::address_in_use: return 500;
    }
    return 500;
}

namespace {

Json error_body(std::string_view code, const std::string& message) {
    return Json{{"error", {{"code", code}, {"message", message}}}};
}

void send_json(httplib::Response& res, const Json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

Json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    try {
        Json j = Json::parse(req.body);
        if (!j.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
        return j;
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::parse_error, std::string("request body: ") + e.what());
    }
}

std::optional<std::string> opt_string(const Json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw Error(ErrorCode::invalid_argument, std::string("'") + key + "' must be a string");
    return j[key].get<std::string>();
}

Json task_json(const TaskEntry& t) { return Json{{"id", t.id}, {"description", t.description}, {"bad", t.bad}}; }

Json session_json(const SessionInfo& s) {
    Json j{{"id", s.id},
           {"mode", task_mode_name(s.task.mode)},
           {"screen", s.screen},
           {"step_count", s.step_count},
           {"recent_actions", s.recent_actions}};
    j["task"] = s.task.description ? Json(*s.task.description) : Json(nullptr);
    j["task_id"] = s.task.task_id ? Json(*s.task.task_id) : Json(nullptr);
    return j;
}

std::string media_url(const std::string& id, const std::string& ref) { return "/media/" + id + "/" + ref; }

Json trajectory_summary(const Trajectory& t) {
    Json j = trajectory_metadata_json(t);
    j["id"] = t.id;
    j["step_count"] = t.steps.size();
    return j;
}

}  // namespace

struct Service::Impl {
    ServiceConfig config;
    TrajectoryStore store;
    SessionManager sessions;
    std::optional<TaskLibrary> tasks;
    std::shared_ptr<ElementProvider> elements;
    std::mutex tasks_mutex;
    std::mutex pipeline_mutex;
    httplib::Server server;
    std::atomic<int> port{-1};
    std::atomic<bool> stopped{false};

    explicit Impl(ServiceConfig c)
        : config(std::move(c)), store(config.store), sessions(store, config.session) {
        if (config.task_library) tasks.emplace(TaskLibrary::load(*config.task_library, config.seed));
        if (config.elements) elements = std::make_shared<MockElementProvider>(ElementRegistry::load(*config.elements));
        // Plain SO_REUSEADDR: a second server on the same port must fail.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
        });
        routes();
    }

    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

    /// Wraps a handler so library errors become JSON error documents.
    static httplib::Server::Handler guarded(Handler h) {
        return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
            try {
                h(req, res);
            } catch (const Error& e) {
                send_json(res, error_body(error_code_name(e.code()), e.what()), http_status_for(e.code()));
            } catch (const std::exception& e) {
                spdlog::error("{} {}: {}", req.method, req.path, e.what());
                send_json(res, error_body("Internal", e.what()), 500);
            }
        };
    }

    TaskLibrary& library() {
        if (!tasks) throw Error(ErrorCode::not_found, "no task library configured");
        return *tasks;
    }

    void routes() {
        server.Get("/v1/health", guarded([this](const auto&, auto& res) {
            const auto active = sessions.active();
            Json j{{"status", "ok"}, {"store", store.root().string()}, {"cognify", config.chat != nullptr}};
            j["active_session"] = active ? Json(active->id) : Json(nullptr);
            send_json(res, j);
        }));

        server.Post("/v1/sessions", guarded([this](const auto& req, auto& res) {
            const Json body = parse_body(req);
            const auto mode = task_mode_from_name(body.value("mode", ""));
            if (!mode) throw Error(ErrorCode::invalid_argument, "mode must be given_task, free_task or non_task");
            SessionStart start;
            start.mode = *mode;
            start.provider = elements;
            if (body.contains("screen")) start.screen = body["screen"].get<ScreenSize>();
            if (body.contains("tracker_ui_region") && !body["tracker_ui_region"].is_null()) {
                start.tracker_ui_region = body["tracker_ui_region"].get<Rect>();
            }
            if (const auto task_id = opt_string(body, "task_id")) {
                std::lock_guard lock(tasks_mutex);
                start.task = library().find(*task_id);
            } else if (*mode == TaskMode::given_task) {
                std::lock_guard lock(tasks_mutex);
                start.task = library().draw();
            }
            send_json(res, session_json(sessions.start_session(std::move(start))), 201);
        }));

        server.Get("/v1/sessions/active", guarded([this](const auto&, auto& res) {
            const auto active = sessions.active();
            if (!active) throw Error(ErrorCode::session_not_active, "no open session");
            send_json(res, session_json(*active));
        }));

        server.Post(R"(/v1/sessions/([^/]+)/frames)", guarded([this](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            if (!req.has_param("capture_ts")) throw Error(ErrorCode::invalid_argument, "capture_ts is required");
            Millis ts = 0;
            try {
                ts = std::stoll(req.get_param_value("capture_ts"));
            } catch (const std::exception&) {
                throw Error(ErrorCode::invalid_argument, "capture_ts must be an integer");
            }
            std::optional<std::string> state;
            if (req.has_param("screen_state")) state = req.get_param_value("screen_state");
            sessions.record_frame_bytes(id, ts, req.body, state);
            res.status = 204;
        }));

        server.Post(R"(/v1/sessions/([^/]+)/events)", guarded([this](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            const Json body = parse_body(req);
            if (!body.contains("events") || !body["events"].is_array()) {
                throw Error(ErrorCode::invalid_argument, "'events' must be an array");
            }
            std::vector<RawInputEvent> events;
            try {
                for (const auto& e : body["events"]) events.push_back(e.get<RawInputEvent>());
            } catch (const Json::exception& e) {
                throw Error(ErrorCode::parse_error, std::string("event: ") + e.what());
            }
            if (const auto active = sessions.active(); !active || active->id != id) {
                throw Error(ErrorCode::session_not_active, "no open session '" + id + "'");
            }
            Json actions = Json::array();
            for (const auto& e : events) {
                for (const auto& a : sessions.record_event(id, e)) actions.push_back(render_tracker_action(a.action));
            }
            const auto active = sessions.active();
            send_json(res, Json{{"actions", actions}, {"step_count", active ? active->step_count : 0}});
        }));

        server.Post(R"(/v1/sessions/([^/]+)/finish)", guarded([this](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            const Json body = parse_body(req);
            const auto outcome = outcome_from_name(body.value("outcome", ""));
            if (!outcome) throw Error(ErrorCode::invalid_argument, "outcome must be finished or failed");
            std::optional<Difficulty> difficulty;
            if (const auto d = opt_string(body, "difficulty")) {
                difficulty = difficulty_from_name(*d);
                if (!difficulty) throw Error(ErrorCode::invalid_argument, "difficulty must be easy, medium or hard");
            }
            const auto t = sessions.finish_session(id, *outcome, opt_string(body, "description"), difficulty);
            send_json(res, trajectory_summary(t), 201);
        }));

        server.Post(R"(/v1/sessions/([^/]+)/discard)", guarded([this](const auto& req, auto& res) {
            sessions.discard_session(req.matches[1]);
            send_json(res, Json{{"discarded", std::string(req.matches[1])}});
        }));

        server.Get("/v1/tasks/next", guarded([this](const auto&, auto& res) {
            std::lock_guard lock(tasks_mutex);
            send_json(res, task_json(library().draw()));
        }));

        server.Get("/v1/tasks/previous", guarded([this](const auto&, auto& res) {
            std::lock_guard lock(tasks_mutex);
            const auto prev = library().previous();
            if (!prev) throw Error(ErrorCode::not_found, "no previous task");
            send_json(res, task_json(*prev));
        }));

        server.Post(R"(/v1/tasks/([^/]+)/bad)", guarded([this](const auto& req, auto& res) {
            std::lock_guard lock(tasks_mutex);
            library().mark_bad(req.matches[1]);
            send_json(res, task_json(library().find(req.matches[1])));
        }));

        server.Get("/v1/trajectories", guarded([this](const auto&, auto& res) {
            Json list = Json::array();
            for (const auto& id : store.list()) {
                try {
                    list.push_back(trajectory_summary(store.load(id)));
                } catch (const Error& e) {
                    list.push_back(Json{{"id", id}, {"error", error_code_name(e.code())}});
                }
            }
            send_json(res, Json{{"trajectories", list}});
        }));

        server.Get(R"(/v1/trajectories/([^/]+))", guarded([this](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            const Trajectory t = store.load(id);
            Json j = trajectory_summary(t);
            Json steps = Json::array();
            for (std::size_t i = 0; i < t.steps.size(); ++i) {
                const auto& s = t.steps[i];
                Json step{{"index", i}, {"ts", s.ts}, {"action", render_tracker_action(s.action)},
                          {"image", media_url(id, s.observation.image_ref)}};
                step["marked_image"] = s.marked_image_ref ? Json(media_url(id, *s.marked_image_ref)) : Json(nullptr);
                if (s.action.semantics) step["semantics"] = *s.action.semantics;
                steps.push_back(std::move(step));
            }
            j["steps"] = std::move(steps);
            const fs::path dir = store.dir_of(id);
            j["markdown"] = fs::exists(dir / "trajectory.md") ? Json(read_file(dir / "trajectory.md")) : Json(nullptr);
            j["refine_report"] = fs::exists(dir / "refine_report.json") ? read_json_file(dir / "refine_report.json")
                                                                        : Json(nullptr);
            const fs::path cdir = cognition_dir(store, id);
            if (fs::exists(cdir / "cognitive.jsonl")) {
                Json cog = Json::array();
                const std::string prefix = cdir == dir ? "" : "refined/";
                for (const auto& c : load_cognitive_steps(cdir)) {
                    Json cj{{"thought", c.thought}, {"image", media_url(id, prefix + c.observation.image_ref)}};
                    cj["action"] = c.agent_action ? Json(c.action_line()) : Json(nullptr);
                    cj["marked_image"] =
                        c.marked_image_ref ? Json(media_url(id, prefix + *c.marked_image_ref)) : Json(nullptr);
                    cog.push_back(std::move(cj));
                }
                j["cognitive"] = std::move(cog);
            } else {
                j["cognitive"] = nullptr;
            }
            send_json(res, j);
        }));

        server.Post(R"(/v1/trajectories/([^/]+)/refine)", guarded([this](const auto& req, auto& res) {
            std::lock_guard lock(pipeline_mutex);
            const auto result = refine_stored(store, req.matches[1], config.refine);
            send_json(res, refine_report_json(result.report));
        }));

        server.Post(R"(/v1/trajectories/([^/]+)/cognify)", guarded([this](const auto& req, auto& res) {
            if (!config.chat) {
                send_json(res, error_body("Unavailable", "no chat client configured"), 503);
                return;
            }
            const std::string id = req.matches[1];
            std::lock_guard lock(pipeline_mutex);
            const fs::path dir = cognition_dir(store, id);
            const auto steps = cognify_dir(dir, *config.chat, config.cognition);
            send_json(res, Json{{"id", id},
                                {"source", dir == store.dir_of(id) ? "raw" : "refined"},
                                {"steps", steps.size()}});
        }));

        // Content-addressed images only; nothing else in the store is reachable.
        server.Get(R"(/media/([0-9A-Za-z-]+)/((?:refined/)?(?:screenshots|marked)/[0-9a-f]{64}\.png))",
                   guarded([this](const auto& req, auto& res) {
                       const std::string id = req.matches[1];
                       if (!store.exists(id)) throw Error(ErrorCode::not_found, "no trajectory '" + id + "'");
                       const fs::path file = store.dir_of(id) / std::string(req.matches[2]);
                       if (!fs::exists(file)) throw Error(ErrorCode::not_found, "no such image");
                       res.set_header("Cache-Control", "public, max-age=31536000, immutable");
                       res.set_content(read_file(file), "image/png");
                   }));
    }
};

Service::Service(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Service::~Service() { stop(); }

int Service::bind() {
    if (impl_->port >= 0) return impl_->port;
    int port = -1;
    if (impl_->config.port == 0) {
        port = impl_->server.bind_to_any_port(impl_->config.host);
    } else if (impl_->server.bind_to_port(impl_->config.host, impl_->config.port)) {
        port = impl_->config.port;
    }
    if (port < 0) {
        throw Error(ErrorCode::address_in_use,
                    "cannot listen on " + impl_->config.host + ":" + std::to_string(impl_->config.port));
    }
    impl_->port = port;
    spdlog::info("listening on http://{}:{}", impl_->config.host, port);
    return port;
}

void Service::run() {
    bind();
    impl_->server.listen_after_bind();
}

void Service::stop() {
    if (impl_->stopped.exchange(true)) return;
    try {
        impl_->sessions.discard_active();
    } catch (const std::exception& e) {
        spdlog::warn("discarding open session on shutdown failed: {}", e.what());
    }
    impl_->server.stop();
}

int Service::port() const noexcept { return impl_->port; }
SessionManager& Service::sessions() { return impl_->sessions; }
TrajectoryStore& Service::store() { return impl_->store; }

}  // namespace cogtrace
