#pragma once

#include <cogtrace/chat.hpp>
#include <cogtrace/cognition.hpp>
#include <cogtrace/refine.hpp>
#include <cogtrace/session.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace cogtrace {

struct ServiceConfig {
    /// Loopback unless explicitly widened.
    std::string host = "127.0.0.1";
    /// 0 picks a free port.
    int port = 8765;
    std::filesystem::path store;
    std::optional<std::filesystem::path> task_library;
    /// Element registry answering click lookups for recorded sessions.
    std::optional<std::filesystem::path> elements;
    /// Client for /cognify; without one that endpoint answers 503.
    std::shared_ptr<ChatClient> chat;
    CognitionConfig cognition;
    RefineConfig refine;
    SessionOptions session;
    std::uint64_t seed = 0;
};

/// Local HTTP front end for the recorder and the pipeline, versioned under
/// /v1. Screenshots are served read-only under /media.
///
///   GET  /v1/health
///   POST /v1/sessions                  {mode, task_id?, screen?, tracker_ui_region?}
///   GET  /v1/sessions/active
///   POST /v1/sessions/{id}/frames?capture_ts=N[&screen_state=S]   PNG body
///   POST /v1/sessions/{id}/events      {events: [...]}
///   POST /v1/sessions/{id}/finish      {outcome, description?, difficulty?}
///   POST /v1/sessions/{id}/discard
///   GET  /v1/tasks/next | /v1/tasks/previous
///   POST /v1/tasks/{id}/bad
///   GET  /v1/trajectories | /v1/trajectories/{id}
///   POST /v1/trajectories/{id}/refine | /v1/trajectories/{id}/cognify
///
/// Errors come back as {"error": {"code", "message"}}.
class Service {
public:
    /// Throws Error(store_unavailable) when the store cannot be opened.
    explicit Service(ServiceConfig config);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Throws Error(address_in_use). Returns the bound port.
    int bind();
    /// Serves until stop(); binds first if needed.
    void run();
    /// Discards any open session, then stops accepting requests.
    void stop();

    int port() const noexcept;
    SessionManager& sessions();
    TrajectoryStore& store();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// HTTP status used for an error code.
int http_status_for(ErrorCode code) noexcept;

}  // namespace cogtrace
