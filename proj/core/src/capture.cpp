#include <cogtrace/capture.hpp>
#include <cogtrace/errors.hpp>
#include <cogtrace/serialization.hpp>

namespace cogtrace {

namespace fs = std::filesystem;

CaptureLog CaptureLog::load(const fs::path& dir) {
    CaptureLog log;
    log.dir = dir;
    const Json meta = read_json_file(dir / "capture.json");
    try {
        log.screen = meta.at("screen").get<ScreenSize>();
        if (meta.contains("tracker_ui_region") && !meta["tracker_ui_region"].is_null()) {
            log.tracker_ui_region = meta["tracker_ui_region"].get<Rect>();
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::parse_error, (dir / "capture.json").string() + ": " + e.what());
    }
    if (!log.screen.valid()) throw Error(ErrorCode::parse_error, "capture screen size must be positive");
    log.events = read_raw_event_log(dir / "events.jsonl");
    for (const auto& record : read_jsonl_file(dir / "frames.jsonl")) {
        CaptureFrame f;
        try {
            f.capture_ts = record.at("capture_ts").get<Millis>();
            f.image = record.at("image").get<std::string>();
            if (record.contains("screen_state") && !record["screen_state"].is_null()) {
                f.screen_state = record["screen_state"].get<std::string>();
            }
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::parse_error, (dir / "frames.jsonl").string() + ": " + e.what());
        }
        log.frames.push_back(std::move(f));
    }
    if (fs::exists(dir / "elements.json")) log.elements = ElementRegistry::load(dir / "elements.json");
    return log;
}

void CaptureLog::save(const fs::path& dir_out) const {
    fs::create_directories(dir_out);
    Json meta{{"format", "cogtrace.capture/1"}, {"screen", screen}};
    if (tracker_ui_region) meta["tracker_ui_region"] = *tracker_ui_region;
    write_json_file(dir_out / "capture.json", meta);
    write_raw_event_log(dir_out / "events.jsonl", events);
    std::vector<Json> frame_records;
    for (const auto& f : frames) {
        Json j{{"capture_ts", f.capture_ts}, {"image", f.image}};
        j["screen_state"] = f.screen_state ? Json(*f.screen_state) : Json(nullptr);
        frame_records.push_back(std::move(j));
    }
    write_jsonl_file(dir_out / "frames.jsonl", frame_records);
    if (elements) elements->save(dir_out / "elements.json");
}

fs::path CaptureLog::frame_path(const CaptureFrame& frame) const {
    const fs::path p(frame.image);
    return p.is_absolute() ? p : dir / p;
}

}  // namespace cogtrace
