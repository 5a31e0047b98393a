#pragma once

#include <cogtrace/event_model.hpp>
#include <cogtrace/observer.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cogtrace {

struct CaptureFrame {
    Millis capture_ts = 0;
    /// Image path, relative to the capture directory unless absolute.
    std::string image;
    std::optional<std::string> screen_state;

    friend bool operator==(const CaptureFrame&, const CaptureFrame&) = default;
};

/// Recorded input and screen stream, the contract between a capture adapter
/// and the recorder:
///
///   capture.json   {"screen": {...}, "tracker_ui_region": [l, t, r, b]}
///   events.jsonl   one RawInputEvent per line
///   frames.jsonl   one {"capture_ts", "image", "screen_state"} per line
///   elements.json  optional element registry for the recorded screens
struct CaptureLog {
    ScreenSize screen;
    std::optional<Rect> tracker_ui_region;
    std::vector<RawInputEvent> events;
    std::vector<CaptureFrame> frames;
    std::optional<ElementRegistry> elements;
    std::filesystem::path dir;

    static CaptureLog load(const std::filesystem::path& dir);
    void save(const std::filesystem::path& dir) const;

    std::filesystem::path frame_path(const CaptureFrame& frame) const;
};

}  // namespace cogtrace
