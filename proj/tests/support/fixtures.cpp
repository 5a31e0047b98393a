#include "fixtures.hpp"

#include <random>

namespace cogtrace::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
    std::random_device rd;
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto candidate = fs::temp_directory_path() / ("cogtrace-test-" + std::to_string(rd()));
        if (fs::create_directory(candidate)) {
            path_ = candidate;
            return;
        }
    }
    throw std::runtime_error("could not create temp dir");
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

fs::path fixture_path(const std::string& rel) { return fs::path(COGTRACE_FIXTURE_DIR) / rel; }

std::vector<RawInputEvent> hello_typing_stream() {
    return {
        RawInputEvent::key_down(1000, "caps_lock"), RawInputEvent::key_down(1120, "h"),
        RawInputEvent::key_down(1260, "caps_lock"), RawInputEvent::key_down(1400, "e"),
        RawInputEvent::key_down(1530, "l"),         RawInputEvent::key_down(1650, "l"),
        RawInputEvent::key_down(1790, "p"),         RawInputEvent::key_down(2100, "backspace"),
        RawInputEvent::key_down(2250, "o"),
    };
}

}  // namespace cogtrace::testing
