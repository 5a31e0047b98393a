#pragma once

#include <cogtrace/event_model.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cogtrace::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

std::filesystem::path fixture_path(const std::string& rel);

/// Nine key presses that spell "Hello" with a caps-lock capital and one
/// corrected typo.
std::vector<RawInputEvent> hello_typing_stream();

}  // namespace cogtrace::testing
