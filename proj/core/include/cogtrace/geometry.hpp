#pragma once

#include <cstdint>
#include <optional>

namespace cogtrace {

struct ScreenPoint {
    int x = 0;
    int y = 0;

    friend bool operator==(const ScreenPoint&, const ScreenPoint&) = default;
};

struct ScreenSize {
    int width = 0;
    int height = 0;

    bool contains(ScreenPoint p) const noexcept {
        return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
    }
    bool valid() const noexcept { return width > 0 && height > 0; }

    friend bool operator==(const ScreenSize&, const ScreenSize&) = default;
};

// Half-open pixel rectangle: [left, right) x [top, bottom).
struct Rect {
    int left = 0;
    int top = 0;
    int right = 0;
    int bottom = 0;

    int width() const noexcept { return right - left; }
    int height() const noexcept { return bottom - top; }
    std::int64_t area() const noexcept {
        return static_cast<std::int64_t>(width()) * static_cast<std::int64_t>(height());
    }
    bool degenerate() const noexcept { return right <= left || bottom <= top; }
    bool contains(ScreenPoint p) const noexcept {
        return p.x >= left && p.x < right && p.y >= top && p.y < bottom;
    }
    bool within(ScreenSize s) const noexcept {
        return left >= 0 && top >= 0 && right <= s.width && bottom <= s.height;
    }
    ScreenPoint center() const noexcept { return {(left + right) / 2, (top + bottom) / 2}; }

    friend bool operator==(const Rect&, const Rect&) = default;
};

}  // namespace cogtrace
