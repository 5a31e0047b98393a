#pragma once

#include <cogtrace/image.hpp>

#include <optional>

namespace cogtrace {

struct MarkStyle {
    Rgb color{255, 0, 0};
    int frame_thickness = 3;
    int circle_radius = 12;
    int circle_thickness = 3;
    int point_radius = 4;
    int arrow_offset = 80;  // arrow tail sits this far outside the frame corner, in x and in y
    int arrow_thickness = 3;
};

/// Where each part of the red quadruplet goes for one click.
struct ClickMarks {
    std::optional<Rect> frame;
    ScreenPoint circle_center;
    ScreenPoint point;
    ScreenPoint arrow_from;
    ScreenPoint arrow_to;

    friend bool operator==(const ClickMarks&, const ClickMarks&) = default;
};

struct DragMarks {
    ScreenPoint from;
    ScreenPoint to;

    friend bool operator==(const DragMarks&, const DragMarks&) = default;
};

/// Frame = element rect clipped to the screen; circle at the frame center (at
/// the click point without a frame); arrow from the first frame corner whose
/// offset tail lies on screen (top-left, top-right, bottom-left, bottom-right)
/// to the edge of a circle around the click point.
ClickMarks click_marks(ScreenSize screen, ScreenPoint point, const std::optional<Rect>& rect,
                       const MarkStyle& style = {});

Image draw_click_marks(const Image& base, const ClickMarks& marks, const MarkStyle& style = {});
Image draw_drag_marks(const Image& base, const DragMarks& marks, const MarkStyle& style = {});

}  // namespace cogtrace
