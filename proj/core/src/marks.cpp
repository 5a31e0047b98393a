#include <cogtrace/errors.hpp>
#include <cogtrace/marks.hpp>

#include <opencv2/imgproc.hpp>

#include <array>
#include <cmath>

namespace cogtrace {

namespace {

cv::Scalar scalar(Rgb c) { return cv::Scalar(c.r, c.g, c.b); }
cv::Point cvp(ScreenPoint p) { return cv::Point(p.x, p.y); }

// Point at `gap` pixels from `to` on the segment from -> to.
ScreenPoint stop_short(ScreenPoint from, ScreenPoint to, int gap) {
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    const double len = std::hypot(dx, dy);
    if (len <= gap) return from;
    const double k = (len - gap) / len;
    return {static_cast<int>(std::lround(from.x + dx * k)), static_cast<int>(std::lround(from.y + dy * k))};
}

void draw_arrow(cv::Mat& m, ScreenPoint from, ScreenPoint to, const MarkStyle& style) {
    const double len = std::hypot(to.x - from.x, to.y - from.y);
    if (len < 1.0) return;
    // Fixed 20 px head regardless of arrow length.
    cv::arrowedLine(m, cvp(from), cvp(to), scalar(style.color), style.arrow_thickness, cv::LINE_8, 0,
                    std::min(0.5, 20.0 / len));
}

cv::Mat mat_of(Image& image) { return cv::Mat(image.height, image.width, CV_8UC3, image.pixels.data()); }

}  // namespace

ClickMarks click_marks(ScreenSize screen, ScreenPoint point, const std::optional<Rect>& rect, const MarkStyle& style) {
    if (!screen.contains(point)) throw Error(ErrorCode::invalid_argument, "mark point lies outside the screenshot");
    ClickMarks marks;
    marks.point = point;
    Rect anchor{point.x, point.y, point.x + 1, point.y + 1};
    if (rect) {
        Rect clipped{std::max(rect->left, 0), std::max(rect->top, 0), std::min(rect->right, screen.width),
                     std::min(rect->bottom, screen.height)};
        if (!clipped.degenerate()) {
            marks.frame = clipped;
            anchor = clipped;
        }
    }
    marks.circle_center = marks.frame ? marks.frame->center() : point;

    const int o = style.arrow_offset;
    const std::array<ScreenPoint, 4> tails = {
        ScreenPoint{anchor.left - o, anchor.top - o},
        ScreenPoint{anchor.right - 1 + o, anchor.top - o},
        ScreenPoint{anchor.left - o, anchor.bottom - 1 + o},
        ScreenPoint{anchor.right - 1 + o, anchor.bottom - 1 + o},
    };
    marks.arrow_from = tails[0];
    bool placed = false;
    for (const auto& t : tails) {
        if (screen.contains(t)) {
            marks.arrow_from = t;
            placed = true;
            break;
        }
    }
    if (!placed) {
        // Element nearly fills the screen: clamp the top-left tail onto it.
        marks.arrow_from = {std::clamp(tails[0].x, 0, screen.width - 1), std::clamp(tails[0].y, 0, screen.height - 1)};
    }
    marks.arrow_to = stop_short(marks.arrow_from, point, style.circle_radius + 2);
    return marks;
}

Image draw_click_marks(const Image& base, const ClickMarks& marks, const MarkStyle& style) {
    Image out = base;
    cv::Mat m = mat_of(out);
    const cv::Scalar red = scalar(style.color);
    if (marks.frame) {
        cv::rectangle(m, cv::Point(marks.frame->left, marks.frame->top),
                      cv::Point(marks.frame->right - 1, marks.frame->bottom - 1), red, style.frame_thickness,
                      cv::LINE_8);
    }
    cv::circle(m, cvp(marks.circle_center), style.circle_radius, red, style.circle_thickness, cv::LINE_8);
    cv::circle(m, cvp(marks.point), style.point_radius, red, cv::FILLED, cv::LINE_8);
    draw_arrow(m, marks.arrow_from, marks.arrow_to, style);
    return out;
}

Image draw_drag_marks(const Image& base, const DragMarks& marks, const MarkStyle& style) {
    Image out = base;
    cv::Mat m = mat_of(out);
    const cv::Scalar red = scalar(style.color);
    for (ScreenPoint p : {marks.from, marks.to}) {
        cv::circle(m, cvp(p), style.point_radius, red, cv::FILLED, cv::LINE_8);
        cv::circle(m, cvp(p), style.circle_radius, red, style.circle_thickness, cv::LINE_8);
    }
    draw_arrow(m, stop_short(marks.to, marks.from, style.circle_radius + 2),
               stop_short(marks.from, marks.to, style.circle_radius + 2), style);
    return out;
}

}  // namespace cogtrace
