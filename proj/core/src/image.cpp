#include <cogtrace/errors.hpp>
#include <cogtrace/image.hpp>
#include <cogtrace/util.hpp>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <fstream>

namespace cogtrace {

Image::Image(int w, int h, Rgb fill) : width(w), height(h) {
    if (w <= 0 || h <= 0) throw Error(ErrorCode::invalid_argument, "image dimensions must be positive");
    pixels.resize(static_cast<std::size_t>(w) * h * 3);
    for (std::size_t i = 0; i < pixels.size(); i += 3) {
        pixels[i] = fill.r;
        pixels[i + 1] = fill.g;
        pixels[i + 2] = fill.b;
    }
}

Rgb Image::at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

void Image::set(int x, int y, Rgb c) {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
}

namespace {

// Views share the pixel buffer; OpenCV sees it as RGB even though its own
// convention is BGR, so colors are swapped at the codec boundary only.
cv::Mat view(Image& image) { return cv::Mat(image.height, image.width, CV_8UC3, image.pixels.data()); }
cv::Mat view(const Image& image) {
    return cv::Mat(image.height, image.width, CV_8UC3, const_cast<std::uint8_t*>(image.pixels.data()));
}

Image from_bgr(const cv::Mat& bgr) {
    Image out(bgr.cols, bgr.rows);
    cv::Mat dst = view(out);
    cv::cvtColor(bgr, dst, cv::COLOR_BGR2RGB);
    return out;
}

}  // namespace

std::vector<unsigned char> encode_png(const Image& image) {
    cv::Mat bgr;
    cv::cvtColor(view(image), bgr, cv::COLOR_RGB2BGR);
    std::vector<unsigned char> out;
    const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 6, cv::IMWRITE_PNG_STRATEGY, cv::IMWRITE_PNG_STRATEGY_DEFAULT};
    if (!cv::imencode(".png", bgr, out, params)) throw Error(ErrorCode::io_error, "PNG encoding failed");
    return out;
}

Image decode_image(const std::vector<unsigned char>& bytes) {
    if (bytes.empty()) throw Error(ErrorCode::parse_error, "empty image data");
    cv::Mat decoded;
    try {
        decoded = cv::imdecode(bytes, cv::IMREAD_COLOR);
    } catch (const cv::Exception& e) {
        throw Error(ErrorCode::parse_error, std::string("undecodable image: ") + e.what());
    }
    if (decoded.empty()) throw Error(ErrorCode::parse_error, "undecodable image");
    return from_bgr(decoded);
}

Image load_image(const std::filesystem::path& path) {
    const std::string raw = read_file(path);
    return decode_image(std::vector<unsigned char>(raw.begin(), raw.end()));
}

void save_png(const std::filesystem::path& path, const Image& image) {
    const auto bytes = encode_png(image);
    write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::optional<ScreenSize> probe_image(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
    try {
        const Image img = load_image(path);
        return img.size();
    } catch (const Error&) {
        return std::nullopt;
    }
}

Image resize_image(const Image& image, ScreenSize target) {
    if (!target.valid()) throw Error(ErrorCode::invalid_argument, "resize target must be positive");
    if (image.size() == target) return image;
    Image out(target.width, target.height);
    cv::Mat dst = view(out);
    const bool shrinking = target.width <= image.width && target.height <= image.height;
    cv::resize(view(image), dst, cv::Size(target.width, target.height), 0, 0,
               shrinking ? cv::INTER_AREA : cv::INTER_LINEAR);
    return out;
}

void fill_rect(Image& image, const Rect& rect, Rgb color) {
    cv::Mat m = view(image);
    cv::rectangle(m, cv::Point(rect.left, rect.top), cv::Point(rect.right - 1, rect.bottom - 1),
                  cv::Scalar(color.r, color.g, color.b), cv::FILLED, cv::LINE_8);
}

void stroke_rect(Image& image, const Rect& rect, Rgb color, int thickness) {
    cv::Mat m = view(image);
    cv::rectangle(m, cv::Point(rect.left, rect.top), cv::Point(rect.right - 1, rect.bottom - 1),
                  cv::Scalar(color.r, color.g, color.b), thickness, cv::LINE_8);
}

void draw_label(Image& image, ScreenPoint origin, const std::string& text, Rgb color, double scale) {
    cv::Mat m = view(image);
    cv::putText(m, text, cv::Point(origin.x, origin.y), cv::FONT_HERSHEY_SIMPLEX, scale,
                cv::Scalar(color.r, color.g, color.b), 1, cv::LINE_8);
}

}  // namespace cogtrace
