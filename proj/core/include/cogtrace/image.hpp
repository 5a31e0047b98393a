#pragma once

#include <cogtrace/geometry.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cogtrace {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(Rgb, Rgb) = default;
};

/// 8-bit RGB raster, row-major, no padding.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int w, int h, Rgb fill = {});

    ScreenSize size() const noexcept { return {width, height}; }
    Rgb at(int x, int y) const;
    void set(int x, int y, Rgb c);

    friend bool operator==(const Image&, const Image&) = default;
};

/// Lossless PNG with fixed encoder settings, so equal images give equal bytes.
std::vector<unsigned char> encode_png(const Image& image);
/// Throws Error(parse_error) when the bytes are not a decodable image.
Image decode_image(const std::vector<unsigned char>& bytes);

Image load_image(const std::filesystem::path& path);
void save_png(const std::filesystem::path& path, const Image& image);

/// Dimensions of an image file; nullopt when the file is missing or not a
/// decodable image.
std::optional<ScreenSize> probe_image(const std::filesystem::path& path);

/// Area-averaging resample (downscale) / bilinear (upscale).
Image resize_image(const Image& image, ScreenSize target);

/// Minimal drawing used to synthesize fixture screens.
void fill_rect(Image& image, const Rect& rect, Rgb color);
void stroke_rect(Image& image, const Rect& rect, Rgb color, int thickness = 1);
void draw_label(Image& image, ScreenPoint origin, const std::string& text, Rgb color, double scale = 0.5);

}  // namespace cogtrace
