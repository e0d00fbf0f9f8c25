#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace attnmosaic {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

/// Parses "RRGGBB" (optionally prefixed with '#'). Throws ValidationError.
Rgb parse_hex_color(std::string_view text);
std::string to_hex_color(Rgb color);

/// Opaque 8-bit RGB raster, row-major, origin top-left.
///
/// Pixel (x, y) covers the unit square [x, x+1) x [y, y+1); its center is
/// (x + 0.5, y + 0.5). All modules share this convention.
class Image {
public:
    Image(int width, int height, Rgb fill = {});
    Image(int width, int height, std::vector<Rgb> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }
    Rgb& at(int x, int y) { return pixels_[index(x, y)]; }

    std::span<const Rgb> pixels() const noexcept { return pixels_; }
    std::span<Rgb> pixels() noexcept { return pixels_; }

    /// SHA-256 over dimensions and pixel bytes.
    std::string digest() const;

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<Rgb> pixels_;
};

/// Non-negative, finite scalar field with the same layout as Image.
class GrayMap {
public:
    GrayMap(int width, int height, double fill = 0.0);
    GrayMap(int width, int height, std::vector<double> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }

    double at(int x, int y) const {
        return values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(x)];
    }

    std::span<const double> values() const noexcept { return values_; }
    double max() const noexcept;

    std::string digest() const;

    friend bool operator==(const GrayMap&, const GrayMap&) = default;

private:
    int width_;
    int height_;
    std::vector<double> values_;
};

/// Decodes PNG (8/16-bit, any color type) or binary PPM (P6).
/// 16-bit channels keep their high byte; alpha is composited over white.
Image load_image(const std::filesystem::path& path);
Image decode_image(std::span<const std::uint8_t> bytes);

/// Writes an 8-bit RGB PNG.
void save_image(const Image& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const Image& image);

/// Rec. 709 luma on channels scaled to [0, 1].
GrayMap luminance(const Image& image);

/// Raw single-channel raster as stored in a grayscale PNG.
struct GrayRaster {
    int width = 0;
    int height = 0;
    int bit_depth = 8;                 // 8 or 16 after decoding
    std::vector<std::uint16_t> samples;
};

/// Reads a grayscale PNG (gray or gray+alpha; alpha ignored; depths < 8 expanded).
/// Throws FormatError for color images.
GrayRaster load_gray_png(const std::filesystem::path& path);
GrayRaster decode_gray_png(std::span<const std::uint8_t> bytes);

void save_gray16_png(const GrayRaster& raster, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_gray16_png(const GrayRaster& raster);

/// Linear map so that max -> 65535, rounded to nearest. All-zero maps give all-zero samples.
GrayRaster quantize16(const GrayMap& map);

/// Writes `map` as 16-bit grayscale PNG using quantize16.
void save_graymap(const GrayMap& map, const std::filesystem::path& path);

/// Sample values of a grayscale PNG as a GrayMap (no rescaling).
GrayMap load_graymap(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes via a sibling temporary file and rename, so readers never see partial content.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace attnmosaic
