#include "attnmosaic/image.hpp"

#include "attnmosaic/digest.hpp"
#include "attnmosaic/error.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace attnmosaic {

namespace {

constexpr std::size_t kPngSignatureSize = 8;

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw ValidationError("image dimensions must be at least 1x1, got " +
                              std::to_string(width) + "x" + std::to_string(height));
    }
}

std::size_t area(int width, int height) {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

// ---------------------------------------------------------------------------
// libpng plumbing. Errors longjmp back into the decode/encode functions; every
// object with a destructor in those frames is constructed before setjmp.

struct MemoryReader {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t offset;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
    if (reader->size - reader->offset < count) {
        png_error(png, "truncated PNG stream");
    }
    std::memcpy(out, reader->data + reader->offset, count);
    reader->offset += count;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + count);
}

void png_flush_noop(png_structp) {}

struct PngErrorSink {
    char message[256] = {};
};

void png_on_error(png_structp png, png_const_charp msg) {
    auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
    std::snprintf(sink->message, sizeof(sink->message), "%s", msg);
    png_longjmp(png, 1);
}

void png_on_warning(png_structp, png_const_charp) {}

class PngReadHandle {
public:
    explicit PngReadHandle(PngErrorSink* sink) {
        png_ = png_create_read_struct(PNG_LIBPNG_VER_STRING, sink, png_on_error, png_on_warning);
        if (png_ == nullptr) throw std::bad_alloc();
        info_ = png_create_info_struct(png_);
        if (info_ == nullptr) {
            png_destroy_read_struct(&png_, nullptr, nullptr);
            throw std::bad_alloc();
        }
    }
    ~PngReadHandle() { png_destroy_read_struct(&png_, &info_, nullptr); }
    PngReadHandle(const PngReadHandle&) = delete;
    PngReadHandle& operator=(const PngReadHandle&) = delete;

    png_structp png() const { return png_; }
    png_infop info() const { return info_; }

private:
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

class PngWriteHandle {
public:
    explicit PngWriteHandle(PngErrorSink* sink) {
        png_ = png_create_write_struct(PNG_LIBPNG_VER_STRING, sink, png_on_error, png_on_warning);
        if (png_ == nullptr) throw std::bad_alloc();
        info_ = png_create_info_struct(png_);
        if (info_ == nullptr) {
            png_destroy_write_struct(&png_, nullptr);
            throw std::bad_alloc();
        }
    }
    ~PngWriteHandle() { png_destroy_write_struct(&png_, &info_); }
    PngWriteHandle(const PngWriteHandle&) = delete;
    PngWriteHandle& operator=(const PngWriteHandle&) = delete;

    png_structp png() const { return png_; }
    png_infop info() const { return info_; }

private:
    png_structp png_ = nullptr;
    png_infop info_ = nullptr;
};

bool is_png(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= kPngSignatureSize && png_sig_cmp(bytes.data(), 0, kPngSignatureSize) == 0;
}

// Decodes to 8-bit RGBA.
Image decode_png_rgb(std::span<const std::uint8_t> bytes) {
    PngErrorSink sink;
    PngReadHandle handle(&sink);
    MemoryReader reader{bytes.data(), bytes.size(), 0};
    std::vector<std::uint8_t> rgba;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;

    png_structp png = handle.png();
    png_infop info = handle.info();
    if (setjmp(png_jmpbuf(png))) {
        throw FormatError(std::string("PNG decode failed: ") + sink.message);
    }
    png_set_read_fn(png, &reader, png_read_from_memory);
    png_read_info(png, info);

    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int color_type = png_get_color_type(png, info);
    const int bit_depth = png_get_bit_depth(png, info);

    png_set_expand(png);  // palette -> RGB, low-bit gray -> 8 bit, tRNS -> alpha
    if (bit_depth == 16) png_set_strip_16(png);  // keeps the high byte
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_gray_to_rgb(png);
    }
    png_set_add_alpha(png, 0xFF, PNG_FILLER_AFTER);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    if (width == 0 || height == 0 ||
        width > static_cast<png_uint_32>(std::numeric_limits<int>::max()) ||
        height > static_cast<png_uint_32>(std::numeric_limits<int>::max())) {
        throw FormatError("PNG has unsupported dimensions");
    }
    const std::size_t stride = static_cast<std::size_t>(width) * 4;
    if (png_get_rowbytes(png, info) != stride) {
        throw FormatError("PNG decode produced unexpected row layout");
    }
    rgba.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = rgba.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);

    std::vector<Rgb> pixels(area(static_cast<int>(width), static_cast<int>(height)));
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const std::uint8_t* p = &rgba[4 * i];
        const unsigned a = p[3];
        auto over_white = [a](unsigned c) {
            // c*a/255 + (255-a), rounded
            return static_cast<std::uint8_t>((c * a + 255u * (255u - a) + 127u) / 255u);
        };
        pixels[i] = a == 255u ? Rgb{p[0], p[1], p[2]}
                              : Rgb{over_white(p[0]), over_white(p[1]), over_white(p[2])};
    }
    return Image(static_cast<int>(width), static_cast<int>(height), std::move(pixels));
}

// Binary PPM, maxval <= 65535.
Image decode_ppm(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 2;  // past "P6"
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_uint = [&](const char* what) {
        skip_space();
        const std::size_t start = pos;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) ++pos;
        if (pos == start) throw FormatError(std::string("PPM header: missing ") + what);
        long value = 0;
        auto [ptr, ec] = std::from_chars(reinterpret_cast<const char*>(&bytes[start]),
                                         reinterpret_cast<const char*>(&bytes[pos]), value);
        (void)ptr;
        if (ec != std::errc{} || value > std::numeric_limits<int>::max()) {
            throw FormatError(std::string("PPM header: bad ") + what);
        }
        return static_cast<int>(value);
    };
    const int width = read_uint("width");
    const int height = read_uint("height");
    const int maxval = read_uint("maxval");
    if (width < 1 || height < 1) throw FormatError("PPM has zero dimension");
    if (maxval < 1 || maxval > 65535) throw FormatError("PPM maxval out of range");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("PPM header truncated");
    ++pos;  // single whitespace before raster

    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    const std::size_t needed = area(width, height) * 3 * bytes_per_sample;
    if (bytes.size() - pos < needed) throw FormatError("PPM raster truncated");

    std::vector<Rgb> pixels(area(width, height));
    const std::uint8_t* src = bytes.data() + pos;
    auto sample = [&](std::size_t k) -> std::uint8_t {
        if (bytes_per_sample == 1) {
            return static_cast<std::uint8_t>(maxval == 255 ? src[k] : (src[k] * 255 + maxval / 2) / maxval);
        }
        // Keep the high byte of 16-bit samples, matching PNG handling.
        return src[2 * k];
    };
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        pixels[i] = Rgb{sample(3 * i), sample(3 * i + 1), sample(3 * i + 2)};
    }
    return Image(width, height, std::move(pixels));
}

std::vector<std::uint8_t> encode_png_rows(int width, int height, int bit_depth, int color_type,
                                          std::span<const std::uint8_t> raster) {
    PngErrorSink sink;
    PngWriteHandle handle(&sink);
    std::vector<std::uint8_t> out;
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    const std::size_t stride = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
    for (int y = 0; y < height; ++y) {
        rows[y] = const_cast<png_bytep>(raster.data() + y * stride);
    }

    png_structp png = handle.png();
    png_infop info = handle.info();
    if (setjmp(png_jmpbuf(png))) {
        throw IoError(std::string("PNG encode failed: ") + sink.message);
    }
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    return out;
}

std::string read_error_text(const std::filesystem::path& path) {
    return "cannot read '" + path.string() + "'";
}

}  // namespace

// ---------------------------------------------------------------------------

Rgb parse_hex_color(std::string_view text) {
    if (!text.empty() && text.front() == '#') text.remove_prefix(1);
    if (text.size() != 6) {
        throw ValidationError("color must be RRGGBB, got '" + std::string(text) + "'");
    }
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ValidationError("color must be RRGGBB, got '" + std::string(text) + "'");
    }
    return Rgb{static_cast<std::uint8_t>(value >> 16), static_cast<std::uint8_t>(value >> 8),
               static_cast<std::uint8_t>(value)};
}

std::string to_hex_color(Rgb color) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02X%02X%02X", color.r, color.g, color.b);
    return buf;
}

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
    check_dims(width, height);
    pixels_.assign(area(width, height), fill);
}

Image::Image(int width, int height, std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    check_dims(width, height);
    if (pixels_.size() != area(width, height)) {
        throw ValidationError("pixel count does not match image dimensions");
    }
}

std::string Image::digest() const {
    Sha256 h;
    h.update("image");
    h.update_u64(static_cast<std::uint64_t>(width_)).update_u64(static_cast<std::uint64_t>(height_));
    static_assert(sizeof(Rgb) == 3);
    h.update(std::span(reinterpret_cast<const std::uint8_t*>(pixels_.data()), pixels_.size() * 3));
    return h.hex();
}

GrayMap::GrayMap(int width, int height, double fill) : GrayMap(width, height, std::vector<double>(area(std::max(width, 0), std::max(height, 0)), fill)) {}

GrayMap::GrayMap(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
    check_dims(width, height);
    if (values_.size() != area(width, height)) {
        throw ValidationError("value count does not match map dimensions");
    }
    for (double v : values_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ValidationError("map values must be finite and non-negative");
        }
    }
}

double GrayMap::max() const noexcept {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

std::string GrayMap::digest() const {
    Sha256 h;
    h.update("graymap");
    h.update_u64(static_cast<std::uint64_t>(width_)).update_u64(static_cast<std::uint64_t>(height_));
    for (double v : values_) h.update_f64(v);
    return h.hex();
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(read_error_text(path));
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError(read_error_text(path));
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + path.string() + "'");
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw IoError("cannot write '" + path.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot write '" + path.string() + "'");
    }
}

Image decode_image(std::span<const std::uint8_t> bytes) {
    if (is_png(bytes)) return decode_png_rgb(bytes);
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
    throw FormatError("unsupported image format (expected PNG or binary PPM)");
}

Image load_image(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_image(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
    const auto px = image.pixels();
    return encode_png_rows(image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB,
                           std::span(reinterpret_cast<const std::uint8_t*>(px.data()), px.size() * 3));
}

void save_image(const Image& image, const std::filesystem::path& path) {
    write_file_atomic(path, encode_png(image));
}

GrayMap luminance(const Image& image) {
    std::vector<double> values(image.size());
    const auto px = image.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double v = (0.2126 * px[i].r + 0.7152 * px[i].g + 0.0722 * px[i].b) / 255.0;
        values[i] = std::clamp(v, 0.0, 1.0);
    }
    return GrayMap(image.width(), image.height(), std::move(values));
}

GrayRaster decode_gray_png(std::span<const std::uint8_t> bytes) {
    if (!is_png(bytes)) throw FormatError("not a PNG stream");
    PngErrorSink sink;
    PngReadHandle handle(&sink);
    MemoryReader reader{bytes.data(), bytes.size(), 0};
    GrayRaster raster;
    std::vector<std::uint8_t> buffer;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int color_type = 0;
    int bit_depth = 0;

    png_structp png = handle.png();
    png_infop info = handle.info();
    if (setjmp(png_jmpbuf(png))) {
        throw FormatError(std::string("PNG decode failed: ") + sink.message);
    }
    png_set_read_fn(png, &reader, png_read_from_memory);
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    color_type = png_get_color_type(png, info);
    bit_depth = png_get_bit_depth(png, info);
    if (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
        throw FormatError("expected a grayscale PNG");
    }
    if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // host little-endian u16
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    if (width == 0 || height == 0 ||
        width > static_cast<png_uint_32>(std::numeric_limits<int>::max()) ||
        height > static_cast<png_uint_32>(std::numeric_limits<int>::max())) {
        throw FormatError("PNG has unsupported dimensions");
    }
    const int depth = bit_depth == 16 ? 16 : 8;
    const std::size_t stride = static_cast<std::size_t>(width) * (depth / 8);
    if (png_get_rowbytes(png, info) != stride) {
        throw FormatError("PNG decode produced unexpected row layout");
    }
    buffer.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);

    raster.width = static_cast<int>(width);
    raster.height = static_cast<int>(height);
    raster.bit_depth = depth;
    raster.samples.resize(area(raster.width, raster.height));
    for (std::size_t i = 0; i < raster.samples.size(); ++i) {
        raster.samples[i] = depth == 16
                                ? static_cast<std::uint16_t>(buffer[2 * i] | (buffer[2 * i + 1] << 8))
                                : buffer[i];
    }
    return raster;
}

GrayRaster load_gray_png(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return decode_gray_png(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_gray16_png(const GrayRaster& raster) {
    check_dims(raster.width, raster.height);
    if (raster.samples.size() != area(raster.width, raster.height)) {
        throw ValidationError("raster sample count does not match dimensions");
    }
    std::vector<std::uint8_t> be(raster.samples.size() * 2);
    for (std::size_t i = 0; i < raster.samples.size(); ++i) {
        be[2 * i] = static_cast<std::uint8_t>(raster.samples[i] >> 8);
        be[2 * i + 1] = static_cast<std::uint8_t>(raster.samples[i] & 0xFF);
    }
    return encode_png_rows(raster.width, raster.height, 16, PNG_COLOR_TYPE_GRAY, be);
}

void save_gray16_png(const GrayRaster& raster, const std::filesystem::path& path) {
    write_file_atomic(path, encode_gray16_png(raster));
}

GrayRaster quantize16(const GrayMap& map) {
    GrayRaster raster{map.width(), map.height(), 16, std::vector<std::uint16_t>(map.size(), 0)};
    const double peak = map.max();
    if (peak <= 0.0) return raster;
    const auto values = map.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double scaled = std::round(values[i] / peak * 65535.0);
        raster.samples[i] = static_cast<std::uint16_t>(std::clamp(scaled, 0.0, 65535.0));
    }
    return raster;
}

void save_graymap(const GrayMap& map, const std::filesystem::path& path) {
    save_gray16_png(quantize16(map), path);
}

GrayMap load_graymap(const std::filesystem::path& path) {
    const GrayRaster raster = load_gray_png(path);
    std::vector<double> values(raster.samples.begin(), raster.samples.end());
    return GrayMap(raster.width, raster.height, std::move(values));
}

}  // namespace attnmosaic
