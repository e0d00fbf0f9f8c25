#include "attnmosaic/saliency.hpp"

#include "attnmosaic/error.hpp"

#include <algorithm>
#include <cmath>

namespace attnmosaic {

GrayMap sobel_saliency(const Image& image) {
    const int w = image.width();
    const int h = image.height();
    if (w < 3 || h < 3) {
        throw ValidationError("image must be at least 3x3 for Sobel, got " + std::to_string(w) +
                              "x" + std::to_string(h));
    }
    const GrayMap lum = luminance(image);
    auto at = [&](int x, int y) { return lum.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };

    std::vector<double> out(lum.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                              (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            out[static_cast<std::size_t>(y) * w + x] = std::sqrt(gx * gx + gy * gy);
        }
    }
    return GrayMap(w, h, std::move(out));
}

GrayMap resample_bilinear(const GrayMap& map, int width, int height) {
    if (width < 1 || height < 1) throw ValidationError("resample target must be at least 1x1");
    if (width == map.width() && height == map.height()) return map;

    const double sx = static_cast<double>(map.width()) / width;
    const double sy = static_cast<double>(map.height()) / height;
    std::vector<double> out(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(map.height() - 1));
        const int y0 = static_cast<int>(std::floor(fy));
        const int y1 = std::min(y0 + 1, map.height() - 1);
        const double ty = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(map.width() - 1));
            const int x0 = static_cast<int>(std::floor(fx));
            const int x1 = std::min(x0 + 1, map.width() - 1);
            const double tx = fx - x0;
            const double top = (1.0 - tx) * map.at(x0, y0) + tx * map.at(x1, y0);
            const double bottom = (1.0 - tx) * map.at(x0, y1) + tx * map.at(x1, y1);
            // Convex combination of non-negatives; max() guards the sign of rounding residue.
            out[static_cast<std::size_t>(y) * width + x] = std::max(0.0, (1.0 - ty) * top + ty * bottom);
        }
    }
    return GrayMap(width, height, std::move(out));
}

GrayMap load_saliency_map(const std::filesystem::path& path, int width, int height) {
    return resample_bilinear(load_graymap(path), width, height);
}

}  // namespace attnmosaic
