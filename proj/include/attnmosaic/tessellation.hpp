#pragma once

#include "attnmosaic/density.hpp"
#include "attnmosaic/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace attnmosaic {

/// Per-pixel index of the nearest site.
struct LabelGrid {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> labels;

    std::uint32_t at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    std::string digest() const;

    friend bool operator==(const LabelGrid&, const LabelGrid&) = default;
};

struct TilePalette {
    std::vector<Rgb> colors;
    std::vector<std::uint64_t> counts;

    std::string digest() const;
};

struct RenderOptions {
    int border_px = 1;
    Rgb border_color{255, 255, 255};
    Rgb unassigned_color{0, 0, 0};
};

/// Squared distance from a pixel center to a site. Both assignment paths use
/// this exact expression so their tie decisions agree bit for bit.
inline double squared_distance(double cx, double cy, const Site& s) noexcept {
    const double dx = cx - s.x;
    const double dy = cy - s.y;
    return dx * dx + dy * dy;
}

/// Reference assignment: exhaustive argmin over sites, ties to the lowest index.
LabelGrid voronoi_assign_bruteforce(std::span<const Site> sites, int width, int height);

/// Same result as voronoi_assign_bruteforce, using a uniform bucket grid over the sites.
LabelGrid voronoi_assign(std::span<const Site> sites, int width, int height);

/// Per-tile channel means, rounded half away from zero.
TilePalette tile_colors(const Image& image, const LabelGrid& labels, std::size_t site_count,
                        Rgb unassigned = {0, 0, 0});

/// Tile fill followed by frontier painting. A frontier pixel has a 4-neighbour
/// with a different label; border_px > 1 dilates that mask (border_px - 1) times.
Image render_tiles(const LabelGrid& labels, const TilePalette& palette, const RenderOptions& opts);

/// Label grids exchange as 16-bit grayscale PNG (at most 65536 labels).
void save_label_grid(const LabelGrid& labels, const std::filesystem::path& path);
LabelGrid load_label_grid(const std::filesystem::path& path);

}  // namespace attnmosaic
