#include "attnmosaic/tessellation.hpp"

#include "attnmosaic/digest.hpp"
#include "attnmosaic/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace attnmosaic {

namespace {

constexpr std::uint32_t kNoLabel = std::numeric_limits<std::uint32_t>::max();

void check_assign_args(std::span<const Site> sites, int width, int height) {
    if (sites.empty()) throw ValidationError("voronoi assignment needs at least one site");
    if (width < 1 || height < 1) throw ValidationError("label grid dimensions must be >= 1");
    if (sites.size() >= kNoLabel) throw ValidationError("too many sites");
    for (const Site& s : sites) {
        if (!std::isfinite(s.x) || !std::isfinite(s.y)) throw ValidationError("site coordinates must be finite");
    }
}

/// Sites bucketed on a uniform grid, stored CSR-style. Within a bucket sites
/// keep ascending index order.
class BucketGrid {
public:
    BucketGrid(std::span<const Site> sites, int width, int height) {
        const double area = static_cast<double>(width) * height;
        cell_ = std::max(1.0, std::sqrt(area / static_cast<double>(sites.size())));
        nx_ = std::max(1, static_cast<int>(std::ceil(width / cell_)));
        ny_ = std::max(1, static_cast<int>(std::ceil(height / cell_)));

        std::vector<int> bucket_of(sites.size());
        start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
        for (std::size_t i = 0; i < sites.size(); ++i) {
            bucket_of[i] = bucket(column(sites[i].x), row(sites[i].y));
            ++start_[bucket_of[i] + 1];
        }
        for (std::size_t b = 1; b < start_.size(); ++b) start_[b] += start_[b - 1];
        std::vector<std::uint32_t> fill(start_.begin(), start_.end() - 1);
        members_.resize(sites.size());
        for (std::size_t i = 0; i < sites.size(); ++i) {
            members_[fill[bucket_of[i]]++] = static_cast<std::uint32_t>(i);
        }
    }

    int column(double x) const { return clamp_index(x / cell_, nx_); }
    int row(double y) const { return clamp_index(y / cell_, ny_); }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    double cell() const { return cell_; }

    std::span<const std::uint32_t> members(int bx, int by) const {
        const int b = bucket(bx, by);
        return std::span(members_).subspan(start_[b], start_[b + 1] - start_[b]);
    }

private:
    static int clamp_index(double v, int n) {
        if (!(v > 0.0)) return 0;
        if (v >= n) return n - 1;
        return std::min(static_cast<int>(v), n - 1);
    }
    int bucket(int bx, int by) const { return by * nx_ + bx; }

    double cell_ = 1.0;
    int nx_ = 1;
    int ny_ = 1;
    std::vector<std::uint32_t> start_;
    std::vector<std::uint32_t> members_;
};

struct Nearest {
    double d2 = std::numeric_limits<double>::infinity();
    std::uint32_t index = kNoLabel;

    void offer(double d2_candidate, std::uint32_t i) {
        if (d2_candidate < d2 || (d2_candidate == d2 && i < index)) {
            d2 = d2_candidate;
            index = i;
        }
    }
};

}  // namespace

std::string LabelGrid::digest() const {
    Sha256 h;
    h.update("labels");
    h.update_u64(static_cast<std::uint64_t>(width)).update_u64(static_cast<std::uint64_t>(height));
    for (std::uint32_t l : labels) h.update_u64(l);
    return h.hex();
}

std::string TilePalette::digest() const {
    Sha256 h;
    h.update("palette");
    h.update_u64(colors.size());
    for (std::size_t i = 0; i < colors.size(); ++i) {
        const std::uint8_t rgb[3] = {colors[i].r, colors[i].g, colors[i].b};
        h.update(rgb);
        h.update_u64(counts[i]);
    }
    return h.hex();
}

LabelGrid voronoi_assign_bruteforce(std::span<const Site> sites, int width, int height) {
    check_assign_args(sites, width, height);
    LabelGrid grid{width, height, std::vector<std::uint32_t>(static_cast<std::size_t>(width) * height)};
    for (int y = 0; y < height; ++y) {
        const double cy = y + 0.5;
        for (int x = 0; x < width; ++x) {
            const double cx = x + 0.5;
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t label = 0;
            for (std::size_t i = 0; i < sites.size(); ++i) {
                const double d2 = squared_distance(cx, cy, sites[i]);
                if (d2 < best) {
                    best = d2;
                    label = static_cast<std::uint32_t>(i);
                }
            }
            grid.labels[static_cast<std::size_t>(y) * width + x] = label;
        }
    }
    return grid;
}

LabelGrid voronoi_assign(std::span<const Site> sites, int width, int height) {
    check_assign_args(sites, width, height);
    const BucketGrid buckets(sites, width, height);
    const double cell = buckets.cell();
    LabelGrid grid{width, height, std::vector<std::uint32_t>(static_cast<std::size_t>(width) * height)};

    for (int y = 0; y < height; ++y) {
        const double cy = y + 0.5;
        const int by = buckets.row(cy);
        for (int x = 0; x < width; ++x) {
            const double cx = x + 0.5;
            const int bx = buckets.column(cx);
            Nearest best;
            auto scan = [&](int ix, int iy) {
                for (std::uint32_t i : buckets.members(ix, iy)) best.offer(squared_distance(cx, cy, sites[i]), i);
            };

            for (int r = 0;; ++r) {
                const int x0 = bx - r, x1 = bx + r, y0 = by - r, y1 = by + r;
                if (r == 0) {
                    scan(bx, by);
                } else {
                    for (int ix = std::max(x0, 0); ix <= std::min(x1, buckets.nx() - 1); ++ix) {
                        if (y0 >= 0) scan(ix, y0);
                        if (y1 < buckets.ny()) scan(ix, y1);
                    }
                    for (int iy = std::max(y0 + 1, 0); iy <= std::min(y1 - 1, buckets.ny() - 1); ++iy) {
                        if (x0 >= 0) scan(x0, iy);
                        if (x1 < buckets.nx()) scan(x1, iy);
                    }
                }

                // Unvisited sites lie outside the block of buckets [x0,x1]x[y0,y1];
                // their distance is at least the gap to the nearest open side.
                double gap = std::numeric_limits<double>::infinity();
                if (x0 > 0) gap = std::min(gap, cx - x0 * cell);
                if (x1 < buckets.nx() - 1) gap = std::min(gap, (x1 + 1) * cell - cx);
                if (y0 > 0) gap = std::min(gap, cy - y0 * cell);
                if (y1 < buckets.ny() - 1) gap = std::min(gap, (y1 + 1) * cell - cy);
                if (std::isinf(gap)) break;
                // Shrink the gap slightly so bucket-boundary rounding never prunes a tie.
                gap -= 1e-9 * (cell * (r + 1) + 1.0);
                if (gap > 0.0 && gap * gap > best.d2) break;
            }
            grid.labels[static_cast<std::size_t>(y) * width + x] = best.index;
        }
    }
    return grid;
}

TilePalette tile_colors(const Image& image, const LabelGrid& labels, std::size_t site_count, Rgb unassigned) {
    if (image.width() != labels.width || image.height() != labels.height) {
        throw ValidationError("image and label grid dimensions differ");
    }
    if (labels.labels.size() != image.size()) throw ValidationError("label grid is malformed");

    std::vector<std::array<std::uint64_t, 3>> sums(site_count, {0, 0, 0});
    TilePalette palette{std::vector<Rgb>(site_count, unassigned), std::vector<std::uint64_t>(site_count, 0)};
    const auto px = image.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const std::uint32_t l = labels.labels[i];
        if (l >= site_count) throw ValidationError("label " + std::to_string(l) + " exceeds site count");
        sums[l][0] += px[i].r;
        sums[l][1] += px[i].g;
        sums[l][2] += px[i].b;
        ++palette.counts[l];
    }
    auto mean = [](std::uint64_t sum, std::uint64_t n) {
        return static_cast<std::uint8_t>((2 * sum + n) / (2 * n));  // half away from zero
    };
    for (std::size_t s = 0; s < site_count; ++s) {
        const std::uint64_t n = palette.counts[s];
        if (n == 0) continue;
        palette.colors[s] = Rgb{mean(sums[s][0], n), mean(sums[s][1], n), mean(sums[s][2], n)};
    }
    return palette;
}

Image render_tiles(const LabelGrid& labels, const TilePalette& palette, const RenderOptions& opts) {
    const int w = labels.width;
    const int h = labels.height;
    if (opts.border_px < 0) throw ValidationError("border thickness must be >= 0");
    Image out(w, h);
    const auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const std::uint32_t l = labels.labels[i];
        if (l >= palette.colors.size()) throw ValidationError("label " + std::to_string(l) + " has no palette entry");
        px[i] = palette.colors[l];
    }
    if (opts.border_px == 0) return out;

    auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * w + x; };
    std::vector<std::uint8_t> mask(px.size(), 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint32_t l = labels.labels[idx(x, y)];
            const bool frontier = (x > 0 && labels.labels[idx(x - 1, y)] != l) ||
                                  (x + 1 < w && labels.labels[idx(x + 1, y)] != l) ||
                                  (y > 0 && labels.labels[idx(x, y - 1)] != l) ||
                                  (y + 1 < h && labels.labels[idx(x, y + 1)] != l);
            mask[idx(x, y)] = frontier ? 1 : 0;
        }
    }
    for (int round = 1; round < opts.border_px; ++round) {
        std::vector<std::uint8_t> grown = mask;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (mask[idx(x, y)]) continue;
                if ((x > 0 && mask[idx(x - 1, y)]) || (x + 1 < w && mask[idx(x + 1, y)]) ||
                    (y > 0 && mask[idx(x, y - 1)]) || (y + 1 < h && mask[idx(x, y + 1)])) {
                    grown[idx(x, y)] = 1;
                }
            }
        }
        mask.swap(grown);
    }
    for (std::size_t i = 0; i < px.size(); ++i) {
        if (mask[i]) px[i] = opts.border_color;
    }
    return out;
}

void save_label_grid(const LabelGrid& labels, const std::filesystem::path& path) {
    GrayRaster raster{labels.width, labels.height, 16, {}};
    raster.samples.reserve(labels.labels.size());
    for (std::uint32_t l : labels.labels) {
        if (l >= 65535) throw ValidationError("label grid PNG supports at most 65535 sites");
        raster.samples.push_back(static_cast<std::uint16_t>(l));
    }
    save_gray16_png(raster, path);
}

LabelGrid load_label_grid(const std::filesystem::path& path) {
    const GrayRaster raster = load_gray_png(path);
    return LabelGrid{raster.width, raster.height,
                     std::vector<std::uint32_t>(raster.samples.begin(), raster.samples.end())};
}

}  // namespace attnmosaic
