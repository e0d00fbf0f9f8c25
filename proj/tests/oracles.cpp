#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>

namespace attnmosaic::testing {

Image random_image(int width, int height, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> channel(0, 255);
    std::vector<Rgb> px(static_cast<std::size_t>(width) * height);
    for (Rgb& p : px) {
        p = Rgb{static_cast<std::uint8_t>(channel(gen)), static_cast<std::uint8_t>(channel(gen)),
                static_cast<std::uint8_t>(channel(gen))};
    }
    return Image(width, height, std::move(px));
}

ReferenceForward reference_forward(const ToyClassifier& m, const InputTensor& in) {
    const int w = in.width();
    const int h = in.height();
    const int pw = w + 2;
    // padded[c][y+1][x+1]
    std::vector<double> padded(static_cast<std::size_t>(3) * (h + 2) * pw, 0.0);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) padded[(c * (h + 2) + y + 1) * pw + x + 1] = in.at(c, x, y);

    ReferenceForward out;
    out.preactivations.assign(static_cast<std::size_t>(w) * h * 8, 0.0);
    std::array<double, 8> pooled{};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int f = 0; f < 8; ++f) {
                double z = m.conv_bias[f];
                for (int c = 0; c < 3; ++c)
                    for (int dy = 0; dy < 3; ++dy)
                        for (int dx = 0; dx < 3; ++dx)
                            z += m.conv_filters[f * 27 + c * 9 + dy * 3 + dx] *
                                 padded[(c * (h + 2) + y + dy) * pw + x + dx];
                out.preactivations[(static_cast<std::size_t>(y) * w + x) * 8 + f] = z;
                pooled[f] += z > 0.0 ? z : 0.0;
            }
        }
    }
    for (double& p : pooled) p /= static_cast<double>(w) * h;
    for (int k = 0; k < 10; ++k) {
        double logit = m.dense_bias[k];
        for (int f = 0; f < 8; ++f) logit += m.dense_weights[f * 10 + k] * pooled[f];
        out.logits[k] = logit;
    }
    return out;
}

double reference_score(const ToyClassifier& model, const InputTensor& input, GradientMode mode) {
    const Logits l = reference_forward(model, input).logits;
    if (mode == GradientMode::SumLogits) {
        double s = 0.0;
        for (double v : l) s += v;
        return s;
    }
    return *std::max_element(l.begin(), l.end());
}

double finite_difference(const ToyClassifier& model, const InputTensor& input, GradientMode mode, int c, int x,
                         int y, double h) {
    InputTensor plus = input;
    InputTensor minus = input;
    plus.at(c, x, y) += h;
    minus.at(c, x, y) -= h;
    return (reference_score(model, plus, mode) - reference_score(model, minus, mode)) / (2.0 * h);
}

bool stencil_is_smooth(const ToyClassifier& model, const InputTensor& input, GradientMode mode, int x, int y,
                       double h) {
    const int w = input.width();
    const int ht = input.height();
    const ReferenceForward ref = reference_forward(model, input);
    double max_filter_weight = 0.0;
    for (double v : model.conv_filters) max_filter_weight = std::max(max_filter_weight, std::abs(v));
    const double shift = 2.0 * max_filter_weight * h;  // bound on |dz| with margin
    for (int ny = std::max(0, y - 1); ny <= std::min(ht - 1, y + 1); ++ny)
        for (int nx = std::max(0, x - 1); nx <= std::min(w - 1, x + 1); ++nx)
            for (int f = 0; f < 8; ++f)
                if (std::abs(ref.preactivations[(static_cast<std::size_t>(ny) * w + nx) * 8 + f]) <= shift) return false;
    if (mode == GradientMode::MaxLogit) {
        std::array<double, 10> sorted = ref.logits;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        if (sorted[0] - sorted[1] <= 1e-6) return false;
    }
    return true;
}

double relative_error(double a, double b, double tiny) {
    const double scale = std::max(std::abs(a), std::abs(b));
    if (scale < tiny) return 0.0;
    return std::abs(a - b) / scale;
}

std::vector<Rgb> tile_means_oracle(const Image& image, const LabelGrid& labels, std::size_t site_count) {
    std::vector<std::array<double, 3>> sums(site_count, {0.0, 0.0, 0.0});
    std::vector<double> counts(site_count, 0.0);
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            const auto l = labels.at(x, y);
            const Rgb p = image.at(x, y);
            sums[l][0] += p.r;
            sums[l][1] += p.g;
            sums[l][2] += p.b;
            counts[l] += 1.0;
        }
    }
    std::vector<Rgb> out(site_count);
    for (std::size_t s = 0; s < site_count; ++s) {
        if (counts[s] == 0.0) continue;
        out[s] = Rgb{static_cast<std::uint8_t>(std::round(sums[s][0] / counts[s])),
                     static_cast<std::uint8_t>(std::round(sums[s][1] / counts[s])),
                     static_cast<std::uint8_t>(std::round(sums[s][2] / counts[s]))};
    }
    return out;
}

bool has_distance_tie(std::span<const Site> sites, int width, int height) {
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double best = std::numeric_limits<double>::infinity();
            double second = best;
            for (const Site& s : sites) {
                const double d = (x + 0.5 - s.x) * (x + 0.5 - s.x) + (y + 0.5 - s.y) * (y + 0.5 - s.y);
                if (d < best) {
                    second = best;
                    best = d;
                } else if (d < second) {
                    second = d;
                }
            }
            if (best == second) return true;
        }
    }
    return false;
}

std::vector<int> components_per_label(const LabelGrid& labels, std::size_t site_count, bool eight_connected) {
    const int w = labels.width;
    const int h = labels.height;
    std::vector<int> comps(site_count, 0);
    std::vector<char> seen(labels.labels.size(), 0);
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const std::size_t start = static_cast<std::size_t>(sy) * w + sx;
            if (seen[start]) continue;
            const auto l = labels.labels[start];
            ++comps[l];
            std::queue<std::pair<int, int>> q;
            q.push({sx, sy});
            seen[start] = 1;
            while (!q.empty()) {
                auto [x, y] = q.front();
                q.pop();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (!eight_connected && dx != 0 && dy != 0)) continue;
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t n = static_cast<std::size_t>(ny) * w + nx;
                        if (seen[n] || labels.labels[n] != l) continue;
                        seen[n] = 1;
                        q.push({nx, ny});
                    }
                }
            }
        }
    }
    return comps;
}

std::vector<Site> random_sites(std::size_t n, int width, int height, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> ux(0.0, width);
    std::uniform_real_distribution<double> uy(0.0, height);
    std::vector<Site> out(n);
    for (Site& s : out) s = Site{ux(gen), uy(gen)};
    return out;
}

}  // namespace attnmosaic::testing

#include <png.h>

namespace attnmosaic::testing {

std::vector<std::uint8_t> encode_raw_png(int w, int h, int depth, int color_type,
                                         const std::vector<std::uint8_t>& raster) {
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    png_set_write_fn(
        png, &out,
        [](png_structp p, png_bytep d, png_size_t n) {
            auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
            v->insert(v->end(), d, d + n);
        },
        nullptr);
    png_set_IHDR(png, info, w, h, depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = raster.size() / h;
    for (int y = 0; y < h; ++y) png_write_row(png, const_cast<png_bytep>(raster.data() + y * stride));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace attnmosaic::testing
