#pragma once

#include "attnmosaic/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace attnmosaic {

/// Probability mass per pixel; non-negative and summing to 1.
class Density {
public:
    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::span<const double> mass() const noexcept { return mass_; }
    double at(int x, int y) const {
        return mass_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)];
    }
    std::string digest() const;

    friend Density normalize_density(const GrayMap& map, double floor);

private:
    Density(int width, int height, std::vector<double> mass)
        : width_(width), height_(height), mass_(std::move(mass)) {}

    int width_;
    int height_;
    std::vector<double> mass_;
};

/// Raises every value to at least floor * max(map), then divides by the total.
/// An all-zero map yields the uniform density.
Density normalize_density(const GrayMap& map, double floor = 0.0);

struct Site {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Site&, const Site&) = default;
};

/// Voronoi generators. The index of a site is its tile label.
struct SiteSet {
    std::vector<Site> sites;
    std::uint64_t seed = 0;
    std::string source_digest;   // Density::digest() of the sampling distribution

    std::string digest() const;
};

/// Inverse-CDF sampling with in-pixel jitter. Draw order per site on a single
/// splitmix64 stream: u in [0,1) selects the pixel (first index with cdf > u),
/// then dx and dy in (0,1) place the site inside that pixel.
SiteSet sample_sites(const Density& density, std::size_t count, std::uint64_t seed);

/// CSV with header `i,x,y`; coordinates printed with round-trip precision.
std::string format_sites_csv(const SiteSet& sites);
SiteSet parse_sites_csv(std::string_view text);
void save_sites_csv(const SiteSet& sites, const std::filesystem::path& path);
SiteSet load_sites_csv(const std::filesystem::path& path);

}  // namespace attnmosaic
