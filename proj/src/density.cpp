#include "attnmosaic/density.hpp"

#include "attnmosaic/digest.hpp"
#include "attnmosaic/error.hpp"
#include "attnmosaic/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace attnmosaic {

std::string Density::digest() const {
    Sha256 h;
    h.update("density");
    h.update_u64(static_cast<std::uint64_t>(width_)).update_u64(static_cast<std::uint64_t>(height_));
    for (double m : mass_) h.update_f64(m);
    return h.hex();
}

Density normalize_density(const GrayMap& map, double floor) {
    if (!(floor >= 0.0) || !std::isfinite(floor)) throw ValidationError("floor must be a finite value >= 0");
    const auto values = map.values();
    const double peak = map.max();
    if (peak <= 0.0) {
        const double u = 1.0 / static_cast<double>(values.size());
        return Density(map.width(), map.height(), std::vector<double>(values.size(), u));
    }
    const double lower = floor * peak;
    std::vector<double> mass(values.size());
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        mass[i] = std::max(values[i], lower);
        total += mass[i];
    }
    if (!std::isfinite(total)) throw ValidationError("map total overflows");
    for (double& m : mass) m /= total;
    return Density(map.width(), map.height(), std::move(mass));
}

std::string SiteSet::digest() const {
    Sha256 h;
    h.update("sites");
    h.update_u64(sites.size());
    for (const Site& s : sites) h.update_f64(s.x).update_f64(s.y);
    return h.hex();
}

SiteSet sample_sites(const Density& density, std::size_t count, std::uint64_t seed) {
    const auto mass = density.mass();
    std::vector<double> cdf(mass.size());
    double running = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        running += mass[i];
        cdf[i] = running;
        if (mass[i] > 0.0) last_positive = i;
    }

    SiteSet out{{}, seed, density.digest()};
    out.sites.reserve(count);
    SplitMix64 rng(seed);
    const auto width = static_cast<std::size_t>(density.width());
    for (std::size_t n = 0; n < count; ++n) {
        const double u = rng.uniform();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        // The running sum can end a few ulps below 1.
        const std::size_t pixel = it == cdf.end() ? last_positive : static_cast<std::size_t>(it - cdf.begin());
        const double dx = rng.uniform_open();
        const double dy = rng.uniform_open();
        out.sites.push_back({static_cast<double>(pixel % width) + dx, static_cast<double>(pixel / width) + dy});
    }
    return out;
}

std::string format_sites_csv(const SiteSet& sites) {
    std::string out = "i,x,y\n";
    char buf[96];
    for (std::size_t i = 0; i < sites.sites.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", i, sites.sites[i].x, sites.sites[i].y);
        out += buf;
    }
    return out;
}

SiteSet parse_sites_csv(std::string_view text) {
    SiteSet out;
    std::size_t line_no = 0;
    bool header_seen = false;
    auto fail = [&](const std::string& what) {
        throw ValidationError("sites CSV line " + std::to_string(line_no) + ": " + what);
    };
    while (!text.empty()) {
        const std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
        ++line_no;
        if (line.ends_with('\r')) line.remove_suffix(1);
        if (!header_seen) {
            if (line != "i,x,y") fail("header must be exactly 'i,x,y'");
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
            fail("expected 3 fields");
        }
        std::size_t index = 0;
        double x = 0.0;
        double y = 0.0;
        const char* b = line.data();
        auto r0 = std::from_chars(b, b + c1, index);
        auto r1 = std::from_chars(b + c1 + 1, b + c2, x);
        auto r2 = std::from_chars(b + c2 + 1, b + line.size(), y);
        if (r0.ec != std::errc{} || r0.ptr != b + c1 || r1.ec != std::errc{} || r1.ptr != b + c2 ||
            r2.ec != std::errc{} || r2.ptr != b + line.size()) {
            fail("malformed number");
        }
        if (index != out.sites.size()) fail("site indices must be consecutive from 0");
        if (!std::isfinite(x) || !std::isfinite(y)) fail("coordinates must be finite");
        out.sites.push_back({x, y});
    }
    if (!header_seen) {
        line_no = 1;
        fail("missing header");
    }
    return out;
}

void save_sites_csv(const SiteSet& sites, const std::filesystem::path& path) {
    const std::string text = format_sites_csv(sites);
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

SiteSet load_sites_csv(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    try {
        return parse_sites_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

}  // namespace attnmosaic
