#include "attnmosaic/fixation.hpp"

#include "attnmosaic/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <tuple>

namespace attnmosaic {

namespace {

constexpr std::string_view kHeader = "x,y,t_ms,weight";

std::string line_error(std::size_t line, const std::string& what) {
    return "fixation log line " + std::to_string(line) + ": " + what;
}

double parse_field(std::string_view field, std::size_t line, std::string_view name) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && field.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc{} || ptr != last) {
        throw ValidationError(line_error(line, "field '" + std::string(name) + "' is not a number: '" +
                                                   std::string(field) + "'"));
    }
    if (!std::isfinite(value)) {
        throw ValidationError(line_error(line, "field '" + std::string(name) + "' is not finite"));
    }
    return value;
}

}  // namespace

Stimulus load_stimulus_sidecar(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": invalid JSON: " + e.what());
    }
    try {
        Stimulus s;
        s.id = j.value("stimulus_id", std::string{});
        s.width = j.at("width").get<int>();
        s.height = j.at("height").get<int>();
        if (s.width < 1 || s.height < 1) throw ValidationError(path.string() + ": dimensions must be >= 1");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::vector<Fixation> parse_fixation_csv(std::string_view text) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

    std::vector<Fixation> out;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const std::size_t eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
        ++line_no;
        if (line.ends_with('\r')) line.remove_suffix(1);

        if (!header_seen) {
            if (line != kHeader) {
                throw ValidationError(line_error(line_no, "header must be exactly '" + std::string(kHeader) +
                                                              "', got '" + std::string(line) + "'"));
            }
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;

        std::array<std::string_view, 4> fields;
        std::size_t n = 0;
        while (true) {
            const std::size_t comma = line.find(',');
            if (n == fields.size()) {
                throw ValidationError(line_error(line_no, "expected 4 fields"));
            }
            fields[n++] = line.substr(0, comma);
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (n != fields.size()) throw ValidationError(line_error(line_no, "expected 4 fields"));

        Fixation f;
        f.x = parse_field(fields[0], line_no, "x");
        f.y = parse_field(fields[1], line_no, "y");
        f.t_ms = parse_field(fields[2], line_no, "t_ms");
        f.weight = parse_field(fields[3], line_no, "weight");
        if (f.t_ms < 0.0) throw ValidationError(line_error(line_no, "t_ms must be >= 0"));
        if (f.weight < 0.0) throw ValidationError(line_error(line_no, "weight must be >= 0"));
        out.push_back(f);
    }
    if (!header_seen) throw ValidationError(line_error(1, "missing header"));
    return out;
}

FixationSet parse_fixation_log(const std::filesystem::path& path, Stimulus stimulus) {
    if (stimulus.width < 1 || stimulus.height < 1) {
        throw ValidationError("stimulus dimensions must be >= 1");
    }
    const auto bytes = read_file(path);
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    try {
        return FixationSet{std::move(stimulus), parse_fixation_csv(text)};
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string format_fixation_csv(std::span<const Fixation> fixations) {
    std::string out(kHeader);
    out.push_back('\n');
    char buf[160];
    for (const Fixation& f : fixations) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", f.x, f.y, f.t_ms, f.weight);
        out += buf;
    }
    return out;
}

double default_sigma(int width, int height) {
    return static_cast<double>(std::max(width, height)) / 30.0;
}

GrayMap fixations_to_map(const FixationSet& set, double sigma) {
    const int w = set.stimulus.width;
    const int h = set.stimulus.height;
    if (w < 1 || h < 1) throw ValidationError("stimulus dimensions must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("sigma must be > 0");
    const bool any_mass = std::any_of(set.fixations.begin(), set.fixations.end(),
                                      [](const Fixation& f) { return f.weight > 0.0; });
    if (!any_mass) throw ValidationError("fixation set is empty or has only zero weights");

    struct Point {
        double x, y, weight;
    };
    std::vector<Point> points;
    points.reserve(set.fixations.size());
    for (const Fixation& f : set.fixations) {
        if (!std::isfinite(f.x) || !std::isfinite(f.y) || !(f.weight >= 0.0) || !std::isfinite(f.weight)) {
            throw ValidationError("fixation has non-finite coordinates or invalid weight");
        }
        points.push_back({std::clamp(f.x, 0.0, static_cast<double>(w)),
                          std::clamp(f.y, 0.0, static_cast<double>(h)), f.weight});
    }

    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    std::vector<double> values(static_cast<std::size_t>(w) * h);
    for (int py = 0; py < h; ++py) {
        const double cy = py + 0.5;
        for (int px = 0; px < w; ++px) {
            const double cx = px + 0.5;
            double acc = 0.0;
            for (const Point& p : points) {
                const double dx = cx - p.x;
                const double dy = cy - p.y;
                acc += p.weight * std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
            }
            values[static_cast<std::size_t>(py) * w + px] = acc;
        }
    }
    return GrayMap(w, h, std::move(values));
}

FixationSet canonical_order(FixationSet set) {
    std::sort(set.fixations.begin(), set.fixations.end(), [](const Fixation& a, const Fixation& b) {
        return std::tie(a.x, a.y, a.t_ms, a.weight) < std::tie(b.x, b.y, b.t_ms, b.weight);
    });
    return set;
}

}  // namespace attnmosaic
