#pragma once

#include "attnmosaic/image.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace attnmosaic {

struct Fixation {
    double x = 0.0;       // image coordinates, pixels
    double y = 0.0;
    double t_ms = 0.0;    // carried through, not used by the map builder
    double weight = 1.0;

    friend bool operator==(const Fixation&, const Fixation&) = default;
};

struct Stimulus {
    std::string id;
    int width = 0;
    int height = 0;
};

struct FixationSet {
    Stimulus stimulus;
    std::vector<Fixation> fixations;
};

/// Reads a stimulus sidecar: {"stimulus_id": ..., "width": ..., "height": ...}.
Stimulus load_stimulus_sidecar(const std::filesystem::path& path);

/// Parses fixation CSV text with header exactly `x,y,t_ms,weight`.
/// Errors name the 1-based line number.
std::vector<Fixation> parse_fixation_csv(std::string_view text);

/// Reads a fixation log from disk. Stimulus dimensions come from the caller.
FixationSet parse_fixation_log(const std::filesystem::path& path, Stimulus stimulus);

std::string format_fixation_csv(std::span<const Fixation> fixations);

/// Default kernel width: max(width, height) / 30 pixels.
double default_sigma(int width, int height);

/// Weighted Gaussian kernel density evaluated at pixel centers, unnormalized.
/// Fixation coordinates are clamped into [0, width] x [0, height]; summation
/// follows the order of `fixations.fixations`.
GrayMap fixations_to_map(const FixationSet& fixations, double sigma);

/// Sorts fixations lexicographically by (x, y, t_ms, weight).
FixationSet canonical_order(FixationSet fixations);

}  // namespace attnmosaic
