#pragma once

#include "attnmosaic/image.hpp"

#include <filesystem>

namespace attnmosaic {

/// Gradient magnitude of the luminance under 3x3 Sobel kernels, edge-replicate padding.
GrayMap sobel_saliency(const Image& image);

/// Bilinear resampling on pixel centers; source coordinates are clamped to the border.
GrayMap resample_bilinear(const GrayMap& map, int width, int height);

/// Loads an externally computed grayscale map (8- or 16-bit PNG) and resamples it
/// to width x height when the sizes differ.
GrayMap load_saliency_map(const std::filesystem::path& path, int width, int height);

}  // namespace attnmosaic
