#pragma once

#include "attnmosaic/image.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace attnmosaic {

enum class PanelKind { Original, Machine, Human, File };

struct PanelSource {
    PanelKind kind = PanelKind::Original;
    std::filesystem::path path;  // File panels only

    friend bool operator==(const PanelSource&, const PanelSource&) = default;
};

/// Parses "original", "machine", "human" or "file:<path>".
PanelSource parse_panel_source(std::string_view text);
std::string to_string(const PanelSource& panel);

struct PanelLayout {
    std::vector<PanelSource> panels;
    int gutter_px = 8;
    Rgb background{255, 255, 255};
};

/// Left-to-right concatenation with gutter_px background columns between panels.
/// Panels must share one height and match the layout's panel count.
Image compose_panels(std::span<const Image> images, const PanelLayout& layout);

}  // namespace attnmosaic
