#include "attnmosaic/compose.hpp"

#include "attnmosaic/error.hpp"

namespace attnmosaic {

PanelSource parse_panel_source(std::string_view text) {
    if (text == "original") return {PanelKind::Original, {}};
    if (text == "machine") return {PanelKind::Machine, {}};
    if (text == "human") return {PanelKind::Human, {}};
    if (text.starts_with("file:") && text.size() > 5) return {PanelKind::File, std::string(text.substr(5))};
    throw ValidationError("unknown panel '" + std::string(text) +
                          "' (expected original, machine, human or file:<path>)");
}

std::string to_string(const PanelSource& panel) {
    switch (panel.kind) {
        case PanelKind::Original: return "original";
        case PanelKind::Machine: return "machine";
        case PanelKind::Human: return "human";
        case PanelKind::File: return "file:" + panel.path.string();
    }
    return {};
}

Image compose_panels(std::span<const Image> images, const PanelLayout& layout) {
    if (images.empty()) throw ValidationError("compose needs at least one panel");
    if (images.size() != layout.panels.size()) {
        throw ValidationError("panel count " + std::to_string(images.size()) + " does not match layout (" +
                              std::to_string(layout.panels.size()) + ")");
    }
    if (layout.gutter_px < 0) throw ValidationError("gutter must be >= 0");

    const int height = images.front().height();
    long long width = static_cast<long long>(layout.gutter_px) * (static_cast<long long>(images.size()) - 1);
    for (const Image& img : images) {
        if (img.height() != height) {
            throw ValidationError("panel heights differ (" + std::to_string(img.height()) + " vs " +
                                  std::to_string(height) + ")");
        }
        width += img.width();
    }
    if (width > 1'000'000'000LL) throw ValidationError("composed image is too wide");

    Image out(static_cast<int>(width), height, layout.background);
    int offset = 0;
    for (const Image& img : images) {
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < img.width(); ++x) out.at(offset + x, y) = img.at(x, y);
        }
        offset += img.width() + layout.gutter_px;
    }
    return out;
}

}  // namespace attnmosaic
