#include "attnmosaic/compose.hpp"
#include "attnmosaic/error.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

namespace attnmosaic {
namespace {

PanelLayout layout_of(std::size_t n, int gutter) {
    return PanelLayout{std::vector<PanelSource>(n, PanelSource{PanelKind::Original, {}}), gutter, Rgb{1, 2, 3}};
}

TEST(ComposeTest, SinglePanelIsUnchanged) {
    const Image a = testing::random_image(4, 4, 1);
    const std::vector<Image> panels = {a};
    EXPECT_EQ(compose_panels(panels, layout_of(1, 2)), a);
}

TEST(ComposeTest, TwoPanelsWithGutter) {
    const std::vector<Image> panels = {testing::random_image(4, 4, 1), testing::random_image(4, 4, 2)};
    const Image out = compose_panels(panels, layout_of(2, 2));
    EXPECT_EQ(out.width(), 10);
    EXPECT_EQ(out.height(), 4);
    for (int y = 0; y < 4; ++y) {
        EXPECT_EQ(out.at(4, y), (Rgb{1, 2, 3}));
        EXPECT_EQ(out.at(5, y), (Rgb{1, 2, 3}));
        EXPECT_EQ(out.at(0, y), panels[0].at(0, y));
        EXPECT_EQ(out.at(6, y), panels[1].at(0, y));
        EXPECT_EQ(out.at(9, y), panels[1].at(3, y));
    }
}

TEST(ComposeTest, ThreePanelsNoGutterOffsets) {
    const std::vector<Image> panels = {testing::random_image(4, 4, 1), testing::random_image(4, 4, 2),
                                       testing::random_image(4, 4, 3)};
    const Image out = compose_panels(panels, layout_of(3, 0));
    EXPECT_EQ(out.width(), 12);
    for (int y = 0; y < 4; ++y) EXPECT_EQ(out.at(5, y), panels[1].at(1, y));
}

TEST(ComposeTest, DifferentWidthsAllowed) {
    const std::vector<Image> panels = {Image(3, 2, Rgb{9, 9, 9}), Image(5, 2, Rgb{8, 8, 8})};
    const Image out = compose_panels(panels, layout_of(2, 1));
    EXPECT_EQ(out.width(), 9);
    EXPECT_EQ(out.at(4, 1), (Rgb{8, 8, 8}));
}

TEST(ComposeTest, Errors) {
    EXPECT_THROW(compose_panels({}, layout_of(0, 0)), ValidationError);
    const std::vector<Image> mismatched = {Image(4, 4), Image(4, 5)};
    EXPECT_THROW(compose_panels(mismatched, layout_of(2, 0)), ValidationError);
    const std::vector<Image> one = {Image(4, 4)};
    EXPECT_THROW(compose_panels(one, layout_of(2, 0)), ValidationError);
}

TEST(ComposeTest, PanelSourceParsing) {
    EXPECT_EQ(parse_panel_source("human").kind, PanelKind::Human);
    const PanelSource f = parse_panel_source("file:art/x.png");
    EXPECT_EQ(f.kind, PanelKind::File);
    EXPECT_EQ(f.path, "art/x.png");
    EXPECT_EQ(to_string(f), "file:art/x.png");
    EXPECT_THROW(parse_panel_source("robot"), ValidationError);
    EXPECT_THROW(parse_panel_source("file:"), ValidationError);
}

}  // namespace
}  // namespace attnmosaic
