#include "attnmosaic/error.hpp"
#include "attnmosaic/saliency.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <png.h>

#include <filesystem>

namespace attnmosaic {
namespace {

namespace fs = std::filesystem;

TEST(SobelTest, ConstantImageGivesZero) {
    const GrayMap s = sobel_saliency(Image(7, 5, Rgb{40, 80, 120}));
    for (double v : s.values()) EXPECT_EQ(v, 0.0);
}

TEST(SobelTest, OutputShapeMatchesInput) {
    const GrayMap s = sobel_saliency(testing::random_image(13, 6, 2));
    EXPECT_EQ(s.width(), 13);
    EXPECT_EQ(s.height(), 6);
}

TEST(SobelTest, VerticalStepEdge) {
    // Columns 0..3 black, 4..7 white. Hand-applying the x kernel to the step:
    // columns 3 and 4 see (1+2+1) - 0 = 4, all other columns 0; y kernel is 0.
    Image img(8, 5, Rgb{0, 0, 0});
    for (int y = 0; y < 5; ++y)
        for (int x = 4; x < 8; ++x) img.at(x, y) = Rgb{255, 255, 255};
    const GrayMap s = sobel_saliency(img);
    for (int y = 0; y < 5; ++y) {
        for (int x = 0; x < 8; ++x) {
            const double expected = (x == 3 || x == 4) ? 4.0 : 0.0;
            EXPECT_NEAR(s.at(x, y), expected, 1e-12) << x << "," << y;
        }
    }
}

TEST(SobelTest, TooSmallRejected) { EXPECT_THROW(sobel_saliency(Image(2, 9)), ValidationError); }

TEST(LoadSaliencyTest, ConstantEightBitMap) {
    const fs::path p = fs::temp_directory_path() / "attnmosaic_const8.png";
    const auto bytes = testing::encode_raw_png(4, 3, 8, PNG_COLOR_TYPE_GRAY, std::vector<std::uint8_t>(12, 128));
    write_file_atomic(p, bytes);
    const GrayMap m = load_saliency_map(p, 4, 3);
    for (double v : m.values()) EXPECT_EQ(v, 128.0);
}

TEST(LoadSaliencyTest, BilinearUpsampleIsMonotone) {
    const GrayMap src(2, 2, std::vector<double>{0, 100, 0, 100});
    const GrayMap up = resample_bilinear(src, 4, 2);
    ASSERT_EQ(up.width(), 4);
    for (int y = 0; y < 2; ++y) {
        for (int x = 1; x < 4; ++x) EXPECT_LE(up.at(x - 1, y), up.at(x, y));
        // Source coordinate (x+0.5)/2 - 0.5: {-0.25, 0.25, 0.75, 1.25} -> clamp -> {0, 25, 75, 100}.
        EXPECT_DOUBLE_EQ(up.at(0, y), 0.0);
        EXPECT_DOUBLE_EQ(up.at(1, y), 25.0);
        EXPECT_DOUBLE_EQ(up.at(2, y), 75.0);
        EXPECT_DOUBLE_EQ(up.at(3, y), 100.0);
    }
}

TEST(LoadSaliencyTest, RgbPngIsFormatError) {
    const fs::path p = fs::temp_directory_path() / "attnmosaic_rgb.png";
    save_image(testing::random_image(4, 4, 1), p);
    EXPECT_THROW(load_saliency_map(p, 4, 4), FormatError);
}

TEST(LoadSaliencyTest, MissingFileIsIoError) {
    EXPECT_THROW(load_saliency_map("/nonexistent/map.png", 4, 4), IoError);
}

}  // namespace
}  // namespace attnmosaic
