#include "attnmosaic/image.hpp"
#include "attnmosaic/pipeline.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

namespace attnmosaic {
namespace {

namespace fs = std::filesystem;

struct Result {
    int code = -1;
    std::string output;  // stdout + stderr
};

Result run_cli(const std::string& args) {
    const std::string cmd = std::string(ATTNMOSAIC_CLI_PATH) + " " + args + " 2>&1";
    Result r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    std::array<char, 4096> buf{};
    while (fgets(buf.data(), buf.size(), pipe) != nullptr) r.output += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("attnmosaic_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        Image img(48, 40);
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 48; ++x)
                img.at(x, y) = Rgb{static_cast<std::uint8_t>(5 * x), static_cast<std::uint8_t>((x * y) % 256),
                                   static_cast<std::uint8_t>(6 * y)};
        save_image(img, p("in.png"));
        std::ofstream(p("fix.csv")) << "x,y,t_ms,weight\n10,10,0,500\n30.5,25,600,250\n";
    }

    std::string p(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

TEST_F(CliTest, PrintConfigShowsDefaults) {
    const Result r = run_cli("--print-config");
    ASSERT_EQ(r.code, 0) << r.output;
    const auto j = nlohmann::json::parse(r.output);
    EXPECT_EQ(j["sites"], 3000);
    EXPECT_EQ(j["render"]["border"], 1);
    EXPECT_EQ(j["render"]["border_color"], "FFFFFF");
    EXPECT_EQ(j["machine"]["method"], "input-grad");
}

TEST_F(CliTest, RunPrintConfigAppliesOverrides) {
    std::ofstream(p("cfg.json")) << R"({"sites": 77, "machine": {"method": "sobel"}})";
    const Result r = run_cli("run --config " + p("cfg.json") + " --seed 5 --border-color 00FF00 --print-config");
    ASSERT_EQ(r.code, 0) << r.output;
    const auto j = nlohmann::json::parse(r.output);
    EXPECT_EQ(j["sites"], 77);
    EXPECT_EQ(j["seed"], 5);
    EXPECT_EQ(j["machine"]["method"], "sobel");
    EXPECT_EQ(j["render"]["border_color"], "00FF00");
}

TEST_F(CliTest, StagedCommandsReproduceRun) {
    const std::string common = " --sites 150 --seed 9 --border 1";
    const Result run = run_cli("run --in " + p("in.png") + " --out " + p("run.png") + " --method input-grad --mode sum" +
                               " --model-seed 4 --fixations " + p("fix.csv") + " --sigma 3 --gutter 6" + common);
    ASSERT_EQ(run.code, 0) << run.output;
    EXPECT_TRUE(fs::exists(p("run.png.manifest.json")));

    ASSERT_EQ(run_cli("saliency --in " + p("in.png") + " --method input-grad --mode sum --model-seed 4 --out " +
                      p("m_map.png")).code, 0);
    ASSERT_EQ(run_cli("fixmap --in " + p("in.png") + " --fixations " + p("fix.csv") + " --sigma 3 --out " +
                      p("h_map.png")).code, 0);
    for (const char* panel : {"m", "h"}) {
        const std::string s = panel;
        Result r = run_cli("sample --in " + p(s + "_map.png") + " --out " + p(s + "_sites.csv") + " --sites 150 --seed 9");
        ASSERT_EQ(r.code, 0) << r.output;
        r = run_cli("tessellate --in " + p("in.png") + " --sites-csv " + p(s + "_sites.csv") + " --border 1 --out " +
                    p(s + "_panel.png") + " --labels-out " + p(s + "_labels.png"));
        ASSERT_EQ(r.code, 0) << r.output;
    }
    const Result c = run_cli("compose --panels " + p("in.png") + "," + p("m_panel.png") + "," + p("h_panel.png") +
                             " --gutter 6 --out " + p("staged.png"));
    ASSERT_EQ(c.code, 0) << c.output;
    EXPECT_EQ(read_file(p("staged.png")), read_file(p("run.png")));

    // tessellate straight from a saliency map gives the same panel as sample + tessellate.
    ASSERT_EQ(run_cli("tessellate --in " + p("in.png") + " --saliency-file " + p("h_map.png") +
                      " --sites 150 --seed 9 --out " + p("h_direct.png")).code, 0);
    EXPECT_EQ(read_file(p("h_direct.png")), read_file(p("h_panel.png")));
}

TEST_F(CliTest, FixmapWithSidecar) {
    std::ofstream(p("stim.json")) << R"({"stimulus_id": "s1", "width": 20, "height": 10})";
    const Result r = run_cli("fixmap --stimulus " + p("stim.json") + " --fixations " + p("fix.csv") + " --out " + p("f.png"));
    ASSERT_EQ(r.code, 0) << r.output;
    const GrayMap m = load_graymap(p("f.png"));
    EXPECT_EQ(m.width(), 20);
    EXPECT_EQ(m.height(), 10);
    EXPECT_EQ(m.max(), 65535.0);
}

TEST_F(CliTest, MissingFixationFileIsIoExit) {
    const Result r = run_cli("run --in " + p("in.png") + " --out " + p("o.png") + " --method sobel --fixations " +
                             p("nope.csv"));
    EXPECT_EQ(r.code, 2) << r.output;
    EXPECT_NE(r.output.find("human-saliency"), std::string::npos) << r.output;
    EXPECT_FALSE(fs::exists(p("o.png")));
}

TEST_F(CliTest, ValidationErrorsExitOne) {
    EXPECT_EQ(run_cli("run --in " + p("in.png") + " --out " + p("o.png") + " --sites 0 --fixations " + p("fix.csv")).code, 1);
    EXPECT_EQ(run_cli("run --in " + p("in.png") + " --method bogus").code, 1);
    EXPECT_EQ(run_cli("run --in " + p("in.png") + " --out " + p("o.png") + " --border-color XYZ").code, 1);
    EXPECT_EQ(run_cli("compose --panels " + p("in.png") + " --out " + p("o.png") + " --gutter -1").code, 1);
    EXPECT_EQ(run_cli("--no-such-flag").code, 1);
    EXPECT_EQ(run_cli("run --in " + p("in.png") + " --out " + p("o.png") + " --panels original,bogus").code, 1);
}

TEST_F(CliTest, UnreadableInputExitsTwo) {
    EXPECT_EQ(run_cli("saliency --in " + p("missing.png") + " --method sobel --out " + p("x.png")).code, 2);
    EXPECT_EQ(run_cli("saliency --in " + p("in.png") + " --method sobel --out /nonexistent/dir/x.png").code, 2);
}

TEST_F(CliTest, PanelsSubsetAndFilePanel) {
    const Result r = run_cli("run --in " + p("in.png") + " --out " + p("d.png") + " --method sobel --sites 50" +
                             " --panels original,machine,file:" + p("in.png") + " --gutter 0");
    ASSERT_EQ(r.code, 0) << r.output;
    const Image out = load_image(p("d.png"));
    EXPECT_EQ(out.width(), 3 * 48);
}

}  // namespace
}  // namespace attnmosaic
