#include "attnmosaic/digest.hpp"
#include "attnmosaic/pipeline.hpp"
#include "attnmosaic/saliency.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace attnmosaic {
namespace {

namespace fs = std::filesystem;

class PipelineTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("attnmosaic_pipeline_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        // Smooth gradient with a bright square so Sobel has structure.
        Image img(64, 64);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                img.at(x, y) = Rgb{static_cast<std::uint8_t>(4 * x), static_cast<std::uint8_t>(4 * y), 90};
        for (int y = 20; y < 40; ++y)
            for (int x = 24; x < 44; ++x) img.at(x, y) = Rgb{250, 250, 240};
        input_ = dir_ / "stimulus.png";
        save_image(img, input_);
        fixations_ = dir_ / "fix.csv";
        std::ofstream(fixations_) << "x,y,t_ms,weight\n40.5,12.5,0,300\n";
    }

    PipelineConfig base_config() const {
        PipelineConfig c;
        c.input = input_;
        c.output = dir_ / "out.png";
        c.machine.method = MachineMethod::Sobel;
        c.human.fixations = fixations_;
        c.sites = 200;
        c.seed = 7;
        return c;
    }

    fs::path dir_;
    fs::path input_;
    fs::path fixations_;
};

TEST_F(PipelineTest, RerunIsByteIdentical) {
    const PipelineConfig c = base_config();
    run_pipeline(c);
    const auto first = read_file(c.output);
    const auto first_manifest = nlohmann::json::parse(read_file(manifest_path(c.output)));
    fs::remove(c.output);
    run_pipeline(c);
    EXPECT_EQ(read_file(c.output), first);
    const auto second_manifest = nlohmann::json::parse(read_file(manifest_path(c.output)));
    EXPECT_EQ(first_manifest["digests"], second_manifest["digests"]);
    EXPECT_EQ(first_manifest["digests"]["output_png"], sha256_hex(first));
}

TEST_F(PipelineTest, TriptychWidth) {
    PipelineConfig c = base_config();
    c.layout.gutter_px = 5;
    const PipelineResult r = execute_pipeline(c);
    EXPECT_EQ(r.output.width(), 3 * 64 + 2 * 5);
    EXPECT_EQ(r.output.height(), 64);
}

TEST_F(PipelineTest, MissingFixationFileNamesHumanStage) {
    PipelineConfig c = base_config();
    c.human.fixations = dir_ / "missing.csv";
    try {
        run_pipeline(c);
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "human-saliency");
        EXPECT_TRUE(e.cause_is_io());
        EXPECT_NE(std::string(e.what()).find("human-saliency"), std::string::npos);
    }
    EXPECT_FALSE(fs::exists(c.output));
    EXPECT_FALSE(fs::exists(manifest_path(c.output)));
}

TEST_F(PipelineTest, InvalidFixationLogIsValidationFailure) {
    std::ofstream(fixations_) << "x,y,t_ms,weight\n1,1,0,-4\n";
    try {
        execute_pipeline(base_config());
        FAIL() << "expected StageError";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "human-saliency");
        EXPECT_FALSE(e.cause_is_io());
    }
}

TEST_F(PipelineTest, ManifestRecordsSeedsDigestsTimings) {
    PipelineConfig c = base_config();
    c.machine.method = MachineMethod::InputGrad;
    c.machine.model_seed = 3;
    const PipelineResult r = execute_pipeline(c);
    const auto& m = r.manifest;
    EXPECT_EQ(m["seeds"]["model_seed"], 3);
    EXPECT_EQ(m["seeds"]["sample_seed"], 7);
    EXPECT_EQ(m["digests"]["model"], init_classifier(3).digest());
    for (const char* panel : {"machine", "human"}) {
        for (const char* key : {"saliency", "density", "sites", "labels", "palette", "panel"}) {
            EXPECT_TRUE(m["digests"][panel].contains(key)) << panel << "." << key;
        }
    }
    EXPECT_TRUE(m["timings_ms"].contains("human-assign"));
    EXPECT_EQ(m["config"]["sites"], 200);
}

// Each exported intermediate, re-imported, yields the same panel as the in-memory run.
TEST_F(PipelineTest, StagesResumeFromExportedIntermediates) {
    const PipelineConfig c = base_config();
    const Image img = load_image(input_);
    const GrayMap saliency = canonical_saliency(sobel_saliency(img));
    const PanelArtifacts direct = tessellate_from_saliency(img, saliency, c.sites, c.seed, c.floor, c.render);

    const fs::path map_png = dir_ / "machine_map.png";
    save_graymap(saliency, map_png);
    const GrayMap reloaded = load_saliency_map(map_png, 64, 64);
    EXPECT_EQ(reloaded, saliency);
    const PanelArtifacts from_map = tessellate_from_saliency(img, reloaded, c.sites, c.seed, c.floor, c.render);
    EXPECT_EQ(from_map.image, direct.image);

    const fs::path sites_csv = dir_ / "sites.csv";
    save_sites_csv(direct.sites, sites_csv);
    EXPECT_EQ(tessellate_from_sites(img, load_sites_csv(sites_csv), c.render), direct.image);

    const fs::path labels_png = dir_ / "labels.png";
    save_label_grid(direct.labels, labels_png);
    const LabelGrid labels = load_label_grid(labels_png);
    const TilePalette palette = tile_colors(img, labels, direct.sites.sites.size());
    EXPECT_EQ(render_tiles(labels, palette, c.render), direct.image);

    // And the panel matches what run embeds in the composed output.
    PipelineConfig single = c;
    single.layout.panels = {PanelSource{PanelKind::Machine, {}}};
    EXPECT_EQ(execute_pipeline(single).output, direct.image);
}

TEST_F(PipelineTest, FilePanelsAndSaliencyFiles) {
    PipelineConfig c = base_config();
    const fs::path map_png = dir_ / "ext.png";
    save_graymap(sobel_saliency(load_image(input_)), map_png);
    c.machine.method = MachineMethod::File;
    c.machine.file = map_png;
    c.layout.panels = {PanelSource{PanelKind::Machine, {}}, PanelSource{PanelKind::File, input_}};
    c.layout.gutter_px = 0;
    const PipelineResult from_file = execute_pipeline(c);
    c.machine.method = MachineMethod::Sobel;
    EXPECT_EQ(execute_pipeline(c).output, from_file.output);
}

TEST_F(PipelineTest, ConfigJsonRoundTrip) {
    PipelineConfig c = base_config();
    c.human.sigma = 2.5;
    c.render.border_color = Rgb{1, 2, 3};
    c.layout.panels = {PanelSource{PanelKind::Human, {}}, PanelSource{PanelKind::File, "a.png"}};
    const auto j = config_to_json(c);
    EXPECT_EQ(config_to_json(config_from_json(j)), j);
    EXPECT_EQ(j["machine"]["method"], "sobel");
    EXPECT_EQ(j["render"]["border_color"], "010203");
}

TEST_F(PipelineTest, ConfigOverlayAndValidation) {
    const PipelineConfig c = config_from_json(nlohmann::json{{"sites", 12}, {"machine", {{"mode", "sum"}}}}, base_config());
    EXPECT_EQ(c.sites, 12u);
    EXPECT_EQ(c.machine.mode, GradientMode::SumLogits);
    EXPECT_EQ(c.seed, 7u);  // untouched
    EXPECT_THROW(config_from_json(nlohmann::json{{"bogus", 1}}), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"machine", {{"method", "magic"}}}}), ValidationError);
    EXPECT_THROW(config_from_json(nlohmann::json{{"seed", -1}}), ValidationError);

    PipelineConfig bad = base_config();
    bad.sites = 0;
    EXPECT_THROW(validate_config(bad), ValidationError);
    bad = base_config();
    bad.human.fixations.clear();
    EXPECT_THROW(validate_config(bad), ValidationError);
    bad.layout.panels = {PanelSource{PanelKind::Original, {}}};
    EXPECT_NO_THROW(validate_config(bad));
}

}  // namespace
}  // namespace attnmosaic
