#pragma once

#include "attnmosaic/classifier.hpp"
#include "attnmosaic/compose.hpp"
#include "attnmosaic/density.hpp"
#include "attnmosaic/error.hpp"
#include "attnmosaic/fixation.hpp"
#include "attnmosaic/tessellation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace attnmosaic {

enum class MachineMethod { InputGrad, Sobel, File };
enum class HumanMethod { Fixations, File };

struct MachineSpec {
    MachineMethod method = MachineMethod::InputGrad;
    GradientMode mode = GradientMode::MaxLogit;
    std::uint64_t model_seed = 0;
    std::filesystem::path weights;  // optional TCLF file; overrides model_seed
    std::filesystem::path file;     // saliency PNG for MachineMethod::File
};

struct HumanSpec {
    HumanMethod method = HumanMethod::Fixations;
    std::filesystem::path fixations;
    std::optional<double> sigma;    // default_sigma() when empty
    std::filesystem::path file;     // saliency PNG for HumanMethod::File
};

struct PipelineConfig {
    std::filesystem::path input;
    std::filesystem::path output;
    MachineSpec machine;
    HumanSpec human;
    std::size_t sites = 3000;
    std::uint64_t seed = 0;
    double floor = 0.0;
    RenderOptions render;
    PanelLayout layout{{{PanelKind::Original, {}}, {PanelKind::Machine, {}}, {PanelKind::Human, {}}}, 8,
                       Rgb{255, 255, 255}};
};

nlohmann::json config_to_json(const PipelineConfig& config);
/// Fields absent from `j` keep their value from `base`. Unknown keys are rejected.
PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {});
void validate_config(const PipelineConfig& config);

std::string to_string(MachineMethod method);
std::string to_string(HumanMethod method);
std::string to_string(GradientMode mode);
MachineMethod parse_machine_method(std::string_view text);
HumanMethod parse_human_method(std::string_view text);
GradientMode parse_gradient_mode(std::string_view text);

/// Failure inside one pipeline stage. `cause_is_io` separates I/O failures
/// from validation failures of the underlying error.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message, bool cause_is_io)
        : Error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)), io_(cause_is_io) {}

    const std::string& stage() const noexcept { return stage_; }
    bool cause_is_io() const noexcept { return io_; }

private:
    std::string stage_;
    bool io_;
};

/// The stage boundary shared by `run` and the single-stage subcommands: a
/// saliency map reduced to the 16-bit samples its PNG export would hold.
GrayMap canonical_saliency(const GrayMap& map);

struct PanelArtifacts {
    GrayMap saliency;
    SiteSet sites;
    LabelGrid labels;
    TilePalette palette;
    Image image;
};

/// normalize -> sample -> assign -> color -> render for one saliency map.
PanelArtifacts tessellate_from_saliency(const Image& source, const GrayMap& saliency, std::size_t site_count,
                                        std::uint64_t seed, double floor, const RenderOptions& render);

/// assign -> color -> render for already-sampled sites.
Image tessellate_from_sites(const Image& source, const SiteSet& sites, const RenderOptions& render);

GrayMap machine_saliency(const Image& image, const MachineSpec& spec);
GrayMap human_saliency(const Image& image, const HumanSpec& spec, const std::string& stimulus_id);

struct PipelineResult {
    Image output;
    std::vector<std::uint8_t> png;
    nlohmann::json manifest;
};

/// Runs every stage in memory. Throws StageError.
PipelineResult execute_pipeline(const PipelineConfig& config);

/// execute_pipeline, then writes config.output and `<output>.manifest.json`.
/// Nothing is written when a stage fails.
PipelineResult run_pipeline(const PipelineConfig& config);

std::filesystem::path manifest_path(const std::filesystem::path& output);

}  // namespace attnmosaic
