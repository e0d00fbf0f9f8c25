// attnmosaic: saliency-driven Voronoi mosaics from the command line.
//
// Subcommands read and write the same files the `run` pipeline uses internally,
// so stages can be chained from a shell and produce the same bytes as `run`.

#include "attnmosaic/classifier.hpp"
#include "attnmosaic/compose.hpp"
#include "attnmosaic/density.hpp"
#include "attnmosaic/fixation.hpp"
#include "attnmosaic/pipeline.hpp"
#include "attnmosaic/saliency.hpp"
#include "attnmosaic/tessellation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

namespace am = attnmosaic;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

/// Flags shared by `run` and the single-stage subcommands. Unset flags leave
/// the config untouched.
struct Overrides {
    std::optional<std::string> in, out, config, method, mode, saliency_file, fixations, border_color, panels;
    std::optional<std::uint64_t> model_seed, seed;
    std::optional<double> sigma, floor;
    std::optional<std::size_t> sites;
    std::optional<int> border, gutter;
    bool print_config = false;

    void apply(am::PipelineConfig& c) const {
        if (in) c.input = *in;
        if (out) c.output = *out;
        if (method) {
            c.machine.method = am::parse_machine_method(*method);
        }
        if (mode) c.machine.mode = am::parse_gradient_mode(*mode);
        if (model_seed) c.machine.model_seed = *model_seed;
        if (saliency_file) {
            c.machine.file = *saliency_file;
            if (!method) c.machine.method = am::MachineMethod::File;
        }
        if (fixations) {
            c.human.fixations = *fixations;
            c.human.method = am::HumanMethod::Fixations;
        }
        if (sigma) c.human.sigma = *sigma;
        if (sites) c.sites = *sites;
        if (seed) c.seed = *seed;
        if (floor) c.floor = *floor;
        if (border) c.render.border_px = *border;
        if (border_color) c.render.border_color = am::parse_hex_color(*border_color);
        if (gutter) c.layout.gutter_px = *gutter;
        if (panels) {
            c.layout.panels.clear();
            for (const auto& p : split_csv(*panels)) c.layout.panels.push_back(am::parse_panel_source(p));
        }
    }
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--in", o.in, "Input file");
    cmd->add_option("--out", o.out, "Output file");
    cmd->add_option("--config", o.config, "JSON pipeline config");
}

void add_machine(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--method", o.method, "Machine saliency: input-grad | sobel | file")
        ->check(CLI::IsMember({"input-grad", "sobel", "file"}));
    cmd->add_option("--mode", o.mode, "Gradient score: max | sum")->check(CLI::IsMember({"max", "sum"}));
    cmd->add_option("--model-seed", o.model_seed, "Toy classifier seed");
    cmd->add_option("--saliency-file", o.saliency_file, "Externally computed saliency PNG");
}

void add_human(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--fixations", o.fixations, "Fixation CSV (x,y,t_ms,weight)");
    cmd->add_option("--sigma", o.sigma, "Gaussian kernel width in pixels");
}

void add_sampling(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--sites", o.sites, "Number of Voronoi sites");
    cmd->add_option("--seed", o.seed, "Sampling seed");
    cmd->add_option("--floor", o.floor, "Density floor as a fraction of the map maximum");
}

void add_render(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--border", o.border, "Frontier thickness in pixels");
    cmd->add_option("--border-color", o.border_color, "Frontier color RRGGBB");
}

am::PipelineConfig resolve(const Overrides& o) {
    am::PipelineConfig config;
    if (o.config) config = am::load_config(*o.config, config);
    o.apply(config);
    return config;
}

void print_config(const am::PipelineConfig& config) { std::cout << am::config_to_json(config).dump(2) << "\n"; }

std::filesystem::path require(const std::optional<std::string>& value, const char* flag) {
    if (!value || value->empty()) throw am::ValidationError(std::string(flag) + " is required");
    return *value;
}

int cmd_saliency(const Overrides& o) {
    const am::PipelineConfig c = resolve(o);
    const am::Image image = am::load_image(require(o.in, "--in"));
    const am::GrayMap map = am::canonical_saliency(am::machine_saliency(image, c.machine));
    am::save_graymap(map, require(o.out, "--out"));
    return 0;
}

int cmd_fixmap(const Overrides& o, const std::optional<std::string>& stimulus_file) {
    const am::PipelineConfig c = resolve(o);
    am::Stimulus stimulus;
    if (stimulus_file) {
        stimulus = am::load_stimulus_sidecar(*stimulus_file);
    } else {
        const std::filesystem::path in = require(o.in, "--in or --stimulus");
        const am::Image image = am::load_image(in);
        stimulus = am::Stimulus{in.stem().string(), image.width(), image.height()};
    }
    const am::FixationSet set = am::parse_fixation_log(require(o.fixations, "--fixations"), stimulus);
    const double sigma = c.human.sigma.value_or(am::default_sigma(stimulus.width, stimulus.height));
    am::save_graymap(am::canonical_saliency(am::fixations_to_map(set, sigma)), require(o.out, "--out"));
    return 0;
}

int cmd_sample(const Overrides& o) {
    const am::PipelineConfig c = resolve(o);
    const am::GrayMap map = am::load_graymap(require(o.in, "--in"));
    const am::Density density = am::normalize_density(map, c.floor);
    am::save_sites_csv(am::sample_sites(density, c.sites, c.seed), require(o.out, "--out"));
    return 0;
}

int cmd_tessellate(const Overrides& o, const std::optional<std::string>& sites_csv,
                   const std::optional<std::string>& labels_out) {
    const am::PipelineConfig c = resolve(o);
    const am::Image image = am::load_image(require(o.in, "--in"));
    am::SiteSet sites;
    if (sites_csv) {
        sites = am::load_sites_csv(*sites_csv);
    } else {
        const am::GrayMap map = am::load_saliency_map(require(o.saliency_file, "--saliency-file or --sites-csv"),
                                                      image.width(), image.height());
        sites = am::sample_sites(am::normalize_density(map, c.floor), c.sites, c.seed);
    }
    if (sites.sites.empty()) throw am::ValidationError("no sites to tessellate");
    const am::LabelGrid labels = am::voronoi_assign(sites.sites, image.width(), image.height());
    if (labels_out) am::save_label_grid(labels, *labels_out);
    am::save_image(am::tessellate_from_sites(image, sites, c.render), require(o.out, "--out"));
    return 0;
}

int cmd_compose(const Overrides& o, const std::optional<std::string>& background) {
    // --panels here lists image files, not panel sources.
    Overrides rest = o;
    rest.panels.reset();
    const am::PipelineConfig c = resolve(rest);
    const std::vector<std::string> files = split_csv(require(o.panels, "--panels").string());
    std::vector<am::Image> images;
    am::PanelLayout layout = c.layout;
    layout.panels.clear();
    for (const auto& f : files) {
        images.push_back(am::load_image(f));
        layout.panels.push_back({am::PanelKind::File, f});
    }
    if (background) layout.background = am::parse_hex_color(*background);
    am::save_image(am::compose_panels(images, layout), require(o.out, "--out"));
    return 0;
}

int cmd_run(const Overrides& o) {
    const am::PipelineConfig c = resolve(o);
    if (o.print_config) {
        print_config(c);
        return 0;
    }
    const am::PipelineResult result = am::run_pipeline(c);
    std::cerr << "wrote " << c.output.string() << " (" << result.output.width() << "x" << result.output.height()
              << ") and " << am::manifest_path(c.output).string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Saliency-driven Voronoi mosaics: machine vs human attention"};
    app.require_subcommand(0, 1);
    bool top_print_config = false;
    app.add_flag("--print-config", top_print_config, "Print the default pipeline config and exit");

    Overrides sal, fix, smp, tes, cmp, run;
    std::optional<std::string> stimulus_file, sites_csv, labels_out, background;

    auto* c_sal = app.add_subcommand("saliency", "Compute a machine saliency map (16-bit PNG)");
    add_common(c_sal, sal);
    add_machine(c_sal, sal);

    auto* c_fix = app.add_subcommand("fixmap", "Build a human saliency map from a fixation CSV");
    add_common(c_fix, fix);
    add_human(c_fix, fix);
    c_fix->add_option("--stimulus", stimulus_file, "Sidecar JSON with stimulus_id, width, height");

    auto* c_smp = app.add_subcommand("sample", "Sample Voronoi sites from a saliency PNG");
    add_common(c_smp, smp);
    add_sampling(c_smp, smp);

    auto* c_tes = app.add_subcommand("tessellate", "Render a Voronoi mosaic from sites or a saliency map");
    add_common(c_tes, tes);
    add_sampling(c_tes, tes);
    add_render(c_tes, tes);
    c_tes->add_option("--saliency-file", tes.saliency_file, "Saliency PNG to sample from");
    c_tes->add_option("--sites-csv", sites_csv, "Sites CSV (i,x,y) from `sample`");
    c_tes->add_option("--labels-out", labels_out, "Also write the label grid as 16-bit PNG");

    auto* c_cmp = app.add_subcommand("compose", "Concatenate panels into a diptych or triptych");
    add_common(c_cmp, cmp);
    c_cmp->add_option("--panels", cmp.panels, "Comma-separated image files, left to right");
    c_cmp->add_option("--gutter", cmp.gutter, "Gutter width in pixels");
    c_cmp->add_option("--background", background, "Gutter color RRGGBB");

    auto* c_run = app.add_subcommand("run", "Run the whole pipeline and write output plus manifest");
    add_common(c_run, run);
    add_machine(c_run, run);
    add_human(c_run, run);
    add_sampling(c_run, run);
    add_render(c_run, run);
    c_run->add_option("--gutter", run.gutter, "Gutter width in pixels");
    c_run->add_option("--panels", run.panels, "Panels: original,machine,human,file:<path>");
    c_run->add_flag("--print-config", run.print_config, "Print the effective config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*c_sal) return cmd_saliency(sal);
        if (*c_fix) return cmd_fixmap(fix, stimulus_file);
        if (*c_smp) return cmd_sample(smp);
        if (*c_tes) return cmd_tessellate(tes, sites_csv, labels_out);
        if (*c_cmp) return cmd_compose(cmp, background);
        if (*c_run) return cmd_run(run);
        if (top_print_config) {
            print_config(am::PipelineConfig{});
            return 0;
        }
        std::cerr << app.help();
        return kExitValidation;
    } catch (const am::StageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.cause_is_io() ? kExitIo : kExitValidation;
    } catch (const am::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const am::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
