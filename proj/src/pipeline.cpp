#include "attnmosaic/pipeline.hpp"

#include "attnmosaic/digest.hpp"
#include "attnmosaic/saliency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

namespace attnmosaic {

namespace {

using json = nlohmann::json;

constexpr const char* kVersion = "1.0.0";

template <typename Fn>
auto guarded(const std::string& stage, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const IoError& e) {
        throw StageError(stage, e.what(), true);
    } catch (const std::exception& e) {
        throw StageError(stage, e.what(), false);
    }
}

/// Runs one stage, recording its wall time in milliseconds.
template <typename Fn>
auto timed(json& timings, const std::string& stage, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    auto result = guarded(stage, std::forward<Fn>(fn));
    const auto end = std::chrono::steady_clock::now();
    timings[stage] = std::chrono::duration<double, std::milli>(end - start).count();
    return result;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!keys.contains(key)) throw ValidationError("config: unknown key '" + where + key + "'");
    }
}

std::uint64_t read_u64(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ValidationError(std::string("config: '") + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string path_string(const std::filesystem::path& p) { return p.string(); }

json panel_digests(const PanelArtifacts& a, const Density& density) {
    return json{{"saliency", a.saliency.digest()}, {"density", density.digest()}, {"sites", a.sites.digest()},
                {"labels", a.labels.digest()},     {"palette", a.palette.digest()}, {"panel", a.image.digest()}};
}

}  // namespace

std::string to_string(MachineMethod method) {
    switch (method) {
        case MachineMethod::InputGrad: return "input-grad";
        case MachineMethod::Sobel: return "sobel";
        case MachineMethod::File: return "file";
    }
    return {};
}

std::string to_string(HumanMethod method) {
    return method == HumanMethod::Fixations ? "fixations" : "file";
}

std::string to_string(GradientMode mode) { return mode == GradientMode::MaxLogit ? "max" : "sum"; }

MachineMethod parse_machine_method(std::string_view text) {
    if (text == "input-grad") return MachineMethod::InputGrad;
    if (text == "sobel") return MachineMethod::Sobel;
    if (text == "file") return MachineMethod::File;
    throw ValidationError("unknown machine method '" + std::string(text) + "'");
}

HumanMethod parse_human_method(std::string_view text) {
    if (text == "fixations") return HumanMethod::Fixations;
    if (text == "file") return HumanMethod::File;
    throw ValidationError("unknown human method '" + std::string(text) + "'");
}

GradientMode parse_gradient_mode(std::string_view text) {
    if (text == "max") return GradientMode::MaxLogit;
    if (text == "sum") return GradientMode::SumLogits;
    throw ValidationError("unknown gradient mode '" + std::string(text) + "'");
}

json config_to_json(const PipelineConfig& c) {
    json panels = json::array();
    for (const PanelSource& p : c.layout.panels) panels.push_back(to_string(p));
    return json{
        {"input", path_string(c.input)},
        {"output", path_string(c.output)},
        {"machine",
         {{"method", to_string(c.machine.method)},
          {"mode", to_string(c.machine.mode)},
          {"model_seed", c.machine.model_seed},
          {"weights", path_string(c.machine.weights)},
          {"file", path_string(c.machine.file)}}},
        {"human",
         {{"method", to_string(c.human.method)},
          {"fixations", path_string(c.human.fixations)},
          {"sigma", c.human.sigma ? json(*c.human.sigma) : json(nullptr)},
          {"file", path_string(c.human.file)}}},
        {"sites", c.sites},
        {"seed", c.seed},
        {"floor", c.floor},
        {"render",
         {{"border", c.render.border_px},
          {"border_color", to_hex_color(c.render.border_color)},
          {"unassigned_color", to_hex_color(c.render.unassigned_color)}}},
        {"layout",
         {{"panels", panels}, {"gutter", c.layout.gutter_px}, {"background", to_hex_color(c.layout.background)}}},
    };
}

PipelineConfig config_from_json(const json& j, PipelineConfig c) {
    try {
        if (!j.is_object()) throw ValidationError("config: top level must be an object");
        reject_unknown_keys(j, {"input", "output", "machine", "human", "sites", "seed", "floor", "render", "layout"}, "");
        if (j.contains("input")) c.input = j.at("input").get<std::string>();
        if (j.contains("output")) c.output = j.at("output").get<std::string>();
        if (j.contains("machine")) {
            const json& m = j.at("machine");
            reject_unknown_keys(m, {"method", "mode", "model_seed", "weights", "file"}, "machine.");
            if (m.contains("method")) c.machine.method = parse_machine_method(m.at("method").get<std::string>());
            if (m.contains("mode")) c.machine.mode = parse_gradient_mode(m.at("mode").get<std::string>());
            if (m.contains("model_seed")) c.machine.model_seed = read_u64(m, "model_seed");
            if (m.contains("weights")) c.machine.weights = m.at("weights").get<std::string>();
            if (m.contains("file")) c.machine.file = m.at("file").get<std::string>();
        }
        if (j.contains("human")) {
            const json& h = j.at("human");
            reject_unknown_keys(h, {"method", "fixations", "sigma", "file"}, "human.");
            if (h.contains("method")) c.human.method = parse_human_method(h.at("method").get<std::string>());
            if (h.contains("fixations")) c.human.fixations = h.at("fixations").get<std::string>();
            if (h.contains("sigma")) {
                c.human.sigma = h.at("sigma").is_null() ? std::nullopt
                                                        : std::optional<double>(h.at("sigma").get<double>());
            }
            if (h.contains("file")) c.human.file = h.at("file").get<std::string>();
        }
        if (j.contains("sites")) c.sites = static_cast<std::size_t>(read_u64(j, "sites"));
        if (j.contains("seed")) c.seed = read_u64(j, "seed");
        if (j.contains("floor")) c.floor = j.at("floor").get<double>();
        if (j.contains("render")) {
            const json& r = j.at("render");
            reject_unknown_keys(r, {"border", "border_color", "unassigned_color"}, "render.");
            if (r.contains("border")) c.render.border_px = r.at("border").get<int>();
            if (r.contains("border_color")) c.render.border_color = parse_hex_color(r.at("border_color").get<std::string>());
            if (r.contains("unassigned_color")) {
                c.render.unassigned_color = parse_hex_color(r.at("unassigned_color").get<std::string>());
            }
        }
        if (j.contains("layout")) {
            const json& l = j.at("layout");
            reject_unknown_keys(l, {"panels", "gutter", "background"}, "layout.");
            if (l.contains("panels")) {
                c.layout.panels.clear();
                for (const json& p : l.at("panels")) c.layout.panels.push_back(parse_panel_source(p.get<std::string>()));
            }
            if (l.contains("gutter")) c.layout.gutter_px = l.at("gutter").get<int>();
            if (l.contains("background")) c.layout.background = parse_hex_color(l.at("background").get<std::string>());
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
    const auto bytes = read_file(path);
    json j;
    try {
        j = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": invalid JSON: " + e.what());
    }
    return config_from_json(j, std::move(base));
}

void validate_config(const PipelineConfig& c) {
    auto fail = [](const std::string& what) { throw ValidationError("config: " + what); };
    if (c.input.empty()) fail("input path is required");
    if (c.sites < 1) fail("sites must be >= 1");
    if (!(c.floor >= 0.0) || !std::isfinite(c.floor)) fail("floor must be >= 0");
    if (c.render.border_px < 0) fail("border must be >= 0");
    if (c.layout.gutter_px < 0) fail("gutter must be >= 0");
    if (c.layout.panels.empty()) fail("layout needs at least one panel");
    if (c.human.sigma && !(*c.human.sigma > 0.0)) fail("sigma must be > 0");
    const auto uses = [&](PanelKind kind) {
        return std::any_of(c.layout.panels.begin(), c.layout.panels.end(),
                           [kind](const PanelSource& p) { return p.kind == kind; });
    };
    if (uses(PanelKind::Machine) && c.machine.method == MachineMethod::File && c.machine.file.empty()) {
        fail("machine method 'file' needs a saliency file");
    }
    if (uses(PanelKind::Human)) {
        if (c.human.method == HumanMethod::Fixations && c.human.fixations.empty()) {
            fail("human panel needs a fixation log");
        }
        if (c.human.method == HumanMethod::File && c.human.file.empty()) fail("human method 'file' needs a saliency file");
    }
}

GrayMap canonical_saliency(const GrayMap& map) {
    const GrayRaster q = quantize16(map);
    return GrayMap(q.width, q.height, std::vector<double>(q.samples.begin(), q.samples.end()));
}

GrayMap machine_saliency(const Image& image, const MachineSpec& spec) {
    switch (spec.method) {
        case MachineMethod::InputGrad: {
            const ToyClassifier model = spec.weights.empty() ? init_classifier(spec.model_seed)
                                                             : load_classifier(spec.weights);
            return input_gradient_saliency(model, image, spec.mode);
        }
        case MachineMethod::Sobel: return sobel_saliency(image);
        case MachineMethod::File: return load_saliency_map(spec.file, image.width(), image.height());
    }
    throw ValidationError("unknown machine method");
}

GrayMap human_saliency(const Image& image, const HumanSpec& spec, const std::string& stimulus_id) {
    if (spec.method == HumanMethod::File) return load_saliency_map(spec.file, image.width(), image.height());
    const FixationSet set =
        parse_fixation_log(spec.fixations, Stimulus{stimulus_id, image.width(), image.height()});
    return fixations_to_map(set, spec.sigma.value_or(default_sigma(image.width(), image.height())));
}

PanelArtifacts tessellate_from_saliency(const Image& source, const GrayMap& saliency, std::size_t site_count,
                                        std::uint64_t seed, double floor, const RenderOptions& render) {
    if (saliency.width() != source.width() || saliency.height() != source.height()) {
        throw ValidationError("saliency map and image dimensions differ");
    }
    const Density density = normalize_density(saliency, floor);
    SiteSet sites = sample_sites(density, site_count, seed);
    LabelGrid labels = voronoi_assign(sites.sites, source.width(), source.height());
    TilePalette palette = tile_colors(source, labels, sites.sites.size(), render.unassigned_color);
    Image image = render_tiles(labels, palette, render);
    return PanelArtifacts{saliency, std::move(sites), std::move(labels), std::move(palette), std::move(image)};
}

Image tessellate_from_sites(const Image& source, const SiteSet& sites, const RenderOptions& render) {
    for (const Site& s : sites.sites) {
        if (s.x < 0.0 || s.y < 0.0 || s.x > source.width() || s.y > source.height()) {
            throw ValidationError("site lies outside the image rectangle");
        }
    }
    const LabelGrid labels = voronoi_assign(sites.sites, source.width(), source.height());
    const TilePalette palette = tile_colors(source, labels, sites.sites.size(), render.unassigned_color);
    return render_tiles(labels, palette, render);
}

PipelineResult execute_pipeline(const PipelineConfig& config) {
    guarded("config", [&] {
        validate_config(config);
        return 0;
    });

    json timings = json::object();
    json digests = json::object();
    const auto t_start = std::chrono::steady_clock::now();

    const Image input = timed(timings, "load-input", [&] { return load_image(config.input); });
    digests["input"] = input.digest();
    const std::string stimulus_id = config.input.stem().string();

    auto make_panel = [&](const std::string& name, auto&& saliency_fn) {
        const GrayMap saliency = timed(timings, name + "-saliency", [&] { return canonical_saliency(saliency_fn()); });
        const Density density =
            timed(timings, name + "-normalize", [&] { return normalize_density(saliency, config.floor); });
        SiteSet sites = timed(timings, name + "-sample", [&] { return sample_sites(density, config.sites, config.seed); });
        LabelGrid labels =
            timed(timings, name + "-assign", [&] { return voronoi_assign(sites.sites, input.width(), input.height()); });
        TilePalette palette = timed(timings, name + "-color", [&] {
            return tile_colors(input, labels, sites.sites.size(), config.render.unassigned_color);
        });
        Image image = timed(timings, name + "-render", [&] { return render_tiles(labels, palette, config.render); });
        PanelArtifacts a{saliency, std::move(sites), std::move(labels), std::move(palette), std::move(image)};
        digests[name] = panel_digests(a, density);
        return a;
    };

    const auto uses = [&](PanelKind kind) {
        return std::any_of(config.layout.panels.begin(), config.layout.panels.end(),
                           [kind](const PanelSource& p) { return p.kind == kind; });
    };

    std::optional<PanelArtifacts> machine;
    std::optional<PanelArtifacts> human;
    if (uses(PanelKind::Machine)) {
        if (config.machine.method == MachineMethod::InputGrad) {
            const ToyClassifier model = guarded("machine-saliency", [&] {
                return config.machine.weights.empty() ? init_classifier(config.machine.model_seed)
                                                      : load_classifier(config.machine.weights);
            });
            digests["model"] = model.digest();
            machine = make_panel("machine", [&] { return input_gradient_saliency(model, input, config.machine.mode); });
        } else {
            machine = make_panel("machine", [&] { return machine_saliency(input, config.machine); });
        }
    }
    if (uses(PanelKind::Human)) {
        human = make_panel("human", [&] { return human_saliency(input, config.human, stimulus_id); });
    }

    const std::vector<Image> panels = timed(timings, "load-panels", [&] {
        std::vector<Image> out;
        for (const PanelSource& p : config.layout.panels) {
            switch (p.kind) {
                case PanelKind::Original: out.push_back(input); break;
                case PanelKind::Machine: out.push_back(machine->image); break;
                case PanelKind::Human: out.push_back(human->image); break;
                case PanelKind::File: out.push_back(load_image(p.path)); break;
            }
        }
        return out;
    });

    Image output = timed(timings, "compose", [&] { return compose_panels(panels, config.layout); });
    std::vector<std::uint8_t> png = timed(timings, "encode", [&] { return encode_png(output); });
    digests["output"] = output.digest();
    digests["output_png"] = sha256_hex(png);

    timings["total"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();

    json manifest{
        {"tool", "attnmosaic"},
        {"version", kVersion},
        {"config", config_to_json(config)},
        {"seeds", {{"model_seed", config.machine.model_seed}, {"sample_seed", config.seed}}},
        {"output_size", {{"width", output.width()}, {"height", output.height()}}},
        {"digests", digests},
        {"timings_ms", timings},
    };
    return PipelineResult{std::move(output), std::move(png), std::move(manifest)};
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
    std::filesystem::path p = output;
    p += ".manifest.json";
    return p;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    if (config.output.empty()) throw StageError("config", "output path is required", false);
    PipelineResult result = execute_pipeline(config);
    const std::string manifest_text = result.manifest.dump(2) + "\n";
    guarded("save", [&] {
        write_file_atomic(config.output, result.png);
        write_file_atomic(manifest_path(config.output),
                          std::span(reinterpret_cast<const std::uint8_t*>(manifest_text.data()), manifest_text.size()));
        return 0;
    });
    return result;
}

}  // namespace attnmosaic
