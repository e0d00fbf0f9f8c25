#include "attnmosaic/classifier.hpp"
#include "attnmosaic/compose.hpp"
#include "attnmosaic/density.hpp"
#include "attnmosaic/fixation.hpp"
#include "attnmosaic/pipeline.hpp"
#include "attnmosaic/saliency.hpp"
#include "attnmosaic/tessellation.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <optional>

namespace py = pybind11;
namespace am = attnmosaic;

static_assert(sizeof(am::Rgb) == 3, "pixel buffers are copied as packed RGB");

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using U32Array = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;

am::Image to_image(const U8Array& a) {
    if (a.ndim() != 3 || a.shape(2) != 3) throw am::ValidationError("image must have shape (height, width, 3)");
    const int h = static_cast<int>(a.shape(0));
    const int w = static_cast<int>(a.shape(1));
    std::vector<am::Rgb> px(static_cast<std::size_t>(w) * h);
    std::memcpy(px.data(), a.data(), px.size() * 3);
    return am::Image(w, h, std::move(px));
}

U8Array from_image(const am::Image& img) {
    U8Array out({img.height(), img.width(), 3});
    std::memcpy(out.mutable_data(), img.pixels().data(), img.size() * 3);
    return out;
}

am::GrayMap to_graymap(const F64Array& a) {
    if (a.ndim() != 2) throw am::ValidationError("map must be 2-D (height, width)");
    const auto* p = a.data();
    return am::GrayMap(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                       std::vector<double>(p, p + a.size()));
}

F64Array from_values(std::span<const double> v, int w, int h) {
    F64Array out({h, w});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

F64Array from_graymap(const am::GrayMap& m) { return from_values(m.values(), m.width(), m.height()); }

std::vector<am::Site> to_sites(const F64Array& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) throw am::ValidationError("sites must have shape (n, 2)");
    std::vector<am::Site> sites(static_cast<std::size_t>(a.shape(0)));
    for (std::size_t i = 0; i < sites.size(); ++i) sites[i] = {a.at(i, 0), a.at(i, 1)};
    return sites;
}

F64Array from_sites(const std::vector<am::Site>& sites) {
    F64Array out({static_cast<py::ssize_t>(sites.size()), py::ssize_t{2}});
    auto m = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < sites.size(); ++i) {
        m(i, 0) = sites[i].x;
        m(i, 1) = sites[i].y;
    }
    return out;
}

am::LabelGrid to_labels(const U32Array& a) {
    if (a.ndim() != 2) throw am::ValidationError("labels must be 2-D (height, width)");
    const auto* p = a.data();
    return am::LabelGrid{static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)),
                         std::vector<std::uint32_t>(p, p + a.size())};
}

U32Array from_labels(const am::LabelGrid& g) {
    U32Array out({g.height, g.width});
    std::copy(g.labels.begin(), g.labels.end(), out.mutable_data());
    return out;
}

am::Rgb to_rgb(const py::object& o) {
    if (py::isinstance<py::str>(o)) return am::parse_hex_color(o.cast<std::string>());
    const auto t = o.cast<std::array<int, 3>>();
    for (int c : t)
        if (c < 0 || c > 255) throw am::ValidationError("color channels must be in [0, 255]");
    return am::Rgb{static_cast<std::uint8_t>(t[0]), static_cast<std::uint8_t>(t[1]), static_cast<std::uint8_t>(t[2])};
}

am::FixationSet to_fixations(const F64Array& a, int width, int height) {
    if (a.ndim() != 2 || a.shape(1) != 4) throw am::ValidationError("fixations must have shape (n, 4): x, y, t_ms, weight");
    am::FixationSet set{{"array", width, height}, {}};
    for (py::ssize_t i = 0; i < a.shape(0); ++i) {
        set.fixations.push_back({a.at(i, 0), a.at(i, 1), a.at(i, 2), a.at(i, 3)});
    }
    return set;
}

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json to_json(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

}  // namespace

PYBIND11_MODULE(_attnmosaic, m) {
    m.doc() = "Saliency-driven Voronoi mosaics";

    static py::exception<am::Error> error(m, "Error");
    static py::exception<am::ValidationError> validation(m, "ValidationError", error.ptr());
    static py::exception<am::IoError> io(m, "IoError", error.ptr());
    static py::exception<am::StageError> stage(m, "StageError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const am::StageError& e) {
            py::object exc = py::handle(stage.ptr())(e.what());
            exc.attr("stage") = e.stage();
            exc.attr("cause_is_io") = e.cause_is_io();
            PyErr_SetObject(stage.ptr(), exc.ptr());
        } catch (const am::ValidationError& e) {
            py::set_error(validation, e.what());
        } catch (const am::IoError& e) {
            py::set_error(io, e.what());
        } catch (const am::Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.def("load_image", [](const std::filesystem::path& p) { return from_image(am::load_image(p)); }, py::arg("path"),
          "Read a PNG or PPM as a (height, width, 3) uint8 array.");
    m.def("save_image", [](const U8Array& a, const std::filesystem::path& p) { am::save_image(to_image(a), p); },
          py::arg("image"), py::arg("path"));

    m.def(
        "input_gradient_saliency",
        [](const U8Array& image, std::uint64_t model_seed, const std::string& mode) {
            const am::Image img = to_image(image);
            return from_graymap(
                am::input_gradient_saliency(am::init_classifier(model_seed), img, am::parse_gradient_mode(mode)));
        },
        py::arg("image"), py::arg("model_seed") = 0, py::arg("mode") = "max",
        "Per-pixel L2 norm of the toy classifier's input gradient; mode is 'max' or 'sum'.");
    m.def("logits", [](const U8Array& image, std::uint64_t model_seed) {
        return am::forward(am::init_classifier(model_seed), to_image(image));
    }, py::arg("image"), py::arg("model_seed") = 0);
    m.def("sobel_saliency", [](const U8Array& image) { return from_graymap(am::sobel_saliency(to_image(image))); },
          py::arg("image"));

    m.def(
        "fixations_to_map",
        [](const F64Array& fixations, int width, int height, std::optional<double> sigma) {
            const am::FixationSet set = to_fixations(fixations, width, height);
            return from_graymap(am::fixations_to_map(set, sigma.value_or(am::default_sigma(width, height))));
        },
        py::arg("fixations"), py::arg("width"), py::arg("height"), py::arg("sigma") = py::none(),
        "Weighted Gaussian fixation map; fixations is an (n, 4) array of x, y, t_ms, weight.");
    m.def(
        "parse_fixation_csv",
        [](const std::string& text) {
            const auto fix = am::parse_fixation_csv(text);
            F64Array out({static_cast<py::ssize_t>(fix.size()), py::ssize_t{4}});
            auto a = out.mutable_unchecked<2>();
            for (std::size_t i = 0; i < fix.size(); ++i) {
                a(i, 0) = fix[i].x;
                a(i, 1) = fix[i].y;
                a(i, 2) = fix[i].t_ms;
                a(i, 3) = fix[i].weight;
            }
            return out;
        },
        py::arg("text"));
    m.def("default_sigma", &am::default_sigma, py::arg("width"), py::arg("height"));

    m.def(
        "normalize_density",
        [](const F64Array& map, double floor) {
            const am::Density d = am::normalize_density(to_graymap(map), floor);
            return from_values(d.mass(), d.width(), d.height());
        },
        py::arg("map"), py::arg("floor") = 0.0);
    m.def(
        "sample_sites",
        [](const F64Array& map, std::size_t count, std::uint64_t seed, double floor) {
            return from_sites(am::sample_sites(am::normalize_density(to_graymap(map), floor), count, seed).sites);
        },
        py::arg("map"), py::arg("count"), py::arg("seed") = 0, py::arg("floor") = 0.0,
        "Normalize a saliency map and draw sites from it; returns an (n, 2) array of x, y.");

    m.def(
        "voronoi_assign",
        [](const F64Array& sites, int width, int height) {
            return from_labels(am::voronoi_assign(to_sites(sites), width, height));
        },
        py::arg("sites"), py::arg("width"), py::arg("height"));
    m.def(
        "voronoi_assign_bruteforce",
        [](const F64Array& sites, int width, int height) {
            return from_labels(am::voronoi_assign_bruteforce(to_sites(sites), width, height));
        },
        py::arg("sites"), py::arg("width"), py::arg("height"));
    m.def(
        "tile_colors",
        [](const U8Array& image, const U32Array& labels, std::size_t site_count) {
            const am::TilePalette p = am::tile_colors(to_image(image), to_labels(labels), site_count);
            U8Array colors({static_cast<py::ssize_t>(p.colors.size()), py::ssize_t{3}});
            std::memcpy(colors.mutable_data(), p.colors.data(), p.colors.size() * 3);
            py::array_t<std::uint64_t> counts(static_cast<py::ssize_t>(p.counts.size()));
            std::copy(p.counts.begin(), p.counts.end(), counts.mutable_data());
            return py::make_tuple(colors, counts);
        },
        py::arg("image"), py::arg("labels"), py::arg("site_count"),
        "Returns (colors (n, 3) uint8, counts (n,) uint64).");
    m.def(
        "render_tiles",
        [](const U32Array& labels, const U8Array& colors, int border, const py::object& border_color) {
            if (colors.ndim() != 2 || colors.shape(1) != 3) throw am::ValidationError("colors must have shape (n, 3)");
            am::TilePalette palette;
            palette.colors.resize(static_cast<std::size_t>(colors.shape(0)));
            std::memcpy(palette.colors.data(), colors.data(), palette.colors.size() * 3);
            palette.counts.assign(palette.colors.size(), 1);
            am::RenderOptions opts;
            opts.border_px = border;
            opts.border_color = to_rgb(border_color);
            return from_image(am::render_tiles(to_labels(labels), palette, opts));
        },
        py::arg("labels"), py::arg("colors"), py::arg("border") = 1, py::arg("border_color") = "FFFFFF");
    m.def(
        "tessellate",
        [](const U8Array& image, const F64Array& saliency, std::size_t sites, std::uint64_t seed, double floor,
           int border, const py::object& border_color) {
            const am::Image img = to_image(image);
            am::RenderOptions opts;
            opts.border_px = border;
            opts.border_color = to_rgb(border_color);
            return from_image(
                am::tessellate_from_saliency(img, to_graymap(saliency), sites, seed, floor, opts).image);
        },
        py::arg("image"), py::arg("saliency"), py::arg("sites") = 3000, py::arg("seed") = 0, py::arg("floor") = 0.0,
        py::arg("border") = 1, py::arg("border_color") = "FFFFFF",
        "Saliency map to rendered mosaic, exactly as one panel of the pipeline.");
    m.def(
        "compose_panels",
        [](const std::vector<U8Array>& panels, int gutter, const py::object& background) {
            std::vector<am::Image> images;
            am::PanelLayout layout;
            for (const auto& p : panels) {
                images.push_back(to_image(p));
                layout.panels.push_back({am::PanelKind::File, {}});
            }
            layout.gutter_px = gutter;
            layout.background = to_rgb(background);
            return from_image(am::compose_panels(images, layout));
        },
        py::arg("panels"), py::arg("gutter") = 8, py::arg("background") = "FFFFFF");

    m.def("default_config", [] { return to_py(am::config_to_json(am::PipelineConfig{})); });
    m.def(
        "run_pipeline",
        [](const py::object& config, bool write) {
            const am::PipelineConfig c = am::config_from_json(to_json(config));
            const am::PipelineResult r = write ? am::run_pipeline(c) : am::execute_pipeline(c);
            return py::make_tuple(from_image(r.output), to_py(r.manifest));
        },
        py::arg("config"), py::arg("write") = true,
        "Run the full pipeline from a config dict; returns (image, manifest). With write=False nothing is written.");
}
