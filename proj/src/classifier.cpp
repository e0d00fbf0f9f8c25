#include "attnmosaic/classifier.hpp"

#include "attnmosaic/digest.hpp"
#include "attnmosaic/error.hpp"
#include "attnmosaic/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace attnmosaic {

namespace {

using Model = ToyClassifier;

constexpr char kMagic[4] = {'T', 'C', 'L', 'F'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::size_t kWeightCount =
    Model::kFilterWeights + Model::kFilters + Model::kDenseWeights + Model::kClasses;

void require_kernel_fit(int width, int height) {
    if (width < Model::kKernel || height < Model::kKernel) {
        throw ValidationError("image must be at least 3x3 for the classifier, got " +
                              std::to_string(width) + "x" + std::to_string(height));
    }
}

template <typename Fn>
void for_each_weight(Model& m, Fn&& fn) {
    for (double& w : m.conv_filters) fn(w);
    for (double& w : m.conv_bias) fn(w);
    for (double& w : m.dense_weights) fn(w);
    for (double& w : m.dense_bias) fn(w);
}

template <typename Fn>
void for_each_weight(const Model& m, Fn&& fn) {
    for (double w : m.conv_filters) fn(w);
    for (double w : m.conv_bias) fn(w);
    for (double w : m.dense_weights) fn(w);
    for (double w : m.dense_bias) fn(w);
}

/// Pre-activations of the convolution, laid out [filter][y][x].
std::vector<double> convolve(const Model& m, const InputTensor& in) {
    const int w = in.width();
    const int h = in.height();
    std::vector<double> z(static_cast<std::size_t>(Model::kFilters) * w * h);
    for (int f = 0; f < Model::kFilters; ++f) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double acc = m.conv_bias[f];
                for (int c = 0; c < Model::kInChannels; ++c) {
                    for (int ky = 0; ky < Model::kKernel; ++ky) {
                        const int sy = y + ky - 1;
                        if (sy < 0 || sy >= h) continue;
                        for (int kx = 0; kx < Model::kKernel; ++kx) {
                            const int sx = x + kx - 1;
                            if (sx < 0 || sx >= w) continue;
                            acc += m.filter(f, c, ky, kx) * in.at(c, sx, sy);
                        }
                    }
                }
                z[(static_cast<std::size_t>(f) * h + y) * w + x] = acc;
            }
        }
    }
    return z;
}

Logits logits_from_preactivations(const Model& m, std::span<const double> z, int width, int height) {
    const std::size_t plane = static_cast<std::size_t>(width) * height;
    std::array<double, Model::kFilters> pooled{};
    for (int f = 0; f < Model::kFilters; ++f) {
        double sum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) sum += std::max(z[f * plane + i], 0.0);
        pooled[f] = sum / static_cast<double>(plane);
    }
    Logits logits{};
    for (int k = 0; k < Model::kClasses; ++k) {
        double acc = m.dense_bias[k];
        for (int f = 0; f < Model::kFilters; ++f) acc += pooled[f] * m.dense(f, k);
        logits[k] = acc;
    }
    return logits;
}

/// Backpropagates an upstream gradient on the logits down to the input.
InputTensor backward(const Model& m, const InputTensor& in, std::span<const double> z,
                     const Logits& upstream) {
    const int w = in.width();
    const int h = in.height();
    const std::size_t plane = static_cast<std::size_t>(w) * h;

    // Dense layer. Products are summed in sorted order so the result does not
    // depend on how the classes are numbered.
    std::array<double, Model::kFilters> d_pooled{};
    for (int f = 0; f < Model::kFilters; ++f) {
        std::array<double, Model::kClasses> terms{};
        for (int k = 0; k < Model::kClasses; ++k) terms[k] = upstream[k] * m.dense(f, k);
        std::sort(terms.begin(), terms.end());
        double acc = 0.0;
        for (double t : terms) acc += t;
        d_pooled[f] = acc;
    }

    // Pool + ReLU.
    std::vector<double> dz(z.size(), 0.0);
    for (int f = 0; f < Model::kFilters; ++f) {
        const double g = d_pooled[f] / static_cast<double>(plane);
        for (std::size_t i = 0; i < plane; ++i) {
            dz[f * plane + i] = z[f * plane + i] > 0.0 ? g : 0.0;
        }
    }

    // Convolution: input (sx, sy) feeds output (sx - kx + 1, sy - ky + 1).
    InputTensor grad(w, h);
    for (int c = 0; c < Model::kInChannels; ++c) {
        for (int sy = 0; sy < h; ++sy) {
            for (int sx = 0; sx < w; ++sx) {
                double acc = 0.0;
                for (int f = 0; f < Model::kFilters; ++f) {
                    for (int ky = 0; ky < Model::kKernel; ++ky) {
                        const int y = sy - ky + 1;
                        if (y < 0 || y >= h) continue;
                        for (int kx = 0; kx < Model::kKernel; ++kx) {
                            const int x = sx - kx + 1;
                            if (x < 0 || x >= w) continue;
                            acc += m.filter(f, c, ky, kx) * dz[(static_cast<std::size_t>(f) * h + y) * w + x];
                        }
                    }
                }
                grad.at(c, sx, sy) = acc;
            }
        }
    }
    return grad;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> bytes, std::size_t pos, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes[pos + i]) << (8 * i);
    return v;
}

}  // namespace

std::string ToyClassifier::digest() const {
    Sha256 h;
    h.update("toy-classifier");
    for_each_weight(*this, [&](double w) { h.update_f64(w); });
    return h.hex();
}

InputTensor::InputTensor(int width, int height) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw ValidationError("tensor dimensions must be positive");
    data_.assign(static_cast<std::size_t>(ToyClassifier::kInChannels) * width * height, 0.0);
}

InputTensor::InputTensor(const Image& image) : InputTensor(image.width(), image.height()) {
    for (int y = 0; y < height_; ++y) {
        for (int x = 0; x < width_; ++x) {
            const Rgb p = image.at(x, y);
            at(0, x, y) = p.r / 255.0;
            at(1, x, y) = p.g / 255.0;
            at(2, x, y) = p.b / 255.0;
        }
    }
}

ToyClassifier init_classifier(std::uint64_t seed) {
    ToyClassifier model;
    SplitMix64 rng(seed);
    for_each_weight(model, [&](double& w) { w = -0.1 + 0.2 * rng.uniform(); });
    model.seed = seed;
    return model;
}

Logits forward(const ToyClassifier& model, const InputTensor& input) {
    require_kernel_fit(input.width(), input.height());
    const auto z = convolve(model, input);
    return logits_from_preactivations(model, z, input.width(), input.height());
}

Logits forward(const ToyClassifier& model, const Image& image) {
    require_kernel_fit(image.width(), image.height());
    return forward(model, InputTensor(image));
}

int argmax_logit(const Logits& logits) {
    int best = 0;
    for (int k = 1; k < ToyClassifier::kClasses; ++k) {
        if (logits[k] > logits[best]) best = k;
    }
    return best;
}

InputTensor input_gradient(const ToyClassifier& model, const InputTensor& input, GradientMode mode) {
    require_kernel_fit(input.width(), input.height());
    const auto z = convolve(model, input);
    Logits upstream{};
    if (mode == GradientMode::SumLogits) {
        upstream.fill(1.0);
    } else {
        const auto logits = logits_from_preactivations(model, z, input.width(), input.height());
        upstream[argmax_logit(logits)] = 1.0;
    }
    return backward(model, input, z, upstream);
}

InputTensor logit_gradient(const ToyClassifier& model, const InputTensor& input, int class_index) {
    require_kernel_fit(input.width(), input.height());
    if (class_index < 0 || class_index >= ToyClassifier::kClasses) {
        throw ValidationError("class index out of range");
    }
    const auto z = convolve(model, input);
    Logits upstream{};
    upstream[class_index] = 1.0;
    return backward(model, input, z, upstream);
}

GrayMap input_gradient_saliency(const ToyClassifier& model, const Image& image, GradientMode mode) {
    require_kernel_fit(image.width(), image.height());
    const InputTensor grad = input_gradient(model, InputTensor(image), mode);
    std::vector<double> values(image.size());
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            double sq = 0.0;
            for (int c = 0; c < ToyClassifier::kInChannels; ++c) sq += grad.at(c, x, y) * grad.at(c, x, y);
            values[static_cast<std::size_t>(y) * image.width() + x] = std::sqrt(sq);
        }
    }
    return GrayMap(image.width(), image.height(), std::move(values));
}

std::vector<std::uint8_t> encode_classifier(const ToyClassifier& model) {
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u32(out, kFormatVersion);
    for_each_weight(model, [&](double w) { put_f64(out, w); });
    return out;
}

ToyClassifier decode_classifier(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("not a classifier weight file (bad magic)");
    }
    const auto version = static_cast<std::uint32_t>(get_le(bytes, 4, 4));
    if (version != kFormatVersion) {
        throw FormatError("unsupported classifier file version " + std::to_string(version));
    }
    if (bytes.size() != 8 + 8 * kWeightCount) {
        throw FormatError("classifier weight file has wrong size");
    }
    ToyClassifier model;
    std::size_t pos = 8;
    for_each_weight(model, [&](double& w) {
        w = std::bit_cast<double>(get_le(bytes, pos, 8));
        pos += 8;
        if (!std::isfinite(w)) throw FormatError("classifier weight is not finite");
    });
    return model;
}

void save_classifier(const ToyClassifier& model, const std::filesystem::path& path) {
    write_file_atomic(path, encode_classifier(model));
}

ToyClassifier load_classifier(const std::filesystem::path& path) {
    return decode_classifier(read_file(path));
}

}  // namespace attnmosaic
