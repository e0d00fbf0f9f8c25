#pragma once

#include "attnmosaic/image.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace attnmosaic {

/// Fixed toy network: 3x3 conv (3 -> 8 channels, zero "same" padding) -> ReLU
/// -> global average pool -> dense 8 -> 10.
struct ToyClassifier {
    static constexpr int kInChannels = 3;
    static constexpr int kFilters = 8;
    static constexpr int kKernel = 3;
    static constexpr int kClasses = 10;
    static constexpr std::size_t kFilterWeights = kFilters * kInChannels * kKernel * kKernel;
    static constexpr std::size_t kDenseWeights = kFilters * kClasses;

    /// Indexed [filter][in_channel][ky][kx].
    std::array<double, kFilterWeights> conv_filters{};
    std::array<double, kFilters> conv_bias{};
    /// Indexed [filter][class]; column k feeds logit k.
    std::array<double, kDenseWeights> dense_weights{};
    std::array<double, kClasses> dense_bias{};
    /// Seed used by init_classifier; empty for weights loaded from a file.
    std::optional<std::uint64_t> seed;

    double filter(int f, int c, int ky, int kx) const {
        return conv_filters[((f * kInChannels + c) * kKernel + ky) * kKernel + kx];
    }
    double dense(int f, int k) const { return dense_weights[f * kClasses + k]; }

    std::string digest() const;

    friend bool operator==(const ToyClassifier&, const ToyClassifier&) = default;
};

enum class GradientMode { MaxLogit, SumLogits };

using Logits = std::array<double, ToyClassifier::kClasses>;

/// Planar float input in [0, 1] units: value(c, x, y) at c*H*W + y*W + x.
class InputTensor {
public:
    InputTensor(int width, int height);
    explicit InputTensor(const Image& image);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double& at(int c, int x, int y) { return data_[offset(c, x, y)]; }
    double at(int c, int x, int y) const { return data_[offset(c, x, y)]; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

private:
    std::size_t offset(int c, int x, int y) const noexcept {
        return (static_cast<std::size_t>(c) * static_cast<std::size_t>(height_) +
                static_cast<std::size_t>(y)) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<double> data_;
};

/// Weights uniform in [-0.1, 0.1] from splitmix64(seed), drawn in field order:
/// conv_filters, conv_bias, dense_weights, dense_bias.
ToyClassifier init_classifier(std::uint64_t seed);

Logits forward(const ToyClassifier& model, const Image& image);
Logits forward(const ToyClassifier& model, const InputTensor& input);

/// Index of the largest logit; ties go to the lowest index.
int argmax_logit(const Logits& logits);

/// d(score)/d(input) for score = max logit or sum of logits, by reverse-mode
/// differentiation through dense, pool, ReLU and convolution.
/// ReLU'(0) is taken as 0.
InputTensor input_gradient(const ToyClassifier& model, const InputTensor& input, GradientMode mode);

/// Gradient of one logit with respect to the input.
InputTensor logit_gradient(const ToyClassifier& model, const InputTensor& input, int class_index);

/// Per-pixel L2 norm over channels of input_gradient.
GrayMap input_gradient_saliency(const ToyClassifier& model, const Image& image, GradientMode mode);

/// Little-endian "TCLF", u32 version = 1, then f64 weights in initialization order.
std::vector<std::uint8_t> encode_classifier(const ToyClassifier& model);
ToyClassifier decode_classifier(std::span<const std::uint8_t> bytes);
void save_classifier(const ToyClassifier& model, const std::filesystem::path& path);
ToyClassifier load_classifier(const std::filesystem::path& path);

}  // namespace attnmosaic
