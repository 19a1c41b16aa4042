#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ggo/guidance.hpp"

namespace ggo {

/// Three convolutions with kernel sizes 3, 1, 1. Every layer is
/// conv + bias -> ReLU -> instance norm with learnable per-channel scale and
/// shift. The default widths give 4,231 parameters.
struct UpdateModelArch {
  int in_channels = 10;
  std::array<int, 2> hidden = {32, 31};
  int out_channels = 5;
  std::array<int, 3> kernels = {3, 1, 1};

  friend bool operator==(const UpdateModelArch&, const UpdateModelArch&) = default;
};

/// Layer parameter blocks in θ, in order: weights (out x k x k x in), bias,
/// scale, shift.
struct LayerShape {
  int in = 0;
  int out = 0;
  int kernel = 1;
  std::size_t weight_count() const {
    return static_cast<std::size_t>(out) * static_cast<std::size_t>(kernel * kernel) *
           static_cast<std::size_t>(in);
  }
  std::size_t parameter_count() const { return weight_count() + 3 * static_cast<std::size_t>(out); }
};

std::array<LayerShape, 3> layer_shapes(const UpdateModelArch& arch);
std::size_t parameter_count(const UpdateModelArch& arch);

/// Same-padded 2-D convolution (zero padding). `weights` is laid out
/// out x k x k x in; `bias` has `out` entries.
Tensor3 conv2d_same(const Tensor3& input, std::span<const double> weights,
                    std::span<const double> bias, int out_channels, int kernel);

void relu_inplace(Tensor3& t);

/// Per-channel normalization over all spatial positions followed by
/// scale * x + shift.
void instance_norm_inplace(Tensor3& t, std::span<const double> scale, std::span<const double> shift,
                           double eps = 1e-5);

/// Network output before masking and normalization.
Tensor3 forward_raw(std::span<const double> theta, const UpdateModelArch& arch,
                    const Tensor3& input);

/// Updated weights: stacks the 5 weight and 5 usage channels, runs the
/// network, keeps only slots that correspond to an edge and min-max
/// normalizes those onto [lb, ub]. Slots without an edge are 0.
WeightTensor forward(std::span<const double> theta, const UpdateModelArch& arch,
                     const EdgeIndexer& indexer, const WeightTensor& weights, const Tensor3& usage,
                     const WeightBounds& bounds);

nlohmann::json arch_to_json(const UpdateModelArch& arch);
UpdateModelArch arch_from_json(const nlohmann::json& j);

struct UpdateModel {
  UpdateModelArch arch;
  std::vector<double> theta;
};

nlohmann::json model_to_json(const UpdateModel& m);
UpdateModel model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const UpdateModel& m);
UpdateModel load_model(const std::filesystem::path& path);

}  // namespace ggo
