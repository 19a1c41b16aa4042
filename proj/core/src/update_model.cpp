#include "ggo/update_model.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "ggo/error.hpp"

namespace ggo {

std::array<LayerShape, 3> layer_shapes(const UpdateModelArch& arch) {
  return {LayerShape{arch.in_channels, arch.hidden[0], arch.kernels[0]},
          LayerShape{arch.hidden[0], arch.hidden[1], arch.kernels[1]},
          LayerShape{arch.hidden[1], arch.out_channels, arch.kernels[2]}};
}

std::size_t parameter_count(const UpdateModelArch& arch) {
  std::size_t total = 0;
  for (const LayerShape& l : layer_shapes(arch)) total += l.parameter_count();
  return total;
}

Tensor3 conv2d_same(const Tensor3& input, std::span<const double> weights,
                    std::span<const double> bias, int out_channels, int kernel) {
  const int in_ch = input.channels;
  const auto expected = static_cast<std::size_t>(out_channels) *
                        static_cast<std::size_t>(kernel * kernel) * static_cast<std::size_t>(in_ch);
  if (kernel < 1 || kernel % 2 == 0) throw ConfigError("kernel size must be odd and positive");
  if (weights.size() != expected || bias.size() != static_cast<std::size_t>(out_channels)) {
    throw ConfigError("convolution parameter size mismatch");
  }
  const int half = kernel / 2;
  Tensor3 out(input.height, input.width, out_channels);
  for (int r = 0; r < input.height; ++r) {
    for (int c = 0; c < input.width; ++c) {
      double* dst = &out.data[out.offset(r, c, 0)];
      for (int o = 0; o < out_channels; ++o) dst[o] = bias[static_cast<std::size_t>(o)];
      for (int kr = 0; kr < kernel; ++kr) {
        const int rr = r + kr - half;
        if (rr < 0 || rr >= input.height) continue;
        for (int kc = 0; kc < kernel; ++kc) {
          const int cc = c + kc - half;
          if (cc < 0 || cc >= input.width) continue;
          const double* src = &input.data[input.offset(rr, cc, 0)];
          for (int o = 0; o < out_channels; ++o) {
            const double* w =
                &weights[((static_cast<std::size_t>(o) * static_cast<std::size_t>(kernel) +
                           static_cast<std::size_t>(kr)) *
                              static_cast<std::size_t>(kernel) +
                          static_cast<std::size_t>(kc)) *
                         static_cast<std::size_t>(in_ch)];
            double acc = 0.0;
            for (int i = 0; i < in_ch; ++i) acc += w[i] * src[i];
            dst[o] += acc;
          }
        }
      }
    }
  }
  return out;
}

void relu_inplace(Tensor3& t) {
  for (double& x : t.data) x = x > 0.0 ? x : 0.0;
}

void instance_norm_inplace(Tensor3& t, std::span<const double> scale, std::span<const double> shift,
                           double eps) {
  const auto ch = static_cast<std::size_t>(t.channels);
  if (scale.size() != ch || shift.size() != ch) throw ConfigError("norm parameter size mismatch");
  const std::size_t pixels = t.data.size() / (ch == 0 ? 1 : ch);
  if (pixels == 0) return;
  std::vector<double> mean(ch, 0.0);
  std::vector<double> var(ch, 0.0);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t c = 0; c < ch; ++c) mean[c] += t.data[p * ch + c];
  }
  for (double& m : mean) m /= static_cast<double>(pixels);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t c = 0; c < ch; ++c) {
      const double d = t.data[p * ch + c] - mean[c];
      var[c] += d * d;
    }
  }
  for (std::size_t c = 0; c < ch; ++c) {
    var[c] = 1.0 / std::sqrt(var[c] / static_cast<double>(pixels) + eps);
  }
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t c = 0; c < ch; ++c) {
      double& x = t.data[p * ch + c];
      x = scale[c] * (x - mean[c]) * var[c] + shift[c];
    }
  }
}

Tensor3 forward_raw(std::span<const double> theta, const UpdateModelArch& arch,
                    const Tensor3& input) {
  if (theta.size() != parameter_count(arch)) {
    throw ConfigError("theta has " + std::to_string(theta.size()) + " entries, architecture needs " +
                      std::to_string(parameter_count(arch)));
  }
  if (input.channels != arch.in_channels) throw ConfigError("input channel count mismatch");
  Tensor3 x = input;
  std::size_t pos = 0;
  for (const LayerShape& l : layer_shapes(arch)) {
    const auto out = static_cast<std::size_t>(l.out);
    const auto w = theta.subspan(pos, l.weight_count());
    pos += l.weight_count();
    const auto bias = theta.subspan(pos, out);
    pos += out;
    const auto scale = theta.subspan(pos, out);
    pos += out;
    const auto shift = theta.subspan(pos, out);
    pos += out;
    x = conv2d_same(x, w, bias, l.out, l.kernel);
    relu_inplace(x);
    instance_norm_inplace(x, scale, shift);
  }
  return x;
}

WeightTensor forward(std::span<const double> theta, const UpdateModelArch& arch,
                     const EdgeIndexer& indexer, const WeightTensor& weights, const Tensor3& usage,
                     const WeightBounds& bounds) {
  const GridMap& map = indexer.map();
  auto check = [&](const Tensor3& t, const char* what) {
    if (t.height != map.height() || t.width != map.width() || t.channels != kNumActions) {
      throw ConfigError(std::string(what) + " tensor does not match the map");
    }
  };
  check(weights, "weight");
  check(usage, "usage");
  if (arch.in_channels != 2 * kNumActions || arch.out_channels != kNumActions) {
    throw ConfigError("update model must map 10 input channels to 5 output channels");
  }

  Tensor3 input(map.height(), map.width(), arch.in_channels);
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      for (int k = 0; k < kNumActions; ++k) {
        input.at(r, c, k) = weights.at(r, c, k);
        input.at(r, c, kNumActions + k) = usage.at(r, c, k);
      }
    }
  }
  const Tensor3 raw = forward_raw(theta, arch, input);
  std::vector<double> per_edge(indexer.num_edges());
  for (std::size_t e = 0; e < per_edge.size(); ++e) {
    const auto id = static_cast<EdgeId>(e);
    const Cell cell = map.cell(indexer.source(id));
    per_edge[e] = raw.at(cell.row, cell.col, static_cast<int>(indexer.action(id)));
  }
  const std::vector<double> normalized = normalize_minmax(per_edge, bounds.lb, bounds.ub);
  return vector_to_tensor(indexer, normalized);
}

nlohmann::json arch_to_json(const UpdateModelArch& arch) {
  return {{"in_channels", arch.in_channels},
          {"hidden", arch.hidden},
          {"out_channels", arch.out_channels},
          {"kernels", arch.kernels}};
}

UpdateModelArch arch_from_json(const nlohmann::json& j) {
  UpdateModelArch a;
  a.in_channels = j.at("in_channels").get<int>();
  a.hidden = j.at("hidden").get<std::array<int, 2>>();
  a.out_channels = j.at("out_channels").get<int>();
  a.kernels = j.at("kernels").get<std::array<int, 3>>();
  for (int k : a.kernels) {
    if (k < 1 || k % 2 == 0) throw ConfigError("model kernels must be odd and positive");
  }
  if (a.in_channels < 1 || a.out_channels < 1 || a.hidden[0] < 1 || a.hidden[1] < 1) {
    throw ConfigError("model channel widths must be positive");
  }
  return a;
}

nlohmann::json model_to_json(const UpdateModel& m) {
  return {{"format", "ggo-update-model"},
          {"version", 1},
          {"arch", arch_to_json(m.arch)},
          {"parameter_count", parameter_count(m.arch)},
          {"theta", m.theta}};
}

UpdateModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "ggo-update-model") {
      throw ParseError("not an update-model file (format field)");
    }
    if (j.at("version").get<int>() != 1) throw ParseError("unsupported update-model version");
    UpdateModel m;
    m.arch = arch_from_json(j.at("arch"));
    m.theta = j.at("theta").get<std::vector<double>>();
    const std::size_t expected = parameter_count(m.arch);
    if (j.at("parameter_count").get<std::size_t>() != expected || m.theta.size() != expected) {
      throw ConfigError("theta length " + std::to_string(m.theta.size()) +
                        " does not match the architecture (" + std::to_string(expected) + ")");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("update-model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const UpdateModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file '" + path.string() + "'");
  out << model_to_json(m).dump(1) << '\n';
}

UpdateModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace ggo
