#include "autosen/nn/checkpoint.hpp"

#include <array>
#include <fstream>
#include <string>

#include "autosen/detail/binary_io.hpp"
#include "autosen/error.hpp"

namespace autosen::nn {

namespace {

constexpr std::array<char, 4> kMagic{'A', 'S', 'C', 'K'};
constexpr std::uint64_t kMaxDim = std::uint64_t{1} << 32;

}  // namespace

void write_checkpoint(const LayerStack& stack, std::ostream& out) {
  using detail::write_le;
  out.write(kMagic.data(), kMagic.size());
  write_le<std::uint32_t>(out, kCheckpointVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(stack.size()));
  for (std::size_t l = 0; l < stack.size(); ++l) {
    const Layer& layer = stack.layer(l);
    write_le<std::uint8_t>(out, static_cast<std::uint8_t>(layer.kind()));
    const auto config = layer.config();
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(config.size()));
    for (auto v : config) write_le<std::uint64_t>(out, v);
    const auto params = layer.parameters();
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
    for (const auto* p : params) {
      write_le<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
      for (auto d : p->value.shape()) write_le<std::uint64_t>(out, d);
      detail::write_doubles(out, p->value.data());
    }
  }
  if (!out) throw IoError("failed while writing checkpoint");
}

LayerStack read_checkpoint(std::istream& in) {
  using detail::read_le;
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size())) {
    throw FormatError("truncated file while reading checkpoint magic");
  }
  if (magic != kMagic) throw FormatError("not a checkpoint file (bad magic)");
  const auto version = read_le<std::uint32_t>(in, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) +
                      " (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto layer_count = read_le<std::uint32_t>(in, "layer count");
  LayerStack stack;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const auto tag = read_le<std::uint8_t>(in, "layer kind");
    const auto config_count = read_le<std::uint32_t>(in, "layer config count");
    if (config_count > 64) throw FormatError("implausible layer config count");
    std::vector<std::uint64_t> config(config_count);
    for (auto& v : config) {
      v = read_le<std::uint64_t>(in, "layer config");
      if (v >= kMaxDim) throw FormatError("implausible layer dimension");
    }
    auto layer = make_layer(static_cast<LayerKind>(tag), config);
    const auto param_count = read_le<std::uint32_t>(in, "parameter count");
    auto params = layer->parameters();
    if (param_count != params.size()) {
      throw FormatError("layer " + std::to_string(l) + ": expected " +
                        std::to_string(params.size()) + " parameters, file has " +
                        std::to_string(param_count));
    }
    for (auto* p : params) {
      const auto rank = read_le<std::uint32_t>(in, "parameter rank");
      Shape shape(rank);
      for (auto& d : shape) d = read_le<std::uint64_t>(in, "parameter dims");
      if (shape != p->value.shape()) {
        throw FormatError("layer " + std::to_string(l) + ": parameter " + p->name + " has shape " +
                          shape_string(shape) + ", expected " + shape_string(p->value.shape()));
      }
      detail::read_doubles(in, p->value.data(), "parameter data");
    }
    stack.add(std::move(layer));
  }
  return stack;
}

void save_checkpoint(const LayerStack& stack, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(stack, out);
}

LayerStack load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace autosen::nn
