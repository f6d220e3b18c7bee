#include "autosen/data/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "autosen/detail/binary_io.hpp"
#include "autosen/error.hpp"
#include "autosen/random.hpp"

namespace autosen::data {

namespace {

constexpr std::array<char, 4> kCacheMagic{'A', 'S', 'D', 'C'};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view field, T& value) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end;
}

csi::CsiSample window_at(const CsiStream& stream, std::size_t first, std::size_t length,
                         std::optional<int> label) {
  return csi::CsiSample(stream.amplitude.slice_leading(first, length),
                        stream.phase.slice_leading(first, length), label, stream.sample_rate_hz);
}

}  // namespace

void CsvLayout::validate() const {
  if (width == 0) throw InvalidInput("csv layout: width must be positive");
  const auto overlaps = [](std::size_t a, std::size_t alen, std::size_t b, std::size_t blen) {
    return a < b + blen && b < a + alen;
  };
  if (overlaps(amplitude_first, width, phase_first, width) ||
      overlaps(timestamp_column, 1, amplitude_first, width) ||
      overlaps(timestamp_column, 1, phase_first, width)) {
    throw InvalidInput("csv layout: timestamp, amplitude and phase columns must be disjoint");
  }
}

CsiStream parse_csv(std::istream& in, const CsvLayout& layout, double sample_rate_hz,
                    const std::string& source_name) {
  layout.validate();
  if (!(sample_rate_hz > 0.0)) throw InvalidInput("parse_csv: sample rate must be positive");
  const std::size_t needed =
      std::max({layout.timestamp_column, layout.amplitude_first + layout.width - 1,
                layout.phase_first + layout.width - 1}) + 1;

  std::vector<double> timestamps;
  std::vector<double> amp;
  std::vector<double> pha;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && layout.has_header) continue;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, layout.delimiter);
    if (fields.size() < needed) {
      throw FormatError(source_name + ":" + std::to_string(line_no) + ": expected at least " +
                        std::to_string(needed) + " columns, found " +
                        std::to_string(fields.size()));
    }
    const auto number = [&](std::size_t col) {
      double v = 0.0;
      if (!parse_number(fields[col], v)) {
        throw FormatError(source_name + ":" + std::to_string(line_no) + ": column " +
                          std::to_string(col) + " is not numeric ('" + std::string(fields[col]) +
                          "')");
      }
      return v;
    };
    timestamps.push_back(number(layout.timestamp_column));
    for (std::size_t d = 0; d < layout.width; ++d) amp.push_back(number(layout.amplitude_first + d));
    for (std::size_t d = 0; d < layout.width; ++d) pha.push_back(number(layout.phase_first + d));
  }
  const std::size_t rows = timestamps.size();
  return CsiStream{std::move(timestamps), Tensor({rows, layout.width}, std::move(amp)),
                   Tensor({rows, layout.width}, std::move(pha)), sample_rate_hz};
}

CsiStream load_csv(const std::filesystem::path& path, const CsvLayout& layout,
                   double sample_rate_hz) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file " + path.string());
  return parse_csv(in, layout, sample_rate_hz, path.string());
}

CsiStream downsample(const CsiStream& stream, std::size_t factor) {
  if (factor < 1) throw InvalidInput("downsample: factor must be >= 1");
  if (factor == 1) return stream;
  const std::size_t rows = (stream.rows() + factor - 1) / factor;
  const std::size_t width = stream.amplitude.dim(1);
  CsiStream out{{}, Tensor({rows, width}), Tensor({rows, width}),
                stream.sample_rate_hz / static_cast<double>(factor)};
  out.timestamps.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t src = r * factor;
    out.timestamps.push_back(stream.timestamps[src]);
    for (std::size_t d = 0; d < width; ++d) {
      out.amplitude.at(r, d) = stream.amplitude.at(src, d);
      out.phase.at(r, d) = stream.phase.at(src, d);
    }
  }
  return out;
}

std::vector<csi::CsiSample> window_samples(const CsiStream& stream, const WindowSpec& spec,
                                           std::optional<int> label) {
  if (spec.length == 0 || spec.stride == 0) {
    throw InvalidInput("window_samples: length and stride must be positive");
  }
  if (stream.rows() < spec.length) {
    throw InvalidInput("window_samples: stream has " + std::to_string(stream.rows()) +
                       " rows, fewer than the window length " + std::to_string(spec.length));
  }
  std::vector<csi::CsiSample> out;
  for (std::size_t first = 0; first + spec.length <= stream.rows(); first += spec.stride) {
    out.push_back(window_at(stream, first, spec.length, label));
  }
  return out;
}

std::vector<std::size_t> random_segment_offsets(std::size_t rows, std::size_t length,
                                                std::size_t count, std::uint64_t seed) {
  if (length == 0) throw InvalidInput("random_segments: length must be positive");
  if (rows < length) {
    throw InvalidInput("random_segments: stream has " + std::to_string(rows) +
                       " rows, fewer than the segment length " + std::to_string(length));
  }
  Rng rng(seed);
  std::vector<std::size_t> offsets(count);
  for (auto& o : offsets) o = static_cast<std::size_t>(rng.uniform_index(rows - length + 1));
  return offsets;
}

std::vector<csi::CsiSample> random_segments(const CsiStream& stream, std::size_t length,
                                            std::size_t count, std::uint64_t seed) {
  std::vector<csi::CsiSample> out;
  out.reserve(count);
  for (auto first : random_segment_offsets(stream.rows(), length, count, seed)) {
    out.push_back(window_at(stream, first, length, std::nullopt));
  }
  return out;
}

std::vector<int> distinct_labels(std::span<const csi::CsiSample> samples) {
  std::vector<int> labels;
  for (const auto& s : samples) {
    if (s.label) labels.push_back(*s.label);
  }
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  return labels;
}

Split make_split(std::span<const csi::CsiSample> samples, const SplitSpec& spec) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].label) by_class[*samples[i].label].push_back(i);
  }
  if (by_class.empty()) throw InvalidInput("make_split: no labelled samples");
  const std::size_t needed = spec.shots_per_class + spec.eval_per_class;
  Split split;
  for (auto& [label, indices] : by_class) {
    if (indices.size() < needed) {
      throw InvalidInput("make_split: class " + std::to_string(label) + " has " +
                         std::to_string(indices.size()) + " samples, need " +
                         std::to_string(spec.shots_per_class) + " shots + " +
                         std::to_string(spec.eval_per_class) + " eval");
    }
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(label))));
    shuffle(indices.begin(), indices.end(), rng);
    const auto eval_end = indices.begin() + static_cast<std::ptrdiff_t>(spec.eval_per_class);
    split.eval.insert(split.eval.end(), indices.begin(), eval_end);
    split.fewshot.insert(split.fewshot.end(), eval_end,
                         eval_end + static_cast<std::ptrdiff_t>(spec.shots_per_class));
  }
  return split;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_fields(text, ',');
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 2) throw FormatError(where + ": expected '<file>,<class>'");
    int label = 0;
    if (!parse_number(fields[1], label)) {
      if (entries.empty() && line_no == 1) continue;  // header
      throw FormatError(where + ": class id '" + std::string(fields[1]) + "' is not an integer");
    }
    ManifestEntry entry;
    entry.label = label;
    std::string_view file = fields[0];
    // Row ranges are only recognised after the last path separator.
    const std::size_t slash = file.find_last_of("/\\");
    const std::size_t colon = file.rfind(':');
    if (colon != std::string_view::npos && (slash == std::string_view::npos || colon > slash)) {
      const auto range = file.substr(colon + 1);
      const auto dash = range.find('-');
      std::size_t first = 0;
      std::size_t last = 0;
      if (dash == std::string_view::npos || !parse_number(range.substr(0, dash), first) ||
          !parse_number(range.substr(dash + 1), last) || last <= first) {
        throw FormatError(where + ": bad row range '" + std::string(range) + "'");
      }
      entry.rows = std::make_pair(first, last);
      file = file.substr(0, colon);
    }
    entry.file = std::filesystem::path(std::string(file));
    if (entry.file.is_relative()) entry.file = base / entry.file;
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<csi::CsiSample> load_labeled_corpus(const std::filesystem::path& manifest,
                                                const CorpusSpec& spec) {
  std::vector<csi::CsiSample> out;
  std::map<std::filesystem::path, CsiStream> loaded;
  for (const auto& entry : read_manifest(manifest)) {
    auto it = loaded.find(entry.file);
    if (it == loaded.end()) {
      it = loaded.emplace(entry.file, load_csv(entry.file, spec.layout, spec.source_rate_hz)).first;
    }
    CsiStream stream = it->second;
    if (entry.rows) {
      const auto [first, last] = *entry.rows;
      if (last > stream.rows()) {
        throw InvalidInput(entry.file.string() + ": row range ends at " + std::to_string(last) +
                           " but the file has " + std::to_string(stream.rows()) + " rows");
      }
      stream = CsiStream{
          std::vector<double>(stream.timestamps.begin() + static_cast<std::ptrdiff_t>(first),
                              stream.timestamps.begin() + static_cast<std::ptrdiff_t>(last)),
          stream.amplitude.slice_leading(first, last - first),
          stream.phase.slice_leading(first, last - first), stream.sample_rate_hz};
    }
    auto windows = window_samples(downsample(stream, spec.downsample_factor), spec.window, entry.label);
    for (auto& w : windows) out.push_back(std::move(w));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cache

void write_cache(std::span<const csi::CsiSample> samples, std::ostream& out) {
  using detail::write_le;
  out.write(kCacheMagic.data(), kCacheMagic.size());
  write_le<std::uint32_t>(out, kCacheVersion);
  write_le<std::uint64_t>(out, samples.size());
  for (const auto& s : samples) {
    write_le<std::uint8_t>(out, s.label ? 1 : 0);
    write_le<std::int32_t>(out, s.label.value_or(0));
    write_le<double>(out, s.sample_rate_hz);
    write_le<std::uint64_t>(out, s.amplitude.dim(0));
    write_le<std::uint64_t>(out, s.amplitude.dim(1));
    detail::write_doubles(out, s.amplitude.data());
    detail::write_doubles(out, s.phase_raw.data());
    const auto& sanitized = s.phase_sanitized();
    write_le<std::uint8_t>(out, sanitized ? 1 : 0);
    if (sanitized) detail::write_doubles(out, sanitized->data());
  }
  if (!out) throw IoError("failed while writing sample cache");
}

std::vector<csi::CsiSample> CacheReader::read(std::istream& in) {
  using detail::read_le;
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != static_cast<std::streamsize>(magic.size())) {
    throw FormatError("truncated file while reading cache magic");
  }
  if (magic != kCacheMagic) throw FormatError("not a sample cache (bad magic)");
  const auto version = read_le<std::uint32_t>(in, "cache version");
  if (version != kCacheVersion) {
    throw FormatError("unsupported cache version " + std::to_string(version) + " (expected " +
                      std::to_string(kCacheVersion) + ")");
  }
  const auto count = read_le<std::uint64_t>(in, "sample count");
  std::vector<csi::CsiSample> samples;
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto has_label = read_le<std::uint8_t>(in, "label flag");
    const auto label = read_le<std::int32_t>(in, "label");
    const auto rate = read_le<double>(in, "sample rate");
    const auto rows = read_le<std::uint64_t>(in, "timestamps");
    const auto cols = read_le<std::uint64_t>(in, "channels");
    if (rows > (1ULL << 24) || cols > (1ULL << 24) || has_label > 1) {
      throw FormatError("implausible sample header at sample " + std::to_string(k));
    }
    Tensor amp({rows, cols});
    Tensor pha({rows, cols});
    detail::read_doubles(in, amp.data(), "amplitude");
    detail::read_doubles(in, pha.data(), "raw phase");
    csi::CsiSample sample(std::move(amp), std::move(pha),
                          has_label ? std::optional<int>(label) : std::nullopt, rate);
    const auto has_sanitized = read_le<std::uint8_t>(in, "sanitized flag");
    if (has_sanitized > 1) throw FormatError("bad sanitized flag at sample " + std::to_string(k));
    if (has_sanitized) {
      Tensor clean({rows, cols});
      detail::read_doubles(in, clean.data(), "sanitized phase");
      sample.phase_sanitized_ = std::move(clean);
    }
    samples.push_back(std::move(sample));
  }
  return samples;
}

void cache_write(std::span<const csi::CsiSample> samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_cache(samples, out);
}

std::vector<csi::CsiSample> cache_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open sample cache " + path.string());
  return CacheReader::read(in);
}

}  // namespace autosen::data
