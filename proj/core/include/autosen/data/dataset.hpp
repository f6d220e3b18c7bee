#pragma once

// CSV ingestion, decimation, windowing, random segmentation, few-shot splits
// and the binary sample cache.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "autosen/csi/csi.hpp"

namespace autosen::data {

/// Column layout of a CSI recording. Columns are zero-based; amplitude and
/// phase occupy `width` consecutive columns each.
struct CsvLayout {
  std::size_t timestamp_column = 0;
  std::size_t amplitude_first = 1;
  std::size_t phase_first = 91;
  std::size_t width = 90;
  char delimiter = ',';
  bool has_header = false;

  void validate() const;
};

/// A continuous recording: one row per packet.
struct CsiStream {
  std::vector<double> timestamps;
  Tensor amplitude;  // (rows x width)
  Tensor phase;      // (rows x width)
  double sample_rate_hz = 0.0;

  std::size_t rows() const noexcept { return timestamps.size(); }
};

CsiStream parse_csv(std::istream& in, const CsvLayout& layout, double sample_rate_hz,
                    const std::string& source_name = "<stream>");
CsiStream load_csv(const std::filesystem::path& path, const CsvLayout& layout,
                   double sample_rate_hz);

/// Keeps rows 0, factor, 2*factor, ... (plain decimation, no filtering).
CsiStream downsample(const CsiStream& stream, std::size_t factor);

struct WindowSpec {
  std::size_t length = 500;
  std::size_t stride = 500;
};

/// Fixed-length windows starting at 0, stride, 2*stride, ...; partial tail windows dropped.
std::vector<csi::CsiSample> window_samples(const CsiStream& stream, const WindowSpec& spec,
                                           std::optional<int> label = std::nullopt);

/// Uniform start offsets in [0, rows - length], deterministic in seed.
std::vector<std::size_t> random_segment_offsets(std::size_t rows, std::size_t length,
                                                std::size_t count, std::uint64_t seed);

/// Unlabelled windows at random_segment_offsets.
std::vector<csi::CsiSample> random_segments(const CsiStream& stream, std::size_t length,
                                            std::size_t count, std::uint64_t seed);

struct SplitSpec {
  std::size_t shots_per_class = 10;
  std::size_t eval_per_class = 70;
  std::uint64_t seed = 0;
};

/// Indices into the sample list passed to make_split.
struct Split {
  std::vector<std::size_t> fewshot;
  std::vector<std::size_t> eval;
};

/// Per class: seeded permutation, the first eval_per_class go to eval and the
/// next shots_per_class to few-shot. The eval set therefore does not depend on
/// the shot count. Unlabelled samples are ignored.
Split make_split(std::span<const csi::CsiSample> samples, const SplitSpec& spec);

/// Sorted distinct labels present in `samples`.
std::vector<int> distinct_labels(std::span<const csi::CsiSample> samples);

/// One manifest line: "<file>[:<first>-<last>],<class>". Row ranges are
/// half-open [first, last) over the recording's raw rows.
struct ManifestEntry {
  std::filesystem::path file;
  std::optional<std::pair<std::size_t, std::size_t>> rows;
  int label = 0;
};

/// Relative paths resolve against the manifest's directory. Blank lines and
/// lines starting with '#' are skipped; a non-numeric class on line 1 is a header.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct CorpusSpec {
  CsvLayout layout;
  double source_rate_hz = 1000.0;
  std::size_t downsample_factor = 2;
  WindowSpec window;
};

/// Loads every manifest entry, decimates, windows and labels it.
std::vector<csi::CsiSample> load_labeled_corpus(const std::filesystem::path& manifest,
                                                const CorpusSpec& spec);

// Sample cache: "ASDC" | u32 version | u64 count | per sample:
//   u8 has_label | i32 label | f64 rate | u64 T | u64 D |
//   f64[T*D] amplitude | f64[T*D] raw phase | u8 has_sanitized | f64[T*D] sanitized?
inline constexpr std::uint32_t kCacheVersion = 1;

class CacheReader {
 public:
  static std::vector<csi::CsiSample> read(std::istream& in);
};

void write_cache(std::span<const csi::CsiSample> samples, std::ostream& out);
void cache_write(std::span<const csi::CsiSample> samples, const std::filesystem::path& path);
std::vector<csi::CsiSample> cache_read(const std::filesystem::path& path);

}  // namespace autosen::data
