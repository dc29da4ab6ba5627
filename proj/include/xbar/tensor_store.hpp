#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xbar {

// CBWT layout (all integers and floats little-endian):
//   0..3   magic "CBWT"
//   4..7   u32 version (1)
//   8..11  u32 dtype (0 = float32)
//   12..15 u32 ndim
//   then   ndim x u64 dims
//   then   product(dims) x f32 payload, row-major
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::uint32_t kDtypeFloat32 = 0;

struct WeightTensor {
  std::string name;
  std::vector<std::uint64_t> dims;
  std::vector<float> data;

  /// Product of dims.
  std::size_t element_count() const;
  /// Throws ValidationError unless dims are positive, data length matches and
  /// every value is finite.
  void validate() const;

  friend bool operator==(const WeightTensor&, const WeightTensor&) = default;
};

std::vector<std::uint8_t> encode_tensor(const WeightTensor& tensor);
WeightTensor decode_tensor(std::span<const std::uint8_t> bytes, std::string name = {});

/// Reads a CBWT file. The tensor is named after the file stem.
WeightTensor read_tensor(const std::filesystem::path& path);
void write_tensor(const WeightTensor& tensor, const std::filesystem::path& path);

enum class TensorRole { weights, eval_input, eval_label };

std::string_view to_string(TensorRole role);
TensorRole parse_role(std::string_view text);

struct ManifestEntry {
  std::string name;
  TensorRole role = TensorRole::weights;
  std::filesystem::path path;  // resolved against the manifest directory
  std::vector<std::uint64_t> dims;
};

// Text manifest, one `name<TAB>role<TAB>path` entry per line. Blank lines and
// lines starting with '#' are skipped; relative paths are relative to the
// manifest file.
struct Manifest {
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(std::string_view name) const;
  std::vector<const ManifestEntry*> with_role(TensorRole role) const;
};

Manifest load_manifest(const std::filesystem::path& path);

/// Writes entries with paths relative to the manifest directory when possible.
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

}  // namespace xbar
