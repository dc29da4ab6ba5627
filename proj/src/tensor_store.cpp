#include "xbar/tensor_store.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "xbar/error.hpp"

namespace xbar {
namespace {

constexpr char kMagic[4] = {'C', 'B', 'W', 'T'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (remaining() < n) throw LengthError(std::string("truncated tensor: missing ") + what);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::size_t checked_product(const std::vector<std::uint64_t>& dims) {
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (d == 0) throw ValidationError("tensor dims must be positive");
    if (n > UINT64_MAX / d) throw ValidationError("tensor dims overflow");
    n *= d;
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

std::size_t WeightTensor::element_count() const { return checked_product(dims); }

void WeightTensor::validate() const {
  if (dims.empty()) throw ValidationError("tensor '" + name + "' has no dims");
  if (data.size() != element_count()) {
    throw ValidationError("tensor '" + name + "' data length " + std::to_string(data.size()) +
                          " does not match dims product " + std::to_string(element_count()));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw ValidationError("tensor '" + name + "' has non-finite value at index " +
                            std::to_string(i));
    }
  }
}

std::vector<std::uint8_t> encode_tensor(const WeightTensor& tensor) {
  tensor.validate();
  std::vector<std::uint8_t> out;
  out.reserve(16 + 8 * tensor.dims.size() + 4 * tensor.data.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kTensorVersion);
  put_u32(out, kDtypeFloat32);
  put_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
  for (auto d : tensor.dims) put_u64(out, d);
  for (float v : tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

WeightTensor decode_tensor(std::span<const std::uint8_t> bytes, std::string name) {
  if (bytes.size() < 4) throw LengthError("truncated tensor: missing magic");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw FormatError("bad magic: expected \"CBWT\"");
  }
  ByteReader in(bytes.subspan(4));
  const auto version = in.u32("version");
  if (version != kTensorVersion) {
    throw FormatError("unsupported tensor version " + std::to_string(version));
  }
  const auto dtype = in.u32("dtype");
  if (dtype != kDtypeFloat32) throw FormatError("unsupported dtype code " + std::to_string(dtype));
  const auto ndim = in.u32("ndim");
  if (ndim == 0) throw ValidationError("tensor has no dims");

  WeightTensor t;
  t.name = std::move(name);
  // Bound ndim by what is left before allocating.
  if (in.remaining() / 8 < ndim) throw LengthError("truncated tensor: missing dims");
  t.dims.resize(ndim);
  for (auto& d : t.dims) d = in.u64("dims");
  const std::size_t count = checked_product(t.dims);
  if (in.remaining() / 4 < count) throw LengthError("truncated tensor: payload too short");
  if (in.remaining() != count * 4) throw LengthError("tensor payload has trailing bytes");
  t.data.resize(count);
  for (auto& v : t.data) v = std::bit_cast<float>(in.u32("payload"));
  t.validate();
  return t;
}

WeightTensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tensor file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading " + path.string());
  return decode_tensor(bytes, path.stem().string());
}

void write_tensor(const WeightTensor& tensor, const std::filesystem::path& path) {
  const auto bytes = encode_tensor(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string_view to_string(TensorRole role) {
  switch (role) {
    case TensorRole::weights: return "weights";
    case TensorRole::eval_input: return "eval_input";
    case TensorRole::eval_label: return "eval_label";
  }
  return "weights";
}

TensorRole parse_role(std::string_view text) {
  if (text == "weights") return TensorRole::weights;
  if (text == "eval_input") return TensorRole::eval_input;
  if (text == "eval_label") return TensorRole::eval_label;
  throw ValidationError("unknown tensor role '" + std::string(text) + "'");
}

const ManifestEntry* Manifest::find(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::vector<const ManifestEntry*> Manifest::with_role(TensorRole role) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.role == role) out.push_back(&e);
  }
  return out;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const auto base = path.parent_path();

  Manifest manifest;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, '\t');) fields.push_back(f);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() != 3 || fields[0].empty() || fields[2].empty()) {
      throw ValidationError(where + ": expected name<TAB>role<TAB>path");
    }
    if (!seen.insert(fields[0]).second) {
      throw ValidationError(where + ": duplicate tensor name '" + fields[0] + "'");
    }

    ManifestEntry e;
    e.name = fields[0];
    e.role = parse_role(fields[1]);
    e.path = std::filesystem::path(fields[2]);
    if (e.path.is_relative()) e.path = base / e.path;
    if (!std::filesystem::exists(e.path)) {
      throw IoError(where + ": missing tensor file " + e.path.string());
    }
    e.dims = read_tensor(e.path).dims;
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const auto base = path.parent_path();
  for (const auto& e : manifest.entries) {
    auto p = e.path;
    if (p.is_absolute() && !base.empty()) {
      auto rel = p.lexically_relative(std::filesystem::absolute(base));
      if (!rel.empty()) p = rel;
    } else if (!base.empty()) {
      auto rel = p.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") p = rel;
    }
    out << e.name << '\t' << to_string(e.role) << '\t' << p.generic_string() << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace xbar
