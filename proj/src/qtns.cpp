#include "qmcl/qtns.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "qmcl/errors.hpp"

namespace qmcl {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::size_t base) : bytes_(bytes), base_(base) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("truncated QTNS record: missing ") + what, base_ + pos_);
    }
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::size_t pos() const { return pos_; }
  std::size_t absolute() const { return base_ + pos_; }
  std::span<const std::uint8_t> take(std::size_t n) {
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("failed writing " + path.string());
}

}  // namespace

std::vector<std::uint8_t> encode_qtns(const Tensor& tensor) {
  static_assert(std::endian::native == std::endian::little, "QTNS writer assumes little-endian");
  std::vector<std::uint8_t> out = {'Q', 'T', 'N', 'S'};
  put_u32(out, kQtnsVersion);
  out.push_back(kQtnsFloat32);
  put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
  for (auto d : tensor.shape()) put_u32(out, static_cast<std::uint32_t>(d));
  for (double v : tensor.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Tensor decode_qtns(std::span<const std::uint8_t> bytes, std::size_t* consumed,
                   std::size_t base_offset) {
  Reader r(bytes, base_offset);
  r.need(4, "magic");
  auto magic = r.take(4);
  if (std::memcmp(magic.data(), "QTNS", 4) != 0) throw FormatError("bad QTNS magic", base_offset);
  const std::size_t version_at = r.absolute();
  const std::uint32_t version = r.u32("version");
  if (version != kQtnsVersion) {
    throw FormatError("unsupported QTNS version " + std::to_string(version), version_at);
  }
  const std::size_t dtype_at = r.absolute();
  if (r.u8("dtype") != kQtnsFloat32) throw FormatError("unsupported QTNS dtype", dtype_at);
  const std::size_t ndim_at = r.absolute();
  const std::uint32_t ndim = r.u32("ndim");
  if (ndim == 0) throw FormatError("QTNS ndim must be positive", ndim_at);
  r.need(4ull * ndim, "dims");
  Shape shape;
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    const std::size_t at = r.absolute();
    const std::uint32_t d = r.u32("dim");
    if (d == 0) throw FormatError("QTNS dimension " + std::to_string(i) + " is zero", at);
    shape.push_back(d);
    count *= d;
  }
  const std::size_t payload_at = r.absolute();
  if ((bytes.size() - r.pos()) / 4 < count) {
    throw FormatError("QTNS payload shorter than declared dims (" + std::to_string(count) +
                          " float32 values)",
                      payload_at);
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = static_cast<double>(std::bit_cast<float>(r.u32("payload")));
  }
  if (consumed) *consumed = r.pos();
  return Tensor(std::move(shape), std::move(data));
}

void save_tensor_file(const std::filesystem::path& path, const Tensor& tensor) {
  write_file(path, encode_qtns(tensor));
}

Tensor load_tensor_file(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  std::size_t used = 0;
  Tensor t = decode_qtns(bytes, &used);
  if (used != bytes.size()) {
    throw FormatError("QTNS payload longer than declared dims (" +
                          std::to_string(bytes.size() - used) + " trailing bytes)",
                      used);
  }
  return t;
}

std::filesystem::path bundle_index_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

void save_tensor_bundle(const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
  std::vector<std::uint8_t> bytes;
  nlohmann::ordered_json index = nlohmann::ordered_json::object();
  for (const auto& [name, t] : tensors) {
    if (index.contains(name)) throw ConfigError("duplicate tensor name " + name);
    index[name] = {{"offset", bytes.size()}, {"shape", t->shape()}};
    const auto rec = encode_qtns(*t);
    bytes.insert(bytes.end(), rec.begin(), rec.end());
  }
  write_file(path, bytes);
  const std::string text = index.dump(2) + "\n";
  write_file(bundle_index_path(path),
             std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::map<std::string, Tensor> load_tensor_bundle(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const auto index_bytes = read_file(bundle_index_path(path));
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(index_bytes.begin(), index_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad tensor bundle index: " + std::string(e.what()));
  }
  std::map<std::string, Tensor> out;
  for (const auto& [name, entry] : index.items()) {
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    if (offset >= bytes.size()) throw FormatError("bundle entry " + name + " past end", offset);
    Tensor t = decode_qtns(std::span(bytes).subspan(offset), nullptr, offset);
    if (t.shape() != entry.at("shape").get<Shape>()) {
      throw FormatError("bundle entry " + name + " shape disagrees with index", offset);
    }
    out.emplace(name, std::move(t));
  }
  return out;
}

void round_to_float32(Tensor& tensor) {
  for (auto& v : tensor.data()) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace qmcl
