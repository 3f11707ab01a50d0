#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qmcl/tensor.hpp"

namespace qmcl {

// QTNS layout, all integers little-endian:
//   "QTNS" | u32 version = 1 | u8 dtype = 1 (float32) | u32 ndim |
//   ndim x u32 dim | prod(dims) x float32 payload, row-major.
inline constexpr std::uint32_t kQtnsVersion = 1;
inline constexpr std::uint8_t kQtnsFloat32 = 1;

std::vector<std::uint8_t> encode_qtns(const Tensor& tensor);

/// Decodes one record starting at `bytes[0]`. Sets *consumed to the record
/// length. `base_offset` is added to offsets reported in FormatError.
Tensor decode_qtns(std::span<const std::uint8_t> bytes, std::size_t* consumed = nullptr,
                   std::size_t base_offset = 0);

void save_tensor_file(const std::filesystem::path& path, const Tensor& tensor);

/// Reads a file holding exactly one QTNS record; trailing bytes are an error.
Tensor load_tensor_file(const std::filesystem::path& path);

/// Named tensors stored back to back as QTNS records in `path`, with a JSON
/// index at `path` + ".json" mapping each name to its byte offset and shape.
void save_tensor_bundle(const std::filesystem::path& path,
                        const std::vector<std::pair<std::string, const Tensor*>>& tensors);
std::map<std::string, Tensor> load_tensor_bundle(const std::filesystem::path& path);

std::filesystem::path bundle_index_path(const std::filesystem::path& path);

/// Rounds every entry to the nearest float32, the precision files store.
void round_to_float32(Tensor& tensor);

}  // namespace qmcl
