#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ptq/tensor.hpp"

namespace ptq {

// NPY v1.0 codec restricted to little-endian f32/f64, C order.

Tensor load_npy(const std::filesystem::path& path);
Tensor decode_npy(std::string_view bytes);

void save_npy(const Tensor& tensor, const std::filesystem::path& path, Precision precision);
std::string encode_npy(const Tensor& tensor, Precision precision);

}  // namespace ptq
