#pragma once

#include "dgdmn/tensor.hpp"

#include <string>
#include <vector>

namespace dgdmn {

// IDX (MNIST-style) binary readers. Headers are big-endian: magic, then one
// u32 per dimension, then the unsigned-byte payload.

// Expects magic 0x00000803 (n, rows, cols); pixel bytes are divided by 255
// into [0,1]. Returns a rank-3 tensor (n, rows, cols).
Tensor load_idx_images(const std::string& path);

// Expects magic 0x00000801; returns raw byte values.
std::vector<std::size_t> load_idx_labels(const std::string& path);

} // namespace dgdmn
