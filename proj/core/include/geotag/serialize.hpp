#pragma once

#include <stdexcept>
#include <string>

#include "geotag/model.hpp"

namespace geotag {

// Bad magic, truncation, or garbage where a field should be.
class model_format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The file is well-formed but written by an unsupported format version.
class model_version_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Body bytes do not match the stored CRC32.
class model_checksum_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Binary little-endian model file:
//   magic "GTAG" | version u32 | config | vocabulary | body | crc32(body)
// Config field order: m, k, filter_widths (count + values), feature_maps,
// pool_window, conv_depth, dense_depth, dense_hidden, dropout f64,
// learning_rate f64, batch_size, epochs, threshold f64,
// embeddings_trainable u8, seed u64 (counts are u32).
// Vocabulary: count u32, then length-prefixed UTF-8 tokens in index order.
// Body: float32 parameter arrays - embedding rows, then branches by
// ascending width (layer by layer, weights then biases), then the dense
// stack, then the output layer.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace geotag
