#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace geotag {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every architecture and training knob in one place. Defaults follow the
// reference setup: 60-token window, 100-dim embeddings, 2/3/4-gram filter
// branches with 128 maps each, pool window 5, one 60-neuron dense layer.
struct ModelConfig {
    std::size_t m = 60;                         // sequence length
    std::size_t k = 100;                        // embedding dimension
    std::vector<std::size_t> filter_widths = {2, 3, 4};
    std::size_t feature_maps = 128;
    std::size_t pool_window = 5;
    std::size_t conv_depth = 1;                 // conv layers per branch
    std::size_t dense_depth = 1;                // hidden dense layers
    std::size_t dense_hidden = 60;
    double dropout = 0.2;
    double learning_rate = 0.001;
    std::size_t batch_size = 50;
    std::size_t epochs = 100;
    double threshold = 0.5;
    bool embeddings_trainable = true;
    std::uint64_t seed = 0;

    // Throws config_error on any violated invariant (non-positive counts,
    // dropout outside [0,1), threshold outside (0,1), a filter stack that
    // would consume the whole sequence, ...).
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

// "key = value" per line, keys exactly the field names above;
// filter_widths is comma-separated. '#' starts a comment.
ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::string& path);
std::string config_to_string(const ModelConfig& config);

// Sets one field by name; unknown keys or unparsable values throw.
void apply_config_entry(ModelConfig& config, const std::string& key, const std::string& value);

// "2,3,4" -> {2,3,4}; sorted, duplicates rejected
std::vector<std::size_t> parse_widths(const std::string& text);

}  // namespace geotag
