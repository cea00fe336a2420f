#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "geotag/corpus.hpp"
#include "geotag/tensor.hpp"

namespace geotag {

inline constexpr std::uint32_t kPadIndex = 0;
inline constexpr std::uint32_t kOovIndex = 1;
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kOovToken = "<oov>";

// Token -> dense index. 0 is PAD, 1 is OOV; corpus tokenization can produce
// neither (angle brackets never survive preprocessing).
class Vocabulary {
public:
    Vocabulary();

    // index of token, or kOovIndex if unseen
    std::uint32_t lookup(const std::string& token) const;

    // adds token if absent, returns its index
    std::uint32_t add(const std::string& token);

    bool contains(const std::string& token) const;
    std::size_t size() const { return index_to_word_.size(); }
    const std::string& word(std::uint32_t index) const { return index_to_word_.at(index); }
    const std::vector<std::string>& words() const { return index_to_word_; }

private:
    std::unordered_map<std::string, std::uint32_t> word_to_index_;
    std::vector<std::string> index_to_word_;
};

// |W| x K lookup table, row-major float32. Row 0 (PAD) stays zero.
struct EmbeddingMatrix {
    std::size_t vocab_size = 0;
    std::size_t dim = 0;
    std::vector<float> data;

    float* row(std::size_t i) { return data.data() + i * dim; }
    const float* row(std::size_t i) const { return data.data() + i * dim; }
};

// Fixed-length index form of a tweet: exactly m indices, PAD after
// true_length, plus the aligned 0/1 labels padded with 0.
struct EncodedTweet {
    std::vector<std::uint32_t> indices;
    std::vector<std::uint8_t> labels;
    std::size_t true_length = 0;
};

using PretrainedMap = std::unordered_map<std::string, std::vector<float>>;

struct LookupBuild {
    EmbeddingMatrix matrix;
    std::size_t copied_rows = 0;  // rows taken verbatim from the pretrained map

    double coverage() const {
        return matrix.vocab_size > 2
                   ? static_cast<double>(copied_rows) / static_cast<double>(matrix.vocab_size - 2)
                   : 0.0;
    }
};

// PAD, OOV, then every distinct corpus token in lexicographic order.
Vocabulary build_vocab(const Corpus& corpus);

// Plain text embedding file: "token v1 v2 ... vK" per line. Lines whose
// vector arity differs from K are an error naming the line.
PretrainedMap load_pretrained(const std::string& path, std::size_t k);

// Pretrained rows are copied; OOV and uncovered words are U[-0.05, 0.05]
// draws from seed; PAD is zero.
LookupBuild build_lookup(const Vocabulary& vocab, const PretrainedMap& pretrained,
                         std::size_t k, std::uint64_t seed);

// Truncates to m, maps unseen tokens to OOV, post-pads indices with PAD and
// labels with 0.
EncodedTweet encode(const AnnotatedTweet& tweet, const Vocabulary& vocab, std::size_t m);

// The m x K tweet matrix: row i is the embedding of indices[i]. Padded rows
// come out zero. An index outside the table throws corpus_error.
Matrix embed(const EncodedTweet& enc, const EmbeddingMatrix& lookup);

}  // namespace geotag
