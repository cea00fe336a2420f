#include "geotag/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "geotag/rng.hpp"

namespace geotag {

Vocabulary::Vocabulary() {
    index_to_word_ = {kPadToken, kOovToken};
    word_to_index_ = {{kPadToken, kPadIndex}, {kOovToken, kOovIndex}};
}

std::uint32_t Vocabulary::lookup(const std::string& token) const {
    auto it = word_to_index_.find(token);
    return it == word_to_index_.end() ? kOovIndex : it->second;
}

std::uint32_t Vocabulary::add(const std::string& token) {
    auto it = word_to_index_.find(token);
    if (it != word_to_index_.end()) return it->second;
    const auto index = static_cast<std::uint32_t>(index_to_word_.size());
    index_to_word_.push_back(token);
    word_to_index_.emplace(token, index);
    return index;
}

bool Vocabulary::contains(const std::string& token) const {
    return word_to_index_.count(token) > 0;
}

Vocabulary build_vocab(const Corpus& corpus) {
    std::set<std::string> distinct;
    for (const auto& ex : corpus.examples)
        distinct.insert(ex.tokens.begin(), ex.tokens.end());
    Vocabulary vocab;
    for (const auto& word : distinct) vocab.add(word);
    return vocab;
}

PretrainedMap load_pretrained(const std::string& path, std::size_t k) {
    std::ifstream in(path);
    if (!in) throw corpus_error("cannot open embedding file: " + path);
    PretrainedMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream iss(line);
        std::string word;
        iss >> word;
        if (word.empty())
            throw corpus_error("embedding line " + std::to_string(line_no) + ": missing token");
        std::vector<float> vec;
        vec.reserve(k);
        float v;
        while (iss >> v) vec.push_back(v);
        if (!iss.eof())
            throw corpus_error("embedding line " + std::to_string(line_no) +
                               ": non-numeric vector component");
        if (vec.size() != k)
            throw corpus_error("embedding line " + std::to_string(line_no) + ": expected " +
                               std::to_string(k) + " components, got " + std::to_string(vec.size()));
        map[word] = std::move(vec);
    }
    return map;
}

LookupBuild build_lookup(const Vocabulary& vocab, const PretrainedMap& pretrained,
                         std::size_t k, std::uint64_t seed) {
    LookupBuild build;
    build.matrix.vocab_size = vocab.size();
    build.matrix.dim = k;
    build.matrix.data.assign(vocab.size() * k, 0.0f);

    Rng rng(derive_seed(seed, 0x454d4244));  // "EMBD"
    for (std::uint32_t i = kOovIndex; i < vocab.size(); ++i) {
        float* row = build.matrix.row(i);
        const auto it = i == kOovIndex ? pretrained.end() : pretrained.find(vocab.word(i));
        if (it != pretrained.end()) {
            std::copy(it->second.begin(), it->second.end(), row);
            ++build.copied_rows;
        } else {
            for (std::size_t j = 0; j < k; ++j)
                row[j] = static_cast<float>(rng.uniform(-0.05, 0.05));
        }
    }
    return build;
}

EncodedTweet encode(const AnnotatedTweet& tweet, const Vocabulary& vocab, std::size_t m) {
    if (tweet.tokens.empty()) throw corpus_error("encode: tweet has no tokens");
    if (tweet.tokens.size() != tweet.mask.size())
        throw corpus_error("encode: token/mask length mismatch");
    EncodedTweet enc;
    enc.true_length = std::min(tweet.tokens.size(), m);
    enc.indices.assign(m, kPadIndex);
    enc.labels.assign(m, 0);
    for (std::size_t i = 0; i < enc.true_length; ++i) {
        enc.indices[i] = vocab.lookup(tweet.tokens[i]);
        enc.labels[i] = tweet.mask[i];
    }
    return enc;
}

Matrix embed(const EncodedTweet& enc, const EmbeddingMatrix& lookup) {
    Matrix out(enc.indices.size(), lookup.dim);
    for (std::size_t i = 0; i < enc.indices.size(); ++i) {
        const auto idx = enc.indices[i];
        if (idx >= lookup.vocab_size)
            throw corpus_error("embed: index " + std::to_string(idx) +
                               " outside vocabulary of size " + std::to_string(lookup.vocab_size));
        const float* row = lookup.row(idx);
        double* dst = out.row_ptr(i);
        for (std::size_t j = 0; j < lookup.dim; ++j) dst[j] = row[j];
    }
    return out;
}

}  // namespace geotag
