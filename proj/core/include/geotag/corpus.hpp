#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace geotag {

class corpus_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RawRecord {
    std::string text;  // UTF-8, non-empty after trimming
};

// A tokenized tweet with one binary label per token (1 = location word).
struct AnnotatedTweet {
    std::vector<std::string> tokens;
    std::vector<std::uint8_t> mask;

    bool operator==(const AnnotatedTweet&) const = default;
};

struct Corpus {
    std::vector<AnnotatedTweet> examples;
    std::string provenance;
};

// Place names used by the synthetic generator, each 1..4 lowercase tokens.
struct Gazetteer {
    std::vector<std::vector<std::string>> entries;
};

// A token together with the byte range it occupied in the original text,
// so character-span annotations can be mapped onto tokens.
struct OffsetToken {
    std::string text;
    std::size_t begin = 0;  // byte offset into the raw text
    std::size_t end = 0;    // one past the last byte
};

// Normalizes tweet text: URL and @-mention removal, '#' stripping,
// emoji/symbol removal, lowercasing, punctuation removal (intra-word
// apostrophes survive), whitespace splitting. An empty result means
// nothing survived; malformed input (invalid UTF-8) throws corpus_error.
std::vector<std::string> preprocess(const RawRecord& raw);

// Same pipeline, but each token carries its original byte range.
std::vector<OffsetToken> preprocess_with_offsets(const std::string& text);

// True iff the text begins with the token "RT" (case-insensitive),
// optionally followed by a mention.
bool is_retweet_duplicate(const RawRecord& raw);

// Reads the JSONL corpus format: per line either
//   {"tokens": [...], "mask": [0|1...]}            validated as-is
//   {"text": "...", "spans": [[begin,end]...]}     preprocessed; a token is
//                                                  labeled 1 iff its byte
//                                                  range lies entirely
//                                                  inside some span
// Records that normalize to zero tokens are discarded. Duplicate token
// sequences are dropped, first occurrence wins.
Corpus load_corpus(const std::string& path);

// Writes the token+mask JSONL form; load_corpus(save_corpus(c)) == c.
void save_corpus(const Corpus& corpus, const std::string& path);

// One entry per line, tokens space-separated, lowercased on load.
Gazetteer load_gazetteer(const std::string& path);

// One template per line; "{LOC}" tokens are slots. '#' starts a comment.
std::vector<std::string> load_templates(const std::string& path);

// Deterministically instantiates templates with gazetteer entries until n
// distinct examples exist. The mask is 1 exactly on substituted tokens.
Corpus synth_generate(const Gazetteer& gazetteer,
                      const std::vector<std::string>& templates,
                      std::size_t n, std::uint64_t seed);

}  // namespace geotag
