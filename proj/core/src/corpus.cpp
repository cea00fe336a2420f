#include "geotag/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "geotag/rng.hpp"

namespace geotag {

namespace {

using json = nlohmann::json;

struct Codepoint {
    char32_t value;
    std::size_t begin;  // byte offset in the original text
    std::size_t end;
};

std::vector<Codepoint> decode_utf8(const std::string& text) {
    std::vector<Codepoint> out;
    out.reserve(text.size());
    std::size_t i = 0;
    const auto n = text.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len;
        char32_t cp;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            throw corpus_error("invalid UTF-8 byte at offset " + std::to_string(i));
        }
        if (i + len > n) throw corpus_error("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t j = 1; j < len; ++j) {
            const auto bj = static_cast<unsigned char>(text[i + j]);
            if ((bj & 0xC0) != 0x80)
                throw corpus_error("invalid UTF-8 continuation at offset " + std::to_string(i + j));
            cp = (cp << 6) | (bj & 0x3F);
        }
        out.push_back({cp, i, i + len});
        i += len;
    }
    return out;
}

void append_utf8(std::string& s, char32_t cp) {
    if (cp < 0x80) {
        s += static_cast<char>(cp);
    } else if (cp < 0x800) {
        s += static_cast<char>(0xC0 | (cp >> 6));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        s += static_cast<char>(0xE0 | (cp >> 12));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        s += static_cast<char>(0xF0 | (cp >> 18));
        s += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        s += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_ws_cp(char32_t cp) {
    switch (cp) {
        case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
        case 0xA0: case 0x2028: case 0x2029: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_apostrophe_cp(char32_t cp) { return cp == U'\'' || cp == 0x2019; }

bool in_range(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

// Symbols, emoji, controls, combining marks for them, and everything
// outside the BMP. These disappear before lowercasing.
bool is_emoji_or_symbol_cp(char32_t cp) {
    if (cp > 0xFFFF) return true;
    if (cp < 0x20 && cp != U'\t' && cp != U'\n' && cp != U'\r') return true;
    if (in_range(cp, 0x7F, 0x9F)) return true;
    return in_range(cp, 0x200B, 0x200F) || in_range(cp, 0x202A, 0x202E) ||
           in_range(cp, 0x2060, 0x206F) || in_range(cp, 0x20D0, 0x20FF) ||
           in_range(cp, 0x2100, 0x2BFF) || in_range(cp, 0x2E00, 0x2E7F) ||
           in_range(cp, 0xE000, 0xF8FF) || in_range(cp, 0xFE00, 0xFE0F) ||
           in_range(cp, 0xFE30, 0xFE4F) || in_range(cp, 0xFF00, 0xFFEF) ||
           in_range(cp, 0xFFF0, 0xFFFF);
}

bool is_punct_cp(char32_t cp) {
    if (cp < 0x80)
        return std::ispunct(static_cast<int>(cp)) && !is_apostrophe_cp(cp);
    if (in_range(cp, 0xA1, 0xBF) || cp == 0xD7 || cp == 0xF7) return true;
    if (in_range(cp, 0x2010, 0x2027) && cp != 0x2019) return true;
    if (in_range(cp, 0x2030, 0x205E)) return true;
    if (in_range(cp, 0x3001, 0x303F)) return true;
    return false;
}

// Letters/digits that may flank an intra-word apostrophe. Anything kept
// that is not whitespace/punct/apostrophe counts.
bool is_wordlike(char32_t cp) {
    return !is_ws_cp(cp) && !is_punct_cp(cp) && !is_apostrophe_cp(cp) && !is_emoji_or_symbol_cp(cp);
}

// Blanks URL byte ranges in place: scheme://... and www....
void blank_urls(std::string& text) {
    const auto n = text.size();
    std::size_t i = 0;
    auto is_alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)); };
    auto is_scheme_char = [&](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '.' || c == '-';
    };
    while (i < n) {
        std::size_t start = std::string::npos;
        if (is_alpha(text[i])) {
            std::size_t j = i + 1;
            while (j < n && is_scheme_char(text[j])) ++j;
            if (j + 2 < n && text[j] == ':' && text[j + 1] == '/' && text[j + 2] == '/')
                start = i;
        }
        if (start == std::string::npos && i + 3 < n &&
            (text[i] == 'w' || text[i] == 'W') && (text[i + 1] == 'w' || text[i + 1] == 'W') &&
            (text[i + 2] == 'w' || text[i + 2] == 'W') && text[i + 3] == '.') {
            // only at a token boundary, so "awww.no" survives
            if (i == 0 || std::isspace(static_cast<unsigned char>(text[i - 1]))) start = i;
        }
        if (start == std::string::npos) {
            ++i;
            continue;
        }
        std::size_t end = start;
        while (end < n && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
        for (std::size_t p = start; p < end; ++p) text[p] = ' ';
        i = end;
    }
}

}  // namespace

std::vector<OffsetToken> preprocess_with_offsets(const std::string& text) {
    std::string blanked = text;
    blank_urls(blanked);

    const auto cps = decode_utf8(blanked);

    // split into whitespace-delimited runs for mention/hashtag handling
    std::vector<OffsetToken> tokens;
    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && is_ws_cp(cps[i].value)) ++i;
        if (i >= cps.size()) break;
        std::size_t run_begin = i;
        while (i < cps.size() && !is_ws_cp(cps[i].value)) ++i;
        std::size_t run_end = i;  // [run_begin, run_end)

        if (cps[run_begin].value == U'@') continue;  // mention: drop the token
        if (cps[run_begin].value == U'#') ++run_begin;  // hashtag: keep the word

        struct KeptCp {
            char32_t value;
            std::size_t begin, end;
            bool wordlike;
        };
        std::vector<KeptCp> kept;
        for (std::size_t j = run_begin; j < run_end; ++j) {
            char32_t cp = cps[j].value;
            if (is_emoji_or_symbol_cp(cp)) continue;
            if (cp >= U'A' && cp <= U'Z') cp += 0x20;
            if (is_apostrophe_cp(cp)) {
                kept.push_back({U'\'', cps[j].begin, cps[j].end, false});
                continue;
            }
            if (is_punct_cp(cp) || is_ws_cp(cp)) continue;
            kept.push_back({cp, cps[j].begin, cps[j].end, is_wordlike(cp)});
        }

        OffsetToken tok;
        bool have_begin = false;
        for (std::size_t j = 0; j < kept.size(); ++j) {
            if (kept[j].value == U'\'') {
                const bool intra = j > 0 && kept[j - 1].wordlike && j + 1 < kept.size() &&
                                   kept[j + 1].wordlike;
                if (!intra) continue;
            }
            append_utf8(tok.text, kept[j].value);
            if (!have_begin) {
                tok.begin = kept[j].begin;
                have_begin = true;
            }
            tok.end = kept[j].end;
        }
        if (!tok.text.empty()) tokens.push_back(std::move(tok));
    }
    return tokens;
}

std::vector<std::string> preprocess(const RawRecord& raw) {
    std::vector<std::string> out;
    for (auto& tok : preprocess_with_offsets(raw.text)) out.push_back(std::move(tok.text));
    return out;
}

bool is_retweet_duplicate(const RawRecord& raw) {
    const auto& s = raw.text;
    std::size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i + 1 >= s.size()) return false;
    if (std::tolower(static_cast<unsigned char>(s[i])) != 'r' ||
        std::tolower(static_cast<unsigned char>(s[i + 1])) != 't')
        return false;
    const std::size_t after = i + 2;
    // "RT" must be a whole token
    return after == s.size() || std::isspace(static_cast<unsigned char>(s[after])) ||
           s[after] == '@' || s[after] == ':';
}

namespace {

AnnotatedTweet tweet_from_json(const json& record, std::size_t line_no) {
    AnnotatedTweet tweet;
    if (record.contains("tokens")) {
        if (!record.contains("mask") || !record["tokens"].is_array() || !record["mask"].is_array())
            throw corpus_error("line " + std::to_string(line_no) +
                               ": token record needs \"tokens\" and \"mask\" arrays");
        if (record["tokens"].empty())
            throw corpus_error("line " + std::to_string(line_no) + ": token record has no tokens");
        for (const auto& t : record["tokens"]) {
            if (!t.is_string() || t.get<std::string>().empty())
                throw corpus_error("line " + std::to_string(line_no) + ": empty or non-string token");
            tweet.tokens.push_back(t.get<std::string>());
        }
        for (const auto& v : record["mask"]) {
            if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
                throw corpus_error("line " + std::to_string(line_no) + ": mask values must be 0 or 1");
            tweet.mask.push_back(static_cast<std::uint8_t>(v.get<int>()));
        }
        if (tweet.tokens.size() != tweet.mask.size())
            throw corpus_error("line " + std::to_string(line_no) + ": record has " +
                               std::to_string(tweet.tokens.size()) + " tokens but " +
                               std::to_string(tweet.mask.size()) + " mask values");
        for (const auto& t : tweet.tokens) {
            for (char c : t)
                if (std::isupper(static_cast<unsigned char>(c)) ||
                    std::isspace(static_cast<unsigned char>(c)))
                    throw corpus_error("line " + std::to_string(line_no) +
                                       ": token \"" + t + "\" is not normalized");
            if (t.front() == '#' || t.front() == '@')
                throw corpus_error("line " + std::to_string(line_no) +
                                   ": token \"" + t + "\" keeps a marker character");
        }
        return tweet;
    }
    if (record.contains("text")) {
        if (!record["text"].is_string())
            throw corpus_error("line " + std::to_string(line_no) + ": \"text\" must be a string");
        std::vector<std::pair<std::size_t, std::size_t>> spans;
        if (record.contains("spans")) {
            for (const auto& span : record["spans"]) {
                if (!span.is_array() || span.size() != 2)
                    throw corpus_error("line " + std::to_string(line_no) +
                                       ": spans must be [begin,end] pairs");
                spans.emplace_back(span[0].get<std::size_t>(), span[1].get<std::size_t>());
            }
        }
        const auto tokens = preprocess_with_offsets(record["text"].get<std::string>());
        for (const auto& tok : tokens) {
            bool inside = false;
            for (auto [b, e] : spans)
                if (tok.begin >= b && tok.end <= e) {
                    inside = true;
                    break;
                }
            tweet.tokens.push_back(tok.text);
            tweet.mask.push_back(inside ? 1 : 0);
        }
        return tweet;
    }
    throw corpus_error("line " + std::to_string(line_no) +
                       ": record needs either \"tokens\" or \"text\"");
}

}  // namespace

Corpus load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw corpus_error("cannot open corpus file: " + path);

    Corpus corpus;
    corpus.provenance = path;
    std::set<std::vector<std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::exception& e) {
            throw corpus_error("line " + std::to_string(line_no) + ": " + e.what());
        }
        AnnotatedTweet tweet = tweet_from_json(record, line_no);
        if (tweet.tokens.empty()) continue;  // nothing survived preprocessing
        if (!seen.insert(tweet.tokens).second) continue;  // duplicate, first wins
        corpus.examples.push_back(std::move(tweet));
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw corpus_error("cannot write corpus file: " + path);
    for (const auto& ex : corpus.examples) {
        json record;
        record["tokens"] = ex.tokens;
        record["mask"] = json::array();
        for (auto m : ex.mask) record["mask"].push_back(static_cast<int>(m));
        out << record.dump() << '\n';
    }
    if (!out) throw corpus_error("write failed: " + path);
}

Gazetteer load_gazetteer(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw corpus_error("cannot open gazetteer file: " + path);
    Gazetteer gaz;
    std::set<std::vector<std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream iss(line);
        std::vector<std::string> entry;
        std::string tok;
        while (iss >> tok) {
            for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            entry.push_back(tok);
        }
        if (entry.empty()) continue;
        if (entry.size() > 4)
            throw corpus_error("gazetteer line " + std::to_string(line_no) +
                               ": entries are at most 4 tokens");
        if (seen.insert(entry).second) gaz.entries.push_back(std::move(entry));
    }
    return gaz;
}

std::vector<std::string> load_templates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw corpus_error("cannot open template file: " + path);
    std::vector<std::string> templates;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream iss(line);
        std::string tok, compact;
        while (iss >> tok) {
            if (!compact.empty()) compact += ' ';
            compact += tok;
        }
        if (!compact.empty()) templates.push_back(std::move(compact));
    }
    return templates;
}

Corpus synth_generate(const Gazetteer& gazetteer, const std::vector<std::string>& templates,
                      std::size_t n, std::uint64_t seed) {
    if (n < 1) throw corpus_error("synth_generate: n must be at least 1");
    if (templates.empty()) throw corpus_error("synth_generate: no templates");

    struct ParsedTemplate {
        std::vector<std::string> tokens;  // "{LOC}" marks a slot
        std::size_t slots = 0;
    };
    std::vector<ParsedTemplate> parsed;
    for (const auto& tmpl : templates) {
        ParsedTemplate p;
        std::istringstream iss(tmpl);
        std::string tok;
        while (iss >> tok) {
            if (tok == "{LOC}")
                ++p.slots;
            else
                for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            p.tokens.push_back(tok);
        }
        if (p.tokens.empty()) throw corpus_error("synth_generate: empty template");
        if (p.slots > 0 && gazetteer.entries.empty())
            throw corpus_error("synth_generate: template has a {LOC} slot but the gazetteer is empty");
        parsed.push_back(std::move(p));
    }

    Corpus corpus;
    corpus.provenance = "synth(seed=" + std::to_string(seed) + ")";
    Rng rng(derive_seed(seed, 0x53594e54));  // "SYNT"
    std::set<std::vector<std::string>> seen;
    const std::size_t max_attempts = n * 1000 + 1000;
    std::size_t attempts = 0;
    while (corpus.examples.size() < n) {
        if (++attempts > max_attempts)
            throw corpus_error("synth_generate: could not produce " + std::to_string(n) +
                               " distinct examples; enlarge the gazetteer or template set");
        const auto& tmpl = parsed[rng.index(parsed.size())];
        AnnotatedTweet tweet;
        for (const auto& tok : tmpl.tokens) {
            if (tok == "{LOC}") {
                const auto& entry = gazetteer.entries[rng.index(gazetteer.entries.size())];
                for (const auto& word : entry) {
                    tweet.tokens.push_back(word);
                    tweet.mask.push_back(1);
                }
            } else {
                tweet.tokens.push_back(tok);
                tweet.mask.push_back(0);
            }
        }
        if (seen.insert(tweet.tokens).second) corpus.examples.push_back(std::move(tweet));
    }
    return corpus;
}

}  // namespace geotag
