#include "geotag/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace geotag {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    try {
        const long long v = std::stoll(value);
        if (v < 0) throw config_error(key + " must be non-negative, got " + value);
        return static_cast<std::size_t>(v);
    } catch (const config_error&) {
        throw;
    } catch (const std::exception&) {
        throw config_error("cannot parse " + key + " value: " + value);
    }
}

double parse_real(const std::string& key, const std::string& value) {
    try {
        return std::stod(value);
    } catch (const std::exception&) {
        throw config_error("cannot parse " + key + " value: " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw config_error("cannot parse " + key + " value: " + value);
}

}  // namespace

std::vector<std::size_t> parse_widths(const std::string& text) {
    std::vector<std::size_t> widths;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        widths.push_back(parse_count("filter_widths", part));
    }
    if (widths.empty()) throw config_error("filter_widths is empty");
    std::sort(widths.begin(), widths.end());
    if (std::adjacent_find(widths.begin(), widths.end()) != widths.end())
        throw config_error("filter_widths has duplicates: " + text);
    return widths;
}

void ModelConfig::validate() const {
    if (m < 1) throw config_error("m must be positive");
    if (k < 1) throw config_error("K must be positive");
    if (filter_widths.empty()) throw config_error("filter_widths is empty");
    if (feature_maps < 1) throw config_error("feature_maps must be positive");
    if (pool_window < 1) throw config_error("pool_window must be positive");
    if (conv_depth < 1) throw config_error("conv_depth must be positive");
    if (dense_depth < 1) throw config_error("dense_depth must be positive");
    if (dense_hidden < 1) throw config_error("dense_hidden must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw config_error("dropout must be in [0, 1)");
    if (!(threshold > 0.0 && threshold < 1.0)) throw config_error("threshold must be in (0, 1)");
    if (!(learning_rate > 0.0)) throw config_error("learning_rate must be positive");
    if (batch_size < 1) throw config_error("batch_size must be positive");
    for (const auto h : filter_widths) {
        if (h < 1) throw config_error("filter width must be positive");
        if (h > m)
            throw config_error("filter width " + std::to_string(h) + " exceeds sequence length " +
                               std::to_string(m));
        // every conv layer shortens the sequence by h-1
        if (conv_depth * (h - 1) >= m)
            throw config_error("conv stack of depth " + std::to_string(conv_depth) +
                               " at width " + std::to_string(h) + " consumes the whole sequence");
    }
}

void apply_config_entry(ModelConfig& config, const std::string& key, const std::string& value) {
    if (key == "m") config.m = parse_count(key, value);
    else if (key == "K") config.k = parse_count(key, value);
    else if (key == "filter_widths") config.filter_widths = parse_widths(value);
    else if (key == "feature_maps") config.feature_maps = parse_count(key, value);
    else if (key == "pool_window") config.pool_window = parse_count(key, value);
    else if (key == "conv_depth") config.conv_depth = parse_count(key, value);
    else if (key == "dense_depth") config.dense_depth = parse_count(key, value);
    else if (key == "dense_hidden") config.dense_hidden = parse_count(key, value);
    else if (key == "dropout") config.dropout = parse_real(key, value);
    else if (key == "learning_rate") config.learning_rate = parse_real(key, value);
    else if (key == "batch_size") config.batch_size = parse_count(key, value);
    else if (key == "epochs") config.epochs = parse_count(key, value);
    else if (key == "threshold") config.threshold = parse_real(key, value);
    else if (key == "embeddings_trainable") config.embeddings_trainable = parse_bool(key, value);
    else if (key == "seed") config.seed = parse_count(key, value);
    else throw config_error("unknown config key: " + key);
}

ModelConfig parse_config(const std::string& text) {
    ModelConfig config;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
        try {
            apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const config_error& e) {
            throw config_error("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    config.validate();
    return config;
}

ModelConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_string(const ModelConfig& config) {
    std::ostringstream os;
    os << "m = " << config.m << '\n';
    os << "K = " << config.k << '\n';
    os << "filter_widths = ";
    for (std::size_t i = 0; i < config.filter_widths.size(); ++i)
        os << (i ? "," : "") << config.filter_widths[i];
    os << '\n';
    os << "feature_maps = " << config.feature_maps << '\n';
    os << "pool_window = " << config.pool_window << '\n';
    os << "conv_depth = " << config.conv_depth << '\n';
    os << "dense_depth = " << config.dense_depth << '\n';
    os << "dense_hidden = " << config.dense_hidden << '\n';
    os << "dropout = " << config.dropout << '\n';
    os << "learning_rate = " << config.learning_rate << '\n';
    os << "batch_size = " << config.batch_size << '\n';
    os << "epochs = " << config.epochs << '\n';
    os << "threshold = " << config.threshold << '\n';
    os << "embeddings_trainable = " << (config.embeddings_trainable ? "true" : "false") << '\n';
    os << "seed = " << config.seed << '\n';
    return os.str();
}

}  // namespace geotag
