#include "geotag/serialize.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

namespace geotag {

namespace {

constexpr char kMagic[4] = {'G', 'T', 'A', 'G'};

// Little-endian writers. The in-memory representation on every supported
// target is already little-endian; memcpy keeps it alias-safe.
template <typename T>
void put(std::string& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

void put_string(std::string& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
}

class Reader {
public:
    Reader(const std::string& data, std::size_t pos) : data_(data), pos_(pos) {}

    template <typename T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        if (pos_ + sizeof(T) > data_.size())
            throw model_format_error("model file truncated at offset " + std::to_string(pos_));
        T value;
        std::memcpy(&value, data_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }

    std::string get_string() {
        const auto len = get<std::uint32_t>();
        if (pos_ + len > data_.size())
            throw model_format_error("model file truncated at offset " + std::to_string(pos_));
        std::string s = data_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    void get_floats(std::vector<float>& out, std::size_t count) {
        if (pos_ + count * sizeof(float) > data_.size())
            throw model_format_error("model file truncated at offset " + std::to_string(pos_));
        out.resize(count);
        std::memcpy(out.data(), data_.data() + pos_, count * sizeof(float));
        pos_ += count * sizeof(float);
    }

    std::size_t pos() const { return pos_; }

private:
    const std::string& data_;
    std::size_t pos_;
};

void put_config(std::string& out, const ModelConfig& c) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.m));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.k));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.filter_widths.size()));
    for (auto h : c.filter_widths) put<std::uint32_t>(out, static_cast<std::uint32_t>(h));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.feature_maps));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.pool_window));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.conv_depth));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.dense_depth));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.dense_hidden));
    put<double>(out, c.dropout);
    put<double>(out, c.learning_rate);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.batch_size));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.epochs));
    put<double>(out, c.threshold);
    put<std::uint8_t>(out, c.embeddings_trainable ? 1 : 0);
    put<std::uint64_t>(out, c.seed);
}

ModelConfig get_config(Reader& r) {
    ModelConfig c;
    c.m = r.get<std::uint32_t>();
    c.k = r.get<std::uint32_t>();
    const auto n_widths = r.get<std::uint32_t>();
    c.filter_widths.clear();
    for (std::uint32_t i = 0; i < n_widths; ++i) c.filter_widths.push_back(r.get<std::uint32_t>());
    c.feature_maps = r.get<std::uint32_t>();
    c.pool_window = r.get<std::uint32_t>();
    c.conv_depth = r.get<std::uint32_t>();
    c.dense_depth = r.get<std::uint32_t>();
    c.dense_hidden = r.get<std::uint32_t>();
    c.dropout = r.get<double>();
    c.learning_rate = r.get<double>();
    c.batch_size = r.get<std::uint32_t>();
    c.epochs = r.get<std::uint32_t>();
    c.threshold = r.get<double>();
    c.embeddings_trainable = r.get<std::uint8_t>() != 0;
    c.seed = r.get<std::uint64_t>();
    return c;
}

void put_float_array(std::string& out, const std::vector<float>& v) {
    out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(float));
}

std::uint32_t crc_of(const std::string& data, std::size_t begin, std::size_t end) {
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data() + begin),
                static_cast<uInt>(end - begin));
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
    std::string out;
    out.append(kMagic, 4);
    put<std::uint32_t>(out, kModelFormatVersion);
    put_config(out, model.config);

    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.vocab.size()));
    for (const auto& word : model.vocab.words()) put_string(out, word);

    const std::size_t body_begin = out.size();
    put_float_array(out, model.embedding.data);
    for (const auto& branch : model.branches)
        for (const auto& layer : branch.layers) {
            put_float_array(out, layer.weights);
            put_float_array(out, layer.biases);
        }
    for (const auto& layer : model.dense_stack) {
        put_float_array(out, layer.weights);
        put_float_array(out, layer.biases);
    }
    put_float_array(out, model.output_layer.weights);
    put_float_array(out, model.output_layer.biases);

    put<std::uint32_t>(out, crc_of(out, body_begin, out.size()));

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw model_format_error("cannot write model file: " + path);
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw model_format_error("write failed: " + path);
}

Model load_model(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw model_format_error("cannot open model file: " + path);
    std::ostringstream ss;
    ss << file.rdbuf();
    const std::string data = ss.str();

    if (data.size() < 8) throw model_format_error("model file truncated: " + path);
    if (std::memcmp(data.data(), kMagic, 4) != 0)
        throw model_format_error("bad magic bytes, not a model file: " + path);

    Reader r(data, 4);
    const auto version = r.get<std::uint32_t>();
    if (version != kModelFormatVersion)
        throw model_version_error("unsupported model format version " + std::to_string(version) +
                                  " (expected " + std::to_string(kModelFormatVersion) + ")");

    Model model;
    model.config = get_config(r);
    try {
        model.config.validate();
    } catch (const config_error& e) {
        throw model_format_error(std::string("model config invalid: ") + e.what());
    }

    const auto vocab_count = r.get<std::uint32_t>();
    if (vocab_count < 2) throw model_format_error("vocabulary must include PAD and OOV");
    for (std::uint32_t i = 0; i < vocab_count; ++i) {
        const std::string word = r.get_string();
        if (i == kPadIndex) {
            if (word != kPadToken) throw model_format_error("vocabulary row 0 is not PAD");
        } else if (i == kOovIndex) {
            if (word != kOovToken) throw model_format_error("vocabulary row 1 is not OOV");
        } else if (model.vocab.add(word) != i) {
            throw model_format_error("duplicate vocabulary token: " + word);
        }
    }

    const std::size_t body_begin = r.pos();

    model.embedding.vocab_size = vocab_count;
    model.embedding.dim = model.config.k;
    r.get_floats(model.embedding.data, vocab_count * model.config.k);

    for (const auto h : model.config.filter_widths) {
        ConvBranch branch;
        branch.width = h;
        std::size_t in_dim = model.config.k;
        for (std::size_t l = 0; l < model.config.conv_depth; ++l) {
            ConvLayer layer;
            layer.width = h;
            layer.in_dim = in_dim;
            layer.maps = model.config.feature_maps;
            r.get_floats(layer.weights, layer.maps * h * in_dim);
            r.get_floats(layer.biases, layer.maps);
            branch.layers.push_back(std::move(layer));
            in_dim = model.config.feature_maps;
        }
        model.branches.push_back(std::move(branch));
    }

    std::size_t in_dim = flatten_size(model.config);
    for (std::size_t l = 0; l < model.config.dense_depth; ++l) {
        DenseLayer layer;
        layer.in_dim = in_dim;
        layer.out_dim = model.config.dense_hidden;
        layer.activation = Activation::Relu;
        r.get_floats(layer.weights, layer.out_dim * layer.in_dim);
        r.get_floats(layer.biases, layer.out_dim);
        model.dense_stack.push_back(std::move(layer));
        in_dim = model.config.dense_hidden;
    }

    model.output_layer.in_dim = in_dim;
    model.output_layer.out_dim = model.config.m;
    model.output_layer.activation = Activation::Sigmoid;
    r.get_floats(model.output_layer.weights, model.config.m * in_dim);
    r.get_floats(model.output_layer.biases, model.config.m);

    const std::size_t body_end = r.pos();
    const auto stored_crc = r.get<std::uint32_t>();
    if (r.pos() != data.size())
        throw model_format_error("trailing bytes after model trailer: " + path);
    if (crc_of(data, body_begin, body_end) != stored_crc)
        throw model_checksum_error("model body CRC mismatch: " + path);

    return model;
}

}  // namespace geotag
