#pragma once

// Versioned binary model container (see docs/model_format.md).

#include "mgcmn/model.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgcmn {

class ModelFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::array<char, 8> kModelMagic{'M', 'G', 'C', 'M', 'N', 'M', 'D', 'L'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Contents of a model container.
struct ModelFile {
    std::string config_text;
    std::vector<ModelLayer> layers;
};

namespace detail {

class ByteWriter {
public:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        bytes_.insert(bytes_.end(), b, b + n);
    }
    template <typename T>
    void le(T v) {
        static_assert(std::is_unsigned_v<T>);
        for (std::size_t i = 0; i < sizeof(T); ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double d) { le(std::bit_cast<std::uint64_t>(d)); }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& b) : bytes_(b) {}
    const std::uint8_t* take(std::size_t n) {
        if (n > bytes_.size() - pos_) throw ModelFormatError("model file truncated at byte " + std::to_string(pos_));
        const auto* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }
    template <typename T>
    T le() {
        const auto* p = take(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
        return v;
    }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
    bool done() const { return pos_ == bytes_.size(); }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> serialize_model(const Model& model, const std::string& config_text) {
    detail::ByteWriter w;
    w.raw(kModelMagic.data(), kModelMagic.size());
    w.le<std::uint32_t>(kModelFormatVersion);
    w.le<std::uint32_t>(static_cast<std::uint32_t>(config_text.size()));
    w.raw(config_text.data(), config_text.size());
    w.le<std::uint32_t>(static_cast<std::uint32_t>(model.layers.size()));
    for (const auto& layer : model.layers) {
        w.le<std::uint8_t>(static_cast<std::uint8_t>(layer.role));
        w.le<std::uint8_t>(static_cast<std::uint8_t>(layer.activation));
        w.le<std::uint16_t>(0);
        w.le<std::uint64_t>(layer.params.w.rows());
        w.le<std::uint64_t>(layer.params.w.cols());
        for (double v : layer.params.w.values()) w.f64(v);
    }
    return w.bytes();
}

inline ModelFile deserialize_model(const std::vector<std::uint8_t>& bytes) {
    detail::ByteReader r(bytes);
    if (std::memcmp(r.take(kModelMagic.size()), kModelMagic.data(), kModelMagic.size()) != 0)
        throw ModelFormatError("not a model file (bad magic)");
    const auto version = r.le<std::uint32_t>();
    if (version != kModelFormatVersion)
        throw ModelFormatError("unsupported model format version " + std::to_string(version));
    ModelFile out;
    const auto config_len = r.le<std::uint32_t>();
    const auto* cfg = r.take(config_len);
    out.config_text.assign(reinterpret_cast<const char*>(cfg), config_len);
    const auto n_layers = r.le<std::uint32_t>();
    for (std::uint32_t k = 0; k < n_layers; ++k) {
        const auto role = r.le<std::uint8_t>();
        const auto act = r.le<std::uint8_t>();
        if (r.le<std::uint16_t>() != 0) throw ModelFormatError("layer " + std::to_string(k) + ": reserved field not zero");
        if (role > static_cast<std::uint8_t>(LayerRole::kMlp))
            throw ModelFormatError("layer " + std::to_string(k) + ": unknown role " + std::to_string(role));
        if (act > static_cast<std::uint8_t>(Activation::kSoftmax))
            throw ModelFormatError("layer " + std::to_string(k) + ": unknown activation " + std::to_string(act));
        const auto rows = r.le<std::uint64_t>();
        const auto cols = r.le<std::uint64_t>();
        if (rows == 0 || cols == 0 || rows > (bytes.size() / 8) / cols)
            throw ModelFormatError("layer " + std::to_string(k) + ": implausible shape");
        std::vector<double> values(rows * cols);
        for (auto& v : values) v = r.f64();
        out.layers.push_back({static_cast<LayerRole>(role), static_cast<Activation>(act),
                              LayerParams(DenseMatrix(rows, cols, std::move(values)))});
    }
    if (!r.done()) throw ModelFormatError("trailing bytes after the last layer");
    return out;
}

inline void save_model(const std::filesystem::path& path, const Model& model, const std::string& config_text) {
    const auto bytes = serialize_model(model, config_text);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write model file " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("error writing model file " + path.string());
}

inline ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelFormatError("cannot open model file " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace mgcmn
