#pragma once

#include <cstring>
#include <fstream>
#include <map>
#include <numeric>

#include "mmsc/common.hpp"

namespace mmsc::ad {

inline size_t numel(const std::vector<int>& shape) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    return n;
}

// A named dense parameter with its Adam state. Non-trainable entries (e.g.
// batchnorm running statistics) live here too so checkpoints capture them.
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<double> adam_m;
    std::vector<double> adam_v;
    uint64_t adam_step = 0;
    bool trainable = true;
    bool has_grad = false;

    size_t size() const { return value.size(); }
};

struct AdamConfig {
    double lr = 0.0005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const {
        if (!(lr > 0.0)) throw InvalidInput("AdamConfig: lr must be positive");
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
            throw InvalidInput("AdamConfig: betas must lie in [0, 1)");
    }
};

class ParamStore {
public:
    Param& create(const std::string& name, std::vector<int> shape, std::vector<double> init,
                  bool trainable = true) {
        if (params_.count(name)) throw InvalidState("ParamStore: duplicate name " + name);
        if (init.size() != numel(shape)) throw InvalidShape("ParamStore: init size mismatch");
        Param p;
        p.name = name;
        p.shape = std::move(shape);
        p.value = std::move(init);
        p.grad.assign(p.value.size(), 0.0);
        p.adam_m.assign(p.value.size(), 0.0);
        p.adam_v.assign(p.value.size(), 0.0);
        p.trainable = trainable;
        auto [it, _] = params_.emplace(name, std::move(p));
        return it->second;
    }

    Param& at(const std::string& name) {
        auto it = params_.find(name);
        if (it == params_.end()) throw InvalidState("ParamStore: unknown parameter " + name);
        return it->second;
    }
    const Param& at(const std::string& name) const {
        auto it = params_.find(name);
        if (it == params_.end()) throw InvalidState("ParamStore: unknown parameter " + name);
        return it->second;
    }
    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    // Sorted by name, so iteration order is deterministic.
    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }
    size_t size() const { return params_.size(); }

    void zero_grads() {
        for (auto& [_, p] : params_) {
            std::fill(p.grad.begin(), p.grad.end(), 0.0);
            p.has_grad = false;
        }
    }

    // FNV-1a over the raw value bytes; used by the freezing contract tests.
    uint64_t checksum() const {
        uint64_t h = 0xcbf29ce484222325ull;
        for (const auto& [name, p] : params_) {
            for (unsigned char c : name) {
                h ^= c;
                h *= 0x100000001b3ull;
            }
            const auto* bytes = reinterpret_cast<const unsigned char*>(p.value.data());
            for (size_t i = 0; i < p.value.size() * sizeof(double); ++i) {
                h ^= bytes[i];
                h *= 0x100000001b3ull;
            }
        }
        return h;
    }

private:
    std::map<std::string, Param> params_;
};

// Standard Adam update with bias correction; gradients are consumed and
// zeroed. Every trainable parameter must have received a gradient.
inline void adam_step(ParamStore& store, const AdamConfig& cfg) {
    cfg.validate();
    for (auto& [name, p] : store) {
        if (!p.trainable) continue;
        if (!p.has_grad) throw InvalidState("adam_step: missing gradient for " + name);
    }
    for (auto& [name, p] : store) {
        if (!p.trainable) continue;
        p.adam_step += 1;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p.adam_step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p.adam_step));
        for (size_t i = 0; i < p.value.size(); ++i) {
            double g = p.grad[i];
            p.adam_m[i] = cfg.beta1 * p.adam_m[i] + (1.0 - cfg.beta1) * g;
            p.adam_v[i] = cfg.beta2 * p.adam_v[i] + (1.0 - cfg.beta2) * g * g;
            double mhat = p.adam_m[i] / bc1;
            double vhat = p.adam_v[i] / bc2;
            p.value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
        std::fill(p.grad.begin(), p.grad.end(), 0.0);
        p.has_grad = false;
    }
}

// ---------------------------------------------------------------------------
// Checkpoint file: "MMSCPK01" magic, then each parameter sorted by name with
// its shape, flags, values and Adam state as little-endian doubles. The
// format is stable across runs and documented in the README.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw FormatError("checkpoint: truncated file");
    return v;
}
inline void write_doubles(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}
inline void read_doubles(std::istream& is, std::vector<double>& v, size_t n) {
    v.resize(n);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw FormatError("checkpoint: truncated data block");
}

}  // namespace detail

inline constexpr char kCheckpointMagic[9] = "MMSCPK01";

inline void save_checkpoint(const ParamStore& store, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write checkpoint " + path);
    os.write(kCheckpointMagic, 8);
    detail::write_pod<uint64_t>(os, store.size());
    for (const auto& [name, p] : store) {
        detail::write_pod<uint32_t>(os, static_cast<uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_pod<uint8_t>(os, p.trainable ? 1 : 0);
        detail::write_pod<uint32_t>(os, static_cast<uint32_t>(p.shape.size()));
        for (int d : p.shape) detail::write_pod<int32_t>(os, d);
        detail::write_pod<uint64_t>(os, p.adam_step);
        detail::write_doubles(os, p.value);
        detail::write_doubles(os, p.adam_m);
        detail::write_doubles(os, p.adam_v);
    }
    if (!os) throw IoError("short write on checkpoint " + path);
}

// Loads into an existing store: shapes must match the architecture that
// created it (verified entry by entry).
inline void load_checkpoint(ParamStore& store, const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot read checkpoint " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw FormatError("checkpoint: bad magic in " + path);
    uint64_t count = detail::read_pod<uint64_t>(is);
    if (count != store.size())
        throw FormatError("checkpoint: parameter count mismatch in " + path);
    for (uint64_t e = 0; e < count; ++e) {
        auto name_len = detail::read_pod<uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        if (!is) throw FormatError("checkpoint: truncated name");
        Param& p = store.at(name);
        p.trainable = detail::read_pod<uint8_t>(is) != 0;
        auto ndims = detail::read_pod<uint32_t>(is);
        std::vector<int> shape(ndims);
        for (auto& d : shape) d = detail::read_pod<int32_t>(is);
        if (shape != p.shape) throw FormatError("checkpoint: shape mismatch for " + name);
        p.adam_step = detail::read_pod<uint64_t>(is);
        size_t n = numel(shape);
        detail::read_doubles(is, p.value, n);
        detail::read_doubles(is, p.adam_m, n);
        detail::read_doubles(is, p.adam_v, n);
        std::fill(p.grad.begin(), p.grad.end(), 0.0);
        p.has_grad = false;
    }
}

}  // namespace mmsc::ad
