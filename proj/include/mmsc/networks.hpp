#pragma once

#include "mmsc/autodiff.hpp"
#include "mmsc/presets.hpp"

// The five networks: point-set encoder/decoder, their variational twin,
// and the latent-space generator/discriminator. Each network owns its
// parameter store; freezing a network pins batchnorm to the running
// statistics and locks it out of optimizer updates.

namespace mmsc::nets {

using ad::Graph;
using ad::Param;
using ad::ParamStore;
using ad::Tensor;

// Shape code: the compact latent representation of a point set.
struct LatentCode {
    std::vector<double> values;

    explicit LatentCode(std::vector<double> v) : values(std::move(v)) {
        for (double x : values)
            if (!std::isfinite(x)) throw InvalidInput("LatentCode: non-finite entry");
    }
    size_t size() const { return values.size(); }
};

// Condition vector indexing the completion mode.
struct ModeVector {
    std::vector<double> values;

    explicit ModeVector(std::vector<double> v) : values(std::move(v)) {
        for (double x : values)
            if (!std::isfinite(x)) throw InvalidInput("ModeVector: non-finite entry");
    }
    size_t size() const { return values.size(); }
};

namespace detail {

inline std::vector<double> kaiming_uniform(Rng& rng, int fan_in, size_t n) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-bound, bound);
    return v;
}

inline void create_dense(ParamStore& store, const std::string& prefix, int in_f, int out_f,
                         Rng& rng) {
    store.create(prefix + ".w", {out_f, in_f},
                 kaiming_uniform(rng, in_f, static_cast<size_t>(out_f) * in_f));
    store.create(prefix + ".b", {out_f}, std::vector<double>(out_f, 0.0));
}

inline void create_bn(ParamStore& store, const std::string& prefix, int feat) {
    store.create(prefix + ".gamma", {feat}, std::vector<double>(feat, 1.0));
    store.create(prefix + ".beta", {feat}, std::vector<double>(feat, 0.0));
    store.create(prefix + ".run_mean", {feat}, std::vector<double>(feat, 0.0), false);
    store.create(prefix + ".run_var", {feat}, std::vector<double>(feat, 1.0), false);
}

}  // namespace detail

// Packs clouds into a [B, 3, M] tensor (xyz as channels).
inline Tensor cloud_batch(Graph& g, std::span<const PointCloud> clouds) {
    if (clouds.empty()) throw InvalidInput("cloud_batch: empty batch");
    const int m = static_cast<int>(clouds[0].size());
    const int batch = static_cast<int>(clouds.size());
    std::vector<double> data(static_cast<size_t>(batch) * 3 * m);
    for (int bi = 0; bi < batch; ++bi) {
        if (static_cast<int>(clouds[bi].size()) != m)
            throw InvalidShape("cloud_batch: ragged batch");
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < m; ++i)
                data[(static_cast<size_t>(bi) * 3 + k) * m + i] = clouds[bi][i][k];
    }
    return g.constant({batch, 3, m}, std::move(data));
}

// Reads row `bi` of a decoded [B, N*3] tensor back into a cloud.
inline PointCloud decoded_row(const Tensor& y, size_t bi) {
    const int n = y.shape().at(1) / 3;
    std::vector<Vec3> pts(n);
    const double* row = y.value().data() + bi * static_cast<size_t>(n) * 3;
    for (int i = 0; i < n; ++i) pts[i] = {row[3 * i], row[3 * i + 1], row[3 * i + 2]};
    return PointCloud(std::move(pts));
}

// Shared trunk of both point-set encoders: per-point dense layers with
// batchnorm and relu, then a global max pool over points.
class PointNetTrunk {
public:
    PointNetTrunk(const NetPreset& preset, Rng rng, std::string prefix)
        : widths_(preset.encoder_widths), prefix_(std::move(prefix)) {
        int in_f = 3;
        for (size_t l = 0; l < widths_.size(); ++l) {
            auto lp = layer_prefix(l);
            detail::create_dense(store_, lp, in_f, widths_[l], rng);
            detail::create_bn(store_, lp, widths_[l]);
            in_f = widths_[l];
        }
    }

    Tensor forward(Graph& g, const Tensor& x, bool train_mode, bool train_params) {
        if (x.shape().size() != 3 || x.shape()[1] != 3)
            throw InvalidShape("encoder: input must be [B,3,M]");
        Tensor h = x;
        for (size_t l = 0; l < widths_.size(); ++l) {
            auto lp = layer_prefix(l);
            h = g.linear(h, g.param(store_.at(lp + ".w"), train_params),
                         g.param(store_.at(lp + ".b"), train_params));
            h = g.batchnorm(h, g.param(store_.at(lp + ".gamma"), train_params),
                            g.param(store_.at(lp + ".beta"), train_params),
                            store_.at(lp + ".run_mean"), store_.at(lp + ".run_var"), train_mode);
            h = g.relu(h);
        }
        return g.maxpool_points(h);
    }

    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

private:
    std::string layer_prefix(size_t l) const { return prefix_ + ".l" + std::to_string(l); }

    std::vector<int> widths_;
    std::string prefix_;
    ParamStore store_;
};

// Point-set encoder: cloud of exactly N points -> latent code of |x|.
class ShapeEncoder {
public:
    ShapeEncoder(const NetPreset& preset, uint64_t seed)
        : preset_(preset), trunk_(preset, Rng(seed).child("shape_encoder"), "enc") {
        preset_.validate();
    }

    Tensor forward(Graph& g, const Tensor& x, bool train_mode, bool train_params) {
        if (frozen_ && (train_mode || train_params))
            throw InvalidState("ShapeEncoder: frozen network cannot train");
        return trunk_.forward(g, x, train_mode, train_params);
    }

    LatentCode encode(const PointCloud& cloud) {
        if (static_cast<int>(cloud.size()) != preset_.complete_points)
            throw InvalidShape("encode: cloud must have exactly N=" +
                               std::to_string(preset_.complete_points) + " points");
        Graph g(false);
        auto code = forward(g, cloud_batch(g, std::span(&cloud, 1)), false, false);
        return LatentCode(code.value());
    }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    const NetPreset& preset() const { return preset_; }
    ParamStore& params() { return trunk_.params(); }
    const ParamStore& params() const { return trunk_.params(); }

private:
    NetPreset preset_;
    PointNetTrunk trunk_;
    bool frozen_ = false;
};

// 3-layer MLP decoder: latent code -> N*3 coordinates.
class ShapeDecoder {
public:
    ShapeDecoder(const NetPreset& preset, uint64_t seed, int in_dim = -1,
                 std::string prefix = "dec")
        : preset_(preset), prefix_(std::move(prefix)) {
        Rng rng = Rng(seed).child(prefix_ + "oder");
        int in_f = in_dim > 0 ? in_dim : preset.latent_dim;
        in_dim_ = in_f;
        auto widths = preset.decoder_widths;
        widths.push_back(preset.complete_points * 3);
        for (size_t l = 0; l < widths.size(); ++l) {
            detail::create_dense(store_, prefix_ + ".l" + std::to_string(l), in_f, widths[l], rng);
            in_f = widths[l];
        }
        n_layers_ = widths.size();
    }

    Tensor forward(Graph& g, const Tensor& code, bool train_params) {
        if (frozen_ && train_params) throw InvalidState("ShapeDecoder: frozen network");
        if (code.shape().size() != 2 || code.shape()[1] != in_dim_)
            throw InvalidShape("decoder: code must be [B," + std::to_string(in_dim_) + "]");
        Tensor h = code;
        for (size_t l = 0; l < n_layers_; ++l) {
            auto lp = prefix_ + ".l" + std::to_string(l);
            h = g.linear(h, g.param(store_.at(lp + ".w"), train_params),
                         g.param(store_.at(lp + ".b"), train_params));
            if (l + 1 < n_layers_) h = g.relu(h);
        }
        return h;
    }

    PointCloud decode(const LatentCode& code) {
        Graph g(false);
        auto y = forward(g, g.constant({1, in_dim_}, code.values), false);
        return decoded_row(y, 0);
    }

    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

private:
    NetPreset preset_;
    std::string prefix_;
    ParamStore store_;
    int in_dim_ = 0;
    size_t n_layers_ = 0;
    bool frozen_ = false;
};

// Variational encoder: the plain trunk plus mean / log-variance heads that
// squeeze the bottleneck down to |z|. Its mean head doubles as the mode
// encoder once the VAE has been trained.
class VaeEncoder {
public:
    VaeEncoder(const NetPreset& preset, uint64_t seed)
        : preset_(preset), trunk_(preset, Rng(seed).child("vae_encoder"), "vaeenc") {
        Rng rng = Rng(seed).child("vae_heads");
        detail::create_dense(trunk_.params(), "vaeenc.mu", preset.latent_dim, preset.mode_dim,
                             rng);
        detail::create_dense(trunk_.params(), "vaeenc.logvar", preset.latent_dim, preset.mode_dim,
                             rng);
    }

    std::pair<Tensor, Tensor> forward(Graph& g, const Tensor& x, bool train_mode,
                                      bool train_params) {
        if (frozen_ && (train_mode || train_params)) throw InvalidState("VaeEncoder: frozen");
        Tensor pooled = trunk_.forward(g, x, train_mode, train_params);
        auto& st = trunk_.params();
        Tensor mu = g.linear(pooled, g.param(st.at("vaeenc.mu.w"), train_params),
                             g.param(st.at("vaeenc.mu.b"), train_params));
        Tensor logvar = g.linear(pooled, g.param(st.at("vaeenc.logvar.w"), train_params),
                                 g.param(st.at("vaeenc.logvar.b"), train_params));
        return {mu, logvar};
    }

    // (mu, logvar) for a single cloud, eval mode.
    std::pair<ModeVector, ModeVector> encode_vae(const PointCloud& cloud) {
        if (static_cast<int>(cloud.size()) != preset_.complete_points)
            throw InvalidShape("encode_vae: cloud must have exactly N points");
        Graph g(false);
        auto [mu, logvar] = forward(g, cloud_batch(g, std::span(&cloud, 1)), false, false);
        return {ModeVector(mu.value()), ModeVector(logvar.value())};
    }

    // Deterministic mode vector: the mean head of the trained VAE.
    ModeVector mode_encode(const PointCloud& cloud) {
        if (!trained_) throw InvalidState("mode_encode: VAE has not been trained");
        return encode_vae(cloud).first;
    }

    void mark_trained() { trained_ = true; }
    bool trained() const { return trained_; }
    void freeze() { frozen_ = true; }
    bool frozen() const { return frozen_; }
    const NetPreset& preset() const { return preset_; }
    ParamStore& params() { return trunk_.params(); }
    const ParamStore& params() const { return trunk_.params(); }

private:
    NetPreset preset_;
    PointNetTrunk trunk_;
    bool trained_ = false;
    bool frozen_ = false;
};

// Latent generator: (partial code, mode vector) -> completed code.
class LatentGenerator {
public:
    LatentGenerator(const NetPreset& preset, uint64_t seed) : preset_(preset) {
        Rng rng = Rng(seed).child("generator");
        int in_f = preset.latent_dim + preset.mode_dim;
        auto widths = preset.gan_widths;
        widths.push_back(preset.latent_dim);
        for (size_t l = 0; l < widths.size(); ++l) {
            detail::create_dense(store_, "gen.l" + std::to_string(l), in_f, widths[l], rng);
            in_f = widths[l];
        }
        n_layers_ = widths.size();
    }

    Tensor forward(Graph& g, const Tensor& partial_code, const Tensor& mode, bool train_params) {
        Tensor h = g.concat({partial_code, mode});
        for (size_t l = 0; l < n_layers_; ++l) {
            auto lp = "gen.l" + std::to_string(l);
            h = g.linear(h, g.param(store_.at(lp + ".w"), train_params),
                         g.param(store_.at(lp + ".b"), train_params));
            if (l + 1 < n_layers_) h = g.leaky_relu(h, preset_.leaky_slope);
        }
        return h;
    }

    LatentCode generate(const LatentCode& partial_code, const ModeVector& mode) {
        if (static_cast<int>(partial_code.size()) != preset_.latent_dim ||
            static_cast<int>(mode.size()) != preset_.mode_dim)
            throw InvalidShape("generate: dimension mismatch with preset");
        Graph g(false);
        auto y = forward(g, g.constant({1, preset_.latent_dim}, partial_code.values),
                         g.constant({1, preset_.mode_dim}, mode.values), false);
        return LatentCode(y.value());
    }

    const NetPreset& preset() const { return preset_; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

private:
    NetPreset preset_;
    ParamStore store_;
    size_t n_layers_ = 0;
};

// Mode encoder over latent codes (the implicit "l2z" variant): an MLP from
// a shape code to mean / log-variance heads of |z|.
class LatentModeEncoder {
public:
    LatentModeEncoder(const NetPreset& preset, uint64_t seed) : preset_(preset) {
        Rng rng = Rng(seed).child("latent_mode_encoder");
        int in_f = preset.latent_dim;
        for (size_t l = 0; l < preset.gan_widths.size(); ++l) {
            detail::create_dense(store_, "lmode.l" + std::to_string(l), in_f,
                                 preset.gan_widths[l], rng);
            in_f = preset.gan_widths[l];
        }
        detail::create_dense(store_, "lmode.mu", in_f, preset.mode_dim, rng);
        detail::create_dense(store_, "lmode.logvar", in_f, preset.mode_dim, rng);
        n_hidden_ = preset.gan_widths.size();
    }

    std::pair<Tensor, Tensor> forward(Graph& g, const Tensor& code, bool train_params) {
        Tensor h = code;
        for (size_t l = 0; l < n_hidden_; ++l) {
            auto lp = "lmode.l" + std::to_string(l);
            h = g.linear(h, g.param(store_.at(lp + ".w"), train_params),
                         g.param(store_.at(lp + ".b"), train_params));
            h = g.leaky_relu(h, preset_.leaky_slope);
        }
        Tensor mu = g.linear(h, g.param(store_.at("lmode.mu.w"), train_params),
                             g.param(store_.at("lmode.mu.b"), train_params));
        Tensor logvar = g.linear(h, g.param(store_.at("lmode.logvar.w"), train_params),
                                 g.param(store_.at("lmode.logvar.b"), train_params));
        return {mu, logvar};
    }

    const NetPreset& preset() const { return preset_; }
    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

private:
    NetPreset preset_;
    ParamStore store_;
    size_t n_hidden_ = 0;
};

// Latent discriminator: code -> unbounded realness score (least-squares GAN
// uses the raw output, no sigmoid).
class LatentDiscriminator {
public:
    LatentDiscriminator(const NetPreset& preset, uint64_t seed) : preset_(preset) {
        Rng rng = Rng(seed).child("discriminator");
        int in_f = preset.latent_dim;
        auto widths = preset.gan_widths;
        widths.push_back(1);
        for (size_t l = 0; l < widths.size(); ++l) {
            detail::create_dense(store_, "disc.l" + std::to_string(l), in_f, widths[l], rng);
            in_f = widths[l];
        }
        n_layers_ = widths.size();
    }

    Tensor forward(Graph& g, const Tensor& code, bool train_params) {
        Tensor h = code;
        for (size_t l = 0; l < n_layers_; ++l) {
            auto lp = "disc.l" + std::to_string(l);
            h = g.linear(h, g.param(store_.at(lp + ".w"), train_params),
                         g.param(store_.at(lp + ".b"), train_params));
            if (l + 1 < n_layers_) h = g.leaky_relu(h, preset_.leaky_slope);
        }
        return h;
    }

    double discriminate(const LatentCode& code) {
        if (static_cast<int>(code.size()) != preset_.latent_dim)
            throw InvalidShape("discriminate: dimension mismatch with preset");
        Graph g(false);
        return forward(g, g.constant({1, preset_.latent_dim}, code.values), false).scalar();
    }

    ParamStore& params() { return store_; }
    const ParamStore& params() const { return store_; }

private:
    NetPreset preset_;
    ParamStore store_;
    size_t n_layers_ = 0;
};

}  // namespace mmsc::nets
