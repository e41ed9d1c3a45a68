#pragma once

#include <chrono>

#include "mmsc/networks.hpp"
#include "mmsc/partiality.hpp"

// The three training procedures: point-set autoencoder, variational
// autoencoder, and the conditional latent GAN with its two implicit
// mode-encoding variants. All randomness is derived from (seed, stage,
// epoch), so runs are reproducible and resumable.

namespace mmsc::train {

using nets::LatentDiscriminator;
using nets::LatentGenerator;
using nets::LatentModeEncoder;
using nets::ShapeDecoder;
using nets::ShapeEncoder;
using nets::VaeEncoder;

struct TrainConfig {
    double alpha = 6.0;   // partial reconstruction weight
    double beta = 7.5;    // latent reconstruction weight
    double gamma = 1.0;   // KL weight in the implicit variants
    double lr = 0.0005;
    double beta1_ae = 0.9;
    double beta1_gan = 0.5;
    int epochs_ae = 2000;
    int epochs_gan = 1000;
    int batch = 50;
    uint64_t seed = 1;
    double lambda_kl = 0.03;  // KL weight in VAE pre-training
    unsigned threads = 1;
    int start_epoch = 0;  // resume offset; epoch numbering continues from here

    void validate() const {
        if (alpha < 0.0 || beta < 0.0 || gamma < 0.0 || lambda_kl < 0.0)
            throw InvalidInput("TrainConfig: loss weights must be nonnegative");
        if (batch < 1) throw InvalidInput("TrainConfig: batch must be >= 1");
        if (!(lr > 0.0)) throw InvalidInput("TrainConfig: lr must be positive");
        if (start_epoch < 0) throw InvalidInput("TrainConfig: bad start epoch");
    }

    // Published constants for the two stages.
    static TrainConfig paper_ae() {
        TrainConfig c;
        c.lr = 0.0005;
        c.beta1_ae = 0.9;
        c.epochs_ae = 2000;
        c.batch = 200;
        return c;
    }
    static TrainConfig paper_gan() {
        TrainConfig c;
        c.lr = 0.0005;
        c.beta1_gan = 0.5;
        c.epochs_gan = 1000;
        c.batch = 50;
        return c;
    }
    // Desk-scale defaults sized for the synthetic datasets.
    static TrainConfig desk_ae() {
        TrainConfig c;
        c.epochs_ae = 400;
        c.batch = 10;
        return c;
    }
    static TrainConfig desk_gan() {
        TrainConfig c;
        c.epochs_gan = 240;
        c.batch = 10;
        return c;
    }
};

struct TrainLog {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row) {
        if (row.size() != columns.size()) throw InvalidShape("TrainLog: column mismatch");
        if (!rows.empty() && row[0] <= rows.back()[0])
            throw InvalidInput("TrainLog: epochs must increase");
        for (double v : row)
            if (!std::isfinite(v)) throw DiagnosticError("TrainLog: non-finite value");
        rows.push_back(std::move(row));
    }

    double column(size_t row, const std::string& name) const {
        for (size_t c = 0; c < columns.size(); ++c)
            if (columns[c] == name) return rows.at(row)[c];
        throw InvalidInput("TrainLog: unknown column " + name);
    }

    void write_csv(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw IoError("cannot write log " + path);
        for (size_t c = 0; c < columns.size(); ++c)
            os << (c ? "," : "") << columns[c];
        os << '\n';
        char buf[40];
        for (const auto& row : rows) {
            for (size_t c = 0; c < row.size(); ++c) {
                if (c == 0) {
                    os << static_cast<long long>(row[c]);
                } else {
                    std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
                    os << ',' << buf;
                }
            }
            os << '\n';
        }
    }
};

using EpochCallback = std::function<void(int epoch, const TrainLog& log)>;

// Index-order provider for the two unpaired sets. The trainer asks for each
// domain's order separately every epoch; tests inject a spy to prove no
// joint indexing ever happens.
enum class Domain { partial_set, complete_set };

class BatchSampler {
public:
    virtual ~BatchSampler() = default;
    virtual std::vector<size_t> epoch_order(Domain domain, size_t set_size, Rng& rng) = 0;
};

class IndependentSampler final : public BatchSampler {
public:
    std::vector<size_t> epoch_order(Domain, size_t set_size, Rng& rng) override {
        std::vector<size_t> order(set_size);
        std::iota(order.begin(), order.end(), size_t{0});
        rng.shuffle(order);
        return order;
    }
};

// ---------------------------------------------------------------------------
// Closed-form pieces, exposed for tests and the evaluation drivers.
// ---------------------------------------------------------------------------

// Least-squares GAN objectives on raw scores: the discriminator drives real
// scores to 1 and fake scores to 0; the generator drives fake scores to 1.
inline std::pair<double, double> lsgan_losses(std::span<const double> real_scores,
                                              std::span<const double> fake_scores) {
    for (double s : real_scores)
        if (!std::isfinite(s)) throw InvalidInput("lsgan_losses: non-finite score");
    for (double s : fake_scores)
        if (!std::isfinite(s)) throw InvalidInput("lsgan_losses: non-finite score");
    double lf = 0.0, lg = 0.0;
    for (double s : real_scores) lf += (s - 1.0) * (s - 1.0);
    lf /= static_cast<double>(real_scores.size());
    double fake_sq = 0.0;
    for (double s : fake_scores) {
        fake_sq += s * s;
        lg += (s - 1.0) * (s - 1.0);
    }
    lf += fake_sq / static_cast<double>(fake_scores.size());
    lg /= static_cast<double>(fake_scores.size());
    return {lf, lg};
}

// Fidelity of a completion to its partial input.
inline double partial_recon_loss(const PointCloud& partial, const PointCloud& completion) {
    return hausdorff_uni(partial, completion);
}

// Mean absolute error between the drawn mode vector and its reconstruction.
inline double latent_recon_loss(const nets::ModeVector& z, const nets::ModeVector& z_tilde) {
    if (z.size() != z_tilde.size()) throw InvalidShape("latent_recon_loss: length mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < z.size(); ++i) acc += std::abs(z.values[i] - z_tilde.values[i]);
    return acc / static_cast<double>(z.size());
}

// ---------------------------------------------------------------------------
// Autoencoder
// ---------------------------------------------------------------------------

struct AutoencoderModel {
    ShapeEncoder encoder;
    ShapeDecoder decoder;
    TrainLog log;
};

namespace detail {

inline void check_dataset(const std::vector<PointCloud>& clouds, size_t n, const char* what) {
    if (clouds.empty()) throw InvalidInput(std::string(what) + ": empty dataset");
    for (const auto& c : clouds)
        if (c.size() != n)
            throw InvalidInput(std::string(what) + ": cloud cardinality " +
                               std::to_string(c.size()) + " != " + std::to_string(n));
}

inline double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace detail

// Minimizes the mean EMD between each complete cloud and its
// reconstruction. Networks are trained in place; epoch numbering starts at
// cfg.start_epoch so resumed runs continue seamlessly.
inline TrainLog train_autoencoder_inplace(ShapeEncoder& enc, ShapeDecoder& dec,
                                          const std::vector<PointCloud>& completes,
                                          const TrainConfig& cfg,
                                          const EpochCallback& on_epoch = {}) {
    cfg.validate();
    const auto& preset = enc.preset();
    detail::check_dataset(completes, preset.complete_points, "train_autoencoder");
    ad::AdamConfig adam{cfg.lr, cfg.beta1_ae, 0.999, 1e-8};

    const size_t n = completes.size();
    const size_t batch = std::min<size_t>(cfg.batch, n);
    Rng root(cfg.seed);

    TrainLog log;
    log.columns = {"epoch", "loss", "seconds"};
    for (int epoch = cfg.start_epoch; epoch < cfg.epochs_ae; ++epoch) {
        const double t0 = detail::now_seconds();
        Rng order_rng = root.child("ae_order").child(static_cast<uint64_t>(epoch));
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), size_t{0});
        order_rng.shuffle(order);

        double loss_sum = 0.0;
        size_t seen = 0;
        for (size_t off = 0; off < n; off += batch) {
            const size_t bsz = std::min(batch, n - off);
            std::vector<PointCloud> clouds;
            clouds.reserve(bsz);
            for (size_t i = 0; i < bsz; ++i) clouds.push_back(completes[order[off + i]]);

            ad::Graph g;
            auto x = nets::cloud_batch(g, clouds);
            auto code = enc.forward(g, x, true, true);
            auto y = dec.forward(g, code, true);
            auto loss = g.emd_loss(y, clouds, cfg.threads);
            g.backward(loss);
            ad::adam_step(enc.params(), adam);
            ad::adam_step(dec.params(), adam);
            loss_sum += loss.scalar() * static_cast<double>(bsz);
            seen += bsz;
        }
        log.add_row({static_cast<double>(epoch), loss_sum / static_cast<double>(seen),
                     detail::now_seconds() - t0});
        if (on_epoch) on_epoch(epoch, log);
    }
    return log;
}

inline AutoencoderModel train_autoencoder(const std::vector<PointCloud>& completes,
                                          const NetPreset& preset, const TrainConfig& cfg,
                                          const EpochCallback& on_epoch = {}) {
    AutoencoderModel model{ShapeEncoder(preset, cfg.seed), ShapeDecoder(preset, cfg.seed), {}};
    model.log = train_autoencoder_inplace(model.encoder, model.decoder, completes, cfg, on_epoch);
    model.encoder.freeze();
    model.decoder.freeze();
    return model;
}

// ---------------------------------------------------------------------------
// Variational autoencoder
// ---------------------------------------------------------------------------

struct VaeModel {
    VaeEncoder encoder;
    ShapeDecoder decoder;  // |z| -> N*3; unused after pre-training
    TrainLog log;
};

inline TrainLog train_vae_inplace(VaeEncoder& enc, ShapeDecoder& dec,
                                  const std::vector<PointCloud>& completes,
                                  const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
    cfg.validate();
    const auto& preset = enc.preset();
    detail::check_dataset(completes, preset.complete_points, "train_vae");
    ad::AdamConfig adam{cfg.lr, cfg.beta1_ae, 0.999, 1e-8};

    const size_t n = completes.size();
    const size_t batch = std::min<size_t>(cfg.batch, n);
    Rng root(cfg.seed);

    TrainLog log;
    log.columns = {"epoch", "recon", "kl", "total", "seconds"};
    for (int epoch = cfg.start_epoch; epoch < cfg.epochs_ae; ++epoch) {
        const double t0 = detail::now_seconds();
        Rng order_rng = root.child("vae_order").child(static_cast<uint64_t>(epoch));
        Rng eps_rng = root.child("vae_eps").child(static_cast<uint64_t>(epoch));
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), size_t{0});
        order_rng.shuffle(order);

        double recon_sum = 0.0, kl_sum = 0.0, total_sum = 0.0;
        size_t seen = 0;
        for (size_t off = 0; off < n; off += batch) {
            const size_t bsz = std::min(batch, n - off);
            std::vector<PointCloud> clouds;
            clouds.reserve(bsz);
            for (size_t i = 0; i < bsz; ++i) clouds.push_back(completes[order[off + i]]);

            ad::Graph g;
            auto x = nets::cloud_batch(g, clouds);
            auto [mu, logvar] = enc.forward(g, x, true, true);
            auto z = g.reparameterize(mu, logvar, eps_rng.normal_vec(bsz * preset.mode_dim));
            auto y = dec.forward(g, z, true);
            auto recon = g.emd_loss(y, clouds, cfg.threads);
            auto kl = g.kl_standard_normal(mu, logvar);
            auto total = g.add(recon, g.scale(kl, cfg.lambda_kl));
            g.backward(total);
            ad::adam_step(enc.params(), adam);
            ad::adam_step(dec.params(), adam);
            recon_sum += recon.scalar() * static_cast<double>(bsz);
            kl_sum += kl.scalar() * static_cast<double>(bsz);
            total_sum += total.scalar() * static_cast<double>(bsz);
            seen += bsz;
        }
        const double inv = 1.0 / static_cast<double>(seen);
        log.add_row({static_cast<double>(epoch), recon_sum * inv, kl_sum * inv, total_sum * inv,
                     detail::now_seconds() - t0});
        if (on_epoch) on_epoch(epoch, log);
    }
    return log;
}

inline VaeModel train_vae(const std::vector<PointCloud>& completes, const NetPreset& preset,
                          const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
    VaeModel model{VaeEncoder(preset, cfg.seed),
                   ShapeDecoder(preset, cfg.seed, preset.mode_dim, "vaedec"),
                   {}};
    model.log = train_vae_inplace(model.encoder, model.decoder, completes, cfg, on_epoch);
    model.encoder.mark_trained();
    model.encoder.freeze();
    model.decoder.freeze();
    return model;
}

// ---------------------------------------------------------------------------
// Conditional latent GAN (and the two implicit mode-encoding variants)
// ---------------------------------------------------------------------------

struct GanModel {
    LatentGenerator generator;
    LatentDiscriminator discriminator;
    TrainLog log;
};

struct GanL2zModel {
    LatentGenerator generator;
    LatentDiscriminator discriminator;
    LatentModeEncoder mode_encoder;
    TrainLog log;
};

struct GanPc2zModel {
    LatentGenerator generator;
    LatentDiscriminator discriminator;
    VaeEncoder mode_encoder;
    TrainLog log;
};

namespace detail {

enum class ModeEncoding { explicit_vae, implicit_l2z, implicit_pc2z };

struct GanNets {
    LatentGenerator* gen;
    LatentDiscriminator* disc;
    ShapeEncoder* enc;
    ShapeDecoder* dec;
    VaeEncoder* ez_vae = nullptr;         // explicit + pc2z
    LatentModeEncoder* ez_latent = nullptr;  // l2z
};

inline TrainLog run_gan_training(GanNets nets, ModeEncoding encoding,
                                 const std::vector<PointCloud>& partials,
                                 const std::vector<PointCloud>& completes,
                                 const TrainConfig& cfg, BatchSampler* sampler,
                                 const EpochCallback& on_epoch) {
    cfg.validate();
    const NetPreset& preset = nets.enc->preset();
    if (!nets.enc->frozen() || !nets.dec->frozen())
        throw InvalidState("train_gan: autoencoder must be frozen");
    if (encoding == ModeEncoding::explicit_vae) {
        if (!nets.ez_vae->frozen()) throw InvalidState("train_gan: mode encoder must be frozen");
        if (!nets.ez_vae->trained()) throw InvalidState("train_gan: mode encoder is untrained");
    }
    if (completes.empty() || partials.empty()) throw InvalidInput("train_gan: empty dataset");
    check_dataset(completes, preset.complete_points, "train_gan (complete)");
    for (const auto& p : partials)
        if (p.size() > static_cast<size_t>(preset.complete_points))
            throw InvalidInput("train_gan: partial larger than N");

    ad::AdamConfig adam{cfg.lr, cfg.beta1_gan, 0.999, 1e-8};
    const int b_dim = preset.latent_dim;
    const int z_dim = preset.mode_dim;

    // Partials are tiled once up front; the raw clouds feed the
    // reconstruction loss.
    std::vector<PointCloud> duplicated;
    duplicated.reserve(partials.size());
    for (const auto& p : partials)
        duplicated.push_back(data::duplicate_to_n(p, preset.complete_points));

    IndependentSampler default_sampler;
    BatchSampler& sample = sampler ? *sampler : default_sampler;

    Rng root(cfg.seed);
    const size_t min_n = std::min(partials.size(), completes.size());
    const size_t batch = std::min<size_t>(cfg.batch, min_n);
    const size_t steps = min_n / batch;

    TrainLog log;
    const bool with_kl = encoding != ModeEncoding::explicit_vae;
    if (with_kl)
        log.columns = {"epoch", "L_F", "L_G", "L_recon", "L_latent", "L_kl", "total", "seconds"};
    else
        log.columns = {"epoch", "L_F", "L_G", "L_recon", "L_latent", "total", "seconds"};

    for (int epoch = cfg.start_epoch; epoch < cfg.epochs_gan; ++epoch) {
        const double t0 = now_seconds();
        Rng order_p_rng = root.child("gan_order_p").child(static_cast<uint64_t>(epoch));
        Rng order_c_rng = root.child("gan_order_c").child(static_cast<uint64_t>(epoch));
        Rng z_rng = root.child("gan_z").child(static_cast<uint64_t>(epoch));
        auto order_p = sample.epoch_order(Domain::partial_set, partials.size(), order_p_rng);
        auto order_c = sample.epoch_order(Domain::complete_set, completes.size(), order_c_rng);
        if (order_p.size() != partials.size() || order_c.size() != completes.size())
            throw InvalidState("train_gan: sampler returned a bad order");

        double lf_sum = 0, lg_sum = 0, lrec_sum = 0, llat_sum = 0, lkl_sum = 0, total_sum = 0;
        for (size_t step = 0; step < steps; ++step) {
            std::vector<PointCloud> p_batch, p_dup_batch, c_batch;
            for (size_t i = 0; i < batch; ++i) {
                size_t pi = order_p[step * batch + i];
                size_t ci = order_c[step * batch + i];
                p_batch.push_back(partials[pi]);
                p_dup_batch.push_back(duplicated[pi]);
                c_batch.push_back(completes[ci]);
            }
            const int bsz = static_cast<int>(batch);

            // -- discriminator step --
            std::vector<double> zf = z_rng.normal_vec(batch * z_dim);
            std::vector<double> real_codes, fake_codes;
            {
                ad::Graph ng(false);
                real_codes =
                    nets.enc->forward(ng, nets::cloud_batch(ng, c_batch), false, false).value();
                auto xp = nets.enc->forward(ng, nets::cloud_batch(ng, p_dup_batch), false, false);
                fake_codes =
                    nets.gen->forward(ng, xp, ng.constant({bsz, z_dim}, zf), false).value();
            }
            double lf_val;
            {
                ad::Graph g;
                auto sr = nets.disc->forward(g, g.constant({bsz, b_dim}, real_codes), true);
                auto sf = nets.disc->forward(g, g.constant({bsz, b_dim}, fake_codes), true);
                auto lf = g.add(g.mean_square_to(sr, 1.0), g.mean_square_to(sf, 0.0));
                g.backward(lf);
                ad::adam_step(nets.disc->params(), adam);
                lf_val = lf.scalar();
            }

            // -- generator step (fresh z) --
            std::vector<double> zg = z_rng.normal_vec(batch * z_dim);
            std::vector<double> xp_vals;
            {
                ad::Graph ng(false);
                xp_vals =
                    nets.enc->forward(ng, nets::cloud_batch(ng, p_dup_batch), false, false).value();
            }
            ad::Graph g;
            auto xp = g.constant({bsz, b_dim}, xp_vals);
            auto z = g.constant({bsz, z_dim}, zg);
            auto xhat = nets.gen->forward(g, xp, z, true);
            auto scores = nets.disc->forward(g, xhat, false);
            auto lg = g.mean_square_to(scores, 1.0);
            auto completion = nets.dec->forward(g, xhat, false);
            auto lrec = g.hausdorff_loss(completion, p_batch, cfg.threads);

            ad::Tensor llat;
            switch (encoding) {
                case ModeEncoding::explicit_vae: {
                    auto [mu, logvar] =
                        nets.ez_vae->forward(g, g.rows_to_channels(completion), false, false);
                    llat = g.l1_to(mu, zg);
                    break;
                }
                case ModeEncoding::implicit_l2z: {
                    auto [mu, logvar] = nets.ez_latent->forward(g, xhat, true);
                    llat = g.l1_to(mu, zg);
                    break;
                }
                case ModeEncoding::implicit_pc2z: {
                    auto [mu, logvar] =
                        nets.ez_vae->forward(g, g.rows_to_channels(completion), true, true);
                    llat = g.l1_to(mu, zg);
                    break;
                }
            }
            auto total = g.add(lg, g.add(g.scale(lrec, cfg.alpha), g.scale(llat, cfg.beta)));

            double lkl_val = 0.0;
            if (with_kl) {
                ad::Tensor kl;
                if (encoding == ModeEncoding::implicit_l2z) {
                    auto [mu_c, lv_c] =
                        nets.ez_latent->forward(g, g.constant({bsz, b_dim}, real_codes), true);
                    kl = g.kl_standard_normal(mu_c, lv_c);
                } else {
                    auto [mu_c, lv_c] =
                        nets.ez_vae->forward(g, nets::cloud_batch(g, c_batch), true, true);
                    kl = g.kl_standard_normal(mu_c, lv_c);
                }
                total = g.add(total, g.scale(kl, cfg.gamma));
                lkl_val = kl.scalar();
            }

            g.backward(total);
            ad::adam_step(nets.gen->params(), adam);
            if (encoding == ModeEncoding::implicit_l2z)
                ad::adam_step(nets.ez_latent->params(), adam);
            if (encoding == ModeEncoding::implicit_pc2z)
                ad::adam_step(nets.ez_vae->params(), adam);

            lf_sum += lf_val;
            lg_sum += lg.scalar();
            lrec_sum += lrec.scalar();
            llat_sum += llat.scalar();
            lkl_sum += lkl_val;
            total_sum += total.scalar();
        }

        const double inv = 1.0 / static_cast<double>(steps);
        std::vector<double> row{static_cast<double>(epoch), lf_sum * inv, lg_sum * inv,
                                lrec_sum * inv, llat_sum * inv};
        if (with_kl) row.push_back(lkl_sum * inv);
        row.push_back(total_sum * inv);
        row.push_back(now_seconds() - t0);
        log.add_row(std::move(row));
        if (on_epoch) on_epoch(epoch, log);
    }
    return log;
}

}  // namespace detail

// Alternating one-discriminator / one-generator steps on unpaired partial
// and complete sets, against a frozen autoencoder and frozen mode encoder.
inline TrainLog train_gan_inplace(LatentGenerator& gen, LatentDiscriminator& disc,
                                  ShapeEncoder& frozen_enc, ShapeDecoder& frozen_dec,
                                  VaeEncoder& frozen_ez, const std::vector<PointCloud>& partials,
                                  const std::vector<PointCloud>& completes,
                                  const TrainConfig& cfg, BatchSampler* sampler = nullptr,
                                  const EpochCallback& on_epoch = {}) {
    detail::GanNets nets{&gen, &disc, &frozen_enc, &frozen_dec, &frozen_ez, nullptr};
    return detail::run_gan_training(nets, detail::ModeEncoding::explicit_vae, partials, completes,
                                    cfg, sampler, on_epoch);
}

inline GanModel train_gan(const std::vector<PointCloud>& partials,
                          const std::vector<PointCloud>& completes, ShapeEncoder& frozen_enc,
                          ShapeDecoder& frozen_dec, VaeEncoder& frozen_ez, const TrainConfig& cfg,
                          BatchSampler* sampler = nullptr, const EpochCallback& on_epoch = {}) {
    const NetPreset& preset = frozen_enc.preset();
    GanModel model{LatentGenerator(preset, cfg.seed), LatentDiscriminator(preset, cfg.seed), {}};
    model.log = train_gan_inplace(model.generator, model.discriminator, frozen_enc, frozen_dec,
                                  frozen_ez, partials, completes, cfg, sampler, on_epoch);
    return model;
}

// Variant: the mode encoder maps generated latent codes to z, is trained
// jointly, and a KL term pulls its output on real codes toward the prior.
inline GanL2zModel train_gan_im_l2z(const std::vector<PointCloud>& partials,
                                    const std::vector<PointCloud>& completes,
                                    ShapeEncoder& frozen_enc, ShapeDecoder& frozen_dec,
                                    const TrainConfig& cfg, BatchSampler* sampler = nullptr,
                                    const EpochCallback& on_epoch = {}) {
    const NetPreset& preset = frozen_enc.preset();
    GanL2zModel model{LatentGenerator(preset, cfg.seed), LatentDiscriminator(preset, cfg.seed),
                      LatentModeEncoder(preset, cfg.seed),
                      {}};
    detail::GanNets nets{&model.generator, &model.discriminator, &frozen_enc, &frozen_dec,
                         nullptr, &model.mode_encoder};
    model.log = detail::run_gan_training(nets, detail::ModeEncoding::implicit_l2z, partials,
                                         completes, cfg, sampler, on_epoch);
    return model;
}

// Variant: the mode encoder consumes point clouds (PointNet trunk), is
// trained jointly, and the KL applies to its encoding of real completes.
inline GanPc2zModel train_gan_im_pc2z(const std::vector<PointCloud>& partials,
                                      const std::vector<PointCloud>& completes,
                                      ShapeEncoder& frozen_enc, ShapeDecoder& frozen_dec,
                                      const TrainConfig& cfg, BatchSampler* sampler = nullptr,
                                      const EpochCallback& on_epoch = {}) {
    const NetPreset& preset = frozen_enc.preset();
    GanPc2zModel model{LatentGenerator(preset, cfg.seed), LatentDiscriminator(preset, cfg.seed),
                       VaeEncoder(preset, cfg.seed),
                       {}};
    detail::GanNets nets{&model.generator, &model.discriminator, &frozen_enc, &frozen_dec,
                         &model.mode_encoder, nullptr};
    model.log = detail::run_gan_training(nets, detail::ModeEncoding::implicit_pc2z, partials,
                                         completes, cfg, sampler, on_epoch);
    return model;
}

}  // namespace mmsc::train
