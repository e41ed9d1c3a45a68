#include <catch2/catch_amalgamated.hpp>
#include <filesystem>

#include "mmsc/training.hpp"
#include "support.hpp"

using namespace mmsc;
using namespace mmsc::train;
using Catch::Approx;

namespace {

struct DeskFixture {
    NetPreset preset = NetPreset::desk();
    std::vector<PointCloud> completes;
    std::vector<PointCloud> partials;

    explicit DeskFixture(size_t n_shapes, uint64_t seed = 7) {
        Rng rng(seed);
        for (size_t i = 0; i < n_shapes; ++i) {
            auto shape = data::gen_shape(data::Category::table, rng, 256);
            completes.push_back(shape.union_cloud());
            partials.push_back(data::remove_parts(shape, rng, 128).partial);
        }
    }
};

TrainConfig quick_cfg(int epochs_ae, int epochs_gan, int batch, uint64_t seed = 1) {
    TrainConfig cfg;
    cfg.epochs_ae = epochs_ae;
    cfg.epochs_gan = epochs_gan;
    cfg.batch = batch;
    cfg.seed = seed;
    return cfg;
}

struct SpySampler final : BatchSampler {
    IndependentSampler inner;
    std::vector<std::pair<Domain, size_t>> calls;
    std::vector<size_t> epoch_order(Domain d, size_t n, Rng& rng) override {
        calls.push_back({d, n});
        return inner.epoch_order(d, n, rng);
    }
};

}  // namespace

TEST_CASE("lsgan closed forms") {
    std::vector<double> ones{1, 1}, zeros{0, 0}, halves{0.5, 0.5};
    auto [lf_opt, lg] = lsgan_losses(ones, zeros);
    CHECK(lf_opt == 0.0);
    auto [lf2, lg_opt] = lsgan_losses(ones, ones);
    CHECK(lg_opt == 0.0);

    auto [lf3, lg3] = lsgan_losses(zeros, ones);
    CHECK(lf3 == Approx(2.0).margin(1e-12));

    auto [lf4, lg4] = lsgan_losses(halves, halves);
    CHECK(lf4 == Approx(0.5).margin(1e-12));
    CHECK(lg4 == Approx(0.25).margin(1e-12));
}

TEST_CASE("partial and latent reconstruction losses") {
    PointCloud p({{0, 0, 0}, {3, 0, 0}});
    PointCloud c({{0, 0, 0}, {1, 0, 0}});
    CHECK(partial_recon_loss(p, c) == Approx(2.0));

    nets::ModeVector z({1, 0, 0, 0});
    nets::ModeVector zt({0, 0, 0, 0});
    CHECK(latent_recon_loss(z, z) == 0.0);
    CHECK(latent_recon_loss(z, zt) == Approx(0.25));  // 1/|z|, mean convention
}

TEST_CASE("paper-stage constants") {
    auto ae = TrainConfig::paper_ae();
    CHECK(ae.lr == 0.0005);
    CHECK(ae.beta1_ae == 0.9);
    CHECK(ae.epochs_ae == 2000);
    CHECK(ae.batch == 200);

    auto gan = TrainConfig::paper_gan();
    CHECK(gan.lr == 0.0005);
    CHECK(gan.beta1_gan == 0.5);
    CHECK(gan.epochs_gan == 1000);
    CHECK(gan.batch == 50);
    CHECK(gan.alpha == 6.0);
    CHECK(gan.beta == 7.5);
    CHECK(gan.gamma == 1.0);
}

TEST_CASE("autoencoder overfits a single shape") {
    DeskFixture fix(1);
    auto cfg = quick_cfg(300, 0, 1);
    auto model = train_autoencoder(fix.completes, fix.preset, cfg);

    REQUIRE(model.log.rows.size() == 300);
    const double first = model.log.column(0, "loss");
    const double last = model.log.column(model.log.rows.size() - 1, "loss");
    CHECK(last < 0.1 * first);
    for (size_t r = 0; r < model.log.rows.size(); ++r)
        CHECK(model.log.column(r, "loss") >= 0.0);
    CHECK(model.encoder.frozen());
    CHECK(model.decoder.frozen());
}

TEST_CASE("train_autoencoder rejects an empty dataset") {
    std::vector<PointCloud> none;
    CHECK_THROWS_AS(train_autoencoder(none, NetPreset::desk(), quick_cfg(1, 0, 1)), InvalidInput);
}

TEST_CASE("vae training: reconstruction drops and posterior centers") {
    DeskFixture fix(20);
    auto cfg = quick_cfg(500, 0, 10);
    auto model = train_vae(fix.completes, fix.preset, cfg);

    const double first = model.log.column(0, "recon");
    const double last = model.log.column(model.log.rows.size() - 1, "recon");
    CHECK(last * 5.0 <= first);

    // Aggregate posterior stays near the prior mean.
    std::vector<double> mean(fix.preset.mode_dim, 0.0);
    for (const auto& c : fix.completes) {
        auto z = model.encoder.mode_encode(c);
        for (int d = 0; d < fix.preset.mode_dim; ++d) mean[d] += z.values[d];
    }
    for (int d = 0; d < fix.preset.mode_dim; ++d)
        CHECK(std::abs(mean[d] / static_cast<double>(fix.completes.size())) < 0.5);
}

TEST_CASE("gan training is deterministic and the loss decomposition holds") {
    DeskFixture fix(8);
    auto cfg = quick_cfg(2, 3, 4);

    auto ae = train_autoencoder(fix.completes, fix.preset, cfg);
    auto vae = train_vae(fix.completes, fix.preset, cfg);

    auto run = [&] {
        return train_gan(fix.partials, fix.completes, ae.encoder, ae.decoder, vae.encoder, cfg);
    };
    auto m1 = run();
    auto m2 = run();

    REQUIRE(m1.log.rows.size() == 3);
    for (size_t r = 0; r < m1.log.rows.size(); ++r) {
        for (const auto& col : {"L_F", "L_G", "L_recon", "L_latent", "total"})
            CHECK(m1.log.column(r, col) == m2.log.column(r, col));
        double composed = m1.log.column(r, "L_G") + cfg.alpha * m1.log.column(r, "L_recon") +
                          cfg.beta * m1.log.column(r, "L_latent");
        CHECK(std::abs(m1.log.column(r, "total") - composed) < 1e-12);
    }
    CHECK(m1.generator.params().checksum() == m2.generator.params().checksum());
}

TEST_CASE("gan training leaves frozen networks bit-identical") {
    DeskFixture fix(6);
    auto cfg = quick_cfg(2, 2, 3);
    auto ae = train_autoencoder(fix.completes, fix.preset, cfg);
    auto vae = train_vae(fix.completes, fix.preset, cfg);

    const uint64_t enc_sum = ae.encoder.params().checksum();
    const uint64_t dec_sum = ae.decoder.params().checksum();
    const uint64_t ez_sum = vae.encoder.params().checksum();

    train_gan(fix.partials, fix.completes, ae.encoder, ae.decoder, vae.encoder, cfg);

    CHECK(ae.encoder.params().checksum() == enc_sum);
    CHECK(ae.decoder.params().checksum() == dec_sum);
    CHECK(vae.encoder.params().checksum() == ez_sum);
}

TEST_CASE("gan refuses unfrozen prerequisites") {
    DeskFixture fix(4);
    auto cfg = quick_cfg(1, 1, 2);
    nets::ShapeEncoder enc(fix.preset, 1);
    nets::ShapeDecoder dec(fix.preset, 1);
    nets::VaeEncoder ez(fix.preset, 1);
    CHECK_THROWS_AS(
        train_gan(fix.partials, fix.completes, enc, dec, ez, cfg), InvalidState);

    enc.freeze();
    dec.freeze();
    ez.freeze();  // frozen but never trained
    CHECK_THROWS_AS(
        train_gan(fix.partials, fix.completes, enc, dec, ez, cfg), InvalidState);
}

TEST_CASE("unpaired sets are sampled independently per domain") {
    DeskFixture fix(9);
    // Different set sizes prove there is no shared index space.
    std::vector<PointCloud> partials(fix.partials.begin(), fix.partials.begin() + 7);
    auto cfg = quick_cfg(1, 2, 3);
    auto ae = train_autoencoder(fix.completes, fix.preset, cfg);
    auto vae = train_vae(fix.completes, fix.preset, cfg);

    SpySampler spy;
    train_gan(partials, fix.completes, ae.encoder, ae.decoder, vae.encoder, cfg, &spy);

    REQUIRE(spy.calls.size() == 4);  // 2 epochs x 2 domains
    int partial_calls = 0, complete_calls = 0;
    for (const auto& [domain, size] : spy.calls) {
        if (domain == Domain::partial_set) {
            ++partial_calls;
            CHECK(size == 7);
        } else {
            ++complete_calls;
            CHECK(size == 9);
        }
    }
    CHECK(partial_calls == 2);
    CHECK(complete_calls == 2);
}

TEST_CASE("discriminator alone can learn against a frozen generator") {
    DeskFixture fix(10);
    auto cfg = quick_cfg(2, 0, 5);
    auto ae = train_autoencoder(fix.completes, fix.preset, cfg);

    nets::LatentGenerator gen(fix.preset, 3);
    nets::LatentDiscriminator disc(fix.preset, 3);

    // Codes are fixed: G and the autoencoder stay where they are.
    Rng rng(5);
    std::vector<double> real_codes, fake_codes;
    const int bsz = static_cast<int>(fix.completes.size());
    {
        ad::Graph ng(false);
        real_codes =
            ae.encoder.forward(ng, nets::cloud_batch(ng, fix.completes), false, false).value();
        std::vector<PointCloud> dup;
        for (const auto& p : fix.partials) dup.push_back(data::duplicate_to_n(p, 256));
        auto xp = ae.encoder.forward(ng, nets::cloud_batch(ng, dup), false, false);
        auto z = ng.constant({bsz, fix.preset.mode_dim},
                             rng.normal_vec(bsz * fix.preset.mode_dim));
        fake_codes = gen.forward(ng, xp, z, false).value();
    }

    ad::AdamConfig adam{cfg.lr, cfg.beta1_gan, 0.999, 1e-8};
    double first_lf = -1.0, last_lf = -1.0;
    for (int step = 0; step < 200; ++step) {
        ad::Graph g;
        auto sr = disc.forward(g, g.constant({bsz, fix.preset.latent_dim}, real_codes), true);
        auto sf = disc.forward(g, g.constant({bsz, fix.preset.latent_dim}, fake_codes), true);
        auto lf = g.add(g.mean_square_to(sr, 1.0), g.mean_square_to(sf, 0.0));
        g.backward(lf);
        ad::adam_step(disc.params(), adam);
        if (step == 0) first_lf = lf.scalar();
        last_lf = lf.scalar();
    }
    CHECK(last_lf < first_lf);
}

TEST_CASE("implicit variants run and reduce to the base objective at gamma 0") {
    DeskFixture fix(6);
    auto cfg = quick_cfg(2, 3, 3);
    auto ae = train_autoencoder(fix.completes, fix.preset, cfg);

    auto l2z = train_gan_im_l2z(fix.partials, fix.completes, ae.encoder, ae.decoder, cfg);
    REQUIRE(l2z.log.rows.size() == 3);
    for (size_t r = 0; r < l2z.log.rows.size(); ++r) {
        double composed = l2z.log.column(r, "L_G") + cfg.alpha * l2z.log.column(r, "L_recon") +
                          cfg.beta * l2z.log.column(r, "L_latent") +
                          cfg.gamma * l2z.log.column(r, "L_kl");
        CHECK(std::abs(l2z.log.column(r, "total") - composed) < 1e-12);
    }

    TrainConfig no_kl = cfg;
    no_kl.gamma = 0.0;
    auto reduced = train_gan_im_l2z(fix.partials, fix.completes, ae.encoder, ae.decoder, no_kl);
    for (size_t r = 0; r < reduced.log.rows.size(); ++r) {
        double base = reduced.log.column(r, "L_G") +
                      cfg.alpha * reduced.log.column(r, "L_recon") +
                      cfg.beta * reduced.log.column(r, "L_latent");
        CHECK(std::abs(reduced.log.column(r, "total") - base) < 1e-12);
    }

    auto pc2z = train_gan_im_pc2z(fix.partials, fix.completes, ae.encoder, ae.decoder, cfg);
    REQUIRE(pc2z.log.rows.size() == 3);
    for (const auto& row : pc2z.log.rows)
        for (double v : row) CHECK(std::isfinite(v));
}

TEST_CASE("training resumes bit-identically from a checkpoint") {
    DeskFixture fix(5);
    auto base_cfg = quick_cfg(24, 0, 5);

    // Straight run.
    auto straight = train_autoencoder(fix.completes, fix.preset, base_cfg);

    // Two-stage run through a checkpoint file.
    nets::ShapeEncoder enc(fix.preset, base_cfg.seed);
    nets::ShapeDecoder dec(fix.preset, base_cfg.seed);
    auto half_cfg = base_cfg;
    half_cfg.epochs_ae = 12;
    train_autoencoder_inplace(enc, dec, fix.completes, half_cfg);

    auto dir = std::filesystem::temp_directory_path();
    ad::save_checkpoint(enc.params(), (dir / "resume_enc.bin").string());
    ad::save_checkpoint(dec.params(), (dir / "resume_dec.bin").string());

    nets::ShapeEncoder enc2(fix.preset, 999);  // different init, overwritten by load
    nets::ShapeDecoder dec2(fix.preset, 999);
    ad::load_checkpoint(enc2.params(), (dir / "resume_enc.bin").string());
    ad::load_checkpoint(dec2.params(), (dir / "resume_dec.bin").string());

    auto resume_cfg = base_cfg;
    resume_cfg.start_epoch = 12;
    auto resumed_log = train_autoencoder_inplace(enc2, dec2, fix.completes, resume_cfg);

    CHECK(resumed_log.rows.front()[0] == 12.0);  // epoch numbering continues
    CHECK(enc2.params().checksum() == straight.encoder.params().checksum());
    CHECK(dec2.params().checksum() == straight.decoder.params().checksum());
    // Per-epoch losses of the overlap match exactly.
    for (size_t r = 0; r < resumed_log.rows.size(); ++r)
        CHECK(resumed_log.column(r, "loss") == straight.log.column(r + 12, "loss"));

    std::filesystem::remove(dir / "resume_enc.bin");
    std::filesystem::remove(dir / "resume_dec.bin");
}

TEST_CASE("train log csv round trip") {
    TrainLog log;
    log.columns = {"epoch", "L_F", "seconds"};
    log.add_row({0, 0.5, 0.01});
    log.add_row({1, 0.25, 0.01});
    CHECK_THROWS_AS(log.add_row({1, 0.1, 0.0}), InvalidInput);  // non-monotone epoch

    auto path = std::filesystem::temp_directory_path() / "mmsc_log_test.csv";
    log.write_csv(path.string());
    std::ifstream is(path);
    std::string header;
    std::getline(is, header);
    CHECK(header == "epoch,L_F,seconds");
    std::string row;
    std::getline(is, row);
    CHECK(row.substr(0, 6) == "0,0.5,");
    std::filesystem::remove(path);
}
