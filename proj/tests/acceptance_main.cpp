// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Criteria 5-7 share one set of trained chair models; the
// heavy stages print progress so long runs are observable.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "mmsc/mmsc.hpp"

using namespace mmsc;
namespace fs = std::filesystem;

namespace {

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Criterion {
    int id;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::vector<Criterion> g_results;

void report(int id, const std::string& name, bool pass, const std::string& detail, double secs) {
    g_results.push_back({id, name, pass, detail, secs});
    std::printf("[%s] criterion %2d: %-22s %s (%.1f s)\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
}

PointCloud random_cloud(Rng& rng, size_t n) {
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    return PointCloud(std::move(pts));
}

std::vector<double> flatten_channels(const PointCloud& c) {
    std::vector<double> data(3 * c.size());
    for (size_t i = 0; i < c.size(); ++i)
        for (int k = 0; k < 3; ++k) data[k * c.size() + i] = c[i][k];
    return data;
}

std::vector<size_t> pick_coords(Rng& rng, size_t total, size_t count) {
    std::vector<size_t> idx;
    while (idx.size() < std::min(count, total)) {
        size_t c = rng.uniform_index(total);
        if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
    }
    return idx;
}

// ---------------------------------------------------------------------------
// 1. EMD oracle
// ---------------------------------------------------------------------------

void criterion_1() {
    const double t0 = now_s();
    Rng rng(101);
    double worst = 0.0;
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 2 + rng.uniform_index(5);  // 2..6
        auto a = random_cloud(rng, n);
        auto b = random_cloud(rng, n);
        double hungarian = emd(a, b).cost;

        std::vector<size_t> perm(n);
        std::iota(perm.begin(), perm.end(), size_t{0});
        double oracle = std::numeric_limits<double>::infinity();
        do {
            double sum = 0.0;
            for (size_t i = 0; i < n; ++i) sum += norm(a[i] - b[perm[i]]);
            oracle = std::min(oracle, sum / static_cast<double>(n));
        } while (std::next_permutation(perm.begin(), perm.end()));

        worst = std::max(worst, std::abs(hungarian - oracle));
        ++checked;
    }
    const double secs = now_s() - t0;
    char detail[128];
    std::snprintf(detail, sizeof(detail), "%d pairs, worst |gap| %.2e, budget 5 s", checked,
                  worst);
    report(1, "emd-oracle", worst < 1e-9 && secs < 5.0, detail, secs);
}

// ---------------------------------------------------------------------------
// 2. Gradient suite
// ---------------------------------------------------------------------------

void criterion_2() {
    const double t0 = now_s();
    Rng rng(202);
    double worst = 0.0;
    auto note = [&](double err) { worst = std::max(worst, err); };

    // Elementary ops on small random shapes.
    {
        auto wv = rng.normal_vec(5 * 4), bv = rng.normal_vec(5), xv = rng.normal_vec(3 * 4);
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                return g.mean_square_to(
                    g.linear(x, g.input({5, 4}, wv), g.input({5}, bv)), 0.2);
            },
            {3, 4}, xv));

        auto x3 = rng.normal_vec(2 * 3 * 6);
        auto w3 = rng.normal_vec(4 * 3), b3 = rng.normal_vec(4);
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                return g.mean_square_to(
                    g.linear(x, g.input({4, 3}, w3), g.input({4}, b3)), -0.1);
            },
            {2, 3, 6}, x3));

        std::vector<double> spread(12);
        for (auto& v : spread) v = (rng.uniform() < 0.5 ? -1 : 1) * rng.uniform(0.2, 1.3);
        note(ad::grad_check(
            [](ad::Graph& g, const ad::Tensor& x) { return g.mean_square_to(g.relu(x), 0.0); },
            {3, 4}, spread));
        note(ad::grad_check(
            [](ad::Graph& g, const ad::Tensor& x) {
                return g.mean_square_to(g.leaky_relu(x), 0.0);
            },
            {3, 4}, spread));
        note(ad::grad_check(
            [](ad::Graph& g, const ad::Tensor& x) {
                return g.mean_square_to(g.maxpool_points(x), 0.0);
            },
            {2, 3, 2}, spread));

        ad::ParamStore bn_store;
        auto& rm = bn_store.create("m", {3}, rng.normal_vec(3), false);
        auto& rv = bn_store.create("v", {3}, {0.7, 1.1, 1.9}, false);
        for (bool training : {true, false}) {
            auto xb = rng.normal_vec(4 * 3 * 5);
            note(ad::grad_check(
                [&](ad::Graph& g, const ad::Tensor& x) {
                    auto gamma = g.input({3}, {1.1, 0.9, 1.3});
                    auto beta = g.input({3}, {0.1, -0.2, 0.0});
                    return g.mean_square_to(g.batchnorm(x, gamma, beta, rm, rv, training), 0.3);
                },
                {4, 3, 5}, xb));
        }

        auto av = rng.normal_vec(2 * 3), b2 = rng.normal_vec(2 * 4), w2 = rng.normal_vec(2 * 7);
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                auto other = g.input({2, 4}, b2);
                return g.mean_square_to(
                    g.linear(g.concat({x, other}), g.input({2, 7}, w2), g.input({2}, {0, 0})),
                    0.0);
            },
            {2, 3}, av));

        auto eps = rng.normal_vec(6), muv = rng.normal_vec(6), lvv = rng.normal_vec(6);
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& mu) {
                return g.mean_square_to(g.reparameterize(mu, g.input({2, 3}, lvv), eps), 0.1);
            },
            {2, 3}, muv));
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& lv) {
                return g.mean_square_to(g.reparameterize(g.input({2, 3}, muv), lv, eps), 0.1);
            },
            {2, 3}, lvv));
        std::vector<double> spread6(spread.begin(), spread.begin() + 6);
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) { return g.l1_to(x, lvv); }, {2, 3}, spread6));
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& mu) {
                return g.kl_standard_normal(mu, g.input({2, 3}, lvv));
            },
            {2, 3}, muv));
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& lv) {
                return g.kl_standard_normal(g.input({2, 3}, muv), lv);
            },
            {2, 3}, lvv));
    }

    // Composite loss paths at the desk preset, finite differences over
    // sampled input coordinates.
    {
        NetPreset p = NetPreset::desk();
        nets::ShapeEncoder enc(p, 11);
        nets::ShapeDecoder dec(p, 11);
        nets::VaeEncoder vae(p, 11);
        nets::LatentGenerator gen(p, 11);
        nets::LatentDiscriminator disc(p, 11);
        nets::LatentModeEncoder lez(p, 11);

        const int B = 2;
        std::vector<PointCloud> clouds{random_cloud(rng, p.complete_points),
                                       random_cloud(rng, p.complete_points)};
        std::vector<double> x0;
        for (const auto& c : clouds) {
            auto f = flatten_channels(c);
            x0.insert(x0.end(), f.begin(), f.end());
        }
        const std::vector<int> xshape{B, 3, p.complete_points};
        auto coords = pick_coords(rng, x0.size(), 8);
        auto zv = rng.normal_vec(static_cast<size_t>(B) * p.mode_dim);

        // Reconstruction objective (autoencoder).
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                return g.emd_loss(dec.forward(g, enc.forward(g, x, true, false), false), clouds);
            },
            xshape, x0, 1e-5, coords));

        // Adversarial objectives, both sides.
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                auto fake = gen.forward(g, enc.forward(g, x, false, false),
                                        g.constant({B, p.mode_dim}, zv), false);
                auto real_scores = disc.forward(g, enc.forward(g, x, false, false), false);
                return g.add(g.mean_square_to(real_scores, 1.0),
                             g.mean_square_to(disc.forward(g, fake, false), 0.0));
            },
            xshape, x0, 1e-5, coords));
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                auto fake = gen.forward(g, enc.forward(g, x, false, false),
                                        g.constant({B, p.mode_dim}, zv), false);
                return g.mean_square_to(disc.forward(g, fake, false), 1.0);
            },
            xshape, x0, 1e-5, coords));

        // Partial reconstruction (unidirectional Hausdorff through the
        // decoder).
        std::vector<PointCloud> partials{random_cloud(rng, p.partial_points),
                                         random_cloud(rng, p.partial_points)};
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                auto fake = gen.forward(g, enc.forward(g, x, false, false),
                                        g.constant({B, p.mode_dim}, zv), false);
                return g.hausdorff_loss(dec.forward(g, fake, false), partials);
            },
            xshape, x0, 1e-5, coords));

        // Latent reconstruction through decoder and mode encoder.
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                auto fake = gen.forward(g, enc.forward(g, x, false, false),
                                        g.constant({B, p.mode_dim}, zv), false);
                auto completion = dec.forward(g, fake, false);
                auto [mu, lv] = vae.forward(g, g.rows_to_channels(completion), false, false);
                return g.l1_to(mu, zv);
            },
            xshape, x0, 1e-5, coords));

        // Full objective with the importance weights.
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                auto code = enc.forward(g, x, false, false);
                auto fake = gen.forward(g, code, g.constant({B, p.mode_dim}, zv), false);
                auto completion = dec.forward(g, fake, false);
                auto lg = g.mean_square_to(disc.forward(g, fake, false), 1.0);
                auto lrec = g.hausdorff_loss(completion, partials);
                auto [mu, lv] = vae.forward(g, g.rows_to_channels(completion), false, false);
                auto llat = g.l1_to(mu, zv);
                return g.add(lg, g.add(g.scale(lrec, 6.0), g.scale(llat, 7.5)));
            },
            xshape, x0, 1e-5, coords));

        // Implicit variants with their KL terms.
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                auto code = enc.forward(g, x, false, false);
                auto fake = gen.forward(g, code, g.constant({B, p.mode_dim}, zv), false);
                auto [mu, lv] = lez.forward(g, fake, false);
                auto [mu_c, lv_c] = lez.forward(g, code, false);
                return g.add(g.l1_to(mu, zv),
                             g.scale(g.kl_standard_normal(mu_c, lv_c), 1.0));
            },
            xshape, x0, 1e-5, coords));
        note(ad::grad_check(
            [&](ad::Graph& g, const ad::Tensor& x) {
                auto code = enc.forward(g, x, false, false);
                auto fake = gen.forward(g, code, g.constant({B, p.mode_dim}, zv), false);
                auto completion = dec.forward(g, fake, false);
                auto [mu, lv] = vae.forward(g, g.rows_to_channels(completion), false, false);
                auto [mu_c, lv_c] = vae.forward(g, x, false, false);
                return g.add(g.l1_to(mu, zv),
                             g.scale(g.kl_standard_normal(mu_c, lv_c), 1.0));
            },
            xshape, x0, 1e-5, coords));
    }

    const double secs = now_s() - t0;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max rel err %.2e (tol 1e-4), budget 60 s", worst);
    report(2, "gradient-suite", worst < 1e-4 && secs < 60.0, detail, secs);
}

// ---------------------------------------------------------------------------
// 3. Closed-form loss values
// ---------------------------------------------------------------------------

void criterion_3() {
    const double t0 = now_s();
    bool ok = true;
    std::string why;

    std::vector<double> ones{1, 1, 1}, zeros{0, 0, 0};
    auto [lf, lg_unused] = train::lsgan_losses(ones, zeros);
    auto [lf2, lg] = train::lsgan_losses(zeros, ones);
    if (std::abs(lf) > 1e-12) { ok = false; why = "L_F optimum"; }
    if (std::abs(lg) > 1e-12) { ok = false; why = "L_G optimum"; }

    ad::Graph g;
    auto z6 = g.input({2, 3}, std::vector<double>(6, 0.0));
    if (std::abs(g.kl_standard_normal(z6, z6).scalar()) > 1e-12) { ok = false; why = "KL(0,0)"; }

    Rng rng(303);
    auto a = random_cloud(rng, 32);
    auto b = random_cloud(rng, 32);
    eval::CompletionSet pair{"p", {a, b}, {}};
    if (std::abs(eval::tmd(pair) - 2.0 * chamfer(a, b)) > 1e-12) { ok = false; why = "TMD k=2"; }

    std::vector<PointCloud> test{a, b};
    std::vector<PointCloud> gen_set{b, a, random_cloud(rng, 32)};
    if (eval::mmd(test, gen_set) != 0.0) { ok = false; why = "MMD superset"; }

    report(3, "closed-forms", ok, ok ? "lsgan/kl/tmd/mmd exact to 1e-12" : ("failed: " + why),
           now_s() - t0);
}

// ---------------------------------------------------------------------------
// Shared desk fixtures for criteria 4-8
// ---------------------------------------------------------------------------

struct ChairFixtures {
    NetPreset preset = NetPreset::desk();
    std::vector<PointCloud> train_completes, train_partials;
    std::vector<PointCloud> test_partials;
    std::vector<data::PartedShape> test_shapes;
    std::unique_ptr<train::AutoencoderModel> ae;
    std::unique_ptr<train::VaeModel> vae;
    // gan[seed][beta] trained lazily by criterion 5
    std::map<std::pair<uint64_t, double>, train::GanModel> gans;

    static constexpr int kTrainShapes = 32;
    static constexpr int kTestShapes = 8;
    static constexpr int kAeEpochs = 400;
    static constexpr int kGanEpochs = 240;
    static constexpr int kBatch = 8;

    void build_data() {
        if (!train_completes.empty()) return;
        Rng rng(7001);
        for (int i = 0; i < kTrainShapes; ++i) {
            auto shape = data::gen_shape(data::Category::chair, rng, preset.complete_points);
            train_completes.push_back(shape.union_cloud());
            train_partials.push_back(
                data::remove_parts(shape, rng, preset.partial_points).partial);
        }
        for (int i = 0; i < kTestShapes; ++i) {
            auto shape = data::gen_shape(data::Category::chair, rng, preset.complete_points);
            test_partials.push_back(
                data::remove_parts(shape, rng, preset.partial_points).partial);
            test_shapes.push_back(std::move(shape));
        }
    }

    train::TrainConfig stage_cfg(bool gan, uint64_t seed) {
        train::TrainConfig cfg;
        cfg.epochs_ae = kAeEpochs;
        cfg.epochs_gan = kGanEpochs;
        cfg.batch = kBatch;
        cfg.seed = seed;
        cfg.threads = default_threads();
        return cfg;
    }

    void build_frozen_stages() {
        build_data();
        if (ae) return;
        std::printf("    [fixture] training chair autoencoder (%d shapes, %d epochs)\n",
                    kTrainShapes, kAeEpochs);
        std::fflush(stdout);
        ae = std::make_unique<train::AutoencoderModel>(
            train::train_autoencoder(train_completes, preset, stage_cfg(false, 1)));
        std::printf("    [fixture] training chair VAE\n");
        std::fflush(stdout);
        vae = std::make_unique<train::VaeModel>(
            train::train_vae(train_completes, preset, stage_cfg(false, 1)));
    }

    train::GanModel& gan(uint64_t seed, double beta) {
        build_frozen_stages();
        auto key = std::make_pair(seed, beta);
        auto it = gans.find(key);
        if (it != gans.end()) return it->second;
        std::printf("    [fixture] training gan seed %llu beta %.1f (%d epochs)\n",
                    static_cast<unsigned long long>(seed), beta, kGanEpochs);
        std::fflush(stdout);
        auto cfg = stage_cfg(true, seed);
        cfg.beta = beta;
        auto model = train::train_gan(train_partials, train_completes, ae->encoder, ae->decoder,
                                      vae->encoder, cfg);
        return gans.emplace(key, std::move(model)).first->second;
    }

    eval::CompletionPipeline pipeline(train::GanModel& gan_model) {
        return {&ae->encoder, &ae->decoder, &gan_model.generator, &vae->encoder};
    }
};

ChairFixtures g_fixtures;

// ---------------------------------------------------------------------------
// 4. AE trainability (tables, per the stated fixture)
// ---------------------------------------------------------------------------

void criterion_4() {
    const double t0 = now_s();
    Rng rng(404);
    std::vector<PointCloud> tables;
    for (int i = 0; i < 20; ++i)
        tables.push_back(data::gen_shape(data::Category::table, rng, 256).union_cloud());

    train::TrainConfig cfg;
    cfg.epochs_ae = 500;
    cfg.batch = 10;
    cfg.seed = 1;
    cfg.threads = default_threads();
    auto model = train::train_autoencoder(tables, NetPreset::desk(), cfg);

    const double first = model.log.column(0, "loss");
    const double last = model.log.column(model.log.rows.size() - 1, "loss");
    const double secs = now_s() - t0;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "loss %.4f -> %.4f (%.1f%%), budget 600 s", first, last,
                  100.0 * last / first);
    report(4, "ae-trainability", last <= 0.20 * first && secs < 600.0, detail, secs);
}

// ---------------------------------------------------------------------------
// 5. Diversity ablation (beta 0 vs 7.5)
// ---------------------------------------------------------------------------

double tmd_of_model(ChairFixtures& fx, train::GanModel& model, uint64_t eval_seed) {
    auto pipe = fx.pipeline(model);
    Rng rng = Rng(eval_seed).child("tmd_eval");
    std::vector<eval::CompletionSet> sets;
    for (size_t i = 0; i < fx.test_partials.size(); ++i)
        sets.push_back(eval::complete_k(pipe, fx.test_partials[i], 10, rng));
    return eval::tmd_mean(sets);
}

void criterion_5() {
    const double t0 = now_s();
    int passes = 0;
    std::string detail;
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        double tmd0 = tmd_of_model(g_fixtures, g_fixtures.gan(seed, 0.0), seed);
        double tmd75 = tmd_of_model(g_fixtures, g_fixtures.gan(seed, 7.5), seed);
        bool seed_pass = tmd75 > 1.2 * tmd0;
        passes += seed_pass;
        char buf[80];
        std::snprintf(buf, sizeof(buf), "s%llu: %.4f vs %.4f%s ",
                      static_cast<unsigned long long>(seed), tmd0, tmd75,
                      seed_pass ? "" : " (x)");
        detail += buf;
        std::printf("    [c5] seed %llu: TMD(beta=0) %.5f, TMD(beta=7.5) %.5f -> %s\n",
                    static_cast<unsigned long long>(seed), tmd0, tmd75,
                    seed_pass ? "pass" : "fail");
        std::fflush(stdout);
    }
    const double secs = now_s() - t0;
    report(5, "diversity-ablation", passes >= 2, detail + "budget 3600 s", secs);
}

// ---------------------------------------------------------------------------
// 6. Incompleteness trend (j=1 vs j=3 removed parts)
// ---------------------------------------------------------------------------

void criterion_6() {
    const double t0 = now_s();
    int passes = 0;
    std::string detail;
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        auto& model = g_fixtures.gan(seed, 7.5);
        auto pipe = g_fixtures.pipeline(model);
        Rng rng = Rng(seed).child("c6_eval");
        auto rows = eval::sweep_incompleteness({1, 3}, g_fixtures.test_shapes, pipe, 10,
                                               g_fixtures.preset.partial_points, rng);
        bool seed_pass = rows[1].tmd > rows[0].tmd;
        passes += seed_pass;
        char buf[80];
        std::snprintf(buf, sizeof(buf), "s%llu: j1 %.4f j3 %.4f%s ",
                      static_cast<unsigned long long>(seed), rows[0].tmd, rows[1].tmd,
                      seed_pass ? "" : " (x)");
        detail += buf;
        std::printf("    [c6] seed %llu: TMD(j=1) %.5f, TMD(j=3) %.5f -> %s\n",
                    static_cast<unsigned long long>(seed), rows[0].tmd, rows[1].tmd,
                    seed_pass ? "pass" : "fail");
        std::fflush(stdout);
    }
    report(6, "incompleteness-trend", passes >= 2, detail, now_s() - t0);
}

// ---------------------------------------------------------------------------
// 7. Fidelity bound vs the KNN-latent baseline
// ---------------------------------------------------------------------------

void criterion_7() {
    const double t0 = now_s();
    auto& model = g_fixtures.gan(1, 7.5);
    auto pipe = g_fixtures.pipeline(model);
    Rng rng(707);

    std::vector<eval::CompletionSet> model_sets, knn_sets;
    eval::KnnLatentBaseline knn(g_fixtures.ae->encoder, g_fixtures.train_completes);
    for (const auto& partial : g_fixtures.test_partials) {
        model_sets.push_back(eval::complete_k(pipe, partial, 10, rng));
        knn_sets.push_back(eval::CompletionSet{"knn", knn.query(partial, 10), {}});
    }
    double model_uhd = eval::uhd_mean(g_fixtures.test_partials, model_sets);
    double knn_uhd = eval::uhd_mean(g_fixtures.test_partials, knn_sets);

    char detail[96];
    std::snprintf(detail, sizeof(detail), "model UHD %.4f vs knn %.4f (bound 2x)", model_uhd,
                  knn_uhd);
    report(7, "fidelity-bound", model_uhd <= 2.0 * knn_uhd, detail, now_s() - t0);
}

// ---------------------------------------------------------------------------
// 8. Freezing and unpaired contracts
// ---------------------------------------------------------------------------

struct SpySampler final : train::BatchSampler {
    train::IndependentSampler inner;
    std::vector<std::pair<train::Domain, size_t>> calls;
    std::vector<size_t> epoch_order(train::Domain d, size_t n, Rng& rng) override {
        calls.push_back({d, n});
        return inner.epoch_order(d, n, rng);
    }
};

void criterion_8() {
    const double t0 = now_s();
    g_fixtures.build_frozen_stages();
    auto& fx = g_fixtures;

    const uint64_t enc_sum = fx.ae->encoder.params().checksum();
    const uint64_t dec_sum = fx.ae->decoder.params().checksum();
    const uint64_t ez_sum = fx.vae->encoder.params().checksum();

    // Deliberately different set sizes; the spy records per-domain draws.
    std::vector<PointCloud> partial_subset(fx.train_partials.begin(),
                                           fx.train_partials.begin() + 17);
    auto cfg = fx.stage_cfg(true, 5);
    cfg.epochs_gan = 3;
    SpySampler spy;
    train::train_gan(partial_subset, fx.train_completes, fx.ae->encoder, fx.ae->decoder,
                     fx.vae->encoder, cfg, &spy);

    bool frozen_ok = fx.ae->encoder.params().checksum() == enc_sum &&
                     fx.ae->decoder.params().checksum() == dec_sum &&
                     fx.vae->encoder.params().checksum() == ez_sum;

    bool spy_ok = spy.calls.size() == 6;
    int p_calls = 0, c_calls = 0;
    for (const auto& [domain, size] : spy.calls) {
        if (domain == train::Domain::partial_set) {
            ++p_calls;
            spy_ok = spy_ok && size == 17;
        } else {
            ++c_calls;
            spy_ok = spy_ok && size == static_cast<size_t>(ChairFixtures::kTrainShapes);
        }
    }
    spy_ok = spy_ok && p_calls == 3 && c_calls == 3;

    std::string detail = std::string("frozen ") + (frozen_ok ? "bit-identical" : "CHANGED") +
                         ", sampler " + (spy_ok ? "independent per domain" : "VIOLATION");
    report(8, "freezing-unpaired", frozen_ok && spy_ok, detail, now_s() - t0);
}

// ---------------------------------------------------------------------------
// 9. Metric parity vs naive references, and scale bookkeeping
// ---------------------------------------------------------------------------

double chamfer_naive(const PointCloud& a, const PointCloud& b) {
    double ab = 0.0;
    for (const auto& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : b) best = std::min(best, norm2(p - q));
        ab += best;
    }
    double ba = 0.0;
    for (const auto& q : b) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : a) best = std::min(best, norm2(p - q));
        ba += best;
    }
    return ab / static_cast<double>(a.size()) + ba / static_cast<double>(b.size());
}

void criterion_9() {
    const double t0 = now_s();
    Rng rng(909);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        size_t n = 16 + rng.uniform_index(240);
        auto a = random_cloud(rng, n);
        auto uneven = random_cloud(rng, 16 + rng.uniform_index(240));
        worst = std::max(worst, std::abs(chamfer(a, uneven) - chamfer_naive(a, uneven)));

        auto b = random_cloud(rng, n);
        std::vector<PointCloud> test{a}, gen_set{b, random_cloud(rng, n)};
        double mmd_naive = std::min(chamfer_naive(a, gen_set[0]), chamfer_naive(a, gen_set[1]));
        worst = std::max(worst, std::abs(eval::mmd(test, gen_set) - mmd_naive));

        eval::CompletionSet cs{"t", {a, b, gen_set[1]}, {}};
        double tmd_naive = 0.0;
        for (size_t j = 0; j < 3; ++j) {
            double avg = 0.0;
            for (size_t l = 0; l < 3; ++l)
                if (l != j) avg += chamfer_naive(cs.completions[j], cs.completions[l]);
            tmd_naive += avg / 2.0;
        }
        worst = std::max(worst, std::abs(eval::tmd(cs) - tmd_naive));

        auto partial = random_cloud(rng, 8 + rng.uniform_index(120));
        double uhd_naive = 0.0;
        for (const auto& c : cs.completions) {
            double worst_p = 0.0;
            for (const auto& x : partial) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& y : c) best = std::min(best, norm2(x - y));
                worst_p = std::max(worst_p, best);
            }
            uhd_naive += std::sqrt(worst_p);
        }
        uhd_naive /= 3.0;
        worst = std::max(worst, std::abs(eval::uhd(partial, cs) - uhd_naive));
    }

    eval::EvalReport r;
    r.mmd_raw = 0.00165;
    r.tmd_raw = 0.0312;
    r.uhd_raw = 0.0606;
    bool scales_ok = r.mmd_scaled() == r.mmd_raw * 1e3 && r.tmd_scaled() == r.tmd_raw * 1e2 &&
                     r.uhd_scaled() == r.uhd_raw * 1e2;

    char detail[96];
    std::snprintf(detail, sizeof(detail), "50 instances, worst |gap| %.2e, scales %s", worst,
                  scales_ok ? "exact" : "WRONG");
    report(9, "metric-parity", worst < 1e-9 && scales_ok, detail, now_s() - t0);
}

// ---------------------------------------------------------------------------
// 10. CLI reproducibility
// ---------------------------------------------------------------------------

#ifdef MMSC_CLI_PATH

int run_cli(const std::string& args, const fs::path& dir) {
    std::string cmd = "cd '" + dir.string() + "' && '" + MMSC_CLI_PATH + "' " + args +
                      " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return (status >= 0) ? ((status >> 8) & 0xff) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string log_without_seconds(const fs::path& csv) {
    std::ifstream is(csv);
    std::string line, out;
    while (std::getline(is, line)) {
        out += line.substr(0, line.rfind(','));
        out += '\n';
    }
    return out;
}

void criterion_10() {
    const double t0 = now_s();
    auto dir = fs::temp_directory_path() / "mmsc_accept_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);

    bool ok = true;
    std::string why = "gen/train/complete/eval reruns byte-identical";
    auto step = [&](const std::string& args) {
        if (ok && run_cli(args, dir) != 0) {
            ok = false;
            why = "command failed: " + args;
        }
    };

    step("gen-data --category table --count 8 --seed 5 --out d1 --protocol both");
    step("gen-data --category table --count 8 --seed 5 --out d2 --protocol both");
    step("train --stage ae --manifest d1/manifest.json --out m1 --epochs 4 --batch 4 --seed 2");
    step("train --stage ae --manifest d1/manifest.json --out m2 --epochs 4 --batch 4 --seed 2");
    step("train --stage vae --manifest d1/manifest.json --out m1 --epochs 4 --batch 4 --seed 2");
    step("train --stage gan --manifest d1/manifest.json --out m1 --epochs 3 --batch 4 --seed 2");
    step("complete --input d1/partial/table_0000_parts.xyz --model m1 --k 4 --out c1 --seed 9");
    step("complete --input d1/partial/table_0000_parts.xyz --model m1 --k 4 --out c2 --seed 9");
    step("eval --manifest d1/manifest.json --model m1 --out r1 --k 3 --seed 4");
    step("eval --manifest d1/manifest.json --model m1 --out r2 --k 3 --seed 4");

    if (ok) {
        auto same = [&](const fs::path& a, const fs::path& b) {
            if (slurp(dir / a) != slurp(dir / b)) {
                ok = false;
                why = "mismatch: " + a.string() + " vs " + b.string();
            }
        };
        same("d1/manifest.json", "d2/manifest.json");
        same("d1/complete/table_0003.xyz", "d2/complete/table_0003.xyz");
        same("d1/partial/table_0003_scan.xyz", "d2/partial/table_0003_scan.xyz");
        same("m1/ae_encoder.ckpt", "m2/ae_encoder.ckpt");
        same("m1/ae_decoder.ckpt", "m2/ae_decoder.ckpt");
        same("c1/completion_00.xyz", "c2/completion_00.xyz");
        same("c1/completion_03.xyz", "c2/completion_03.xyz");
        same("r1/report.csv", "r2/report.csv");
        same("r1/report.json", "r2/report.json");
        if (ok && log_without_seconds(dir / "m1" / "ae_log.csv") !=
                      log_without_seconds(dir / "m2" / "ae_log.csv")) {
            ok = false;
            why = "training log loss columns differ";
        }
    }
    fs::remove_all(dir);
    report(10, "cli-reproducibility", ok, why, now_s() - t0);
}

#endif  // MMSC_CLI_PATH

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> only;
    for (int a = 1; a < argc; ++a) {
        std::string arg = argv[a];
        if (arg.rfind("--only=", 0) == 0) {
            std::istringstream ss(arg.substr(7));
            std::string tok;
            while (std::getline(ss, tok, ',')) only.push_back(std::atoi(tok.c_str()));
        }
    }
    auto want = [&](int id) {
        return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
    };

    const double t0 = now_s();
    if (want(1)) criterion_1();
    if (want(2)) criterion_2();
    if (want(3)) criterion_3();
    if (want(4)) criterion_4();
    if (want(5)) criterion_5();
    if (want(6)) criterion_6();
    if (want(7)) criterion_7();
    if (want(8)) criterion_8();
    if (want(9)) criterion_9();
#ifdef MMSC_CLI_PATH
    if (want(10)) criterion_10();
#endif

    int failures = 0;
    for (const auto& c : g_results) failures += c.pass ? 0 : 1;
    std::printf("---\n%zu criteria run, %d failed (%.0f s total)\n", g_results.size(), failures,
                now_s() - t0);
    return failures;
}
