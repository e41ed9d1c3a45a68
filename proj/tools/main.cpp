// Command-line driver: data generation, the training stages, completion
// and evaluation, with reproducible outputs from (flags, config, seed).

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "mmsc/mmsc.hpp"

namespace fs = std::filesystem;
using namespace mmsc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;
constexpr int kExitMissingPrereq = 3;

struct MissingPrerequisite : Error {
    using Error::Error;
};

// MMSC_OUT_ROOT, when set, re-roots every relative output path.
fs::path resolve_out(const std::string& path) {
    fs::path p(path);
    const char* root = std::getenv("MMSC_OUT_ROOT");
    if (root && *root && p.is_relative()) return fs::path(root) / p;
    return p;
}

struct CommonOpts {
    std::string preset_name = "desk";
    uint64_t seed = 1;
    unsigned threads = default_threads();
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    cmd->add_option("--preset", opts.preset_name, "Network/cardinality preset (desk or paper)")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--seed", opts.seed, "Root seed; every RNG derives from it");
    cmd->add_option("--threads", opts.threads, "Worker threads for batch geometry");
}

// ---------------------------------------------------------------------------
// Model directory layout
// ---------------------------------------------------------------------------

struct ModelDir {
    fs::path dir;

    fs::path meta() const { return dir / "model_meta.json"; }
    fs::path ckpt(const std::string& tag) const { return dir / (tag + ".ckpt"); }
    fs::path log_csv(const std::string& stage) const { return dir / (stage + "_log.csv"); }

    void write_meta(const NetPreset& preset) const {
        nlohmann::ordered_json j;
        j["preset"] = preset.name;
        std::ofstream os(meta());
        if (!os) throw IoError("cannot write " + meta().string());
        os << j.dump(2) << '\n';
    }

    NetPreset read_preset() const {
        std::ifstream is(meta());
        if (!is) throw MissingPrerequisite("model metadata missing; run a train stage first");
        nlohmann::json j;
        is >> j;
        return NetPreset::by_name(j.at("preset").get<std::string>());
    }

    void require(const std::string& tag, const std::string& stage) const {
        if (!fs::exists(ckpt(tag)))
            throw MissingPrerequisite("missing prerequisite stage '" + stage + "': " +
                                      ckpt(tag).string() + " not found");
    }
};

// Last epoch recorded in an existing log, or -1.
int last_logged_epoch(const fs::path& csv) {
    std::ifstream is(csv);
    if (!is) return -1;
    std::string line, last;
    std::getline(is, line);  // header
    while (std::getline(is, line))
        if (!line.empty()) last = line;
    if (last.empty()) return -1;
    return std::atoi(last.c_str());
}

void append_log_rows(const train::TrainLog& log, const fs::path& csv, bool resume) {
    if (!resume || !fs::exists(csv)) {
        log.write_csv(csv.string());
        return;
    }
    std::ofstream os(csv, std::ios::app);
    char buf[40];
    for (const auto& row : log.rows) {
        os << static_cast<long long>(row[0]);
        for (size_t c = 1; c < row.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[c]);
            os << ',' << buf;
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// Manifest-backed dataset views
// ---------------------------------------------------------------------------

struct LoadedData {
    std::vector<PointCloud> train_completes;
    std::vector<PointCloud> train_partials;
    std::vector<PointCloud> test_completes;
    std::vector<PointCloud> test_partials;
    std::vector<std::string> test_partial_ids;
    std::vector<data::PartedShape> test_shapes;
};

LoadedData load_dataset(const std::string& manifest_path) {
    auto manifest = data::read_manifest(manifest_path);
    fs::path base = fs::path(manifest_path).parent_path();
    data::validate_manifest(manifest, base.string());

    LoadedData out;
    for (const auto& e : manifest.entries) {
        auto shape = data::read_parted((base / e.complete_path).string());
        auto complete = shape.union_cloud();
        const bool is_test = e.split == "test";
        if (is_test) {
            out.test_completes.push_back(complete);
            out.test_shapes.push_back(shape);
        } else {
            out.train_completes.push_back(complete);
        }
        for (const auto& p : e.partials) {
            auto cloud = data::read_xyz((base / p.path).string());
            if (is_test) {
                out.test_partials.push_back(std::move(cloud));
                out.test_partial_ids.push_back(e.id + "/" + p.kind);
            } else {
                out.train_partials.push_back(std::move(cloud));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

int cmd_gen_data(const std::string& category, size_t count, const std::string& out_dir,
                 const std::string& protocol, int views_per_partial, const CommonOpts& common) {
    data::GenConfig cfg;
    cfg.category = data::category_from_string(category);
    cfg.count = count;
    cfg.seed = common.seed;
    cfg.out_dir = resolve_out(out_dir).string();
    cfg.protocol = data::protocol_from_string(protocol);
    cfg.views_per_partial = views_per_partial;
    cfg.preset = NetPreset::by_name(common.preset_name);
    cfg.threads = common.threads;

    auto manifest = data::generate_dataset(cfg);
    size_t n_partials = 0, n_test = 0;
    for (const auto& e : manifest.entries) {
        n_partials += e.partials.size();
        if (e.split == "test") ++n_test;
    }
    std::cout << "generated " << manifest.entries.size() << " shapes (" << n_test << " test), "
              << n_partials << " partials under " << cfg.out_dir << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainOpts {
    std::string stage;
    std::string manifest;
    std::string out_dir;
    bool resume = false;
    int epochs = -1;
    int batch = -1;
    double alpha = 6.0;
    double beta = 7.5;
    double gamma = 1.0;
    double lr = 0.0005;
    double lambda_kl = 0.03;
    int checkpoint_every = 0;
};

train::TrainConfig make_train_config(const TrainOpts& opts, const CommonOpts& common,
                                     bool gan_stage) {
    train::TrainConfig cfg = gan_stage ? train::TrainConfig::desk_gan()
                                       : train::TrainConfig::desk_ae();
    if (common.preset_name == "paper")
        cfg = gan_stage ? train::TrainConfig::paper_gan() : train::TrainConfig::paper_ae();
    cfg.alpha = opts.alpha;
    cfg.beta = opts.beta;
    cfg.gamma = opts.gamma;
    cfg.lr = opts.lr;
    cfg.lambda_kl = opts.lambda_kl;
    cfg.seed = common.seed;
    cfg.threads = common.threads;
    if (opts.epochs >= 0) (gan_stage ? cfg.epochs_gan : cfg.epochs_ae) = opts.epochs;
    if (opts.batch >= 1) cfg.batch = opts.batch;
    return cfg;
}

int cmd_train(const TrainOpts& opts, const CommonOpts& common) {
    ModelDir model{resolve_out(opts.out_dir)};
    fs::create_directories(model.dir);
    auto dataset = load_dataset(opts.manifest);
    const NetPreset preset = NetPreset::by_name(common.preset_name);
    const bool gan_stage = opts.stage != "ae" && opts.stage != "vae";
    train::TrainConfig cfg = make_train_config(opts, common, gan_stage);

    // Periodic checkpointing hook; cadence 0 means final-only.
    auto save_stage = [&](const std::vector<std::pair<std::string, const ad::ParamStore*>>& nets) {
        for (const auto& [tag, store] : nets) ad::save_checkpoint(*store, model.ckpt(tag).string());
    };

    if (opts.stage == "ae") {
        nets::ShapeEncoder enc(preset, cfg.seed);
        nets::ShapeDecoder dec(preset, cfg.seed);
        if (opts.resume) {
            int last = last_logged_epoch(model.log_csv("ae"));
            if (last < 0)
                throw MissingPrerequisite("--resume for stage 'ae' found no previous run");
            ad::load_checkpoint(enc.params(), model.ckpt("ae_encoder").string());
            ad::load_checkpoint(dec.params(), model.ckpt("ae_decoder").string());
            cfg.start_epoch = last + 1;
        }
        train::EpochCallback cb;
        if (opts.checkpoint_every > 0)
            cb = [&](int epoch, const train::TrainLog&) {
                if ((epoch + 1) % opts.checkpoint_every == 0)
                    save_stage({{"ae_encoder", &enc.params()}, {"ae_decoder", &dec.params()}});
            };
        auto log = train::train_autoencoder_inplace(enc, dec, dataset.train_completes, cfg, cb);
        save_stage({{"ae_encoder", &enc.params()}, {"ae_decoder", &dec.params()}});
        append_log_rows(log, model.log_csv("ae"), opts.resume);
        model.write_meta(preset);
        std::cout << "ae: " << log.rows.size() << " epochs, final loss "
                  << log.rows.back()[1] << "\n";
        return kExitOk;
    }

    if (opts.stage == "vae") {
        nets::VaeEncoder enc(preset, cfg.seed);
        nets::ShapeDecoder dec(preset, cfg.seed, preset.mode_dim, "vaedec");
        if (opts.resume) {
            int last = last_logged_epoch(model.log_csv("vae"));
            if (last < 0)
                throw MissingPrerequisite("--resume for stage 'vae' found no previous run");
            ad::load_checkpoint(enc.params(), model.ckpt("vae_encoder").string());
            ad::load_checkpoint(dec.params(), model.ckpt("vae_decoder").string());
            cfg.start_epoch = last + 1;
        }
        train::EpochCallback cb;
        if (opts.checkpoint_every > 0)
            cb = [&](int epoch, const train::TrainLog&) {
                if ((epoch + 1) % opts.checkpoint_every == 0)
                    save_stage({{"vae_encoder", &enc.params()}, {"vae_decoder", &dec.params()}});
            };
        auto log = train::train_vae_inplace(enc, dec, dataset.train_completes, cfg, cb);
        save_stage({{"vae_encoder", &enc.params()}, {"vae_decoder", &dec.params()}});
        append_log_rows(log, model.log_csv("vae"), opts.resume);
        model.write_meta(preset);
        std::cout << "vae: " << log.rows.size() << " epochs, final total "
                  << log.rows.back()[3] << "\n";
        return kExitOk;
    }

    // GAN stages need the frozen autoencoder (and the mode encoder for the
    // explicit variant).
    model.require("ae_encoder", "ae");
    model.require("ae_decoder", "ae");
    nets::ShapeEncoder enc(preset, cfg.seed);
    nets::ShapeDecoder dec(preset, cfg.seed);
    ad::load_checkpoint(enc.params(), model.ckpt("ae_encoder").string());
    ad::load_checkpoint(dec.params(), model.ckpt("ae_decoder").string());
    enc.freeze();
    dec.freeze();

    const std::string stage = opts.stage;
    if (stage == "gan") {
        model.require("vae_encoder", "vae");
        nets::VaeEncoder ez(preset, cfg.seed);
        ad::load_checkpoint(ez.params(), model.ckpt("vae_encoder").string());
        ez.mark_trained();
        ez.freeze();

        nets::LatentGenerator gen(preset, cfg.seed);
        nets::LatentDiscriminator disc(preset, cfg.seed);
        if (opts.resume) {
            int last = last_logged_epoch(model.log_csv("gan"));
            if (last < 0)
                throw MissingPrerequisite("--resume for stage 'gan' found no previous run");
            ad::load_checkpoint(gen.params(), model.ckpt("gan_generator").string());
            ad::load_checkpoint(disc.params(), model.ckpt("gan_discriminator").string());
            cfg.start_epoch = last + 1;
        }
        train::EpochCallback cb;
        if (opts.checkpoint_every > 0)
            cb = [&](int epoch, const train::TrainLog&) {
                if ((epoch + 1) % opts.checkpoint_every == 0)
                    save_stage({{"gan_generator", &gen.params()},
                                {"gan_discriminator", &disc.params()}});
            };
        auto log = train::train_gan_inplace(gen, disc, enc, dec, ez, dataset.train_partials,
                                            dataset.train_completes, cfg, nullptr, cb);
        save_stage({{"gan_generator", &gen.params()}, {"gan_discriminator", &disc.params()}});
        append_log_rows(log, model.log_csv("gan"), opts.resume);
        std::cout << "gan: " << log.rows.size() << " epochs, final total "
                  << log.column(log.rows.size() - 1, "total") << "\n";
        return kExitOk;
    }

    if (stage == "gan-l2z") {
        auto m = train::train_gan_im_l2z(dataset.train_partials, dataset.train_completes, enc,
                                         dec, cfg);
        save_stage({{"gan-l2z_generator", &m.generator.params()},
                    {"gan-l2z_discriminator", &m.discriminator.params()},
                    {"gan-l2z_mode_encoder", &m.mode_encoder.params()}});
        append_log_rows(m.log, model.log_csv("gan-l2z"), false);
        std::cout << "gan-l2z: " << m.log.rows.size() << " epochs\n";
        return kExitOk;
    }
    if (stage == "gan-pc2z") {
        auto m = train::train_gan_im_pc2z(dataset.train_partials, dataset.train_completes, enc,
                                          dec, cfg);
        save_stage({{"gan-pc2z_generator", &m.generator.params()},
                    {"gan-pc2z_discriminator", &m.discriminator.params()},
                    {"gan-pc2z_mode_encoder", &m.mode_encoder.params()}});
        append_log_rows(m.log, model.log_csv("gan-pc2z"), false);
        std::cout << "gan-pc2z: " << m.log.rows.size() << " epochs\n";
        return kExitOk;
    }
    throw InvalidInput("unknown stage " + stage);
}

// ---------------------------------------------------------------------------
// complete
// ---------------------------------------------------------------------------

struct LoadedModel {
    NetPreset preset;
    nets::ShapeEncoder encoder;
    nets::ShapeDecoder decoder;
    nets::VaeEncoder mode_encoder;
    nets::LatentGenerator generator;

    explicit LoadedModel(const ModelDir& model)
        : preset(model.read_preset()),
          encoder(preset, 0),
          decoder(preset, 0),
          mode_encoder(preset, 0),
          generator(preset, 0) {
        model.require("ae_encoder", "ae");
        model.require("ae_decoder", "ae");
        model.require("vae_encoder", "vae");
        model.require("gan_generator", "gan");
        ad::load_checkpoint(encoder.params(), model.ckpt("ae_encoder").string());
        ad::load_checkpoint(decoder.params(), model.ckpt("ae_decoder").string());
        ad::load_checkpoint(mode_encoder.params(), model.ckpt("vae_encoder").string());
        ad::load_checkpoint(generator.params(), model.ckpt("gan_generator").string());
        encoder.freeze();
        decoder.freeze();
        mode_encoder.mark_trained();
        mode_encoder.freeze();
    }

    eval::CompletionPipeline pipeline() {
        return {&encoder, &decoder, &generator, &mode_encoder};
    }
};

int cmd_complete(const std::string& input, const std::string& model_dir, int k,
                 const std::string& reference, const std::string& out_dir,
                 const CommonOpts& common) {
    ModelDir model{resolve_out(model_dir)};
    LoadedModel nets(model);
    auto pipe = nets.pipeline();
    auto partial = data::read_xyz(input);
    fs::path out = resolve_out(out_dir);
    fs::create_directories(out);

    if (!reference.empty()) {
        auto ref = data::read_xyz(reference);
        auto completed = eval::complete_with_reference(pipe, partial, ref);
        data::write_xyz((out / "completion_ref.xyz").string(), completed);
        std::cout << "wrote 1 reference-guided completion to " << out << "\n";
        return kExitOk;
    }

    Rng rng = Rng(common.seed).child("complete");
    auto cs = eval::complete_k(pipe, partial, k, rng, fs::path(input).stem().string());
    for (int j = 0; j < k; ++j) {
        char name[32];
        std::snprintf(name, sizeof(name), "completion_%02d.xyz", j);
        data::write_xyz((out / name).string(), cs.completions[j]);
    }
    std::cout << "wrote " << k << " completions to " << out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalOpts {
    std::string manifest;
    std::string model_dir;
    std::string out_dir;
    int k = 10;
    std::vector<std::string> metrics{"mmd", "tmd", "uhd"};
    std::string sweep;
    std::vector<double> betas{0.0, 1.0, 7.5, 15.0};
    std::vector<size_t> removed{1, 3};
    int sweep_epochs = -1;
    int sweep_batch = -1;
};

int cmd_eval(const EvalOpts& opts, const CommonOpts& common) {
    for (const auto& m : opts.metrics)
        if (m != "mmd" && m != "tmd" && m != "uhd")
            throw InvalidInput("unknown metric '" + m + "' (valid: mmd, tmd, uhd)");

    ModelDir model{resolve_out(opts.model_dir)};
    auto dataset = load_dataset(opts.manifest);
    if (dataset.test_partials.empty())
        throw InvalidInput("eval: manifest has no test-split partials");
    fs::path out = resolve_out(opts.out_dir);
    fs::create_directories(out);

    LoadedModel nets(model);
    auto pipe = nets.pipeline();
    Rng rng = Rng(common.seed).child("eval");

    if (opts.sweep == "incompleteness") {
        auto rows = eval::sweep_incompleteness(opts.removed, dataset.test_shapes, pipe, opts.k,
                                               static_cast<size_t>(nets.preset.partial_points),
                                               rng);
        std::ofstream os(out / "sweep_incompleteness.csv");
        os << "removed_parts,tmd\n";
        char buf[40];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf), "%.17g", r.tmd);
            os << r.removed_parts << ',' << buf << '\n';
        }
        std::cout << "incompleteness sweep: " << rows.size() << " groups -> "
                  << (out / "sweep_incompleteness.csv") << "\n";
        return kExitOk;
    }

    if (opts.sweep == "beta") {
        // Re-trains the GAN per beta against the stored frozen stages.
        train::TrainConfig cfg = train::TrainConfig::desk_gan();
        cfg.seed = common.seed;
        cfg.threads = common.threads;
        if (opts.sweep_epochs > 0) cfg.epochs_gan = opts.sweep_epochs;
        if (opts.sweep_batch > 0) cfg.batch = opts.sweep_batch;
        auto result = eval::sweep_beta(opts.betas, dataset.train_partials,
                                       dataset.train_completes, nets.encoder, nets.decoder,
                                       nets.mode_encoder, dataset.test_partials, opts.k, cfg);
        std::ofstream os(out / "sweep_beta.csv");
        os << "beta,tmd,uhd\n";
        char buf[40];
        for (const auto& r : result.rows) {
            os << r.beta;
            std::snprintf(buf, sizeof(buf), "%.17g", r.tmd);
            os << ',' << buf;
            std::snprintf(buf, sizeof(buf), "%.17g", r.uhd);
            os << ',' << buf << '\n';
        }
        for (const auto& [beta, exp] : result.latents) {
            char name[48];
            std::snprintf(name, sizeof(name), "latents_beta_%g.txt", beta);
            eval::write_latent_export(exp, (out / name).string());
        }
        std::cout << "beta sweep: " << result.rows.size() << " rows -> "
                  << (out / "sweep_beta.csv") << "\n";
        return kExitOk;
    }
    if (!opts.sweep.empty())
        throw InvalidInput("unknown sweep '" + opts.sweep + "' (valid: beta, incompleteness)");

    // Plain metric evaluation over the test split.
    std::vector<eval::CompletionSet> sets;
    std::vector<PointCloud> all_generated;
    for (size_t i = 0; i < dataset.test_partials.size(); ++i) {
        auto cs = eval::complete_k(pipe, dataset.test_partials[i], opts.k, rng,
                                   dataset.test_partial_ids[i]);
        for (const auto& c : cs.completions) all_generated.push_back(c);
        sets.push_back(std::move(cs));
    }

    eval::EvalReport report;
    bool want_mmd = std::count(opts.metrics.begin(), opts.metrics.end(), "mmd") > 0;
    bool want_tmd = std::count(opts.metrics.begin(), opts.metrics.end(), "tmd") > 0;
    bool want_uhd = std::count(opts.metrics.begin(), opts.metrics.end(), "uhd") > 0;
    if (want_mmd && !dataset.test_completes.empty())
        report.mmd_raw = eval::mmd(dataset.test_completes, all_generated);
    if (want_tmd) report.tmd_raw = eval::tmd_mean(sets);
    if (want_uhd) report.uhd_raw = eval::uhd_mean(dataset.test_partials, sets);
    for (size_t i = 0; i < sets.size(); ++i)
        report.per_shape.push_back({sets[i].partial_id, eval::tmd(sets[i]),
                                    eval::uhd(dataset.test_partials[i], sets[i])});

    char fp[32];
    std::snprintf(fp, sizeof(fp), "%016llx",
                  static_cast<unsigned long long>(fnv1a(
                      nets.preset.name + "|" + std::to_string(common.seed) + "|" +
                      std::to_string(opts.k))));
    report.fingerprint = fp;
    report.completions_per_partial = opts.k;

    report.write_csv((out / "report.csv").string());
    report.write_json((out / "report.json").string());
    std::cout << "eval: mmd " << report.mmd_scaled() << "e-3, tmd " << report.tmd_scaled()
              << "e-2, uhd " << report.uhd_scaled() << "e-2 -> " << (out / "report.csv") << "\n";
    return kExitOk;
}

}  // namespace

// One `key = value` per line, '#' comments. Entries become --key flags
// injected ahead of the explicit command line, so flags override the file.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    std::string cfg_path;
    for (size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            cfg_path = args[i + 1];
            args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
            break;
        }
    }
    if (cfg_path.empty()) return args;
    std::ifstream is(cfg_path);
    if (!is) throw IoError("cannot read config file " + cfg_path);
    std::vector<std::string> injected;
    if (!args.empty()) injected.push_back(args[0]);  // the subcommand stays first
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config " + cfg_path + ":" + std::to_string(line_no) +
                               ": expected key = value");
        auto trim = [](std::string v) {
            auto b = v.find_first_not_of(" \t\r");
            auto e = v.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw InvalidInput("config " + cfg_path + ": empty key");
        injected.push_back("--" + key);
        if (value != "true") injected.push_back(value);
    }
    for (size_t i = 1; i < args.size(); ++i) injected.push_back(args[i]);
    return injected;
}

int main(int argc, char** argv) {
    CLI::App app{"Multimodal point-cloud shape completion"};
    app.require_subcommand(1);

    CommonOpts common;

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic parted-shape dataset");
    std::string gen_category = "table", gen_out, gen_protocol = "parts";
    size_t gen_count = 10;
    int gen_views = 1;
    gen->add_option("--category", gen_category, "Shape category")
        ->check(CLI::IsMember({"table", "chair", "lamp"}));
    gen->add_option("--count", gen_count, "Number of shapes");
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--protocol", gen_protocol, "Incompleteness protocol")
        ->check(CLI::IsMember({"parts", "scan", "both"}));
    gen->add_option("--views-per-partial", gen_views, "Single-view scans per partial (paper: 4)");
    add_common(gen, common);
    

    // train
    auto* tr = app.add_subcommand("train", "Run a training stage");
    TrainOpts topts;
    tr->add_option("--stage", topts.stage, "Training stage")
        ->required()
        ->check(CLI::IsMember({"ae", "vae", "gan", "gan-l2z", "gan-pc2z"}));
    tr->add_option("--manifest", topts.manifest, "Dataset manifest")->required();
    tr->add_option("--out", topts.out_dir, "Model directory")->required();
    tr->add_flag("--resume", topts.resume, "Continue from the stage's last checkpoint");
    tr->add_option("--epochs", topts.epochs, "Epoch count override");
    tr->add_option("--batch", topts.batch, "Batch size override");
    tr->add_option("--alpha", topts.alpha, "Partial reconstruction weight");
    tr->add_option("--beta", topts.beta, "Latent reconstruction weight");
    tr->add_option("--gamma", topts.gamma, "KL weight (implicit variants)");
    tr->add_option("--lr", topts.lr, "Adam learning rate");
    tr->add_option("--lambda-kl", topts.lambda_kl, "KL weight in VAE pre-training");
    tr->add_option("--checkpoint-every", topts.checkpoint_every,
                   "Checkpoint cadence in epochs (0 = final only)");
    add_common(tr, common);

    // complete
    auto* co = app.add_subcommand("complete", "Complete a partial shape");
    std::string co_input, co_model, co_reference, co_out;
    int co_k = 1;
    co->add_option("--input", co_input, "Partial cloud (.xyz)")->required();
    co->add_option("--model", co_model, "Model directory")->required();
    co->add_option("--k", co_k, "Number of sampled completions");
    co->add_option("--reference", co_reference, "Reference shape for guided completion");
    co->add_option("--out", co_out, "Output directory")->required();
    add_common(co, common);

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a trained model");
    EvalOpts eopts;
    ev->add_option("--manifest", eopts.manifest, "Dataset manifest")->required();
    ev->add_option("--model", eopts.model_dir, "Model directory")->required();
    ev->add_option("--out", eopts.out_dir, "Report directory")->required();
    ev->add_option("--k", eopts.k, "Completions per partial");
    ev->add_option("--metrics", eopts.metrics, "Metrics to report")->delimiter(',');
    ev->add_option("--sweep", eopts.sweep, "Experiment sweep (beta or incompleteness)");
    ev->add_option("--betas", eopts.betas, "Beta values for --sweep beta")->delimiter(',');
    ev->add_option("--removed", eopts.removed, "Removed-part counts for --sweep incompleteness")
        ->delimiter(',');
    ev->add_option("--sweep-epochs", eopts.sweep_epochs, "GAN epochs per sweep point");
    ev->add_option("--sweep-batch", eopts.sweep_batch, "GAN batch per sweep point");
    add_common(ev, common);

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = apply_config_file(std::move(args));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(gen_category, gen_count, gen_out, gen_protocol, gen_views,
                                common);
        if (tr->parsed()) return cmd_train(topts, common);
        if (co->parsed()) {
            if (co_k > 1 && !co_reference.empty())
                throw InvalidInput("--k > 1 cannot be combined with --reference");
            return cmd_complete(co_input, co_model, co_k, co_reference, co_out, common);
        }
        if (ev->parsed()) return cmd_eval(eopts, common);
    } catch (const MissingPrerequisite& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissingPrereq;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InvalidShape& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const CapacityExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
