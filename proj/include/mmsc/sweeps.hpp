#pragma once

#include "mmsc/completion.hpp"
#include "mmsc/training.hpp"

// Experiment drivers: the diversity/fidelity trade-off over the latent
// reconstruction weight, and diversity as a function of input
// incompleteness.

namespace mmsc::eval {

// Latent codes of every completion, exported for external 2-D projection.
struct LatentExport {
    struct Group {
        std::string partial_id;
        std::vector<nets::LatentCode> codes;  // k per partial
    };
    std::vector<Group> groups;
};

// One "# partial <id>" comment per group, then one whitespace-separated
// vector per line.
inline void write_latent_export(const LatentExport& exp, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write latent export " + path);
    char buf[40];
    for (const auto& g : exp.groups) {
        os << "# partial " << g.partial_id << '\n';
        for (const auto& code : g.codes) {
            for (size_t i = 0; i < code.values.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%.9g", code.values[i]);
                os << (i ? " " : "") << buf;
            }
            os << '\n';
        }
    }
}

inline LatentExport read_latent_export(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read latent export " + path);
    LatentExport exp;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.rfind("# partial ", 0) == 0) {
            exp.groups.push_back({line.substr(10), {}});
            continue;
        }
        if (line[0] == '#') continue;
        if (exp.groups.empty())
            throw FormatError(path + ":" + std::to_string(line_no) + ": vector before any group");
        std::istringstream ss(line);
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (vals.empty())
            throw FormatError(path + ":" + std::to_string(line_no) + ": empty vector line");
        exp.groups.back().codes.push_back(nets::LatentCode(std::move(vals)));
    }
    if (exp.groups.empty()) throw FormatError(path + ": no groups");
    return exp;
}

struct BetaSweepRow {
    double beta = 0.0;
    double tmd = 0.0;
    double uhd = 0.0;
};

struct BetaSweepResult {
    std::vector<BetaSweepRow> rows;
    std::map<double, LatentExport> latents;  // per beta
};

// Trains one GAN per beta on identical data and seed, then scores
// diversity and fidelity on the test partials with k completions each.
inline BetaSweepResult sweep_beta(const std::vector<double>& betas,
                                  const std::vector<PointCloud>& train_partials,
                                  const std::vector<PointCloud>& train_completes,
                                  nets::ShapeEncoder& frozen_enc, nets::ShapeDecoder& frozen_dec,
                                  nets::VaeEncoder& frozen_ez,
                                  const std::vector<PointCloud>& test_partials, int k,
                                  const train::TrainConfig& base_cfg) {
    if (betas.size() < 2) throw InvalidInput("sweep_beta: need at least two betas");
    if (test_partials.empty()) throw InvalidInput("sweep_beta: empty test set");

    BetaSweepResult result;
    for (double beta : betas) {
        train::TrainConfig cfg = base_cfg;
        cfg.beta = beta;
        auto gan = train::train_gan(train_partials, train_completes, frozen_enc, frozen_dec,
                                    frozen_ez, cfg);

        CompletionPipeline pipe{&frozen_enc, &frozen_dec, &gan.generator, &frozen_ez};
        Rng eval_rng = Rng(cfg.seed).child("sweep_beta_eval");
        std::vector<CompletionSet> sets;
        LatentExport exp;
        for (size_t i = 0; i < test_partials.size(); ++i) {
            auto cs = complete_k(pipe, test_partials[i], k, eval_rng,
                                 "partial_" + std::to_string(i));
            LatentExport::Group group{cs.partial_id, {}};
            auto code = pipe.encode_partial(test_partials[i]);
            for (const auto& z : cs.modes_used)
                group.codes.push_back(pipe.generator->generate(code, z));
            exp.groups.push_back(std::move(group));
            sets.push_back(std::move(cs));
        }
        result.rows.push_back({beta, tmd_mean(sets), uhd_mean(test_partials, sets)});
        result.latents.emplace(beta, std::move(exp));
    }
    return result;
}

struct IncompletenessRow {
    size_t removed_parts = 0;
    double tmd = 0.0;
};

// Diversity grouped by the exact number of removed parts, using one
// trained model. Complete input (j = 0) is rejected by remove_parts_exact.
inline std::vector<IncompletenessRow> sweep_incompleteness(
    const std::vector<size_t>& removed_counts, const std::vector<data::PartedShape>& test_shapes,
    const CompletionPipeline& pipe, int k, size_t partial_points, Rng& rng) {
    if (removed_counts.empty()) throw InvalidInput("sweep_incompleteness: no group sizes");
    if (test_shapes.empty()) throw InvalidInput("sweep_incompleteness: empty test set");
    pipe.require_trained();

    std::vector<IncompletenessRow> rows;
    for (size_t j : removed_counts) {
        for (const auto& shape : test_shapes)
            if (j >= shape.parts.size())
                throw InvalidInput("sweep_incompleteness: shape has too few parts for j=" +
                                   std::to_string(j));
        std::vector<CompletionSet> sets;
        for (size_t s = 0; s < test_shapes.size(); ++s) {
            auto rp = data::remove_parts_exact(test_shapes[s], j, rng, partial_points);
            sets.push_back(complete_k(pipe, rp.partial, k, rng,
                                      "shape_" + std::to_string(s) + "_j" + std::to_string(j)));
        }
        rows.push_back({j, tmd_mean(sets)});
    }
    return rows;
}

}  // namespace mmsc::eval
