#pragma once

#include "mmsc/metrics.hpp"
#include "mmsc/partiality.hpp"

// Completion inference on trained networks, plus the latent-space
// retrieval baseline.

namespace mmsc::eval {

// Frozen networks wired for inference. The mode encoder is only needed for
// reference-guided completion.
struct CompletionPipeline {
    nets::ShapeEncoder* encoder = nullptr;
    nets::ShapeDecoder* decoder = nullptr;
    nets::LatentGenerator* generator = nullptr;
    nets::VaeEncoder* mode_encoder = nullptr;

    void require_trained(bool need_mode_encoder = false) const {
        if (!encoder || !decoder || !generator)
            throw InvalidState("completion: missing networks (train or load checkpoints first)");
        if (need_mode_encoder && (!mode_encoder || !mode_encoder->trained()))
            throw InvalidState("completion: mode encoder unavailable or untrained");
    }

    nets::LatentCode encode_partial(const PointCloud& partial) const {
        auto dup = data::duplicate_to_n(partial,
                                        static_cast<size_t>(encoder->preset().complete_points));
        return encoder->encode(dup);
    }

    PointCloud complete_one(const nets::LatentCode& partial_code,
                            const nets::ModeVector& z) const {
        return decoder->decode(generator->generate(partial_code, z));
    }
};

// k completions with fresh standard-Gaussian mode vectors.
inline CompletionSet complete_k(const CompletionPipeline& nets, const PointCloud& partial, int k,
                                Rng& rng, std::string partial_id = {}) {
    nets.require_trained();
    if (k < 1) throw InvalidInput("complete_k: k must be >= 1");
    const int z_dim = nets.generator->preset().mode_dim;
    auto code = nets.encode_partial(partial);

    CompletionSet cs;
    cs.partial_id = std::move(partial_id);
    for (int j = 0; j < k; ++j) {
        nets::ModeVector z(rng.normal_vec(z_dim));
        cs.completions.push_back(nets.complete_one(code, z));
        cs.modes_used.push_back(std::move(z));
    }
    cs.validate();
    return cs;
}

// Deterministic completion guided by a reference shape: the mode vector is
// encoded from the reference instead of sampled.
inline PointCloud complete_with_reference(const CompletionPipeline& nets,
                                          const PointCloud& partial,
                                          const PointCloud& reference) {
    nets.require_trained(true);
    auto z = nets.mode_encoder->mode_encode(reference);
    return nets.complete_one(nets.encode_partial(partial), z);
}

// Retrieval baseline: rank the cached complete training shapes by cosine
// similarity between latent codes and return the stored clouds themselves.
class KnnLatentBaseline {
public:
    KnnLatentBaseline(nets::ShapeEncoder& encoder, std::vector<PointCloud> training_completes)
        : encoder_(&encoder), pool_(std::move(training_completes)) {
        if (pool_.empty()) throw InvalidInput("knn baseline: empty training pool");
        codes_.reserve(pool_.size());
        for (const auto& c : pool_) codes_.push_back(encoder_->encode(c).values);
    }

    std::vector<PointCloud> query(const PointCloud& partial, int k) const {
        if (k < 1 || static_cast<size_t>(k) > pool_.size())
            throw InvalidInput("knn baseline: pool smaller than k");
        auto dup = data::duplicate_to_n(partial,
                                        static_cast<size_t>(encoder_->preset().complete_points));
        auto q = encoder_->encode(dup).values;

        std::vector<std::pair<double, size_t>> ranked(pool_.size());
        for (size_t i = 0; i < pool_.size(); ++i) ranked[i] = {cosine(q, codes_[i]), i};
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        std::vector<PointCloud> out;
        out.reserve(k);
        for (int j = 0; j < k; ++j) out.push_back(pool_[ranked[j].second]);
        return out;
    }

    size_t pool_size() const { return pool_.size(); }

private:
    static double cosine(const std::vector<double>& a, const std::vector<double>& b) {
        double num = 0.0, na = 0.0, nb = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            num += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        double denom = std::sqrt(na) * std::sqrt(nb);
        return denom > 0.0 ? num / denom : 0.0;
    }

    nets::ShapeEncoder* encoder_;
    std::vector<PointCloud> pool_;
    std::vector<std::vector<double>> codes_;
};

}  // namespace mmsc::eval
