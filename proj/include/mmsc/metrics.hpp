#pragma once

#include <iomanip>

#include <json.hpp>

#include "mmsc/distances.hpp"
#include "mmsc/networks.hpp"

// The evaluation protocol: minimal matching distance (quality), total
// mutual difference (diversity) and unidirectional Hausdorff distance
// (fidelity), with the reporting scale conventions.

namespace mmsc::eval {

// The k completions generated for one partial input.
struct CompletionSet {
    std::string partial_id;
    std::vector<PointCloud> completions;
    std::vector<nets::ModeVector> modes_used;

    void validate() const {
        if (completions.empty()) throw InvalidInput("CompletionSet: needs k >= 1 completions");
        for (const auto& c : completions)
            if (c.size() != completions.front().size())
                throw InvalidInput("CompletionSet: ragged completion cardinalities");
    }
};

// Mean over the test set of the Chamfer distance to the nearest generated
// shape (nearest by Chamfer as well).
inline double mmd(std::span<const PointCloud> test_complete,
                  std::span<const PointCloud> generated) {
    if (test_complete.empty() || generated.empty()) throw InvalidInput("mmd: empty set");
    double total = 0.0;
    for (const auto& s : test_complete) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& g : generated) best = std::min(best, chamfer(s, g));
        total += best;
    }
    return total / static_cast<double>(test_complete.size());
}

// Sum over the k completions of the mean Chamfer distance to the other
// k-1; zero for a single completion.
inline double tmd(const CompletionSet& cs) {
    cs.validate();
    const size_t k = cs.completions.size();
    if (k == 1) return 0.0;
    double total = 0.0;
    for (size_t j = 0; j < k; ++j)
        for (size_t l = j + 1; l < k; ++l) total += 2.0 * chamfer(cs.completions[j], cs.completions[l]);
    return total / static_cast<double>(k - 1);
}

inline double tmd_mean(std::span<const CompletionSet> sets) {
    if (sets.empty()) throw InvalidInput("tmd_mean: empty test set");
    double total = 0.0;
    for (const auto& cs : sets) total += tmd(cs);
    return total / static_cast<double>(sets.size());
}

// Mean unidirectional Hausdorff distance from the partial to each of its
// completions.
inline double uhd(const PointCloud& partial, const CompletionSet& cs) {
    cs.validate();
    double total = 0.0;
    for (const auto& c : cs.completions) total += hausdorff_uni(partial, c);
    return total / static_cast<double>(cs.completions.size());
}

inline double uhd_mean(std::span<const PointCloud> partials,
                       std::span<const CompletionSet> sets) {
    if (partials.size() != sets.size() || sets.empty())
        throw InvalidInput("uhd_mean: partials/completions mismatch");
    double total = 0.0;
    for (size_t i = 0; i < sets.size(); ++i) total += uhd(partials[i], sets[i]);
    return total / static_cast<double>(sets.size());
}

// Reported values with the standard scale factors (x10^3, x10^2, x10^2).
struct EvalReport {
    double mmd_raw = 0.0;
    double tmd_raw = 0.0;
    double uhd_raw = 0.0;

    struct PerShape {
        std::string id;
        double tmd = 0.0;
        double uhd = 0.0;
    };
    std::vector<PerShape> per_shape;
    std::string fingerprint;
    int completions_per_partial = 0;  // k

    double mmd_scaled() const { return mmd_raw * 1e3; }
    double tmd_scaled() const { return tmd_raw * 1e2; }
    double uhd_scaled() const { return uhd_raw * 1e2; }

    void write_csv(const std::string& path) const {
        std::ofstream os(path);
        if (!os) throw IoError("cannot write report " + path);
        char buf[40];
        auto fmt = [&](double v) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            return std::string(buf);
        };
        os << "metric,raw,scaled\n";
        os << "mmd," << fmt(mmd_raw) << ',' << fmt(mmd_scaled()) << '\n';
        os << "tmd," << fmt(tmd_raw) << ',' << fmt(tmd_scaled()) << '\n';
        os << "uhd," << fmt(uhd_raw) << ',' << fmt(uhd_scaled()) << '\n';
        for (const auto& s : per_shape)
            os << "shape:" << s.id << ',' << fmt(s.tmd) << ',' << fmt(s.uhd) << '\n';
    }

    void write_json(const std::string& path) const {
        nlohmann::ordered_json j;
        j["fingerprint"] = fingerprint;
        j["k"] = completions_per_partial;
        j["mmd"] = mmd_raw;
        j["mmd_scaled"] = mmd_scaled();
        j["tmd"] = tmd_raw;
        j["tmd_scaled"] = tmd_scaled();
        j["uhd"] = uhd_raw;
        j["uhd_scaled"] = uhd_scaled();
        j["per_shape"] = nlohmann::ordered_json::array();
        for (const auto& s : per_shape)
            j["per_shape"].push_back({{"id", s.id}, {"tmd", s.tmd}, {"uhd", s.uhd}});
        std::ofstream os(path);
        if (!os) throw IoError("cannot write report " + path);
        os << j.dump(2) << '\n';
    }
};

}  // namespace mmsc::eval
