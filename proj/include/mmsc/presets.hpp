#pragma once

#include <string>
#include <vector>

#include "mmsc/common.hpp"

namespace mmsc {

// Architecture and cardinality constants. The paper preset mirrors the
// published table field for field; the desk preset halves widths and point
// counts so the full pipeline trains in minutes on a laptop core.
struct NetPreset {
    std::string name;
    int complete_points;              // N
    int partial_points;               // K
    int latent_dim;                   // |x|
    int mode_dim;                     // |z|
    std::vector<int> encoder_widths;  // shared per-point layers; last == latent_dim
    std::vector<int> decoder_widths;  // hidden FC widths; N*3 output appended
    std::vector<int> gan_widths;      // hidden FC widths of generator/discriminator
    int scan_views;                   // uniform views for complete virtual scans
    double leaky_slope = 0.2;         // hidden activation slope in G/F

    static NetPreset paper() {
        return {"paper", 2048, 1024, 128, 64, {64, 128, 128, 256, 128}, {256, 256}, {256, 512},
                27, 0.2};
    }

    static NetPreset desk() {
        return {"desk", 256, 128, 64, 16, {32, 64, 64, 128, 64}, {128, 128}, {128, 256}, 6, 0.2};
    }

    static NetPreset by_name(const std::string& name) {
        if (name == "paper") return paper();
        if (name == "desk") return desk();
        throw InvalidInput("unknown preset '" + name + "' (expected paper or desk)");
    }

    void validate() const {
        if (encoder_widths.empty() || encoder_widths.back() != latent_dim)
            throw InvalidInput("preset: encoder must end at the latent dimension");
        if (complete_points <= 0 || partial_points <= 0 || partial_points > complete_points)
            throw InvalidInput("preset: need 0 < K <= N");
        if (mode_dim <= 0 || latent_dim <= 0) throw InvalidInput("preset: bad latent dims");
    }
};

}  // namespace mmsc
