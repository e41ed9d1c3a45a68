#pragma once

#include <utility>

#include "mmsc/common.hpp"

namespace mmsc {

// Fixed-cardinality set of 3D points. Cardinality is immutable after
// construction; coordinates must be finite. Points are unitless and by
// convention live inside the origin-centered unit sphere once a shape has
// been normalized (decoded clouds may stray slightly outside, which is why
// the unit-sphere bound is not enforced here).
class PointCloud {
public:
    explicit PointCloud(std::vector<Vec3> pts) : pts_(std::move(pts)) {
        if (pts_.empty()) throw InvalidInput("PointCloud: empty point set");
        for (const auto& p : pts_) {
            if (!finite(p)) throw InvalidInput("PointCloud: non-finite coordinate");
        }
    }

    size_t size() const { return pts_.size(); }
    const Vec3& operator[](size_t i) const { return pts_[i]; }
    const std::vector<Vec3>& points() const { return pts_; }

    auto begin() const { return pts_.begin(); }
    auto end() const { return pts_.end(); }

    PointCloud translated(const Vec3& t) const {
        std::vector<Vec3> out(pts_.size());
        for (size_t i = 0; i < pts_.size(); ++i) out[i] = pts_[i] + t;
        return PointCloud(std::move(out));
    }

private:
    std::vector<Vec3> pts_;
};

// Centers the points on their bounding-box midpoint and scales so the
// farthest point sits exactly on the unit sphere.
inline std::vector<Vec3> normalize_to_unit_sphere(std::vector<Vec3> pts) {
    if (pts.empty()) throw InvalidInput("normalize: empty point set");
    Vec3 lo = pts[0], hi = pts[0];
    for (const auto& p : pts) {
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], p[k]);
            hi[k] = std::max(hi[k], p[k]);
        }
    }
    Vec3 center = 0.5 * (lo + hi);
    double max_r = 0.0;
    for (auto& p : pts) {
        p = p - center;
        max_r = std::max(max_r, norm(p));
    }
    if (max_r > 0.0) {
        double s = 1.0 / max_r;
        for (auto& p : pts) p = s * p;
    }
    return pts;
}

}  // namespace mmsc
