#pragma once

#include "mmsc/distances.hpp"
#include "mmsc/shapes.hpp"

// The two incompleteness protocols: semantic part removal and single-view
// virtual scanning (point-based hidden-point removal), plus the cardinality
// plumbing shared by both.

namespace mmsc::data {

// Seeded resampling to an exact cardinality: uniform selection without
// replacement when oversized, draws with replacement when undersized.
inline std::vector<Vec3> resample_exact(std::vector<Vec3> pts, size_t target, Rng& rng) {
    if (pts.empty()) throw InvalidInput("resample_exact: empty point set");
    if (pts.size() > target) {
        rng.shuffle(pts);
        pts.resize(target);
    } else {
        size_t base = pts.size();
        while (pts.size() < target) pts.push_back(pts[rng.uniform_index(base)]);
    }
    return pts;
}

// Tiles a K-point partial in order up to N points, truncating the last
// repetition; the multiset of distinct points is preserved.
inline PointCloud duplicate_to_n(const PointCloud& partial, size_t n) {
    if (partial.size() > n)
        throw InvalidInput("duplicate_to_n: partial has more than N points");
    std::vector<Vec3> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = partial[i % partial.size()];
    return PointCloud(std::move(out));
}

struct RemovedParts {
    PointCloud partial;
    std::vector<std::string> removed;
};

// Removes exactly `j` parts, 1 <= j <= k-1, so at least one part survives;
// the survivor points are resampled to exactly `k_points`.
inline RemovedParts remove_parts_exact(const PartedShape& shape, size_t j, Rng& rng,
                                       size_t k_points) {
    shape.validate();
    const size_t k = shape.parts.size();
    if (j < 1 || j >= k)
        throw InvalidInput("remove_parts: j must satisfy 1 <= j <= " + std::to_string(k - 1));
    std::vector<size_t> order(k);
    std::iota(order.begin(), order.end(), size_t{0});
    rng.shuffle(order);

    std::vector<char> removed_mask(k, 0);
    std::vector<std::string> removed;
    for (size_t r = 0; r < j; ++r) {
        removed_mask[order[r]] = 1;
        removed.push_back(shape.parts[order[r]].label);
    }
    std::sort(removed.begin(), removed.end());

    std::vector<Vec3> survivors;
    for (size_t i = 0; i < k; ++i)
        if (!removed_mask[i])
            survivors.insert(survivors.end(), shape.parts[i].points.begin(),
                             shape.parts[i].points.end());
    return {PointCloud(resample_exact(std::move(survivors), k_points, rng)), std::move(removed)};
}

// Removes j parts with j drawn uniformly from [1, k-1].
inline RemovedParts remove_parts(const PartedShape& shape, Rng& rng, size_t k_points) {
    shape.validate();
    const size_t j = 1 + rng.uniform_index(shape.parts.size() - 1);
    return remove_parts_exact(shape, j, rng, k_points);
}

// Scanner pose: both vectors unit length and mutually orthogonal.
struct ScanPose {
    Vec3 view;
    Vec3 up;

    void validate() const {
        if (std::abs(norm(view) - 1.0) > 1e-9 || std::abs(norm(up) - 1.0) > 1e-9)
            throw InvalidInput("ScanPose: vectors must be unit length");
        if (std::abs(dot(view, up)) > 1e-9) throw InvalidInput("ScanPose: view/up not orthogonal");
    }

    static ScanPose from_view(Vec3 v) {
        double n = norm(v);
        if (n == 0.0) throw InvalidInput("ScanPose: zero view direction");
        v = (1.0 / n) * v;
        Vec3 ref = std::abs(v[1]) < 0.9 ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
        Vec3 side = cross(ref, v);
        Vec3 up = cross(v, side);
        up = (1.0 / norm(up)) * up;
        ScanPose pose{v, up};
        pose.validate();
        return pose;
    }

    static ScanPose random(Rng& rng) {
        while (true) {
            Vec3 v{rng.normal(), rng.normal(), rng.normal()};
            if (norm(v) > 1e-6) return from_view(v);
        }
    }
};

namespace detail {

// Spherical-inversion visibility test in the spirit of hidden-point
// removal: a point survives iff its flipped image can be certified strictly
// outside the convex hull of the other flipped images and the origin. The
// certificate is a separating direction found by a short Frank-Wolfe run;
// occluded points admit no such direction, so the test is one-sided.
// Coincident points (duplicated partials) share one verdict instead of
// occluding each other.
inline std::vector<char> hpr_visible(const std::vector<Vec3>& pts, const Vec3& camera,
                                     double flip_radius) {
    const size_t n = pts.size();

    // Group exactly-coincident positions.
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const Vec3 &pa = pts[a], &pb = pts[b];
        for (int k = 0; k < 3; ++k)
            if (pa[k] != pb[k]) return pa[k] < pb[k];
        return a < b;
    });
    std::vector<size_t> group_of(n);
    std::vector<Vec3> unique;
    for (size_t r = 0; r < n; ++r) {
        if (r == 0 || !(pts[order[r]] == pts[order[r - 1]])) unique.push_back(pts[order[r]]);
        group_of[order[r]] = unique.size() - 1;
    }

    const size_t m = unique.size();
    std::vector<Vec3> flipped(m);
    for (size_t i = 0; i < m; ++i) {
        Vec3 q = unique[i] - camera;
        double d = norm(q);
        if (d == 0.0) throw DegenerateScan("virtual_scan: point coincides with the camera");
        flipped[i] = ((2.0 * flip_radius - d) / d) * q;
    }

    const double tol = 1e-9 * flip_radius;
    const int max_iters = 64;
    std::vector<char> unique_visible(m, 0);
    for (size_t i = 0; i < m; ++i) {
        const Vec3& q = flipped[i];
        // Hull set: origin plus every other flipped position.
        auto support = [&](const Vec3& dir, Vec3& best_pt) {
            double best = 0.0;  // the origin
            best_pt = {0, 0, 0};
            for (size_t j = 0; j < m; ++j) {
                if (j == i) continue;
                double s = dot(flipped[j], dir);
                if (s > best) {
                    best = s;
                    best_pt = flipped[j];
                }
            }
            return best;
        };

        Vec3 x{0, 0, 0};  // current hull point estimate
        for (int it = 0; it < max_iters; ++it) {
            Vec3 g = q - x;
            if (norm(g) < tol) break;  // reached q: inside
            Vec3 s;
            double smax = support(g, s);
            if (dot(q, g) - smax > tol) {
                unique_visible[i] = 1;  // separating direction found
                break;
            }
            Vec3 dxs = s - x;
            double denom = norm2(dxs);
            if (denom == 0.0) break;
            double t = std::clamp(dot(q - x, dxs) / denom, 0.0, 1.0);
            x = x + t * dxs;
        }
    }

    std::vector<char> visible(n);
    for (size_t i = 0; i < n; ++i) visible[i] = unique_visible[group_of[i]];
    return visible;
}

// Deterministic, roughly uniform view directions: the six axis views for
// small counts, a Fibonacci sphere otherwise.
inline std::vector<Vec3> uniform_views(int count) {
    if (count <= 0) throw InvalidInput("uniform_views: count must be positive");
    if (count == 6)
        return {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    std::vector<Vec3> views(count);
    const double golden = 3.14159265358979323846 * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
        double y = 1.0 - 2.0 * (i + 0.5) / count;
        double r = std::sqrt(std::max(0.0, 1.0 - y * y));
        double phi = golden * i;
        views[i] = {r * std::cos(phi), y, r * std::sin(phi)};
    }
    return views;
}

}  // namespace detail

// Camera sits close so shallow pockets (table undersides, shade interiors)
// still subtend enough angle for the inversion test to resolve them.
inline constexpr double kScanCameraDistance = 1.5;     // in bounding radii
inline constexpr double kScanFlipRadiusScale = 100.0;  // in bounding radii

// Points of `cloud` visible from the pose, before resampling.
inline std::vector<Vec3> scan_visible_points(const std::vector<Vec3>& pts, const ScanPose& pose) {
    pose.validate();
    if (pts.empty()) throw InvalidInput("virtual_scan: empty cloud");
    double bounding = 0.0;
    for (const auto& p : pts) bounding = std::max(bounding, norm(p));
    if (bounding == 0.0) bounding = 1.0;
    Vec3 camera = (kScanCameraDistance * bounding) * pose.view;
    auto mask = detail::hpr_visible(pts, camera, kScanFlipRadiusScale * bounding);
    std::vector<Vec3> kept;
    for (size_t i = 0; i < pts.size(); ++i)
        if (mask[i]) kept.push_back(pts[i]);
    if (kept.empty()) throw DegenerateScan("virtual_scan: every point culled");
    return kept;
}

// Single-view scan resampled to exactly `k_points`.
inline PointCloud virtual_scan(const PointCloud& cloud, const ScanPose& pose, size_t k_points,
                               Rng& rng) {
    auto kept = scan_visible_points(cloud.points(), pose);
    return PointCloud(resample_exact(std::move(kept), k_points, rng));
}

// Union of single-view scans over the configured uniform view set.
inline PointCloud complete_scan_union(const PointCloud& cloud, int n_views) {
    std::vector<Vec3> all;
    for (const auto& v : detail::uniform_views(n_views)) {
        auto kept = scan_visible_points(cloud.points(), ScanPose::from_view(v));
        all.insert(all.end(), kept.begin(), kept.end());
    }
    return PointCloud(std::move(all));
}

// The union resampled to `n_points`; stands in for a complete scan of the
// shape.
inline PointCloud complete_scan(const PointCloud& cloud, int n_views, size_t n_points, Rng& rng) {
    auto unioned = complete_scan_union(cloud, n_views);
    return PointCloud(resample_exact(unioned.points(), n_points, rng));
}

}  // namespace mmsc::data
