#pragma once

// Shared helpers for the test suites: random fixtures plus independent
// brute-force oracles the implementation under test is checked against.

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "mmsc/common.hpp"
#include "mmsc/point_cloud.hpp"

namespace testsupport {

inline mmsc::PointCloud random_cloud(mmsc::Rng& rng, size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<mmsc::Vec3> pts(n);
    for (auto& p : pts)
        p = {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
    return mmsc::PointCloud(std::move(pts));
}

// Exhaustive minimum over all |a|! bijections; mean matched distance.
inline double emd_bruteforce(const mmsc::PointCloud& a, const mmsc::PointCloud& b) {
    std::vector<size_t> perm(a.size());
    std::iota(perm.begin(), perm.end(), size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        double sum = 0.0;
        for (size_t i = 0; i < a.size(); ++i) sum += mmsc::norm(a[i] - b[perm[i]]);
        best = std::min(best, sum / static_cast<double>(a.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Naive O(n^2) references, written directly from the formulas.
inline double chamfer_naive(const mmsc::PointCloud& a, const mmsc::PointCloud& b) {
    double ab = 0.0;
    for (const auto& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : b) best = std::min(best, mmsc::norm2(p - q));
        ab += best;
    }
    double ba = 0.0;
    for (const auto& q : b) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : a) best = std::min(best, mmsc::norm2(p - q));
        ba += best;
    }
    return ab / static_cast<double>(a.size()) + ba / static_cast<double>(b.size());
}

inline double hausdorff_naive(const mmsc::PointCloud& p, const mmsc::PointCloud& c) {
    double worst = 0.0;
    for (const auto& x : p) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& y : c) best = std::min(best, mmsc::norm2(x - y));
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

// Central finite difference of a scalar function of one point cloud,
// with respect to coordinate k of point i.
template <typename F>
double central_diff(const mmsc::PointCloud& cloud, size_t i, int k, F f, double step = 1e-5) {
    auto pts = cloud.points();
    pts[i][k] += step;
    double up = f(mmsc::PointCloud(pts));
    pts[i][k] -= 2.0 * step;
    double dn = f(mmsc::PointCloud(pts));
    return (up - dn) / (2.0 * step);
}

inline double rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

}  // namespace testsupport
