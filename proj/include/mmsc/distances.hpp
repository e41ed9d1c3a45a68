#pragma once

#include <limits>
#include <numeric>

#include "mmsc/point_cloud.hpp"

// Exact point-set distances and their analytic gradients. Everything here is
// a pure function on immutable inputs and computes in double precision.
// Tie-breaking is always by lowest index; coincident pairs get zero gradient.

namespace mmsc {

inline constexpr size_t kEmdSolverCap = 512;
inline constexpr size_t kBruteForceCutoff = 64;

// Optimal bijection between two equal-cardinality clouds. `assignment[i]` is
// the index in `b` matched to `a[i]`; `cost` is the mean Euclidean distance
// over matched pairs.
struct Matching {
    std::vector<size_t> assignment;
    double cost = 0.0;
};

namespace detail {

// Shortest-augmenting-path assignment solver with potentials, O(n^3).
// `cost(i, j)` must be nonnegative. Returns column for each row.
template <typename CostFn>
std::vector<size_t> solve_assignment(size_t n, CostFn cost) {
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based internally; row_of[j] = row currently assigned to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<size_t> row_of(n + 1, 0);
    std::vector<size_t> prev_col(n + 1, 0);
    for (size_t i = 1; i <= n; ++i) {
        row_of[0] = i;
        size_t j0 = 0;
        std::vector<double> min_slack(n + 1, inf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            size_t i0 = row_of[j0], j1 = 0;
            double delta = inf;
            for (size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < min_slack[j]) {
                    min_slack[j] = cur;
                    prev_col[j] = j0;
                }
                if (min_slack[j] < delta) {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for (size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of[j0] != 0);
        // Augment along the alternating path.
        while (j0 != 0) {
            size_t j1 = prev_col[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        }
    }
    std::vector<size_t> assignment(n);
    for (size_t j = 1; j <= n; ++j) {
        if (row_of[j] != 0) assignment[row_of[j] - 1] = j - 1;
    }
    return assignment;
}

// Exact 3D nearest-neighbor index over an immutable point set.
class KdTree3 {
public:
    explicit KdTree3(const std::vector<Vec3>& pts) : pts_(pts), order_(pts.size()) {
        std::iota(order_.begin(), order_.end(), size_t{0});
        nodes_.reserve(pts.size());
        root_ = build(0, pts.size());
    }

    // Squared distance to the nearest point.
    double nearest2(const Vec3& q) const {
        double best = std::numeric_limits<double>::infinity();
        search(root_, q, best);
        return best;
    }

private:
    struct Node {
        size_t point;
        int axis;
        int left = -1;
        int right = -1;
    };

    int build(size_t lo, size_t hi) {
        if (lo >= hi) return -1;
        Vec3 mn = pts_[order_[lo]], mx = mn;
        for (size_t i = lo; i < hi; ++i) {
            const Vec3& p = pts_[order_[i]];
            for (int k = 0; k < 3; ++k) {
                mn[k] = std::min(mn[k], p[k]);
                mx[k] = std::max(mx[k], p[k]);
            }
        }
        int axis = 0;
        Vec3 ext = mx - mn;
        if (ext[1] > ext[axis]) axis = 1;
        if (ext[2] > ext[axis]) axis = 2;
        size_t mid = (lo + hi) / 2;
        std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi,
                         [&](size_t a, size_t b) { return pts_[a][axis] < pts_[b][axis]; });
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back({order_[mid], axis, -1, -1});
        int left = build(lo, mid);
        int right = build(mid + 1, hi);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    void search(int id, const Vec3& q, double& best) const {
        if (id < 0) return;
        const Node& nd = nodes_[id];
        const Vec3& p = pts_[nd.point];
        best = std::min(best, norm2(q - p));
        double diff = q[nd.axis] - p[nd.axis];
        int near = diff < 0 ? nd.left : nd.right;
        int far = diff < 0 ? nd.right : nd.left;
        search(near, q, best);
        if (diff * diff < best) search(far, q, best);
    }

    const std::vector<Vec3>& pts_;
    std::vector<size_t> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// Mean over a's points of the squared distance to the nearest point of b.
inline double nn_mean_sq(const PointCloud& a, const PointCloud& b) {
    double sum = 0.0;
    if (b.size() > kBruteForceCutoff) {
        KdTree3 tree(b.points());
        for (const auto& p : a) sum += tree.nearest2(p);
    } else {
        for (const auto& p : a) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : b) best = std::min(best, norm2(p - q));
            sum += best;
        }
    }
    return sum / static_cast<double>(a.size());
}

}  // namespace detail

// Earth Mover's Distance: the minimum over bijections of the mean Euclidean
// distance between matched points, solved exactly by the O(M^3) assignment
// algorithm. Clouds above `solver_cap` must be down-sampled by the caller.
inline Matching emd(const PointCloud& a, const PointCloud& b, size_t solver_cap = kEmdSolverCap) {
    if (a.size() != b.size())
        throw InvalidInput("emd: cardinality mismatch (" + std::to_string(a.size()) + " vs " +
                           std::to_string(b.size()) + ")");
    if (a.size() > solver_cap)
        throw CapacityExceeded("emd: cardinality " + std::to_string(a.size()) +
                               " exceeds exact-solver cap " + std::to_string(solver_cap));
    const size_t m = a.size();
    Matching result;
    result.assignment =
        detail::solve_assignment(m, [&](size_t i, size_t j) { return norm(a[i] - b[j]); });
    double sum = 0.0;
    for (size_t i = 0; i < m; ++i) sum += norm(a[i] - b[result.assignment[i]]);
    result.cost = sum / static_cast<double>(m);
    return result;
}

struct EmdGrad {
    std::vector<Vec3> wrt_a;
    std::vector<Vec3> wrt_b;
};

// Gradient of the EMD cost at the optimal matching. The matching is treated
// as locally constant; coincident pairs contribute zero (subgradient choice).
inline EmdGrad emd_grad(const PointCloud& a, const PointCloud& b, const Matching& matching) {
    const size_t m = a.size();
    if (b.size() != m || matching.assignment.size() != m)
        throw InvalidInput("emd_grad: matching does not fit the clouds");
    std::vector<char> seen(m, false);
    double sum = 0.0;
    for (size_t i = 0; i < m; ++i) {
        size_t j = matching.assignment[i];
        if (j >= m || seen[j]) throw InvalidInput("emd_grad: assignment is not a bijection");
        seen[j] = true;
        sum += norm(a[i] - b[j]);
    }
    if (std::abs(sum / static_cast<double>(m) - matching.cost) > 1e-9)
        throw InvalidInput("emd_grad: stale matching (cost mismatch)");

    EmdGrad g;
    g.wrt_a.assign(m, Vec3{0, 0, 0});
    g.wrt_b.assign(m, Vec3{0, 0, 0});
    const double inv_m = 1.0 / static_cast<double>(m);
    for (size_t i = 0; i < m; ++i) {
        size_t j = matching.assignment[i];
        Vec3 d = a[i] - b[j];
        double len = norm(d);
        if (len == 0.0) continue;
        Vec3 dir = (inv_m / len) * d;
        g.wrt_a[i] = dir;
        g.wrt_b[j] = -1.0 * dir;
    }
    return g;
}

// Chamfer distance: squared nearest-neighbor distances, mean per direction,
// directions summed. Cardinalities may differ.
inline double chamfer(const PointCloud& a, const PointCloud& b) {
    return detail::nn_mean_sq(a, b) + detail::nn_mean_sq(b, a);
}

// Unidirectional Hausdorff distance max_{x in p} min_{y in c} |x - y|.
inline double hausdorff_uni(const PointCloud& p, const PointCloud& c) {
    double worst = 0.0;
    if (c.size() > kBruteForceCutoff) {
        detail::KdTree3 tree(c.points());
        for (const auto& x : p) worst = std::max(worst, tree.nearest2(x));
    } else {
        for (const auto& x : p) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& y : c) best = std::min(best, norm2(x - y));
            worst = std::max(worst, best);
        }
    }
    return std::sqrt(worst);
}

// Gradient of hausdorff_uni with respect to c: nonzero only at the single
// argmax/argmin pair (lowest indices on ties); zero when p is covered by c.
inline std::vector<Vec3> hausdorff_uni_grad(const PointCloud& p, const PointCloud& c) {
    size_t best_i = 0, best_j = 0;
    double worst = -1.0;
    for (size_t i = 0; i < p.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        size_t arg = 0;
        for (size_t j = 0; j < c.size(); ++j) {
            double d2 = norm2(p[i] - c[j]);
            if (d2 < best) {
                best = d2;
                arg = j;
            }
        }
        if (best > worst) {
            worst = best;
            best_i = i;
            best_j = arg;
        }
    }
    std::vector<Vec3> grad(c.size(), Vec3{0, 0, 0});
    double dist = std::sqrt(worst);
    if (dist > 0.0) grad[best_j] = (1.0 / dist) * (c[best_j] - p[best_i]);
    return grad;
}

}  // namespace mmsc
