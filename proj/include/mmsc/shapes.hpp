#pragma once

#include "mmsc/point_cloud.hpp"
#include "mmsc/presets.hpp"

// Procedural multi-part shape factory: desk-scale stand-in for segmented
// shape corpora. Shapes are unions of labeled primitive parts, surface
// sampled with point budgets proportional to part area, then normalized to
// the unit sphere.

namespace mmsc::data {

struct ShapePart {
    std::string label;
    std::vector<Vec3> points;
};

enum class Category { table, chair, lamp };

inline std::string to_string(Category c) {
    switch (c) {
        case Category::table: return "table";
        case Category::chair: return "chair";
        case Category::lamp: return "lamp";
    }
    throw InvalidInput("unknown category");
}

inline Category category_from_string(const std::string& s) {
    if (s == "table") return Category::table;
    if (s == "chair") return Category::chair;
    if (s == "lamp") return Category::lamp;
    throw InvalidInput("unknown category '" + s + "'");
}

// A complete shape as labeled parts; the union is the complete cloud.
struct PartedShape {
    Category category = Category::table;
    std::vector<ShapePart> parts;

    size_t total_points() const {
        size_t n = 0;
        for (const auto& p : parts) n += p.points.size();
        return n;
    }

    PointCloud union_cloud() const {
        std::vector<Vec3> pts;
        pts.reserve(total_points());
        for (const auto& p : parts) pts.insert(pts.end(), p.points.begin(), p.points.end());
        return PointCloud(std::move(pts));
    }

    void validate() const {
        if (parts.size() < 2) throw InvalidInput("PartedShape: needs at least 2 parts");
        for (size_t i = 0; i < parts.size(); ++i)
            for (size_t j = i + 1; j < parts.size(); ++j)
                if (parts[i].label == parts[j].label)
                    throw InvalidInput("PartedShape: duplicate label " + parts[i].label);
    }
};

namespace detail {

// Axis-aligned box given center and full extents.
struct Box {
    Vec3 center;
    Vec3 extent;

    double area() const {
        double x = extent[0], y = extent[1], z = extent[2];
        return 2.0 * (x * y + y * z + z * x);
    }

    Vec3 sample_surface(Rng& rng) const {
        double x = extent[0], y = extent[1], z = extent[2];
        double axy = x * y, ayz = y * z, azx = z * x;
        double pick = rng.uniform() * (axy + ayz + azx);
        Vec3 p;
        double sign = rng.uniform() < 0.5 ? -0.5 : 0.5;
        if (pick < axy) {
            p = {rng.uniform(-0.5, 0.5) * x, rng.uniform(-0.5, 0.5) * y, sign * z};
        } else if (pick < axy + ayz) {
            p = {sign * x, rng.uniform(-0.5, 0.5) * y, rng.uniform(-0.5, 0.5) * z};
        } else {
            p = {rng.uniform(-0.5, 0.5) * x, sign * y, rng.uniform(-0.5, 0.5) * z};
        }
        return p + center;
    }
};

// Upright cylinder (axis along y) given center, radius, height.
struct Cylinder {
    Vec3 center;
    double radius;
    double height;

    double area() const {
        return 2.0 * 3.14159265358979323846 * radius * (height + radius);
    }

    Vec3 sample_surface(Rng& rng) const {
        const double pi = 3.14159265358979323846;
        double lateral = 2.0 * pi * radius * height;
        double caps = 2.0 * pi * radius * radius;
        double theta = rng.uniform() * 2.0 * pi;
        Vec3 p;
        if (rng.uniform() * (lateral + caps) < lateral) {
            p = {radius * std::cos(theta), rng.uniform(-0.5, 0.5) * height,
                 radius * std::sin(theta)};
        } else {
            double r = radius * std::sqrt(rng.uniform());
            double y = rng.uniform() < 0.5 ? -0.5 * height : 0.5 * height;
            p = {r * std::cos(theta), y, r * std::sin(theta)};
        }
        return p + center;
    }
};

struct Primitive {
    std::string label;
    bool is_box;
    Box box;
    Cylinder cyl;

    double area() const { return is_box ? box.area() : cyl.area(); }
    Vec3 sample(Rng& rng) const { return is_box ? box.sample_surface(rng) : cyl.sample_surface(rng); }
};

inline Primitive make_box(std::string label, Vec3 center, Vec3 extent) {
    return {std::move(label), true, {center, extent}, {}};
}
inline Primitive make_cyl(std::string label, Vec3 center, double radius, double height) {
    return {std::move(label), false, {}, {center, radius, height}};
}

// Largest-remainder allocation of the point budget by area; each part gets
// at least one point.
inline std::vector<size_t> allocate_points(const std::vector<Primitive>& prims, size_t total) {
    double area_sum = 0.0;
    for (const auto& p : prims) area_sum += p.area();
    std::vector<size_t> counts(prims.size(), 1);
    size_t assigned = prims.size();
    std::vector<std::pair<double, size_t>> remainders;
    for (size_t i = 0; i < prims.size(); ++i) {
        double want = prims[i].area() / area_sum * static_cast<double>(total);
        size_t extra = want > 1.0 ? static_cast<size_t>(want - 1.0) : 0;
        counts[i] += extra;
        assigned += extra;
        remainders.push_back({want - std::floor(want), i});
    }
    std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (size_t r = 0; assigned < total; ++r, ++assigned)
        counts[remainders[r % remainders.size()].second] += 1;
    while (assigned > total) {
        // Trim from the largest allocation.
        size_t big = 0;
        for (size_t i = 1; i < prims.size(); ++i)
            if (counts[i] > counts[big]) big = i;
        if (counts[big] <= 1) break;
        counts[big] -= 1;
        assigned -= 1;
    }
    return counts;
}

inline std::vector<Primitive> table_primitives(Rng& rng) {
    double top_w = rng.uniform(0.7, 1.2);
    double top_d = rng.uniform(0.6, 1.1);
    double top_t = rng.uniform(0.05, 0.12);
    double leg_h = rng.uniform(0.5, 0.9);
    double leg_t = rng.uniform(0.05, 0.09);
    double inset = leg_t * 0.8;
    std::vector<Primitive> prims;
    prims.push_back(make_box("top", {0.0, leg_h + 0.5 * top_t, 0.0}, {top_w, top_t, top_d}));
    int leg = 0;
    for (double sx : {-1.0, 1.0})
        for (double sz : {-1.0, 1.0}) {
            Vec3 c{sx * (0.5 * top_w - inset), 0.5 * leg_h, sz * (0.5 * top_d - inset)};
            prims.push_back(make_box("leg" + std::to_string(leg++), c, {leg_t, leg_h, leg_t}));
        }
    return prims;
}

inline std::vector<Primitive> chair_primitives(Rng& rng) {
    double seat_w = rng.uniform(0.5, 0.8);
    double seat_d = rng.uniform(0.5, 0.75);
    double seat_t = rng.uniform(0.05, 0.1);
    double leg_h = rng.uniform(0.35, 0.6);
    double leg_t = rng.uniform(0.04, 0.08);
    double back_h = rng.uniform(0.5, 0.9);
    double back_t = rng.uniform(0.04, 0.08);
    double inset = leg_t * 0.8;
    std::vector<Primitive> prims;
    prims.push_back(make_box("seat", {0.0, leg_h + 0.5 * seat_t, 0.0}, {seat_w, seat_t, seat_d}));
    prims.push_back(make_box("back",
                             {0.0, leg_h + seat_t + 0.5 * back_h, -0.5 * (seat_d - back_t)},
                             {seat_w, back_h, back_t}));
    int leg = 0;
    for (double sx : {-1.0, 1.0})
        for (double sz : {-1.0, 1.0}) {
            Vec3 c{sx * (0.5 * seat_w - inset), 0.5 * leg_h, sz * (0.5 * seat_d - inset)};
            prims.push_back(make_box("leg" + std::to_string(leg++), c, {leg_t, leg_h, leg_t}));
        }
    return prims;
}

inline std::vector<Primitive> lamp_primitives(Rng& rng) {
    double base_r = rng.uniform(0.18, 0.3);
    double base_h = rng.uniform(0.04, 0.08);
    double pole_r = rng.uniform(0.02, 0.045);
    double pole_h = rng.uniform(0.6, 1.0);
    double shade_r = rng.uniform(0.15, 0.28);
    double shade_h = rng.uniform(0.18, 0.32);
    std::vector<Primitive> prims;
    prims.push_back(make_cyl("base", {0.0, 0.5 * base_h, 0.0}, base_r, base_h));
    prims.push_back(make_cyl("pole", {0.0, base_h + 0.5 * pole_h, 0.0}, pole_r, pole_h));
    prims.push_back(
        make_cyl("shade", {0.0, base_h + pole_h + 0.5 * shade_h, 0.0}, shade_r, shade_h));
    return prims;
}

}  // namespace detail

// Composes the labeled parts of one randomized shape, surface-samples a
// total of `total_points` distributed by part area, and normalizes the
// union to the unit sphere.
inline PartedShape gen_shape(Category category, Rng& rng, size_t total_points) {
    std::vector<detail::Primitive> prims;
    switch (category) {
        case Category::table: prims = detail::table_primitives(rng); break;
        case Category::chair: prims = detail::chair_primitives(rng); break;
        case Category::lamp: prims = detail::lamp_primitives(rng); break;
    }
    auto counts = detail::allocate_points(prims, total_points);

    std::vector<Vec3> all;
    std::vector<std::pair<std::string, std::pair<size_t, size_t>>> ranges;  // label -> [lo, hi)
    for (size_t i = 0; i < prims.size(); ++i) {
        size_t lo = all.size();
        for (size_t n = 0; n < counts[i]; ++n) all.push_back(prims[i].sample(rng));
        ranges.push_back({prims[i].label, {lo, all.size()}});
    }
    all = normalize_to_unit_sphere(std::move(all));

    PartedShape shape;
    shape.category = category;
    for (const auto& [label, range] : ranges) {
        ShapePart part;
        part.label = label;
        part.points.assign(all.begin() + static_cast<long>(range.first),
                           all.begin() + static_cast<long>(range.second));
        shape.parts.push_back(std::move(part));
    }
    shape.validate();
    return shape;
}

}  // namespace mmsc::data
