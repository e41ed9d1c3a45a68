#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "mmsc/partiality.hpp"

// File formats: XYZ text for clouds and parted shapes ("x y z [label]" per
// line, '#' comments, 9 significant digits) and a JSON manifest binding
// complete shapes to their partial derivatives with provenance.

namespace mmsc::data {

namespace detail {

inline std::string fmt9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace detail

inline void write_xyz(const std::string& path, const PointCloud& cloud) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    for (const auto& p : cloud)
        os << detail::fmt9(p[0]) << ' ' << detail::fmt9(p[1]) << ' ' << detail::fmt9(p[2])
           << '\n';
    if (!os) throw IoError("short write on " + path);
}

inline void write_xyz(const std::string& path, const PartedShape& shape) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write " + path);
    os << "# category: " << to_string(shape.category) << '\n';
    for (const auto& part : shape.parts)
        for (const auto& p : part.points)
            os << detail::fmt9(p[0]) << ' ' << detail::fmt9(p[1]) << ' ' << detail::fmt9(p[2])
               << ' ' << part.label << '\n';
    if (!os) throw IoError("short write on " + path);
}

namespace detail {

struct XyzLine {
    Vec3 p;
    std::optional<std::string> label;
};

inline std::vector<XyzLine> parse_xyz(const std::string& path, std::string* category_comment) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read " + path);
    std::vector<XyzLine> lines;
    std::string line;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        if (line[start] == '#') {
            const std::string key = "# category:";
            if (category_comment && line.compare(0, key.size(), key) == 0) {
                std::string v = line.substr(key.size());
                size_t b = v.find_first_not_of(" \t\r");
                size_t e = v.find_last_not_of(" \t\r");
                if (b != std::string::npos) *category_comment = v.substr(b, e - b + 1);
            }
            continue;
        }
        std::istringstream ss(line);
        XyzLine out;
        if (!(ss >> out.p[0] >> out.p[1] >> out.p[2]))
            throw FormatError(path + ":" + std::to_string(line_no) + ": expected 'x y z [label]'");
        std::string label;
        if (ss >> label) out.label = label;
        lines.push_back(std::move(out));
    }
    if (lines.empty()) throw FormatError(path + ": no points");
    return lines;
}

}  // namespace detail

inline PointCloud read_xyz(const std::string& path) {
    auto lines = detail::parse_xyz(path, nullptr);
    std::vector<Vec3> pts;
    pts.reserve(lines.size());
    for (const auto& l : lines) pts.push_back(l.p);
    return PointCloud(std::move(pts));
}

inline PartedShape read_parted(const std::string& path) {
    std::string category = "table";
    auto lines = detail::parse_xyz(path, &category);
    PartedShape shape;
    shape.category = category_from_string(category);
    std::vector<std::string> order;
    std::map<std::string, std::vector<Vec3>> groups;
    for (const auto& l : lines) {
        if (!l.label) throw FormatError(path + ": parted shape line missing a label");
        if (!groups.count(*l.label)) order.push_back(*l.label);
        groups[*l.label].push_back(l.p);
    }
    for (const auto& label : order) shape.parts.push_back({label, std::move(groups[label])});
    shape.validate();
    return shape;
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

struct PartialEntry {
    std::string kind;  // "parts" | "scan"
    std::string path;
    std::vector<std::string> removed;
    std::optional<ScanPose> pose;  // scan only
};

struct ManifestEntry {
    std::string id;
    Category category = Category::table;
    std::string split;  // "train" | "test"
    std::string complete_path;
    std::vector<PartialEntry> partials;
};

struct DatasetManifest {
    uint64_t seed = 0;
    std::string preset;
    std::vector<ManifestEntry> entries;

    std::vector<const ManifestEntry*> split_entries(const std::string& split) const {
        std::vector<const ManifestEntry*> out;
        for (const auto& e : entries)
            if (e.split == split) out.push_back(&e);
        return out;
    }
};

// 20% of ids go to the test split, chosen by id hash so the split is stable.
inline std::string split_of_id(const std::string& id) {
    return fnv1a(id) % 5 == 0 ? "test" : "train";
}

inline void write_manifest(const DatasetManifest& m, const std::string& path) {
    nlohmann::ordered_json j;
    j["seed"] = m.seed;
    j["preset"] = m.preset;
    j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : m.entries) {
        nlohmann::ordered_json je;
        je["id"] = e.id;
        je["category"] = to_string(e.category);
        je["split"] = e.split;
        je["complete"] = e.complete_path;
        je["partials"] = nlohmann::ordered_json::array();
        for (const auto& p : e.partials) {
            nlohmann::ordered_json jp;
            jp["kind"] = p.kind;
            jp["path"] = p.path;
            jp["removed"] = p.removed;
            if (p.pose) {
                jp["view"] = {p.pose->view[0], p.pose->view[1], p.pose->view[2]};
                jp["up"] = {p.pose->up[0], p.pose->up[1], p.pose->up[2]};
            }
            je["partials"].push_back(jp);
        }
        j["entries"].push_back(je);
    }
    std::ofstream os(path);
    if (!os) throw IoError("cannot write manifest " + path);
    os << j.dump(2) << '\n';
}

inline DatasetManifest read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read manifest " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest " + path + ": " + e.what());
    }
    try {
        DatasetManifest m;
        m.seed = j.at("seed").get<uint64_t>();
        m.preset = j.at("preset").get<std::string>();
        for (const auto& je : j.at("entries")) {
            ManifestEntry e;
            e.id = je.at("id").get<std::string>();
            e.category = category_from_string(je.at("category").get<std::string>());
            e.split = je.at("split").get<std::string>();
            e.complete_path = je.at("complete").get<std::string>();
            for (const auto& jp : je.at("partials")) {
                PartialEntry p;
                p.kind = jp.at("kind").get<std::string>();
                p.path = jp.at("path").get<std::string>();
                p.removed = jp.at("removed").get<std::vector<std::string>>();
                if (jp.contains("view")) {
                    ScanPose pose;
                    for (int k = 0; k < 3; ++k) {
                        pose.view[k] = jp.at("view").at(k).get<double>();
                        pose.up[k] = jp.at("up").at(k).get<double>();
                    }
                    pose.validate();
                    p.pose = pose;
                }
                e.partials.push_back(std::move(p));
            }
            m.entries.push_back(std::move(e));
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest " + path + ": " + e.what());
    }
}

// Every referenced file must exist and parse; ids must be unique. Errors
// name the offending entry.
inline void validate_manifest(const DatasetManifest& m, const std::string& base_dir) {
    std::map<std::string, int> seen;
    for (const auto& e : m.entries) {
        if (++seen[e.id] > 1) throw InvalidInput("manifest: duplicate id " + e.id);
        auto check = [&](const std::string& rel) {
            auto full = std::filesystem::path(base_dir) / rel;
            if (!std::filesystem::exists(full))
                throw InvalidInput("manifest: entry " + e.id + " references missing file " + rel);
        };
        check(e.complete_path);
        for (const auto& p : e.partials) check(p.path);
        read_parted((std::filesystem::path(base_dir) / e.complete_path).string());
        for (const auto& p : e.partials)
            read_xyz((std::filesystem::path(base_dir) / p.path).string());
    }
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

enum class Protocol { parts, scan, both };

inline Protocol protocol_from_string(const std::string& s) {
    if (s == "parts") return Protocol::parts;
    if (s == "scan") return Protocol::scan;
    if (s == "both") return Protocol::both;
    throw InvalidInput("unknown protocol '" + s + "' (expected parts, scan or both)");
}

struct GenConfig {
    Category category = Category::table;
    size_t count = 10;
    uint64_t seed = 1;
    std::string out_dir;
    Protocol protocol = Protocol::parts;
    int views_per_partial = 1;  // single-view desk default; 4 mirrors the paper
    NetPreset preset = NetPreset::desk();
    unsigned threads = 1;
};

// Generates `count` shapes with their partials and writes everything under
// `out_dir` (complete/, partial/, manifest.json). Workers own independent
// seeded streams derived from (seed, shape index), so generation is
// reproducible and embarrassingly parallel.
inline DatasetManifest generate_dataset(const GenConfig& cfg) {
    namespace fs = std::filesystem;
    if (cfg.count == 0) throw InvalidInput("generate_dataset: count must be positive");
    if (cfg.views_per_partial < 1)
        throw InvalidInput("generate_dataset: views-per-partial must be >= 1");
    fs::create_directories(fs::path(cfg.out_dir) / "complete");
    fs::create_directories(fs::path(cfg.out_dir) / "partial");

    const size_t n_points = static_cast<size_t>(cfg.preset.complete_points);
    const size_t k_points = static_cast<size_t>(cfg.preset.partial_points);
    Rng root(cfg.seed);

    std::vector<ManifestEntry> entries(cfg.count);
    parallel_for(cfg.count, cfg.threads, [&](size_t idx) {
        Rng rng = root.child(idx);
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "%s_%04zu", to_string(cfg.category).c_str(), idx);
        std::string id = idbuf;

        auto shape = gen_shape(cfg.category, rng, n_points);
        ManifestEntry e;
        e.id = id;
        e.category = cfg.category;
        e.split = split_of_id(id);
        e.complete_path = "complete/" + id + ".xyz";
        write_xyz((fs::path(cfg.out_dir) / e.complete_path).string(), shape);

        if (cfg.protocol == Protocol::parts || cfg.protocol == Protocol::both) {
            Rng prng = rng.child("parts");
            auto rp = remove_parts(shape, prng, k_points);
            PartialEntry pe;
            pe.kind = "parts";
            pe.path = "partial/" + id + "_parts.xyz";
            pe.removed = rp.removed;
            write_xyz((fs::path(cfg.out_dir) / pe.path).string(), rp.partial);
            e.partials.push_back(std::move(pe));
        }
        if (cfg.protocol == Protocol::scan || cfg.protocol == Protocol::both) {
            Rng srng = rng.child("scan");
            // Part-level incompleteness first, then the single-view scans of
            // the residual.
            auto rp = remove_parts(shape, srng, k_points);
            for (int v = 0; v < cfg.views_per_partial; ++v) {
                ScanPose pose = ScanPose::random(srng);
                PartialEntry pe;
                pe.kind = "scan";
                pe.path = "partial/" + id + "_scan" +
                          (cfg.views_per_partial > 1 ? std::to_string(v) : "") + ".xyz";
                pe.removed = rp.removed;
                pe.pose = pose;
                write_xyz((fs::path(cfg.out_dir) / pe.path).string(),
                          virtual_scan(rp.partial, pose, k_points, srng));
                e.partials.push_back(std::move(pe));
            }
        }
        entries[idx] = std::move(e);
    });

    DatasetManifest m;
    m.seed = cfg.seed;
    m.preset = cfg.preset.name;
    m.entries = std::move(entries);
    write_manifest(m, (fs::path(cfg.out_dir) / "manifest.json").string());
    return m;
}

}  // namespace mmsc::data
