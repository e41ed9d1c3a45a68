#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace mmsc {

// ---------------------------------------------------------------------------
// Error taxonomy. Everything user-visible maps onto one of these.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInput : Error {
    using Error::Error;
};
struct InvalidShape : Error {
    using Error::Error;
};
struct InvalidState : Error {
    using Error::Error;
};
struct CapacityExceeded : Error {
    using Error::Error;
};
struct FormatError : Error {
    using Error::Error;
};
struct DegenerateScan : Error {
    using Error::Error;
};
struct DiagnosticError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// 3-vectors
// ---------------------------------------------------------------------------

struct Vec3 {
    double v[3]{};

    Vec3() = default;
    Vec3(double x, double y, double z) : v{x, y, z} {}

    double& operator[](size_t k) { return v[k]; }
    double operator[](size_t k) const { return v[k]; }

    friend bool operator==(const Vec3& a, const Vec3& b) {
        return a.v[0] == b.v[0] && a.v[1] == b.v[1] && a.v[2] == b.v[2];
    }
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator*(double s, const Vec3& a) {
    return {s * a[0], s * a[1], s * a[2]};
}
inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const Vec3& a) {
    return dot(a, a);
}
inline double norm(const Vec3& a) {
    return std::sqrt(norm2(a));
}
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline bool finite(const Vec3& a) {
    return std::isfinite(a[0]) && std::isfinite(a[1]) && std::isfinite(a[2]);
}

// ---------------------------------------------------------------------------
// Seedable RNG. All sampling goes through this class so that runs are
// reproducible byte-for-byte: the raw generator is std::mt19937_64 (whose
// output sequence the standard pins down) and every distribution on top of
// it is implemented here rather than via std::*_distribution, which the
// standard leaves implementation-defined.
// ---------------------------------------------------------------------------

inline uint64_t mix64(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), gen_(mix64(seed)) {}

    uint64_t seed() const { return seed_; }

    // Independent child stream, stable under the parent's own consumption.
    Rng child(uint64_t stream) const { return Rng(mix64(seed_ ^ mix64(stream + 0x51ed2701))); }
    Rng child(std::string_view tag) const { return child(fnv1a(tag)); }

    uint64_t next_u64() { return gen_(); }

    double uniform() {  // [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased-enough index draw in [0, n) via multiply-shift.
    size_t uniform_index(size_t n) {
        return static_cast<size_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // Box-Muller; u1 in (0,1] so the log is finite.
        double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    std::vector<double> normal_vec(size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = normal();
        return v;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Deterministic fork/join over an index range. Each index writes its own
// slot, so the result does not depend on the worker count.
// ---------------------------------------------------------------------------

inline unsigned default_threads() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

inline void parallel_for(size_t n, unsigned threads, const std::function<void(size_t)>& fn) {
    if (threads <= 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    unsigned workers = static_cast<unsigned>(std::min<size_t>(threads, n));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        std::function<void()> job = [&fn, &first_error, &error_mutex, w, workers, n] {
            try {
                for (size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        };
        pool.emplace_back(std::move(job));
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mmsc
