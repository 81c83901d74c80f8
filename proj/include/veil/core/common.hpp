#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace veil {

// Contract violations (mismatched extents, missing stage artifacts, ...).
class ContractError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameter outside its documented range (sigma, beta, p_r, ...).
class RangeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// File-level failures, always carrying the offending path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw ContractError(msg);
}

inline void check_range(bool cond, const std::string& msg) {
    if (!cond) throw RangeError(msg);
}

// FNV-1a over raw bytes; used for parameter/config hashes.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a(const std::vector<double>& v, uint64_t h = 0xcbf29ce484222325ull) {
    return fnv1a(v.data(), v.size() * sizeof(double), h);
}

std::string to_hex(uint64_t h);

// Deterministic RNG with portable value mapping. std::mt19937_64 supplies the
// stream; uniform/normal mappings are fixed here so results do not depend on
// the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // uniform in [0,1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(uniform() * (static_cast<double>(hi) - lo + 1.0));
    }

    // Box-Muller; one value per call, cached pair.
    double normal();

    double normal(double mean, double std) { return mean + std * normal(); }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Derive an independent stream from a base seed and a stream index.
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    uint64_t x = base ^ (0x9e3779b97f4a7c15ull + stream * 0xbf58476d1ce4e5b9ull);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

}  // namespace veil
