#pragma once
// Shared primitives: ids, triples, errors, deterministic RNG, hashing,
// and little-endian binary IO used by every cache/checkpoint format.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpe {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
    EntityId h = 0;
    RelationId r = 0;
    EntityId t = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
    friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Bad user input: malformed files, missing artifacts, stale caches.
struct DataError : Error {
    using Error::Error;
};
// Bad configuration: out-of-range hyperparameters, incompatible modes.
struct ConfigError : Error {
    using Error::Error;
};
// Training diverged or produced non-finite values.
struct NumericError : Error {
    using Error::Error;
};

inline std::size_t hash_combine(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

struct TripleHash {
    std::size_t operator()(const Triple& x) const {
        std::size_t s = std::hash<std::int64_t>{}(x.h);
        s = hash_combine(s, std::hash<std::int64_t>{}(x.r));
        s = hash_combine(s, std::hash<std::int64_t>{}(x.t));
        return s;
    }
};

// FNV-1a, used for content hashes in manifests and cache headers.
inline std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ULL) {
    return fnv1a64(s.data(), s.size(), seed);
}

std::uint64_t hash_file(const std::string& path);

// Deterministic RNG. std::*_distribution is implementation-defined, so the
// int/real mappings are spelled out here to keep seeded runs reproducible
// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // xorshift64* — small, fast, and fully specified.
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dULL;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform in [0, n). Rejection sampling keeps the mapping unbiased.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw ConfigError("uniform_index: empty range");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts need byte swaps");

class BinaryWriter {
public:
    explicit BinaryWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw DataError("cannot open for writing: " + path);
        path_ = path;
    }

    template <typename T>
    void write(const T& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }

    template <typename T>
    void write_span(const T* data, std::size_t count) {
        static_assert(std::is_trivially_copyable_v<T>);
        out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
    }

    void write_string(const std::string& s) {
        write<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

    void finish() {
        out_.flush();
        if (!out_) throw DataError("write failed: " + path_);
    }

private:
    std::ofstream out_;
    std::string path_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw DataError("cannot open for reading: " + path);
        path_ = path;
    }

    template <typename T>
    T read() {
        static_assert(std::is_trivially_copyable_v<T>);
        T v{};
        in_.read(reinterpret_cast<char*>(&v), sizeof(T));
        check();
        return v;
    }

    template <typename T>
    void read_span(T* data, std::size_t count) {
        static_assert(std::is_trivially_copyable_v<T>);
        in_.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
        check();
    }

    std::string read_string() {
        auto len = read<std::uint32_t>();
        std::string s(len, '\0');
        in_.read(s.data(), len);
        check();
        return s;
    }

private:
    void check() {
        if (!in_) throw DataError("truncated or corrupt file: " + path_);
    }

    std::ifstream in_;
    std::string path_;
};

}  // namespace rpe
