// util.hpp — error types, deterministic RNG streams, compensated summation,
// number formatting helpers shared across the library.

#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace spinreg {

// Invalid configuration, malformed input files, unknown parameters. CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: non-converged fits, rank-deficient designs. CLI exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct FitError : NumericError {
    explicit FitError(const std::string& msg) : NumericError(msg) {}
};

struct EstimationError : NumericError {
    explicit EstimationError(const std::string& msg) : NumericError(msg) {}
};

// ----------------------------- RNG streams -----------------------------

// splitmix64; used to derive independent stream seeds from (master, index...).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a) {
    return splitmix64(splitmix64(master) ^ (a * 0x9e3779b97f4a7c15ULL + 1));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(master, a), b);
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
    return std::mt19937_64(splitmix64(seed ^ 0x5bf0f1e2d3c4b5a6ULL));
}

// ------------------------- compensated summation ------------------------

// Kahan accumulator; keeps Monte Carlo reductions deterministic to ~1e-12
// independent of accumulation schedule.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

// Running mean / standard error with compensated sums.
struct MeanAccumulator {
    KahanSum s, s2;
    std::size_t n = 0;

    void add(double x) {
        s.add(x);
        s2.add(x * x);
        ++n;
    }
    double mean() const { return n ? s.value() / double(n) : 0.0; }
    double stderr_mean() const {
        if (n < 2) return 0.0;
        const double m = mean();
        double var = (s2.value() - double(n) * m * m) / double(n - 1);
        if (var < 0) var = 0;
        return std::sqrt(var / double(n));
    }
};

// --------------------------- number formatting ---------------------------

// Shortest decimal string that round-trips the double exactly.
std::string format_double(double x);

// Strict parse of a full token; throws ConfigError on trailing garbage.
double parse_double(const std::string& token);

// ------------------------------- hashing --------------------------------

// SHA-256 of a byte string, lowercase hex. Used for run manifests.
std::string sha256_hex(const std::string& data);
std::string sha256_file_hex(const std::string& path);

// ------------------------------ small text ------------------------------

std::vector<std::string> split_ws(const std::string& line);
std::vector<std::string> split_char(const std::string& line, char sep);
std::string trim(const std::string& s);

} // namespace spinreg
