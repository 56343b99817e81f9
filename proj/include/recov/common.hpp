#pragma once

#include <charconv>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace recov {

// Error taxonomy. Input-side problems (bad files, bad config, bad CLI usage)
// derive from InputError so the CLI can map them to exit code 1; everything
// else maps to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : InputError {
    using InputError::InputError;
};
struct SchemaError : InputError {
    using InputError::InputError;
};
struct RangeError : InputError {
    using InputError::InputError;
};
struct IoError : InputError {
    using InputError::InputError;
};
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// printf-style formatting into std::string; uses the C locale the process
// started with, so numeric output is stable across runs.
inline std::string strfmt(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    char buf[512];
    int n = std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    if (n < 0) return {};
    if (static_cast<size_t>(n) < sizeof(buf)) return std::string(buf, n);
    std::string out(static_cast<size_t>(n) + 1, '\0');
    va_start(args, fmt);
    std::vsnprintf(out.data(), out.size(), fmt, args);
    va_end(args);
    out.resize(static_cast<size_t>(n));
    return out;
}

// Full-precision double text: round-trips exactly through strtod, and
// re-printing the parsed value reproduces the same bytes (canonical form).
inline std::string fmt_double(double v) { return strfmt("%.17g", v); }

// Shortest representation that still round-trips exactly; compact for table
// files full of 0/1 and short decimals.
inline std::string fmt_shortest(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// FNV-1a 64-bit, used for schema and config hashes.
inline uint64_t fnv1a(std::string_view data, uint64_t seed = 14695981039346656037ULL) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(uint64_t v) { return strfmt("%016llx", static_cast<unsigned long long>(v)); }

}  // namespace recov
