#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace qilab {

// Frequency vector n in Z^2.
struct Idx {
    int n1 = 0;
    int n2 = 0;

    friend bool operator==(const Idx& a, const Idx& b) { return a.n1 == b.n1 && a.n2 == b.n2; }
    friend bool operator!=(const Idx& a, const Idx& b) { return !(a == b); }
    Idx operator+(const Idx& o) const { return {n1 + o.n1, n2 + o.n2}; }
    Idx operator-(const Idx& o) const { return {n1 - o.n1, n2 - o.n2}; }
    Idx operator-() const { return {-n1, -n2}; }
};

inline long long abs2(const Idx& n) {
    return static_cast<long long>(n.n1) * n.n1 + static_cast<long long>(n.n2) * n.n2;
}

inline double mag(const Idx& n) { return std::sqrt(static_cast<double>(abs2(n))); }

// <n> = sqrt(1 + |n|^2)
inline double bracket(const Idx& n) { return std::sqrt(1.0 + static_cast<double>(abs2(n))); }

inline bool is_dyadic(int N) { return N >= 1 && (N & (N - 1)) == 0; }

inline void require_dyadic(int N, const char* where) {
    if (!is_dyadic(N)) throw std::invalid_argument(std::string(where) + ": N must be dyadic (1,2,4,...)");
}

// Sharp shell: |n| <= 1 for N = 1, N/2 < |n| <= N for N > 1.
inline bool in_shell(const Idx& n, int N) {
    long long a = abs2(n);
    if (N == 1) return a <= 1;
    long long lo = static_cast<long long>(N / 2) * (N / 2);
    long long hi = static_cast<long long>(N) * N;
    return a > lo && a <= hi;
}

inline bool in_disk(const Idx& n, int N) { return abs2(n) <= static_cast<long long>(N) * N; }

} // namespace qilab

template <>
struct std::hash<qilab::Idx> {
    std::size_t operator()(const qilab::Idx& n) const noexcept {
        std::uint64_t a = static_cast<std::uint32_t>(n.n1);
        std::uint64_t b = static_cast<std::uint32_t>(n.n2);
        std::uint64_t x = (a << 32) ^ b;
        x ^= x >> 33;
        x *= 0xff51afd7ed558ccdULL;
        x ^= x >> 33;
        return static_cast<std::size_t>(x);
    }
};
