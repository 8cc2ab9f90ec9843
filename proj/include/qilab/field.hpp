#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "qilab/fft.hpp"
#include "qilab/lattice.hpp"

namespace qilab {

using cplx = std::complex<double>;

// Finitely supported Fourier coefficient table on Z^2, stored densely on the
// box {|n1|,|n2| <= bw}. Absent indices (outside the box) are zero.
struct SpectralField {
    int bw = 0;
    std::vector<cplx> c;

    SpectralField() : c(1, cplx{}) {}
    explicit SpectralField(int half_width)
        : bw(half_width), c(static_cast<std::size_t>(2 * half_width + 1) * (2 * half_width + 1), cplx{}) {
        if (half_width < 0) throw std::invalid_argument("SpectralField: negative box width");
    }

    int side() const { return 2 * bw + 1; }
    std::size_t index(int n1, int n2) const {
        return static_cast<std::size_t>(n2 + bw) * side() + static_cast<std::size_t>(n1 + bw);
    }
    bool contains(const Idx& n) const { return std::abs(n.n1) <= bw && std::abs(n.n2) <= bw; }
    cplx at(const Idx& n) const { return contains(n) ? c[index(n.n1, n.n2)] : cplx{}; }
    cplx& ref(const Idx& n) {
        assert(contains(n));
        return c[index(n.n1, n.n2)];
    }
    void set(const Idx& n, cplx v) {
        if (!contains(n)) throw std::out_of_range("SpectralField::set: index outside box");
        c[index(n.n1, n.n2)] = v;
    }

    template <class F>
    void for_each(F&& f) const {
        for (int n2 = -bw; n2 <= bw; ++n2)
            for (int n1 = -bw; n1 <= bw; ++n1) f(Idx{n1, n2}, c[index(n1, n2)]);
    }
    template <class F>
    void transform(F&& f) {
        for (int n2 = -bw; n2 <= bw; ++n2)
            for (int n1 = -bw; n1 <= bw; ++n1) {
                cplx& v = c[index(n1, n2)];
                v = f(Idx{n1, n2}, v);
            }
    }
};

// Values on a uniform G x G grid (evaluation lattice for products).
struct GridField {
    int size = 1;
    std::vector<cplx> v;

    explicit GridField(int G) : size(G), v(static_cast<std::size_t>(G) * G, cplx{}) {
        if (G < 1) throw std::invalid_argument("GridField: size must be >= 1");
    }
};

inline SpectralField zero_field(int bw = 0) { return SpectralField(bw); }

inline SpectralField single_mode(const Idx& n, cplx amp) {
    SpectralField u(std::max(std::abs(n.n1), std::abs(n.n2)));
    u.ref(n) = amp;
    return u;
}

inline SpectralField resized(const SpectralField& u, int bw) {
    SpectralField out(bw);
    int m = std::min(bw, u.bw);
    for (int n2 = -m; n2 <= m; ++n2)
        for (int n1 = -m; n1 <= m; ++n1) out.c[out.index(n1, n2)] = u.c[u.index(n1, n2)];
    if (bw < u.bw) { // refuse silent truncation of nonzero content
        double dropped = 0;
        u.for_each([&](const Idx& n, cplx v) {
            if (!out.contains(n)) dropped += std::abs(v);
        });
        if (dropped > 0) throw std::invalid_argument("resized: shrinking would drop nonzero coefficients");
    }
    return out;
}

inline SpectralField& operator+=(SpectralField& a, const SpectralField& b) {
    if (b.bw > a.bw) {
        SpectralField grown = resized(a, b.bw);
        a = std::move(grown);
    }
    b.for_each([&](const Idx& n, cplx v) { a.ref(n) += v; });
    return a;
}

inline SpectralField operator+(SpectralField a, const SpectralField& b) {
    a += b;
    return a;
}

inline SpectralField operator*(cplx s, SpectralField u) {
    for (auto& v : u.c) v *= s;
    return u;
}

inline SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    return a + (cplx(-1.0) * b);
}

// conj(u): coefficient at n becomes conj(u(-n)).
inline SpectralField conj_field(const SpectralField& u) {
    SpectralField out(u.bw);
    u.for_each([&](const Idx& n, cplx v) { out.ref(-n) = std::conj(v); });
    return out;
}

// --- multipliers ------------------------------------------------------------

enum class MultiplierKind { fractional_d, partial, laplacian, bessel };

// D^sigma with |0|^sigma := 0 for every sigma.
inline SpectralField dsigma(const SpectralField& u, double sigma) {
    SpectralField out = u;
    out.transform([&](const Idx& n, cplx v) {
        long long a = abs2(n);
        return a == 0 ? cplx{} : v * std::pow(static_cast<double>(a), 0.5 * sigma);
    });
    return out;
}

inline SpectralField partial(const SpectralField& u, int axis) {
    if (axis != 0 && axis != 1) throw std::invalid_argument("partial: axis must be 0 or 1");
    SpectralField out = u;
    out.transform([&](const Idx& n, cplx v) { return v * cplx(0.0, axis == 0 ? n.n1 : n.n2); });
    return out;
}

inline SpectralField laplacian(const SpectralField& u) {
    SpectralField out = u;
    out.transform([&](const Idx& n, cplx v) { return v * static_cast<double>(-abs2(n)); });
    return out;
}

inline SpectralField bessel(const SpectralField& u, double sigma) {
    SpectralField out = u;
    out.transform([&](const Idx& n, cplx v) { return v * std::pow(1.0 + static_cast<double>(abs2(n)), 0.5 * sigma); });
    return out;
}

inline SpectralField apply_multiplier(const SpectralField& u, MultiplierKind kind, double sigma = 0.0,
                                      int axis = 0) {
    switch (kind) {
        case MultiplierKind::fractional_d: return dsigma(u, sigma);
        case MultiplierKind::partial: return partial(u, axis);
        case MultiplierKind::laplacian: return laplacian(u);
        case MultiplierKind::bessel: return bessel(u, sigma);
    }
    throw std::logic_error("apply_multiplier: unknown kind");
}

// --- projectors -------------------------------------------------------------

// Sharp shell projector P_N.
inline SpectralField project(const SpectralField& u, int N) {
    require_dyadic(N, "project");
    SpectralField out = u;
    out.transform([&](const Idx& n, cplx v) { return in_shell(n, N) ? v : cplx{}; });
    return out;
}

// P_{<= N} = sum_{M <= N} P_M, i.e. the sharp disk |n| <= N.  Shrinks the box.
inline SpectralField project_leq(const SpectralField& u, int N) {
    require_dyadic(N, "project_leq");
    SpectralField out(std::min(u.bw, N));
    u.for_each([&](const Idx& n, cplx v) {
        if (in_disk(n, N) && out.contains(n)) out.ref(n) = v;
    });
    return out;
}

// Internal disk restriction for arbitrary radius (no dyadic requirement).
inline SpectralField restrict_disk(const SpectralField& u, int N) {
    SpectralField out(std::min(u.bw, N));
    u.for_each([&](const Idx& n, cplx v) {
        if (in_disk(n, N) && out.contains(n)) out.ref(n) = v;
    });
    return out;
}

inline bool supported_in_disk(const SpectralField& u, int N) {
    bool ok = true;
    u.for_each([&](const Idx& n, cplx v) {
        if (v != cplx{} && !in_disk(n, N)) ok = false;
    });
    return ok;
}

// --- norms and pairings -----------------------------------------------------

enum class NormKind { sobolev, fourier_lebesgue, wiener };

inline double sobolev_norm(const SpectralField& u, double sigma) {
    double s2 = 0;
    u.for_each([&](const Idx& n, cplx v) { s2 += std::pow(1.0 + static_cast<double>(abs2(n)), sigma) * std::norm(v); });
    return std::sqrt(s2);
}

inline double fourier_lebesgue_norm(const SpectralField& u, double sigma) {
    double m = 0;
    u.for_each([&](const Idx& n, cplx v) { m = std::max(m, std::pow(1.0 + static_cast<double>(abs2(n)), 0.5 * sigma) * std::abs(v)); });
    return m;
}

inline double wiener_norm(const SpectralField& u) {
    double s = 0;
    u.for_each([&](const Idx&, cplx v) { s += std::abs(v); });
    return s;
}

inline double norms(const SpectralField& u, double sigma, NormKind kind) {
    switch (kind) {
        case NormKind::sobolev: return sobolev_norm(u, sigma);
        case NormKind::fourier_lebesgue: return fourier_lebesgue_norm(u, sigma);
        case NormKind::wiener: return wiener_norm(u);
    }
    throw std::logic_error("norms: unknown kind");
}

// (f,g) = int f conj(g) = sum_n f(n) conj(g(n)) under the normalized measure.
inline cplx inner(const SpectralField& f, const SpectralField& g) {
    const SpectralField& a = f.bw <= g.bw ? f : g;
    const SpectralField& b = f.bw <= g.bw ? g : f;
    cplx s{};
    a.for_each([&](const Idx& n, cplx v) {
        if (&a == &f)
            s += v * std::conj(b.at(n));
        else
            s += b.at(n) * std::conj(v);
    });
    return s;
}

// int A B (no conjugation) = sum_{n+m=0} A(n) B(m).
inline cplx pair_integral(const SpectralField& A, const SpectralField& B) {
    const SpectralField& a = A.bw <= B.bw ? A : B;
    const SpectralField& b = A.bw <= B.bw ? B : A;
    cplx s{};
    a.for_each([&](const Idx& n, cplx v) { s += v * b.at(-n); });
    return s;
}

// int u = mean value = coefficient at 0.
inline cplx integral(const SpectralField& u) { return u.at({0, 0}); }

inline double max_abs(const SpectralField& u) {
    double m = 0;
    for (const auto& v : u.c) m = std::max(m, std::abs(v));
    return m;
}

// --- grid transforms and products -------------------------------------------

inline GridField to_grid(const SpectralField& u, int G) {
    if (G < 2 * u.bw + 1) throw std::invalid_argument("to_grid: grid too small for the field's box");
    GridField g(G);
    u.for_each([&](const Idx& n, cplx v) {
        if (v == cplx{}) return;
        int a = ((n.n1 % G) + G) % G;
        int b = ((n.n2 % G) + G) % G;
        g.v[static_cast<std::size_t>(b) * G + a] += v;
    });
    const auto& p = fft::plans_for(G);
    fft::execute(p.bwd, g.v.data(), g.v.data());
    return g;
}

inline SpectralField from_grid(const GridField& g, int bw_out) {
    int G = g.size;
    if (G < 2 * bw_out + 1) throw std::invalid_argument("from_grid: grid too small for requested box");
    std::vector<cplx> buf = g.v;
    const auto& p = fft::plans_for(G);
    fft::execute(p.fwd, buf.data(), buf.data());
    double inv = 1.0 / (static_cast<double>(G) * G);
    SpectralField u(bw_out);
    for (int n2 = -bw_out; n2 <= bw_out; ++n2)
        for (int n1 = -bw_out; n1 <= bw_out; ++n1) {
            int a = ((n1 % G) + G) % G;
            int b = ((n2 % G) + G) % G;
            u.c[u.index(n1, n2)] = buf[static_cast<std::size_t>(b) * G + a] * inv;
        }
    return u;
}

// Exact alias-free product: grid large enough to hold the sum bandwidth.
inline SpectralField multiply(const SpectralField& u, const SpectralField& v) {
    int bw_out = u.bw + v.bw;
    int G = fft::next_fast_size(2 * bw_out + 1);
    GridField gu = to_grid(u, G);
    GridField gv = to_grid(v, G);
    for (std::size_t i = 0; i < gu.v.size(); ++i) gu.v[i] *= gv.v[i];
    return from_grid(gu, bw_out);
}

// Exact product of several factors on one shared grid.
inline SpectralField multiply_many(const std::vector<const SpectralField*>& fs) {
    if (fs.empty()) return single_mode({0, 0}, 1.0);
    if (fs.size() == 1) return *fs[0];
    int bw_out = 0;
    for (auto* f : fs) bw_out += f->bw;
    int G = fft::next_fast_size(2 * bw_out + 1);
    GridField acc = to_grid(*fs[0], G);
    for (std::size_t j = 1; j < fs.size(); ++j) {
        GridField gj = to_grid(*fs[j], G);
        for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] *= gj.v[i];
    }
    return from_grid(acc, bw_out);
}

// O(B^4) reference convolution (the oracle path for small bandwidths).
inline SpectralField direct_convolve(const SpectralField& u, const SpectralField& v) {
    SpectralField out(u.bw + v.bw);
    u.for_each([&](const Idx& n, cplx a) {
        if (a == cplx{}) return;
        v.for_each([&](const Idx& m, cplx b) {
            if (b == cplx{}) return;
            out.ref(n + m) += a * b;
        });
    });
    return out;
}

// u^{p} conj(u)^{q} as an exact product (p + q >= 1).
inline SpectralField power_product(const SpectralField& u, int p, int q) {
    if (p < 0 || q < 0 || p + q < 1) throw std::invalid_argument("power_product: need p,q >= 0, p+q >= 1");
    SpectralField ub = conj_field(u);
    std::vector<const SpectralField*> fs;
    fs.reserve(static_cast<std::size_t>(p + q));
    for (int i = 0; i < p; ++i) fs.push_back(&u);
    for (int i = 0; i < q; ++i) fs.push_back(&ub);
    return multiply_many(fs);
}

} // namespace qilab
