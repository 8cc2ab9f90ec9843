#pragma once

#include <cstdint>
#include <stdexcept>

#include "qilab/field.hpp"
#include "qilab/rng.hpp"

namespace qilab {

// Parameters of the Gaussian measure mu_s: coefficients g_n / <n>^s on |n| <= cutoff.
struct GaussianSpec {
    double s = 2.5; // regularity, > 2
    int cutoff = 4; // Euclidean support radius
    std::uint64_t seed = 0;

    void validate() const {
        if (!(s > 2.0)) throw std::invalid_argument("GaussianSpec: s must be > 2");
        if (cutoff < 1) throw std::invalid_argument("GaussianSpec: cutoff must be >= 1");
    }
};

// Canonical cutoff-independent draw index: box rings enumerated outward, cells
// inside a ring ordered by (n2, n1). Sampling the same (seed, stream) at two
// cutoffs agrees on the shared modes.
inline std::uint64_t mode_draw_index(const Idx& n) {
    int r = std::max(std::abs(n.n1), std::abs(n.n2));
    if (r == 0) return 0;
    std::uint64_t base = static_cast<std::uint64_t>(2 * r - 1) * (2 * r - 1);
    std::uint64_t off;
    if (n.n2 == -r)
        off = static_cast<std::uint64_t>(n.n1 + r);
    else if (n.n2 < r)
        off = static_cast<std::uint64_t>(2 * r + 1) + 2 * static_cast<std::uint64_t>(n.n2 + r - 1) +
              (n.n1 == r ? 1 : 0);
    else
        off = static_cast<std::uint64_t>(2 * r + 1) + 2 * static_cast<std::uint64_t>(2 * r - 1) +
              static_cast<std::uint64_t>(n.n1 + r);
    return base + off;
}

// One sample of mu_s; a pure function of (spec.seed, stream).
inline SpectralField sample(const GaussianSpec& spec, std::uint64_t stream) {
    spec.validate();
    SpectralField u(spec.cutoff);
    for (int n2 = -spec.cutoff; n2 <= spec.cutoff; ++n2)
        for (int n1 = -spec.cutoff; n1 <= spec.cutoff; ++n1) {
            Idx n{n1, n2};
            if (!in_disk(n, spec.cutoff)) continue;
            cplx g = rng::complex_gaussian(spec.seed, stream, mode_draw_index(n));
            u.ref(n) = g * std::pow(bracket(n), -spec.s);
        }
    return u;
}

// int P_N(d_j u) P_N(D^s conj(u)) = sum_{n in the N-shell} i n_j |n|^s |u(n)|^2.
inline cplx pairing_statistic(const SpectralField& u, int N, int axis, double s) {
    require_dyadic(N, "pairing_statistic");
    if (axis != 0 && axis != 1) throw std::invalid_argument("pairing_statistic: axis must be 0 or 1");
    cplx acc{};
    u.for_each([&](const Idx& n, cplx v) {
        if (!in_shell(n, N)) return;
        double nj = axis == 0 ? n.n1 : n.n2;
        acc += cplx(0.0, nj) * std::pow(static_cast<double>(abs2(n)), 0.5 * s) * std::norm(v);
    });
    return acc;
}

// Fourier coefficient at n of D^s P_N conj(u) * D^{s-2} P_M conj(u).
inline cplx conj_product_coefficient(const SpectralField& u, int N, int M, const Idx& n, double s) {
    require_dyadic(N, "conj_product_coefficient");
    require_dyadic(M, "conj_product_coefficient");
    SpectralField ub = conj_field(u);
    SpectralField A = dsigma(project(ub, N), s);
    SpectralField B = dsigma(project(ub, M), s - 2.0);
    cplx acc{};
    A.for_each([&](const Idx& l, cplx a) {
        if (a == cplx{}) return;
        acc += a * B.at(n - l);
    });
    return acc;
}

} // namespace qilab
