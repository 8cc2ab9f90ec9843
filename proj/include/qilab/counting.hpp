#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qilab/lattice.hpp"

namespace qilab {

// Raised when an enumeration would exceed the desk-scale search budget.
struct ResourceGuard : std::runtime_error {
    explicit ResourceGuard(const std::string& what) : std::runtime_error(what) {}
};

// Lattice points of the sharp shell (or the full ball with ball_variant).
inline std::vector<Idx> annulus_points(int N, bool ball_variant = false) {
    require_dyadic(N, "annulus_points");
    std::vector<Idx> pts;
    for (int n1 = -N; n1 <= N; ++n1)
        for (int n2 = -N; n2 <= N; ++n2) {
            Idx n{n1, n2};
            if (ball_variant ? in_disk(n, N) : in_shell(n, N)) pts.push_back(n);
        }
    return pts;
}

// Triple-shell resonance count: frequencies k_j in the shells, one sign per
// frequency applied in both the linear and the quadratic constraint, with the
// pairing hyperplanes k_j +- k_{j+1} = 0 removed (cyclically by default).
struct CountingQuery {
    Idx m{0, 0};
    long long kappa = 0;
    std::vector<int> shells;       // dyadic, one per frequency
    std::vector<int> signs;        // +-1, one per frequency
    bool cyclic_exclusion = true;  // include j=3 with j+1 read mod 3
    bool ball_variant = false;

    void validate(std::size_t arity) const {
        if (shells.size() != arity) throw std::invalid_argument("CountingQuery: wrong shell count");
        if (signs.size() != shells.size()) throw std::invalid_argument("CountingQuery: signs length mismatch");
        for (int N : shells) {
            require_dyadic(N, "CountingQuery");
            if (N > 64) throw ResourceGuard("CountingQuery: shells above 64 exceed the desk-scale budget");
        }
        for (int s : signs)
            if (s != 1 && s != -1) throw std::invalid_argument("CountingQuery: signs must be +-1");
    }
};

namespace detail {

inline bool pairing_excluded(const Idx& a, const Idx& b) { return a + b == Idx{0, 0} || a - b == Idx{0, 0}; }

inline bool excluded_triplet(const Idx& k1, const Idx& k2, const Idx& k3, bool cyclic) {
    if (pairing_excluded(k1, k2) || pairing_excluded(k2, k3)) return true;
    if (cyclic && pairing_excluded(k3, k1)) return true;
    return false;
}

inline void check_S_budget(std::size_t a1, std::size_t a2) {
    const std::size_t budget = 400'000'000;
    if (a1 * a2 > budget)
        throw ResourceGuard("enumerate_S: estimated cost " + std::to_string(a1 * a2) +
                            " point pairs exceeds budget " + std::to_string(budget));
}

} // namespace detail

// |S_{m,kappa}(N1,N2,N3)| by exhaustion over two shells, the third frequency
// solved from the linear constraint.
inline long long enumerate_S(const CountingQuery& q) {
    q.validate(3);
    auto A1 = annulus_points(q.shells[0], q.ball_variant);
    auto A2 = annulus_points(q.shells[1], q.ball_variant);
    detail::check_S_budget(A1.size(), A2.size());
    long long count = 0;
    const int s1 = q.signs[0], s2 = q.signs[1], s3 = q.signs[2];
    for (const Idx& k1 : A1)
        for (const Idx& k2 : A2) {
            Idx r{q.m.n1 - s1 * k1.n1 - s2 * k2.n1, q.m.n2 - s1 * k1.n2 - s2 * k2.n2};
            Idx k3{s3 * r.n1, s3 * r.n2};
            bool member = q.ball_variant ? in_disk(k3, q.shells[2]) : in_shell(k3, q.shells[2]);
            if (!member) continue;
            long long quad = s1 * abs2(k1) + s2 * abs2(k2) + s3 * abs2(k3);
            if (quad != q.kappa) continue;
            if (detail::excluded_triplet(k1, k2, k3, q.cyclic_exclusion)) continue;
            ++count;
        }
    return count;
}

struct SupCount {
    long long count = 0;
    long long kappa = 0;
};

// max over kappa of |S_{m,kappa}| in one pass (kappa histogram).
inline SupCount enumerate_S_sup_over_kappa(const CountingQuery& q) {
    q.validate(3);
    auto A1 = annulus_points(q.shells[0], q.ball_variant);
    auto A2 = annulus_points(q.shells[1], q.ball_variant);
    detail::check_S_budget(A1.size(), A2.size());
    std::unordered_map<long long, long long> hist;
    const int s1 = q.signs[0], s2 = q.signs[1], s3 = q.signs[2];
    for (const Idx& k1 : A1)
        for (const Idx& k2 : A2) {
            Idx r{q.m.n1 - s1 * k1.n1 - s2 * k2.n1, q.m.n2 - s1 * k1.n2 - s2 * k2.n2};
            Idx k3{s3 * r.n1, s3 * r.n2};
            bool member = q.ball_variant ? in_disk(k3, q.shells[2]) : in_shell(k3, q.shells[2]);
            if (!member) continue;
            if (detail::excluded_triplet(k1, k2, k3, q.cyclic_exclusion)) continue;
            ++hist[s1 * abs2(k1) + s2 * abs2(k2) + s3 * abs2(k3)];
        }
    SupCount best;
    for (const auto& [kap, cnt] : hist)
        if (cnt > best.count || (cnt == best.count && kap < best.kappa)) best = {cnt, kap};
    return best;
}

// Count with no quadratic constraint and no exclusion: the partition target
// sum_kappa |S_{m,kappa}| + |excluded set on the linear hyperplane|.
inline long long linear_constraint_count(const CountingQuery& q) {
    q.validate(3);
    auto A1 = annulus_points(q.shells[0], q.ball_variant);
    auto A2 = annulus_points(q.shells[1], q.ball_variant);
    detail::check_S_budget(A1.size(), A2.size());
    long long count = 0;
    const int s1 = q.signs[0], s2 = q.signs[1], s3 = q.signs[2];
    for (const Idx& k1 : A1)
        for (const Idx& k2 : A2) {
            Idx r{q.m.n1 - s1 * k1.n1 - s2 * k2.n1, q.m.n2 - s1 * k1.n2 - s2 * k2.n2};
            Idx k3{s3 * r.n1, s3 * r.n2};
            bool member = q.ball_variant ? in_disk(k3, q.shells[2]) : in_shell(k3, q.shells[2]);
            if (member) ++count;
        }
    return count;
}

namespace detail {

// Shell-size ordering for the top-two exclusion: largest shells first, ties by
// original position.
inline std::pair<std::size_t, std::size_t> top_two_by_shell(const std::vector<int>& shells) {
    std::size_t i1 = 0;
    for (std::size_t i = 1; i < shells.size(); ++i)
        if (shells[i] > shells[i1]) i1 = i;
    std::size_t i2 = i1 == 0 ? 1 : 0;
    for (std::size_t i = 0; i < shells.size(); ++i) {
        if (i == i1) continue;
        if (shells[i] > shells[i2]) i2 = i;
    }
    return {i1, i2};
}

template <class Visit>
void foreach_E(const std::vector<int>& shells, std::size_t solved, Visit&& visit) {
    std::size_t n = shells.size();
    std::vector<std::vector<Idx>> ann(n);
    double cost = 1;
    for (std::size_t i = 0; i < n; ++i) {
        ann[i] = annulus_points(shells[i]);
        if (i != solved) cost *= static_cast<double>(ann[i].size());
    }
    if (cost > 1e9)
        throw ResourceGuard("enumerate_E: search space of " + std::to_string(cost) + " points exceeds 1e9");
    std::vector<Idx> x(n);
    std::vector<std::size_t> free_idx;
    for (std::size_t i = 0; i < n; ++i)
        if (i != solved) free_idx.push_back(i);

    auto recurse = [&](auto&& self, std::size_t depth) -> void {
        if (depth == free_idx.size()) {
            Idx sum{0, 0};
            for (std::size_t i = 0; i < n; ++i)
                if (i != solved) sum = sum + x[i];
            x[solved] = -sum;
            if (in_shell(x[solved], shells[solved])) visit(x);
            return;
        }
        std::size_t i = free_idx[depth];
        for (const Idx& p : ann[i]) {
            x[i] = p;
            self(self, depth + 1);
        }
    };
    recurse(recurse, 0);
}

inline long long count_E(long long kappa, const std::vector<int>& shells, std::size_t solved) {
    if (shells.size() < 4 || shells.size() % 2 != 0)
        throw std::invalid_argument("enumerate_E: shell list must have even size 2k+2 >= 4");
    for (int N : shells) require_dyadic(N, "enumerate_E");
    std::size_t half = shells.size() / 2;
    auto [i1, i2] = top_two_by_shell(shells);
    long long count = 0;
    foreach_E(shells, solved, [&](const std::vector<Idx>& x) {
        long long quad = 0;
        for (std::size_t i = 0; i < x.size(); ++i) quad += (i < half ? 1 : -1) * abs2(x[i]);
        if (quad != kappa) return;
        if (pairing_excluded(x[i1], x[i2])) return;
        ++count;
    });
    return count;
}

} // namespace detail

// |E_kappa| for shells (N_1..N_{k+1}, M_1..M_{k+1}): zero linear sum,
// quadratic sum_i |n_i|^2 - sum_j |m_j|^2 = kappa, and the two frequencies on
// the largest shells not allowed to pair.
inline long long enumerate_E(long long kappa, const std::vector<int>& shells) {
    return detail::count_E(kappa, shells, shells.size() - 1);
}

// Independent second implementation: different solved variable, so the loop
// structure and traversal order differ.
inline long long enumerate_E_alt(long long kappa, const std::vector<int>& shells) {
    return detail::count_E(kappa, shells, 0);
}

} // namespace qilab
