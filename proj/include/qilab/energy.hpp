#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "qilab/field.hpp"
#include "qilab/flow.hpp"

// Modified energy for the truncated flow and the exact decomposition of its
// time derivative.
//
// Throughout, for u in E_N and the flow du/dt = i lap u - i g, g = P_{<=N}(u^{k+1} ubar^k):
//
//   E(u) = ||D^s u||^2 + k Re(D^{s-2} ubar u^{k+1} ubar^{k-1}, D^s u) = l2s + 2 S(u),
//
// and dE/dt splits exactly into the seven terms computed by energy_terms().
// The correction enters with a plus sign: that is the sign for which the
// leading pairing 2k Im(D^s ubar u^{k+1} ubar^{k-1}, D^s u) cancels from the
// derivative, leaving only lower-order terms (verified to machine precision by
// the identity-residual tests).

namespace qilab {

struct EnergyBreakdown {
    double l2s = 0;        // ||D^s u||^2
    double correction = 0; // 2 S(u)
    std::array<double, 7> term{};
    double q1 = 0;
    double q2 = 0;
    double s = 0;
    int k = 0;
    int N = 0;

    double term_sum() const {
        double t = 0;
        for (double x : term) t += x;
        return t;
    }
    double modified() const { return l2s + correction; }
};

inline double homogeneous_sobolev_sq(const SpectralField& u, double s) {
    double acc = 0;
    u.for_each([&](const Idx& n, cplx v) {
        long long a = abs2(n);
        if (a > 0) acc += std::pow(static_cast<double>(a), s) * std::norm(v);
    });
    return acc;
}

inline double inhomogeneous_sobolev_sq(const SpectralField& u, double s) {
    double acc = 0;
    u.for_each([&](const Idx& n, cplx v) { acc += std::pow(1.0 + static_cast<double>(abs2(n)), s) * std::norm(v); });
    return acc;
}

// C^sigma(u) = D^sigma(u|u|^{2k}) - (k+1) D^sigma(u) u^k ubar^k - k u^{k+1} ubar^{k-1} D^sigma(ubar).
inline SpectralField commutator(const SpectralField& u, double sigma, int k) {
    if (k < 1) throw std::invalid_argument("commutator: k must be >= 1");
    SpectralField f = power_product(u, k + 1, k);
    SpectralField t1 = dsigma(f, sigma);
    SpectralField Du = dsigma(u, sigma);
    SpectralField u2k = power_product(u, k, k);
    SpectralField t2 = cplx(-(k + 1.0)) * multiply(Du, u2k);
    SpectralField q = power_product(u, k + 1, k - 1);
    SpectralField Dub = dsigma(conj_field(u), sigma);
    SpectralField t3 = cplx(-static_cast<double>(k)) * multiply(q, Dub);
    return t1 + t2 + t3;
}

// S(u) at truncation N: (k/2) Re(D^{s-2} P ubar (P u)^{k+1} (P ubar)^{k-1}, D^s P u).
inline double correction_S(const SpectralField& u, double s, int k, int N) {
    SpectralField un = restrict_disk(u, N);
    SpectralField q = power_product(un, k + 1, k - 1);
    SpectralField A = dsigma(conj_field(un), s - 2.0);
    return 0.5 * k * inner(multiply(A, q), dsigma(un, s)).real();
}

// l2s + 2 S at matching truncation (no interior projection is active).
inline double modified_energy(const SpectralField& u, double s, int k) {
    return homogeneous_sobolev_sq(u, s) + 2.0 * correction_S(u, s, k, u.bw);
}

namespace detail {

struct VecField {
    SpectralField x, y;
};

inline VecField gradient(const SpectralField& u) { return {partial(u, 0), partial(u, 1)}; }

inline VecField vmul(const SpectralField& a, const VecField& v) { return {multiply(a, v.x), multiply(a, v.y)}; }

inline VecField vmul3(const SpectralField& a, const SpectralField& b, const VecField& v) {
    return {multiply_many({&a, &b, &v.x}), multiply_many({&a, &b, &v.y})};
}

inline VecField vproj(const VecField& v, int N) { return {restrict_disk(v.x, N), restrict_disk(v.y, N)}; }

inline VecField vplus(const VecField& a, const VecField& b) { return {a.x + b.x, a.y + b.y}; }

inline double vinner_im(const VecField& a, const VecField& b) {
    return (inner(a.x, b.x) + inner(a.y, b.y)).imag();
}

} // namespace detail

// Exact d/dt of W(u) = Re(D^{s-2} ubar u^{k+1} ubar^{k-1}, D^s u) along
// du/dt = w, by the product rule over the four slots.
inline double correction_rate_slots(const SpectralField& u, const SpectralField& w, double s, int k) {
    SpectralField ub = conj_field(u);
    SpectralField wb = conj_field(w);
    SpectralField q = power_product(u, k + 1, k - 1);
    SpectralField A = dsigma(ub, s - 2.0);
    SpectralField Dsu = dsigma(u, s);
    cplx acc = inner(multiply(dsigma(wb, s - 2.0), q), Dsu);
    SpectralField Xa = power_product(u, k, k - 1); // u^k ubar^{k-1} (k >= 1)
    acc += cplx(k + 1.0) * inner(multiply_many({&A, &w, &Xa}), Dsu);
    if (k >= 2) {
        SpectralField Xb = power_product(u, k + 1, k - 2);
        acc += cplx(k - 1.0) * inner(multiply_many({&A, &wb, &Xb}), Dsu);
    }
    acc += inner(multiply(A, q), dsigma(w, s));
    return acc.real();
}

// d/dt sum |n|^{2s}|u(n)|^2 along the truncated flow.
inline double homogeneous_weight_rate(const SpectralField& u, double s, int k, int N) {
    SpectralField g = nonlinearity(u, k, N);
    double acc = 0;
    g.for_each([&](const Idx& n, cplx v) {
        long long a = abs2(n);
        if (a == 0) return;
        acc += std::pow(static_cast<double>(a), s) * (v * std::conj(u.at(n))).imag();
    });
    return 2.0 * acc;
}

// d/dt sum <n>^{2s}|u(n)|^2 along the truncated flow (the Gaussian weight rate).
inline double sobolev_weight_rate(const SpectralField& u, double s, int k, int N) {
    SpectralField g = nonlinearity(u, k, N);
    double acc = 0;
    g.for_each([&](const Idx& n, cplx v) {
        acc += std::pow(1.0 + static_cast<double>(abs2(n)), s) * (v * std::conj(u.at(n))).imag();
    });
    return 2.0 * acc;
}

// Exact dE/dt along the truncated flow via the slot route (the oracle path).
inline double energy_rate(const SpectralField& u, double s, int k, int N) {
    SpectralField w = flow_rhs(u, k, N);
    return homogeneous_weight_rate(u, s, k, N) + k * correction_rate_slots(u, w, s, k);
}

// The pairing functional needing probabilistic control:
// q1 = -2k(k-1)(k+1) Re[(int D^s ubar grad u) . (int |u|^{2k-2} u^2 D^{s-2} ubar grad ubar)].
inline double pairing_q1(const SpectralField& u, double s, int k, int N) {
    if (k == 1) return 0.0;
    SpectralField un = restrict_disk(u, N);
    SpectralField ub = conj_field(un);
    SpectralField Dsub = dsigma(ub, s);
    SpectralField q = power_product(un, k + 1, k - 1);
    SpectralField A = dsigma(ub, s - 2.0);
    SpectralField qA = multiply(q, A);
    cplx dot{};
    for (int axis = 0; axis < 2; ++axis) {
        cplx v1 = pair_integral(Dsub, partial(un, axis));
        cplx v2 = pair_integral(qA, partial(ub, axis));
        dot += v1 * v2;
    }
    return -2.0 * k * (k - 1.0) * (k + 1.0) * dot.real();
}

// The seven-term decomposition of dE/dt, exact for the truncated flow. Terms
// (I)-(V) carry no interior projection; the nonlinear-part terms (VI), (VII)
// keep g = P_{<=N}(u^{k+1} ubar^k) as a unit, with the projector applied
// exactly where the truncated equation puts it.
inline EnergyBreakdown energy_terms(const SpectralField& u_in, double s, int k, int N) {
    using detail::VecField;
    using detail::gradient;
    using detail::vinner_im;
    using detail::vmul;
    using detail::vplus;
    using detail::vproj;
    if (k < 1) throw std::invalid_argument("energy_terms: k must be >= 1");
    require_dyadic(N, "energy_terms");
    if (!supported_in_disk(u_in, N)) throw std::invalid_argument("energy_terms: u must lie in E_N");

    SpectralField u = restrict_disk(u_in, N);
    EnergyBreakdown out;
    out.s = s;
    out.k = k;
    out.N = N;
    out.l2s = homogeneous_sobolev_sq(u, s);
    out.correction = 2.0 * correction_S(u, s, k, N);

    SpectralField ub = conj_field(u);
    SpectralField Dsu = dsigma(u, s);
    SpectralField A = dsigma(ub, s - 2.0);
    SpectralField Au = dsigma(u, s - 2.0);
    VecField gA = gradient(A);
    VecField gAu = gradient(Au); // also grad D^{s-2} u, the right-hand slot below
    VecField gu = gradient(u);
    VecField gub = gradient(ub);

    SpectralField f = power_product(u, k + 1, k);
    SpectralField g = restrict_disk(f, N);
    SpectralField gb = conj_field(g);
    SpectralField q = power_product(u, k + 1, k - 1);
    SpectralField qb = conj_field(q);
    SpectralField u2k = power_product(u, k, k);
    SpectralField Xk1 = power_product(u, k, k - 1);

    const double dk = k;

    // (I) = 2 Im(C^s(u), D^s u)
    out.term[0] = 2.0 * inner(commutator(u, s, k), Dsu).imag();

    // (II) = 2k(k-1) Im(D^{s-2} ubar lap(ubar) u^{k+1} ubar^{k-2}, D^s u)
    if (k >= 2) {
        SpectralField Xb = power_product(u, k + 1, k - 2);
        SpectralField lub = laplacian(ub);
        out.term[1] = 2.0 * dk * (dk - 1.0) * inner(multiply_many({&A, &lub, &Xb}), Dsu).imag();
    }

    // (III) = 2k(k+1) Im(grad D^{s-2} ubar . grad u  u^k ubar^{k-1}, D^s u)
    out.term[2] = 2.0 * dk * (dk + 1.0) *
                  inner(multiply_many({&gA.x, &gu.x, &Xk1}) + multiply_many({&gA.y, &gu.y, &Xk1}), Dsu).imag();

    // (IV) = 2k(k-1) Im(grad D^{s-2} ubar . grad ubar  u^{k+1} ubar^{k-2}, D^s u)
    if (k >= 2) {
        SpectralField Xb = power_product(u, k + 1, k - 2);
        out.term[3] = 2.0 * dk * (dk - 1.0) *
                      inner(multiply_many({&gA.x, &gub.x, &Xb}) + multiply_many({&gA.y, &gub.y, &Xb}), Dsu).imag();
    }

    // (V): second-order cross terms of the linear part,
    //   2k(k+1)(k-1) Im(D^{s-2} ubar grad u . grad ubar u^k ubar^{k-2}, D^s u)
    // + k^2(k+1)     Im(D^{s-2} ubar grad u . grad u    u^{k-1} ubar^{k-1}, D^s u)
    // + k(k-1)(k-2)  Im(D^{s-2} ubar grad ubar . grad ubar u^{k+1} ubar^{k-3}, D^s u)
    {
        double tV = 0;
        if (k >= 2) {
            SpectralField Xc = power_product(u, k, k - 2);
            tV += 2.0 * dk * (dk + 1.0) * (dk - 1.0) *
                  inner(multiply_many({&A, &gu.x, &gub.x, &Xc}) + multiply_many({&A, &gu.y, &gub.y, &Xc}), Dsu).imag();
        }
        {
            SpectralField Xd = k >= 2 ? power_product(u, k - 1, k - 1) : single_mode({0, 0}, 1.0);
            tV += dk * dk * (dk + 1.0) *
                  inner(multiply_many({&A, &gu.x, &gu.x, &Xd}) + multiply_many({&A, &gu.y, &gu.y, &Xd}), Dsu).imag();
        }
        if (k >= 3) {
            SpectralField Xe = power_product(u, k + 1, k - 3);
            tV += dk * (dk - 1.0) * (dk - 2.0) *
                  inner(multiply_many({&A, &gub.x, &gub.x, &Xe}) + multiply_many({&A, &gub.y, &gub.y, &Xe}), Dsu).imag();
        }
        out.term[4] = tV;
    }

    // Nonlinear part. Sub-terms below sum to k * N(u) with
    // N(u) = -Im(D^{s-2} gbar q, D^s u) + (k+1) Im(D^{s-2} ubar g u^k ubar^{k-1}, D^s u)
    //        - (k-1) Im(D^{s-2} ubar gbar u^{k+1} ubar^{k-2}, D^s u) - Im(D^{s-2} ubar q, D^s g),
    // written through grad D^{s-2} pairings.
    VecField gq = gradient(q);
    VecField gqb = gradient(qb);
    VecField gu2k = gradient(u2k);
    SpectralField Cu = commutator(u, s - 2.0, k);
    SpectralField Cb = conj_field(Cu);
    VecField PgAq = vproj(vmul(q, gA), N); // P[grad D^{s-2} ubar * q]

    // (VII): the grad D^{s-2} ubar ... grad D^{s-2} u family.
    {
        double sVII = 0;
        sVII += -(dk + 1.0) * vinner_im(vmul(q, vproj(vmul(u2k, gA), N)), gAu);
        sVII += -(dk + 1.0) * vinner_im(vmul(u2k, PgAq), gAu);
        SpectralField gXk1 = multiply(g, Xk1);
        sVII += (dk + 1.0) * vinner_im(vmul(gXk1, gA), gAu);
        if (k >= 2) {
            SpectralField Xb = power_product(u, k + 1, k - 2);
            SpectralField gbXb = multiply(gb, Xb);
            sVII += -(dk - 1.0) * vinner_im(vmul(gbXb, gA), gAu);
        }
        out.term[6] = dk * sVII;
    }

    // (VI): the bracket -- everything else in the nonlinear part.
    {
        double sVI = 0;
        sVI += -vinner_im(vmul(q, vproj(gradient(Cb), N)), gAu);
        sVI += -(dk + 1.0) * vinner_im(vmul(q, vproj(vmul(A, gu2k), N)), gAu);
        sVI += -dk * vinner_im(vmul(q, vproj(vmul(Au, gqb), N)), gAu);
        sVI += -dk * vinner_im(vmul(q, vproj(vmul(qb, gAu), N)), gAu);
        sVI += -vinner_im(vmul(dsigma(gb, s - 2.0), gq), gAu);
        {
            SpectralField AXk1 = multiply(A, Xk1);
            SpectralField Ag = multiply(A, g);
            sVI += (dk + 1.0) * vinner_im(vplus(vmul(AXk1, gradient(g)), vmul(Ag, gradient(Xk1))), gAu);
        }
        if (k >= 2) {
            SpectralField Xb = power_product(u, k + 1, k - 2);
            SpectralField AXb = multiply(A, Xb);
            SpectralField Agb = multiply(A, gb);
            sVI += -(dk - 1.0) * vinner_im(vplus(vmul(AXb, gradient(gb)), vmul(Agb, gradient(Xb))), gAu);
        }
        sVI += -vinner_im(PgAq, gradient(Cu));
        sVI += -(dk + 1.0) * vinner_im(PgAq, vmul(Au, gu2k));
        sVI += -dk * vinner_im(PgAq, vmul(A, gq));
        sVI += -dk * vinner_im(PgAq, vmul(q, gA));
        sVI += -vinner_im(vproj(vmul(A, gq), N), gradient(dsigma(f, s - 2.0)));
        out.term[5] = dk * sVI;
    }

    out.q1 = pairing_q1(u, s, k, N);
    out.q2 = 0.5 * out.term_sum() - out.q1;
    return out;
}

inline double pairing_q2(const SpectralField& u, double s, int k, int N) {
    return energy_terms(u, s, k, N).q2;
}

// |FD - AN|: centered finite difference of the modified energy along the flow
// against the analytic term sum at u0. The residual is O(dt_fd^2) plus
// integrator error.
inline double identity_residual(const SpectralField& u0, double s, const FlowConfig& cfg, double dt_fd) {
    if (!(dt_fd > 0)) throw std::invalid_argument("identity_residual: dt_fd must be > 0");
    FlowConfig sub = cfg;
    sub.dt = std::min(cfg.dt, dt_fd);
    SpectralField up = flow_to(u0, dt_fd, sub);
    SpectralField um = flow_to(u0, -dt_fd, sub);
    double fd = (modified_energy(up, s, cfg.k) - modified_energy(um, s, cfg.k)) / (2.0 * dt_fd);
    double an = energy_terms(u0, s, cfg.k, cfg.N).term_sum();
    return std::abs(fd - an);
}

} // namespace qilab
