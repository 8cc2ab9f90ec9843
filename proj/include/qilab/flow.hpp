#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qilab/field.hpp"

namespace qilab {

enum class Integrator { rk4_interaction };
enum class Direction { forward, backward };

// Truncated flow on E_N = span{e^{in.x} : |n| <= N}.
struct FlowConfig {
    int k = 1;      // nonlinearity power, >= 1
    int N = 4;      // dyadic cutoff
    double dt = 1e-3;
    Integrator integrator = Integrator::rk4_interaction;
    Direction direction = Direction::forward;

    void validate() const {
        if (k < 1) throw std::invalid_argument("FlowConfig: k must be >= 1");
        require_dyadic(N, "FlowConfig");
        if (!(dt > 0)) throw std::invalid_argument("FlowConfig: dt must be > 0");
    }
    double signed_dt() const { return direction == Direction::backward ? -dt : dt; }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<SpectralField> states;
    FlowConfig config;
};

// P_{<=N}(|P_{<=N} u|^{2k} P_{<=N} u), alias-free: the grid holds degree 2k+2
// interactions of modes up to N, so every retained coefficient is exact.
inline SpectralField nonlinearity(const SpectralField& u, int k, int N) {
    SpectralField un = restrict_disk(u, N);
    int G = fft::next_fast_size((2 * k + 2) * N + 1);
    GridField g = to_grid(un, G);
    for (auto& v : g.v) {
        double a = std::norm(v);
        v *= std::pow(a, k);
    }
    return restrict_disk(from_grid(g, N), N);
}

// e^{itD}: coefficient at n multiplied by e^{-it|n|^2}.
inline SpectralField linear_propagate(const SpectralField& u, double t) {
    SpectralField out = u;
    out.transform([&](const Idx& n, cplx v) {
        double ph = -t * static_cast<double>(abs2(n));
        return v * std::polar(1.0, ph);
    });
    return out;
}

// du/dt = i lap(u) - i P_{<=N}(|u|^{2k} u); the vector field of the truncated flow.
inline SpectralField flow_rhs(const SpectralField& u, int k, int N, bool include_nonlinear = true) {
    SpectralField out = cplx(0, 1) * laplacian(u);
    if (include_nonlinear) out += cplx(0, -1) * nonlinearity(u, k, N);
    return restrict_disk(out, N);
}

namespace detail {

// One RK4 step of size h (signed) in the interaction picture based at the
// current state: v' = -i e^{-i tau D} P(|e^{i tau D} v|^{2k} e^{i tau D} v),
// v(0) = u, return e^{i h D} v(h). The stiff linear phase is exact.
inline SpectralField rk4_interaction_step(const SpectralField& u, int k, int N, double h) {
    auto F = [&](double tau, const SpectralField& v) {
        SpectralField w = linear_propagate(v, tau);
        SpectralField nn = nonlinearity(w, k, N);
        return cplx(0, -1) * linear_propagate(nn, -tau);
    };
    SpectralField k1 = F(0.0, u);
    SpectralField k2 = F(0.5 * h, u + cplx(0.5 * h) * k1);
    SpectralField k3 = F(0.5 * h, u + cplx(0.5 * h) * k2);
    SpectralField k4 = F(h, u + cplx(h) * k3);
    SpectralField v = u + cplx(h / 6.0) * (k1 + cplx(2.0) * k2 + cplx(2.0) * k3 + k4);
    return linear_propagate(v, h);
}

} // namespace detail

// One step of size cfg.dt in cfg.direction.
inline SpectralField step(const SpectralField& u, const FlowConfig& cfg) {
    cfg.validate();
    if (!supported_in_disk(u, cfg.N)) throw std::invalid_argument("step: state not supported in E_N");
    return detail::rk4_interaction_step(restrict_disk(u, cfg.N), cfg.k, cfg.N, cfg.signed_dt());
}

// Flow to horizon T (sign of T selects the direction); a final smaller step
// absorbs any dt/horizon mismatch. States recorded every `stride` steps plus
// the endpoint.
inline Trajectory evolve(const SpectralField& u0, double T, FlowConfig cfg, int stride = 0) {
    cfg.validate();
    if (!supported_in_disk(u0, cfg.N)) throw std::invalid_argument("evolve: state not supported in E_N");
    Trajectory traj;
    traj.config = cfg;
    SpectralField u = restrict_disk(u0, cfg.N);
    double dir = T < 0 ? -1.0 : 1.0;
    double aT = std::abs(T);
    long long nfull = static_cast<long long>(std::floor(aT / cfg.dt + 1e-12));
    double rem = aT - static_cast<double>(nfull) * cfg.dt;
    if (rem < 1e-14 * std::max(1.0, aT)) rem = 0;
    traj.times.push_back(0.0);
    traj.states.push_back(u);
    double t = 0;
    for (long long i = 0; i < nfull; ++i) {
        u = detail::rk4_interaction_step(u, cfg.k, cfg.N, dir * cfg.dt);
        t += dir * cfg.dt;
        bool record = stride > 0 && ((i + 1) % stride == 0);
        if (record && i + 1 < nfull) {
            traj.times.push_back(t);
            traj.states.push_back(u);
        }
    }
    if (rem > 0) u = detail::rk4_interaction_step(u, cfg.k, cfg.N, dir * rem);
    traj.times.push_back(T);
    traj.states.push_back(u);
    return traj;
}

inline SpectralField flow_to(const SpectralField& u0, double T, const FlowConfig& cfg) {
    return evolve(u0, T, cfg).states.back();
}

struct Conserved {
    double mass = 0;
    double hamiltonian = 0;
};

// mass = int |u|^2, hamiltonian = int |grad u|^2 + (1/(k+1)) int |u|^{2k+2};
// both invariants of the truncated flow for u in E_N.
inline Conserved conserved(const SpectralField& u, int k) {
    Conserved c;
    u.for_each([&](const Idx& n, cplx v) {
        double a = std::norm(v);
        c.mass += a;
        c.hamiltonian += static_cast<double>(abs2(n)) * a;
    });
    int G = fft::next_fast_size((2 * k + 2) * u.bw + 1);
    GridField g = to_grid(u, G);
    double pot = 0;
    for (const auto& v : g.v) pot += std::pow(std::norm(v), k + 1);
    pot /= static_cast<double>(g.v.size());
    c.hamiltonian += pot / static_cast<double>(k + 1);
    return c;
}

// Central finite-difference estimate of div b over all 2 dim(E_N) real
// coordinates. The field is Hamiltonian, so the exact value is 0; the probe
// returns the raw estimate (caller scales by field_scale below).
inline double divergence_probe(const SpectralField& u, const FlowConfig& cfg, double h,
                               bool include_nonlinear = true) {
    cfg.validate();
    if (!(h > 0)) throw std::invalid_argument("divergence_probe: h must be > 0");
    SpectralField base = restrict_disk(u, cfg.N);
    double div = 0;
    for (int n2 = -cfg.N; n2 <= cfg.N; ++n2)
        for (int n1 = -cfg.N; n1 <= cfg.N; ++n1) {
            Idx n{n1, n2};
            if (!in_disk(n, cfg.N)) continue;
            for (int part = 0; part < 2; ++part) {
                cplx delta = part == 0 ? cplx(h, 0) : cplx(0, h);
                SpectralField up = base, um = base;
                up.ref(n) += delta;
                um.ref(n) -= delta;
                cplx bp = flow_rhs(up, cfg.k, cfg.N, include_nonlinear).at(n);
                cplx bm = flow_rhs(um, cfg.k, cfg.N, include_nonlinear).at(n);
                double dp = part == 0 ? (bp.real() - bm.real()) : (bp.imag() - bm.imag());
                div += dp / (2.0 * h);
            }
        }
    return div;
}

// Scale against which the probe's finite-difference noise is judged.
inline double divergence_field_scale(const SpectralField& u, const FlowConfig& cfg) {
    long long dim = 0;
    for (int n2 = -cfg.N; n2 <= cfg.N; ++n2)
        for (int n1 = -cfg.N; n1 <= cfg.N; ++n1)
            if (in_disk({n1, n2}, cfg.N)) ++dim;
    double amp = 1.0 + wiener_norm(u);
    return 2.0 * static_cast<double>(dim) * std::pow(amp, 2 * cfg.k + 1);
}

} // namespace qilab
