#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qilab/energy.hpp"
#include "qilab/field.hpp"
#include "qilab/flow.hpp"
#include "qilab/gauss.hpp"
#include "qilab/parallel.hpp"
#include "qilab/stats.hpp"

namespace qilab {

struct McReport {
    std::string name;
    double estimate = 0;
    double stderr_ = 0;
    long long n_samples = 0;
    std::optional<double> bound;
    enum class Verdict { pass, fail, inconclusive } verdict = Verdict::inconclusive;
    std::map<std::string, double> details; // auxiliary diagnostics, schema-documented

    static const char* verdict_name(Verdict v) {
        switch (v) {
            case Verdict::pass: return "pass";
            case Verdict::fail: return "fail";
            case Verdict::inconclusive: return "inconclusive";
        }
        return "?";
    }
};

struct ObservableSpec {
    enum class Kind { bounded_cylinder, norm_indicator, moment } kind = Kind::bounded_cylinder;
    std::string fn = "tanh_re"; // cylinder map name
    Idx mode{1, 0};
    Idx mode2{0, 1};
    double R = 2.0;       // indicator ball radius
    double sigma = 1.4;   // indicator FL exponent
    int a = 1;            // moment power

    bool bounded() const { return kind != Kind::moment; }

    double evaluate(const SpectralField& u) const {
        switch (kind) {
            case Kind::bounded_cylinder: {
                cplx z = u.at(mode);
                if (fn == "tanh_re") return std::tanh(z.real());
                if (fn == "cos_im") return std::cos(z.imag());
                if (fn == "inv_one_plus_abs2") return 1.0 / (1.0 + std::norm(z));
                if (fn == "sin_mix") return std::sin(z.real() + u.at(mode2).imag());
                if (fn == "exp_neg_abs2") return std::exp(-std::norm(z));
                throw std::invalid_argument("ObservableSpec: unknown cylinder map '" + fn + "'");
            }
            case Kind::norm_indicator:
                return fourier_lebesgue_norm(u, sigma) <= R ? 1.0 : 0.0;
            case Kind::moment: {
                cplx z = u.at(mode);
                cplx p = 1.0;
                for (int i = 0; i < a; ++i) p *= z;
                return p.real();
            }
        }
        throw std::logic_error("ObservableSpec: unknown kind");
    }
};

// exp(-S(u)) at truncation N; the density of rho relative to mu.
inline double weight_rho(const SpectralField& u, double s, int k, int N) {
    return std::exp(-correction_S(u, s, k, N));
}

// d/dt [ S(u) + sum <n>^{2s} |u(n)|^2 ] along the truncated flow: the exact
// generator of the transported log-density.
inline double transport_rate(const SpectralField& u, double s, int k, int N) {
    SpectralField w = flow_rhs(u, k, N);
    return 0.5 * k * correction_rate_slots(u, w, s, k) + sobolev_weight_rate(u, s, k, N);
}

// int_0^t transport_rate(Phi(-t', u0)) dt' by composite Simpson with `panels`
// panels; the backward orbit is stepped with the flow integrator, nodes
// aligned to step boundaries.
inline double density_exponent(const SpectralField& u0, double t, const FlowConfig& cfg, double s,
                               int panels) {
    cfg.validate();
    if (panels < 1) throw std::invalid_argument("density_exponent: panels must be >= 1");
    if (t == 0.0) return 0.0;
    int nodes = 2 * panels;
    double dtau = t / static_cast<double>(nodes);
    FlowConfig sub = cfg;
    int nsub = std::max(1, static_cast<int>(std::ceil(std::abs(dtau) / cfg.dt - 1e-12)));
    sub.dt = std::abs(dtau) / nsub;

    std::vector<double> qv(static_cast<std::size_t>(nodes) + 1);
    SpectralField state = restrict_disk(u0, cfg.N);
    qv[0] = transport_rate(state, s, cfg.k, cfg.N);
    for (int i = 1; i <= nodes; ++i) {
        state = flow_to(state, -dtau, sub);
        qv[static_cast<std::size_t>(i)] = transport_rate(state, s, cfg.k, cfg.N);
    }
    double acc = qv[0] + qv[static_cast<std::size_t>(nodes)];
    for (int i = 1; i < nodes; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * qv[static_cast<std::size_t>(i)];
    return acc * t / (6.0 * panels);
}

// Density of Phi_t # mu relative to mu at u:
// exp(density_exponent) * exp(S(Phi_{-t} u)) * exp(-S(u)).
inline double mu_density(const SpectralField& u, double t, const FlowConfig& cfg, double s, int panels) {
    double expo = density_exponent(u, t, cfg, s, panels);
    SpectralField back = flow_to(u, -t, cfg);
    return std::exp(expo + correction_S(back, s, cfg.k, cfg.N) - correction_S(u, s, cfg.k, cfg.N));
}

inline int default_panels(double t) { return std::max(1, static_cast<int>(std::ceil(32.0 * std::abs(t)))); }

namespace detail {
inline McReport::Verdict four_sigma_verdict(double diff, double se, double scale) {
    if (se > 0.25 * std::max(scale, 1e-300)) return McReport::Verdict::inconclusive;
    return diff <= 4.0 * se ? McReport::Verdict::pass : McReport::Verdict::fail;
}
} // namespace detail

// Change-of-variables test: A = E_mu[w 1_B(u) F(Phi_t u)] against
// B = E_mu[w f_t 1_B(Phi_{-t} u) F(u)], w = exp(-S), f_t = exp(density_exponent).
// The two sides are equal in expectation for every bounded F: substituting
// u = Phi_{-t} y in A transports the ball indicator onto the backward endpoint.
//
// Estimator notes, all exactness-preserving:
//   - the paired difference uses F centered by a pilot mean c (the correction
//     c (E[w 1_B] - E[w f_t 1_B(Phi_{-t})]) vanishes exactly, the F == 1 case
//     of the same identity), which shrinks the coefficient multiplying the
//     heavy-tailed transport weight;
//   - w f_t = exp(-S(u) + exponent) is formed from the combined exponent, so
//     the large S swings cancel analytically instead of overflowing;
//   - the ball indicator keeps both integrands bounded by exp(-inf_B S).
inline std::vector<McReport> qi_test_battery(const std::vector<ObservableSpec>& obs_list, double t,
                                             const GaussianSpec& gspec, const FlowConfig& cfg,
                                             long long n_samples, int panels = 0, int workers = 1,
                                             double ball_R = 2.0, double ball_sigma = 0.0) {
    gspec.validate();
    cfg.validate();
    for (const auto& obs : obs_list)
        if (!obs.bounded()) throw std::invalid_argument("qi_test: equality mode requires a bounded observable");
    if (gspec.cutoff != cfg.N)
        throw std::invalid_argument("qi_test: sampler cutoff and flow cutoff must agree");
    if (panels <= 0) panels = std::max(8, default_panels(t));
    const double s = gspec.s;
    if (ball_sigma == 0.0) ball_sigma = s - 1.1;
    const std::size_t m = obs_list.size();

    // pilot centers from dedicated streams; the centering correction vanishes
    // exactly (F == 1 case of the identity)
    const long long n_pilot = 256;
    const std::uint64_t pilot_base = 1ull << 32;
    std::vector<double> c(m, 0.0);
    for (long long i = 0; i < n_pilot; ++i) {
        SpectralField u = sample(gspec, pilot_base + static_cast<std::uint64_t>(i));
        for (std::size_t j = 0; j < m; ++j) c[j] += obs_list[j].evaluate(u);
    }
    for (auto& v : c) v /= static_cast<double>(n_pilot);

    struct Row {
        std::vector<double> a, b, a_raw, b_raw;
    };
    std::vector<Row> rows(static_cast<std::size_t>(n_samples));
    parallel_indexed(static_cast<std::size_t>(n_samples), workers, [&](std::size_t i) {
        SpectralField u = sample(gspec, static_cast<std::uint64_t>(i));
        double S0 = correction_S(u, s, cfg.k, cfg.N);
        bool inA = fourier_lebesgue_norm(u, ball_sigma) <= ball_R;
        SpectralField back = flow_to(u, -t, cfg);
        bool inB = fourier_lebesgue_norm(back, ball_sigma) <= ball_R;
        Row r{std::vector<double>(m, 0.0), std::vector<double>(m, 0.0), std::vector<double>(m, 0.0),
              std::vector<double>(m, 0.0)};
        double wA = inA ? std::exp(-S0) : 0.0;
        // combined exponent: -S(u) + exponent = -S(Phi_{-t}u) + G(u) - G(Phi_{-t}u),
        // finite on the transported ball
        double wB = inB ? std::exp(-S0 + density_exponent(u, t, cfg, s, panels)) : 0.0;
        SpectralField fwd = inA ? flow_to(u, t, cfg) : u;
        for (std::size_t j = 0; j < m; ++j) {
            if (inA) {
                double Ff = obs_list[j].evaluate(fwd);
                r.a[j] = wA * (Ff - c[j]);
                r.a_raw[j] = wA * Ff;
            }
            if (inB) {
                double Fu = obs_list[j].evaluate(u);
                r.b[j] = wB * (Fu - c[j]);
                r.b_raw[j] = wB * Fu;
            }
        }
        rows[i] = std::move(r);
    });

    std::vector<McReport> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        stats::Running accA, accB, accD, accScale;
        for (const Row& r : rows) {
            accA.add(r.a_raw[j]);
            accB.add(r.b_raw[j]);
            accD.add(r.a[j] - r.b[j]);
            accScale.add(std::abs(r.a_raw[j]));
        }
        McReport rep;
        rep.name = "qi-change-of-variables";
        rep.n_samples = n_samples;
        rep.estimate = std::abs(accD.mean);
        rep.stderr_ = accD.stderr_mean();
        rep.bound = 4.0 * rep.stderr_;
        // scale of the compared quantities; mean |A-side mass| keeps mean-zero
        // observables conclusively judged
        double scale = std::max(accScale.mean, std::abs(accB.mean));
        rep.verdict = detail::four_sigma_verdict(rep.estimate, rep.stderr_, scale);
        rep.details["mean_A"] = accA.mean;
        rep.details["mean_B"] = accB.mean;
        rep.details["stderr_A"] = accA.stderr_mean();
        rep.details["stderr_B"] = accB.stderr_mean();
        rep.details["pilot_center"] = c[j];
        rep.details["ball_R"] = ball_R;
        rep.details["ball_sigma"] = ball_sigma;
        out[j] = std::move(rep);
    }
    return out;
}

inline McReport qi_test(const ObservableSpec& obs, double t, const GaussianSpec& gspec, const FlowConfig& cfg,
                        long long n_samples, int panels = 0, int workers = 1, double ball_R = 2.0,
                        double ball_sigma = 0.0) {
    return qi_test_battery({obs}, t, gspec, cfg, n_samples, panels, workers, ball_R, ball_sigma).front();
}

enum class MomentKind { S, Q1 };

// Ball-restricted exponential moment. Kind S: (1/n) sum exp(p|S|) 1_ball under
// mu. Kind Q1: self-normalized under rho = exp(-S) mu. Reports the half-sample
// estimate for the doubling-stability check.
inline McReport exp_moment(MomentKind kind, double p, double R, const GaussianSpec& gspec,
                           const FlowConfig& cfg, long long n_samples, double ball_sigma,
                           int workers = 1) {
    gspec.validate();
    cfg.validate();
    if (!(p > 0) || !(R > 0)) throw std::invalid_argument("exp_moment: p and R must be > 0");
    const double s = gspec.s;

    struct Row {
        double w = 1, x = 0, in = 0;
    };
    std::vector<Row> rows(static_cast<std::size_t>(n_samples));
    parallel_indexed(static_cast<std::size_t>(n_samples), workers, [&](std::size_t i) {
        SpectralField u = sample(gspec, static_cast<std::uint64_t>(i));
        Row r;
        r.in = fourier_lebesgue_norm(u, ball_sigma) <= R ? 1.0 : 0.0;
        if (kind == MomentKind::S) {
            r.w = 1.0;
            r.x = r.in * std::exp(p * std::abs(correction_S(u, s, cfg.k, cfg.N)));
        } else {
            r.w = weight_rho(u, s, cfg.k, cfg.N);
            r.x = r.in * std::exp(p * std::abs(pairing_q1(u, s, cfg.k, cfg.N)));
        }
        rows[i] = r;
    });

    auto estimate_on = [&](std::size_t n) {
        double sw = 0, sx = 0, ball = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sw += rows[i].w;
            sx += rows[i].w * rows[i].x;
            ball += rows[i].in;
        }
        double est = kind == MomentKind::S ? sx / static_cast<double>(n) : (sw > 0 ? sx / sw : 0.0);
        return std::pair<double, double>(est, ball / static_cast<double>(n));
    };
    auto [est, ball_frac] = estimate_on(rows.size());
    auto [half, ball_half] = estimate_on(rows.size() / 2);
    (void)ball_half;

    stats::Running acc;
    for (const Row& r : rows) acc.add(r.w * r.x);
    McReport rep;
    rep.name = kind == MomentKind::S ? "exp-moment-S" : "exp-moment-Q1";
    rep.n_samples = n_samples;
    rep.estimate = est;
    rep.stderr_ = acc.stderr_mean();
    double rel = std::abs(est - half) / std::max(std::abs(est), 1e-300);
    rep.details["half_sample_estimate"] = half;
    rep.details["doubling_rel_change"] = rel;
    rep.details["ball_fraction"] = ball_frac;
    rep.details["ball_conditional"] = ball_frac > 0 ? est / ball_frac : 0.0;
    bool finite = std::isfinite(est);
    rep.verdict = finite && rel <= 0.05 ? McReport::Verdict::pass
                  : finite              ? McReport::Verdict::inconclusive
                                        : McReport::Verdict::fail;
    return rep;
}

} // namespace qilab
