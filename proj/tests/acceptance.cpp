// Acceptance suite: every release criterion, one pass/fail line each.
// Deterministic: all Monte Carlo draws come from the fixed seeds below.

#include <cstdio>
#include <string>
#include <vector>

#include "qilab/counting.hpp"
#include "qilab/energy.hpp"
#include "qilab/flow.hpp"
#include "qilab/gauss.hpp"
#include "qilab/stats.hpp"
#include "qilab/transport.hpp"

using namespace qilab;

namespace {

constexpr std::uint64_t kSeed = 20240501;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int idx, const char* name, const Outcome& o) {
    std::printf("%s criterion %d: %s (%s)\n", o.pass ? "PASS" : "FAIL", idx, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// --- 1: energy identity -------------------------------------------------------
Outcome energy_identity() {
    const std::vector<double> dts = {1e-3, 5e-4, 2.5e-4, 1.25e-4};
    const int fields = 50;
    Outcome o;
    double worst_order = 1e9, worst_rel = 0;
    for (int N : {4, 8})
        for (int k : {1, 2})
            for (double s : {2.25, 2.5, 3.0}) {
                GaussianSpec gs{s, N, kSeed};
                FlowConfig cfg;
                cfg.k = k;
                cfg.N = N;
                cfg.dt = 1e-3;
                std::vector<double> mean_res(dts.size(), 0.0);
                double res_at_1em4 = 0, scale = 0;
                for (int f = 0; f < fields; ++f) {
                    SpectralField u = sample(gs, static_cast<std::uint64_t>(f));
                    double an = energy_terms(u, s, k, N).term_sum();
                    auto fd_res = [&](double h) {
                        FlowConfig sub = cfg;
                        sub.dt = std::min(cfg.dt, h);
                        double fd = (modified_energy(flow_to(u, h, sub), s, k) -
                                     modified_energy(flow_to(u, -h, sub), s, k)) /
                                    (2.0 * h);
                        return std::abs(fd - an);
                    };
                    for (std::size_t d = 0; d < dts.size(); ++d) mean_res[d] += fd_res(dts[d]);
                    res_at_1em4 += fd_res(1e-4);
                    scale += std::abs(an) + 1.0;
                }
                for (auto& r : mean_res) r /= fields;
                res_at_1em4 /= fields;
                scale /= fields;
                double order = -stats::loglog_slope(dts, mean_res);
                double rel = res_at_1em4 / scale;
                worst_order = std::min(worst_order, order);
                worst_rel = std::max(worst_rel, rel);
                if (!(order >= 1.8) || !(rel < 1e-6)) o.pass = false;
            }
    o.detail = "min observed order " + fmt(worst_order) + ", max residual/(|sum|+1) at dt=1e-4 " + fmt(worst_rel);
    return o;
}

// --- 2: Liouville -------------------------------------------------------------
Outcome liouville() {
    Outcome o;
    double worst = 0, worst_ratio = 1e9;
    for (int N : {1, 2, 4})
        for (int k : {1, 2}) {
            GaussianSpec gs{2.5, N, kSeed + 1};
            FlowConfig cfg;
            cfg.k = k;
            cfg.N = N;
            SpectralField u = sample(gs, static_cast<std::uint64_t>(10 * N + k));
            double scale = divergence_field_scale(u, cfg);
            double p = std::abs(divergence_probe(u, cfg, 1e-4)) / scale;
            worst = std::max(worst, p / 1e-6);
            if (!(p <= 1e-6)) o.pass = false;
            double p1 = std::abs(divergence_probe(u, cfg, 4e-2));
            double p2 = std::abs(divergence_probe(u, cfg, 2e-2));
            worst_ratio = std::min(worst_ratio, p1 / std::max(p2, 1e-300));
            if (!(p1 / std::max(p2, 1e-300) >= 2.5)) o.pass = false; // O(h^2)
        }
    o.detail = "max probe/(1e-6 scale) " + fmt(worst) + ", min h-halving ratio " + fmt(worst_ratio);
    return o;
}

// --- 3: integrator validity ----------------------------------------------------
Outcome integrator() {
    Outcome o;
    FlowConfig cfg;
    cfg.dt = 1e-3;
    cfg.N = 4;
    double worst_orbit = 0;
    for (int k : {1, 2, 3})
        for (Idx n : {Idx{0, 0}, Idx{1, 0}, Idx{2, 0}}) {
            cfg.k = k;
            cplx c0(0.8, -0.35);
            SpectralField uT = flow_to(single_mode(n, c0), 1.0, cfg);
            double phase = (static_cast<double>(abs2(n)) + std::pow(std::abs(c0), 2 * k));
            cplx expect = c0 * std::polar(1.0, -phase);
            double err = std::abs(uT.at(n) - expect) +
                         sobolev_norm(uT - single_mode(n, uT.at(n)), 0.0);
            worst_orbit = std::max(worst_orbit, err);
            if (!(err <= 1e-10)) o.pass = false;
        }

    GaussianSpec gs{2.5, 8, kSeed + 2};
    SpectralField u0 = sample(gs, 0);
    FlowConfig c8;
    c8.k = 1;
    c8.N = 8;
    auto drift = [&](double dt) {
        FlowConfig c = c8;
        c.dt = dt;
        Conserved a = conserved(u0, c.k);
        Conserved b = conserved(flow_to(u0, 1.0, c), c.k);
        double dm = std::abs(b.mass - a.mass) / a.mass;
        double dh = std::abs(b.hamiltonian - a.hamiltonian) / a.hamiltonian;
        return std::max(dm, dh);
    };
    double d0 = drift(1e-3);
    if (!(d0 <= 1e-8)) o.pass = false;
    double order = std::log2(drift(8e-3) / drift(4e-3));
    if (!(order >= 3.0)) o.pass = false;
    o.detail = "max orbit error " + fmt(worst_orbit) + ", drift " + fmt(d0) + ", drift order " + fmt(order);
    return o;
}

// --- 4: Gaussian covariance -----------------------------------------------------
Outcome covariance() {
    Outcome o;
    const int n = 10000;
    GaussianSpec gs{2.5, 8, kSeed + 3};
    std::vector<SpectralField> us;
    us.reserve(n);
    for (int i = 0; i < n; ++i) us.push_back(sample(gs, static_cast<std::uint64_t>(i)));
    double zv = 0, zp = 0;
    for (int n2 = -8; n2 <= 8; ++n2)
        for (int n1 = -8; n1 <= 8; ++n1) {
            Idx m{n1, n2};
            if (!in_disk(m, 8)) continue;
            stats::Running var;
            stats::RunningComplex pseudo;
            for (const auto& u : us) {
                cplx z = u.at(m);
                var.add(std::norm(z));
                pseudo.add(z * z);
            }
            double target = std::pow(bracket(m), -2.0 * gs.s);
            zv = std::max(zv, std::abs(var.mean - target) / var.stderr_mean());
            zp = std::max(zp, std::abs(pseudo.mean()) / pseudo.stderr_mean());
        }
    if (zv > 4.0 || zp > 4.0) o.pass = false;
    o.detail = "max variance z " + fmt(zv) + ", max pseudo-variance z " + fmt(zp);
    return o;
}

// --- 5: pairing variance slope ---------------------------------------------------
Outcome pairing_slope() {
    Outcome o;
    const int n = 10000;
    GaussianSpec gs{2.5, 32, kSeed + 4};
    std::vector<int> shells = {4, 8, 16, 32};
    std::vector<stats::Running> re(shells.size()), im(shells.size());
    for (int i = 0; i < n; ++i) {
        SpectralField u = sample(gs, static_cast<std::uint64_t>(i));
        for (std::size_t j = 0; j < shells.size(); ++j) {
            cplx x = pairing_statistic(u, shells[j], 0, gs.s);
            re[j].add(x.real());
            im[j].add(x.imag());
        }
    }
    std::vector<double> Ns, vars;
    for (std::size_t j = 0; j < shells.size(); ++j) {
        Ns.push_back(shells[j]);
        vars.push_back(re[j].variance() + im[j].variance());
    }
    double slope = stats::loglog_slope(Ns, vars);
    o.pass = slope <= -0.7;
    o.detail = "fitted variance slope " + fmt(slope) + " (theory 4-2s = -1)";
    return o;
}

// --- 6: counting bound -----------------------------------------------------------
Outcome counting_bound() {
    Outcome o;
    std::vector<double> Ns, sups;
    for (int N : {4, 8, 16, 32}) {
        long long best = 0;
        for (const std::vector<int>& signs : {std::vector<int>{1, 1, 1}, std::vector<int>{1, 1, -1}})
            for (int m1 = -1; m1 <= 1; ++m1)
                for (int m2 = -1; m2 <= 1; ++m2) {
                    CountingQuery q;
                    q.m = {m1, m2};
                    q.shells = {N, N, N};
                    q.signs = signs;
                    best = std::max(best, enumerate_S_sup_over_kappa(q).count);
                }
        Ns.push_back(N);
        sups.push_back(static_cast<double>(best));
    }
    double slope = stats::loglog_slope(Ns, sups);
    o.pass = slope <= 2.3;
    o.detail = "fitted growth exponent " + fmt(slope) + " over sup-counts " + fmt(sups[0]) + ".." + fmt(sups[3]);
    return o;
}

// --- 7: quasi-invariance ----------------------------------------------------------
Outcome quasi_invariance() {
    Outcome o;
    std::vector<ObservableSpec> battery(5);
    battery[0] = {ObservableSpec::Kind::bounded_cylinder, "tanh_re", {1, 0}};
    battery[1] = {ObservableSpec::Kind::bounded_cylinder, "tanh_re", {0, 1}};
    battery[2] = {ObservableSpec::Kind::bounded_cylinder, "inv_one_plus_abs2", {1, 1}};
    battery[3] = {ObservableSpec::Kind::bounded_cylinder, "sin_mix", {1, 0}, {2, 0}};
    battery[4] = {ObservableSpec::Kind::bounded_cylinder, "exp_neg_abs2", {1, 1}};
    double worst = 0;
    struct Cfg {
        int k;
        double t;
    };
    for (Cfg cc : {Cfg{1, 0.1}, Cfg{2, 0.05}}) {
        GaussianSpec gs{2.5, 4, kSeed};
        FlowConfig cfg;
        cfg.k = cc.k;
        cfg.N = 4;
        cfg.dt = 1e-3;
        std::vector<McReport> rs = qi_test_battery(battery, cc.t, gs, cfg, 2000);
        for (const auto& r : rs) {
            double z = r.estimate / std::max(r.stderr_, 1e-300);
            worst = std::max(worst, z);
            if (r.verdict != McReport::Verdict::pass) o.pass = false;
        }
    }
    o.detail = "max |A-B|/stderr " + fmt(worst) + " over 5 observables x {k=1 t=0.1, k=2 t=0.05}";
    return o;
}

// --- 8: S-convergence and exp-moments ----------------------------------------------
Outcome s_convergence() {
    Outcome o;
    const double s = 2.5;
    const int k = 1;
    // ball-restricted Cauchy tail of S under cutoff doubling
    GaussianSpec gs{s, 32, kSeed + 5};
    const int n = 1500;
    std::vector<double> tails = {0, 0, 0};
    long long in_ball = 0;
    for (int i = 0; i < n; ++i) {
        SpectralField u = sample(gs, static_cast<std::uint64_t>(i));
        if (fourier_lebesgue_norm(u, s - 1.1) > 2.0) continue;
        ++in_ball;
        std::vector<int> Ns = {4, 8, 16, 32};
        std::vector<double> Sv;
        for (int N : Ns) Sv.push_back(correction_S(project_leq(u, N), s, k, N));
        for (int j = 0; j < 3; ++j) tails[static_cast<std::size_t>(j)] += std::abs(Sv[static_cast<std::size_t>(j) + 1] - Sv[static_cast<std::size_t>(j)]);
    }
    for (auto& t : tails) t /= static_cast<double>(in_ball);
    bool decreasing = tails[0] > tails[1] && tails[1] > tails[2];
    if (!decreasing) o.pass = false;

    // exp-moment stability under sample doubling
    GaussianSpec g8{s, 8, kSeed + 6};
    FlowConfig cfg;
    cfg.k = k;
    cfg.N = 8;
    McReport m = exp_moment(MomentKind::S, 2.0, 2.0, g8, cfg, 10000, s - 1.1);
    double rel = m.details.at("doubling_rel_change");
    if (!(std::isfinite(m.estimate) && rel <= 0.05)) o.pass = false;
    o.detail = "S tails " + fmt(tails[0]) + " > " + fmt(tails[1]) + " > " + fmt(tails[2]) +
               "; exp-moment doubling change " + fmt(rel);
    return o;
}

// --- 9: oracle equivalences ----------------------------------------------------------
Outcome oracles() {
    Outcome o;
    double worst = 0;
    GaussianSpec gs{2.5, 8, kSeed + 7};
    for (int rep = 0; rep < 5; ++rep) {
        SpectralField u = sample(gs, static_cast<std::uint64_t>(2 * rep));
        SpectralField v = sample(gs, static_cast<std::uint64_t>(2 * rep + 1));
        SpectralField d = multiply(u, v) - direct_convolve(u, v);
        double rel = sobolev_norm(d, 0.0) / sobolev_norm(direct_convolve(u, v), 0.0);
        worst = std::max(worst, rel);
    }

    // commutator against the term-wise direct-convolution oracle
    SpectralField u(3);
    u.set({1, 0}, cplx(0.5, -0.2));
    u.set({0, -2}, cplx(-0.1, 0.8));
    u.set({-3, 1}, cplx(0.3, 0.3));
    for (int k : {1, 2}) {
        SpectralField ub = conj_field(u);
        SpectralField f = u;
        for (int i = 1; i < k + 1; ++i) f = direct_convolve(f, u);
        for (int i = 0; i < k; ++i) f = direct_convolve(f, ub);
        SpectralField u2k = single_mode({0, 0}, 1.0);
        for (int i = 0; i < k; ++i) u2k = direct_convolve(direct_convolve(u2k, u), ub);
        SpectralField q = u;
        for (int i = 1; i < k + 1; ++i) q = direct_convolve(q, u);
        for (int i = 0; i < k - 1; ++i) q = direct_convolve(q, ub);
        double sigma = 0.5;
        SpectralField oracle = dsigma(f, sigma) +
                               cplx(-(k + 1.0)) * direct_convolve(dsigma(u, sigma), u2k) +
                               cplx(-static_cast<double>(k)) * direct_convolve(q, dsigma(ub, sigma));
        SpectralField got = commutator(u, sigma, k);
        worst = std::max(worst, sobolev_norm(got - oracle, 0.0) / (1.0 + sobolev_norm(oracle, 0.0)));
    }

    for (long long kappa : {-3ll, 0ll, 4ll})
        if (enumerate_E(kappa, {4, 2, 4, 2}) != enumerate_E_alt(kappa, {4, 2, 4, 2})) o.pass = false;

    if (worst > 1e-12) o.pass = false;
    o.detail = "max relative oracle deviation " + fmt(worst);
    return o;
}

} // namespace

int main() {
    std::printf("acceptance suite (seed %llu)\n", static_cast<unsigned long long>(kSeed));
    report(1, "energy identity (order-2 residual)", energy_identity());
    report(2, "Liouville divergence probe", liouville());
    report(3, "integrator validity", integrator());
    report(4, "Gaussian covariance", covariance());
    report(5, "pairing variance slope", pairing_slope());
    report(6, "counting growth exponent", counting_bound());
    report(7, "quasi-invariance change of variables", quasi_invariance());
    report(8, "S-convergence and exp-moments", s_convergence());
    report(9, "oracle equivalences", oracles());
    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
