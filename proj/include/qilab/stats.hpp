#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace qilab::stats {

// Welford accumulator; deterministic when fed in a fixed order.
struct Running {
    long long n = 0;
    double mean = 0;
    double m2 = 0;

    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderr_mean() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct RunningComplex {
    Running re, im;
    void add(std::complex<double> z) {
        re.add(z.real());
        im.add(z.imag());
    }
    std::complex<double> mean() const { return {re.mean, im.mean}; }
    // stderr of the complex mean, combined components
    double stderr_mean() const {
        double a = re.stderr_mean(), b = im.stderr_mean();
        return std::sqrt(a * a + b * b);
    }
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Two-sided Kolmogorov-Smirnov statistic against a cdf.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf&& cdf) {
    std::sort(xs.begin(), xs.end());
    double n = static_cast<double>(xs.size());
    double d = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

// Asymptotic two-sided KS critical value at level alpha: K_alpha / sqrt(n).
inline double ks_critical(double alpha, std::size_t n) {
    double k = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return k / std::sqrt(static_cast<double>(n));
}

// Least-squares slope of log2(y) against log2(x).
inline double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double lx = std::log2(xs[i]), ly = std::log2(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Nearest-rank percentile, p in [0,100].
inline double percentile(std::vector<double> xs, double p) {
    if (xs.empty()) throw std::invalid_argument("percentile: empty sample");
    std::sort(xs.begin(), xs.end());
    double rank = p / 100.0 * static_cast<double>(xs.size());
    std::size_t i = rank <= 1.0 ? 0 : std::min(xs.size() - 1, static_cast<std::size_t>(std::ceil(rank)) - 1);
    return xs[i];
}

} // namespace qilab::stats
