#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qdsim {
namespace stats {

inline double log_poisson_pmf(long k, double lambda) {
    if (lambda <= 0) throw std::invalid_argument("poisson mean must be positive");
    return double(k) * std::log(lambda) - lambda - std::lgamma(double(k) + 1.0);
}

// P(X <= k) for X ~ Poisson(lambda), by stable summation from the mode side.
inline double poisson_cdf(long k, double lambda) {
    if (k < 0) return 0.0;
    double sum = 0.0;
    double log_term = -lambda;  // log pmf at 0
    for (long j = 0; j <= k; ++j) {
        if (j > 0) log_term += std::log(lambda) - std::log(double(j));
        sum += std::exp(log_term);
    }
    return std::min(sum, 1.0);
}

// Kolmogorov distribution tail Q(t) = 2 sum_k (-1)^{k-1} exp(-2 k^2 t^2).
inline double kolmogorov_q(double t) {
    if (t <= 0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * double(k) * double(k) * t * t);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-12) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Kolmogorov-Smirnov test against Exponential(rate); returns the p-value
// with the Stephens small-sample correction.
inline double ks_test_exponential(std::vector<double> samples, double rate) {
    if (samples.empty()) throw std::invalid_argument("ks test needs samples");
    if (rate <= 0) throw std::invalid_argument("rate must be positive");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = 1.0 - std::exp(-rate * samples[i]);
        d = std::max(d, std::abs(f - double(i) / n));
        d = std::max(d, std::abs(double(i + 1) / n - f));
    }
    const double sqrt_n = std::sqrt(n);
    return kolmogorov_q((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
}

struct Accumulator {
    double sum = 0.0, sum2 = 0.0;
    long n = 0;
    void add(double x) {
        sum += x;
        sum2 += x * x;
        ++n;
    }
    double mean() const { return n ? sum / double(n) : 0.0; }
    double variance() const {
        if (n < 2) return 0.0;
        return std::max(0.0, (sum2 - sum * sum / double(n)) / double(n - 1));
    }
    double std_error() const { return n ? std::sqrt(variance() / double(n)) : 0.0; }
};

}  // namespace stats
}  // namespace qdsim
