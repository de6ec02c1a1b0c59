#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdsim/config.hpp"
#include "qdsim/rng.hpp"
#include "qdsim/stats.hpp"

namespace qdsim {
namespace sensing {

// Two-state telegraph dynamics of a single charge trap read out through the
// device reflectivity with shot-noise-limited photon counting. Times in us.
struct TelegraphModel {
    double k_cap = 0.0;     // empty -> loaded, 1/us
    double k_rel = 0.0;     // loaded -> empty, 1/us
    double r_loaded = 0.0;  // reflectivity with a loaded trap
    double r_empty = 0.0;   // reflectivity with an empty trap
    double flux = 0.0;      // incident photons/us
    double eta_det = 1.0;   // detection efficiency
    double dt = 1.0;        // integration bin, us
    std::uint64_t seed = 1;

    void validate() const {
        if (k_cap <= 0 || k_rel <= 0) throw std::invalid_argument("telegraph rates must be positive");
        if (r_loaded < 0 || r_loaded > 1 || r_empty < 0 || r_empty > 1)
            throw std::invalid_argument("reflectivity levels must lie in [0,1]");
        if (r_loaded == r_empty) throw std::invalid_argument("reflectivity levels must differ");
        if (flux <= 0 || eta_det <= 0 || eta_det > 1) throw std::invalid_argument("invalid detection");
        if (dt <= 0) throw std::invalid_argument("bin width must be positive");
    }

    double lambda_loaded() const { return flux * eta_det * r_loaded * dt; }
    double lambda_empty() const { return flux * eta_det * r_empty * dt; }
    double occupancy_loaded() const { return k_cap / (k_cap + k_rel); }

    static TelegraphModel from_config(const Config& cfg, const std::string& section = "telegraph") {
        TelegraphModel m;
        m.k_cap = cfg.get_number(section, "k_cap_per_us");
        m.k_rel = cfg.get_number(section, "k_rel_per_us");
        m.r_loaded = cfg.get_number(section, "r_loaded");
        m.r_empty = cfg.get_number(section, "r_empty");
        m.flux = cfg.get_number(section, "flux_per_us");
        m.eta_det = cfg.get_number(section, "eta_det", 1.0);
        m.dt = cfg.get_number(section, "dt_us", 1.0);
        m.validate();
        return m;
    }
};

struct TelegraphTrace {
    std::vector<double> time;        // bin start, us
    std::vector<int> truth;          // majority-time state per bin, 1 = loaded
    std::vector<long> counts;        // detected photons per bin
    std::vector<int> classified;     // filled by classify()
    std::vector<double> dwell_loaded;  // completed dwell intervals, us
    std::vector<double> dwell_empty;
};

// Exact continuous-time Markov chain; per-bin expected counts use the
// time-weighted reflectivity so intra-bin switches are handled exactly.
inline TelegraphTrace simulate_trace(const TelegraphModel& model, double duration_us) {
    model.validate();
    if (duration_us < 10.0 * model.dt) throw std::invalid_argument("duration too short");
    auto rng = make_stream(model.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    const long n_bins = static_cast<long>(duration_us / model.dt);
    TelegraphTrace trace;
    trace.time.reserve(n_bins);
    trace.truth.reserve(n_bins);
    trace.counts.reserve(n_bins);

    // start from the stationary distribution
    int state = uni(rng) < model.occupancy_loaded() ? 1 : 0;
    double t = 0.0;
    double t_next = t - std::log(uni(rng)) / (state ? model.k_rel : model.k_cap);
    double dwell_start = 0.0;

    for (long bin = 0; bin < n_bins; ++bin) {
        const double t0 = bin * model.dt;
        const double t1 = t0 + model.dt;
        double loaded_time = 0.0;
        double cursor = t0;
        while (t_next < t1) {
            if (state) loaded_time += t_next - cursor;
            cursor = t_next;
            (state ? trace.dwell_loaded : trace.dwell_empty).push_back(t_next - dwell_start);
            dwell_start = t_next;
            state ^= 1;
            t_next += -std::log(uni(rng)) / (state ? model.k_rel : model.k_cap);
        }
        if (state) loaded_time += t1 - cursor;
        const double f_loaded = loaded_time / model.dt;
        const double lambda = model.flux * model.eta_det * model.dt *
                              (f_loaded * model.r_loaded + (1.0 - f_loaded) * model.r_empty);
        std::poisson_distribution<long> pois(lambda);
        trace.time.push_back(t0);
        trace.truth.push_back(f_loaded > 0.5 ? 1 : 0);
        trace.counts.push_back(pois(rng));
    }
    return trace;
}

struct ClassificationResult {
    double threshold = 0.0;
    double error_rate = 0.0;          // misclassified bins / total bins
    double analytic_error = 0.0;      // Poisson-overlap prediction, pure bins
    long errors = 0;
    long bins = 0;
    bool threshold_warning = false;   // threshold outside the two mean levels
};

// Midpoint between the two Poisson means (a near-optimal integer threshold
// for the default contrast).
inline double default_threshold(const TelegraphModel& model) {
    return 0.5 * (model.lambda_loaded() + model.lambda_empty());
}

// Per-bin threshold classification against the ground truth. Counts above
// the threshold map to the brighter state; ties are broken by a seeded coin.
inline ClassificationResult classify(TelegraphTrace& trace, const TelegraphModel& model,
                                     double threshold) {
    const double lam_l = model.lambda_loaded();
    const double lam_e = model.lambda_empty();
    const int brighter = lam_l > lam_e ? 1 : 0;

    ClassificationResult res;
    res.threshold = threshold;
    res.bins = static_cast<long>(trace.counts.size());
    res.threshold_warning = threshold <= std::min(lam_l, lam_e) || threshold >= std::max(lam_l, lam_e);

    auto coin = make_stream(model.seed, 0x7ea5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    trace.classified.resize(trace.counts.size());
    for (std::size_t i = 0; i < trace.counts.size(); ++i) {
        int cls;
        if (double(trace.counts[i]) > threshold)
            cls = brighter;
        else if (double(trace.counts[i]) < threshold)
            cls = 1 - brighter;
        else
            cls = uni(coin) < 0.5 ? brighter : 1 - brighter;
        trace.classified[i] = cls;
        if (cls != trace.truth[i]) ++res.errors;
    }
    res.error_rate = double(res.errors) / double(res.bins);

    // Poisson-overlap prediction for non-switching bins, stationary weights.
    const double pi_l = model.occupancy_loaded();
    const long k = static_cast<long>(std::floor(threshold));
    const bool on_integer = std::floor(threshold) == threshold;
    auto p_below = [&](double lam) {
        // P(classified as the dimmer state | state with mean lam)
        double p = stats::poisson_cdf(on_integer ? k - 1 : k, lam);
        if (on_integer) p += 0.5 * std::exp(stats::log_poisson_pmf(k, lam));
        return p;
    };
    const double err_bright = p_below(brighter ? lam_l : lam_e);
    const double err_dim = 1.0 - p_below(brighter ? lam_e : lam_l);
    res.analytic_error = (brighter ? pi_l : 1 - pi_l) * err_bright +
                         (brighter ? 1 - pi_l : pi_l) * err_dim;
    return res;
}

struct HistogramResult {
    std::vector<long> bin_value;    // photon-count value
    std::vector<long> occurrences;
    double weight_low = 0.0;        // mixture weight of the lower-mean peak
    double weight_high = 0.0;
    double lambda_low = 0.0;
    double lambda_high = 0.0;
    int em_iterations = 0;
};

// Count-rate histogram plus a two-component Poisson mixture fit (EM).
inline HistogramResult histogram(const TelegraphTrace& trace) {
    if (trace.counts.size() < 1000) throw std::invalid_argument("trace too short for a histogram fit");
    HistogramResult res;
    std::map<long, long> hist;
    for (long c : trace.counts) ++hist[c];
    for (const auto& [value, count] : hist) {
        res.bin_value.push_back(value);
        res.occurrences.push_back(count);
    }

    // EM initialization from the lower/upper quartiles.
    std::vector<long> sorted(trace.counts);
    std::sort(sorted.begin(), sorted.end());
    double lam1 = std::max(1e-6, double(sorted[sorted.size() / 4]));
    double lam2 = std::max(lam1 + 1.0, double(sorted[3 * sorted.size() / 4]));
    double w1 = 0.5;
    double prev_ll = -1e300;
    const int max_iter = 500;
    int it = 0;
    for (; it < max_iter; ++it) {
        double n1 = 0, n2 = 0, s1 = 0, s2 = 0, ll = 0;
        for (const auto& [value, count] : hist) {
            const double lp1 = std::log(w1) + stats::log_poisson_pmf(value, lam1);
            const double lp2 = std::log(1.0 - w1) + stats::log_poisson_pmf(value, lam2);
            const double mx = std::max(lp1, lp2);
            const double denom = std::exp(lp1 - mx) + std::exp(lp2 - mx);
            const double r1 = std::exp(lp1 - mx) / denom;
            ll += count * (mx + std::log(denom));
            n1 += count * r1;
            n2 += count * (1.0 - r1);
            s1 += count * r1 * value;
            s2 += count * (1.0 - r1) * value;
        }
        w1 = n1 / double(trace.counts.size());
        lam1 = std::max(1e-9, s1 / std::max(n1, 1e-12));
        lam2 = std::max(1e-9, s2 / std::max(n2, 1e-12));
        if (std::abs(ll - prev_ll) < 1e-9 * std::abs(ll)) break;
        prev_ll = ll;
    }
    if (it == max_iter)
        throw std::runtime_error("histogram mixture fit did not converge after 500 EM iterations");
    res.em_iterations = it + 1;
    if (lam1 <= lam2) {
        res.weight_low = w1;
        res.weight_high = 1.0 - w1;
        res.lambda_low = lam1;
        res.lambda_high = lam2;
    } else {
        res.weight_low = 1.0 - w1;
        res.weight_high = w1;
        res.lambda_low = lam2;
        res.lambda_high = lam1;
    }
    return res;
}

}  // namespace sensing
}  // namespace qdsim
