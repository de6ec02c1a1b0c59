#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdsim/config.hpp"
#include "qdsim/rng.hpp"

namespace qdsim {
namespace source {

// Collected photons per excitation pulse in the first lens.
inline double brightness(double beta, double eta_top, double p_state, double p_pump) {
    for (double v : {beta, eta_top, p_state, p_pump})
        if (v < 0 || v > 1) throw std::domain_error("brightness factors must lie in [0,1]");
    return p_pump * p_state * beta * eta_top;
}

// Multiple-capture rate model of non-resonant pumping: a pulse deposits
// Poisson-distributed carriers in the barrier which either decay (r_qw) or
// get captured by the QD (r_cap per carrier); the exciton and biexciton
// recombine at r_x and r_xx. Quasi-resonant excitation injects the exciton
// directly and leaves the barrier empty.
struct CaptureModel {
    double n_qw_mean = 0.0;        // mean initial barrier carriers per pulse
    double r_qw = 0.0;             // barrier decay, 1/ns
    double r_cap = 0.0;            // capture per carrier, 1/ns
    double r_x = 0.0;              // exciton radiative rate, 1/ns
    double r_xx = 0.0;             // biexciton radiative rate, 1/ns
    double period_ns = 12.2;       // pulse repetition period
    double inject_probability = 0; // direct exciton injection per pulse
    std::uint64_t seed = 1;

    void validate() const {
        if (n_qw_mean < 0 || r_qw < 0 || r_cap < 0 || r_x < 0 || r_xx < 0)
            throw std::invalid_argument("capture model rates must be >= 0");
        if (period_ns <= 0) throw std::invalid_argument("pulse period must be positive");
        if (inject_probability < 0 || inject_probability > 1)
            throw std::invalid_argument("inject probability must lie in [0,1]");
    }

    static CaptureModel from_config(const Config& cfg, const std::string& section = "capture") {
        CaptureModel m;
        m.n_qw_mean = cfg.get_number(section, "n_qw_mean", 0.0);
        m.r_qw = cfg.get_number(section, "r_qw_per_ns");
        m.r_cap = cfg.get_number(section, "r_cap_per_ns");
        m.r_x = cfg.get_number(section, "r_x_per_ns");
        m.r_xx = cfg.get_number(section, "r_xx_per_ns");
        m.period_ns = cfg.get_time_ns(section, "period", m.period_ns);
        m.inject_probability = cfg.get_number(section, "inject_probability", 0.0);
        m.validate();
        return m;
    }
};

// Photon timestamps of the spectrally filtered exciton line, per pulse.
struct EmissionRecord {
    std::vector<std::vector<double>> x_times;  // ns within each pulse window
    std::vector<int> xx_counts;                // biexciton photons (not analyzed)
};

struct G2Result {
    double g2_zero = 0.0;
    double stat_error = 0.0;            // Poisson error of the zero-delay area
    double mean_photons = 0.0;          // X photons per pulse
    double zero_area = 0.0;             // same-pulse ordered pair count
    double side_area = 0.0;             // mean cross-pulse pair count
    std::vector<long> separations;      // pulse separations of the histogram
    std::vector<double> coincidences;   // pair counts per separation
    long pulses = 0;
};

inline EmissionRecord simulate_emission(const CaptureModel& model, long n_pulses) {
    model.validate();
    if (n_pulses < 1) throw std::invalid_argument("need at least one pulse");
    auto rng = make_stream(model.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::poisson_distribution<int> initial(model.n_qw_mean > 0 ? model.n_qw_mean : 1.0);

    EmissionRecord rec;
    rec.x_times.resize(n_pulses);
    rec.xx_counts.assign(n_pulses, 0);
    for (long pulse = 0; pulse < n_pulses; ++pulse) {
        int barrier = model.n_qw_mean > 0 ? initial(rng) : 0;
        int occupancy = 0;
        if (model.inject_probability > 0 && uni(rng) < model.inject_probability) occupancy = 1;
        double t = 0.0;
        while (true) {
            const double rate_decay = barrier * model.r_qw;
            const double rate_capture = (occupancy < 2) ? barrier * model.r_cap : 0.0;
            const double rate_x = (occupancy == 1) ? model.r_x : 0.0;
            const double rate_xx = (occupancy == 2) ? model.r_xx : 0.0;
            const double total = rate_decay + rate_capture + rate_x + rate_xx;
            if (total <= 0.0) break;
            t += -std::log(uni(rng)) / total;
            if (t >= model.period_ns) break;
            const double pick = uni(rng) * total;
            if (pick < rate_decay) {
                --barrier;
            } else if (pick < rate_decay + rate_capture) {
                --barrier;
                ++occupancy;
            } else if (pick < rate_decay + rate_capture + rate_x) {
                occupancy = 0;
                rec.x_times[pulse].push_back(t);
            } else {
                occupancy = 1;
                ++rec.xx_counts[pulse];
            }
        }
    }
    return rec;
}

// Pulsed autocorrelation of the X line. Coincidence areas by pulse
// separation; g2(0) is the zero-delay area over the mean side-peak area
// (side peaks from >= 5 neighbouring periods).
inline G2Result g2_from_record(const EmissionRecord& rec, int side_peaks = 5) {
    const long n = static_cast<long>(rec.x_times.size());
    if (side_peaks < 1) throw std::invalid_argument("need at least one side peak");
    std::vector<long> m(n);
    long total = 0;
    for (long i = 0; i < n; ++i) {
        m[i] = static_cast<long>(rec.x_times[i].size());
        total += m[i];
    }
    if (total == 0) throw std::domain_error("undefined g2: no photons emitted");

    G2Result res;
    res.pulses = n;
    res.mean_photons = double(total) / double(n);

    double zero = 0.0;
    for (long i = 0; i < n; ++i) zero += double(m[i]) * double(m[i] - 1);
    std::vector<double> side(side_peaks, 0.0);
    for (int k = 1; k <= side_peaks; ++k)
        for (long i = 0; i + k < n; ++i) side[k - 1] += double(m[i]) * double(m[i + k]);

    double side_mean = 0.0;
    for (int k = 1; k <= side_peaks; ++k) side_mean += side[k - 1] / double(n - k);
    side_mean /= side_peaks;
    if (side_mean <= 0.0) throw std::domain_error("undefined g2: empty side peaks");

    res.zero_area = zero / double(n);
    res.side_area = side_mean;
    res.g2_zero = res.zero_area / side_mean;
    res.stat_error = std::sqrt(std::max(zero, 1.0)) / double(n) / side_mean;

    for (int k = -side_peaks; k <= side_peaks; ++k) {
        res.separations.push_back(k);
        if (k == 0)
            res.coincidences.push_back(zero);
        else
            res.coincidences.push_back(side[std::abs(k) - 1]);
    }
    return res;
}

inline G2Result simulate_g2(const CaptureModel& model, long n_pulses, int side_peaks = 5) {
    return g2_from_record(simulate_emission(model, n_pulses), side_peaks);
}

// Dephasing environment of the emitted photons: constant pure dephasing,
// an Ornstein-Uhlenbeck spectral-diffusion process sampled once per photon,
// and exponential emission-time jitter under non-resonant pumping.
struct DephasingModel {
    double gamma_star = 0.0;   // 1/ns
    double kappa_sd = 0.0;     // OU mean reversion, 1/ns
    double sigma_sd = 0.0;     // OU stationary std, rad/ns
    double jitter_rate = 0.0;  // emission-time jitter Exp(rate); 0 disables
    std::uint64_t seed = 1;

    void validate() const {
        if (gamma_star < 0 || kappa_sd < 0 || sigma_sd < 0 || jitter_rate < 0)
            throw std::invalid_argument("dephasing parameters must be >= 0");
    }

    static DephasingModel from_config(const Config& cfg, const std::string& section = "dephasing") {
        DephasingModel d;
        d.gamma_star = cfg.get_number(section, "gamma_star_per_ns", 0.0);
        d.kappa_sd = cfg.get_number(section, "kappa_sd_per_ns", 0.0);
        d.sigma_sd = cfg.get_number(section, "sigma_sd_rad_per_ns", 0.0);
        d.jitter_rate = cfg.get_number(section, "jitter_rate_per_ns", 0.0);
        return d;
    }
};

struct HomResult {
    double overlap = 0.0;     // mean wavepacket overlap M
    double stat_error = 0.0;
    double acceptance = 1.0;  // probability both photons land inside the bin
    long pairs = 0;
};

// Mean wavepacket overlap of two successively emitted photons. Emission
// times are jitter + Exp(1/T1); the white-noise dephasing between two
// detection epochs is integrated out exactly, the OU detuning is sampled at
// each photon's emission epoch (the two epochs are `delay` apart). Detection
// is restricted to times inside [0, time_bin].
inline HomResult hom_indistinguishability(const DephasingModel& deph, double t1_ns, double delay_ns,
                                          double time_bin_ns, long n_pairs) {
    deph.validate();
    if (t1_ns <= 0) throw std::invalid_argument("T1 must be positive");
    if (n_pairs < 1) throw std::invalid_argument("need at least one photon pair");
    if (time_bin_ns <= 0) throw std::invalid_argument("time bin must be positive (use infinity for none)");

    const double a = 1.0 / t1_ns;
    const bool binned = std::isfinite(time_bin_ns);
    auto rng = make_stream(deph.seed);
    std::exponential_distribution<double> envelope(a);
    std::exponential_distribution<double> jitter(deph.jitter_rate > 0 ? deph.jitter_rate : 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double rho = deph.kappa_sd > 0 ? std::exp(-deph.kappa_sd * delay_ns) : (delay_ns == 0.0 ? 1.0 : 0.0);

    double sum_x = 0.0, sum_x2 = 0.0, sum_y = 0.0, sum_y2 = 0.0, sum_xy = 0.0;
    for (long i = 0; i < n_pairs; ++i) {
        const double s1 = deph.jitter_rate > 0 ? jitter(rng) : 0.0;
        const double s2 = deph.jitter_rate > 0 ? jitter(rng) : 0.0;
        double dw1 = 0.0, dw2 = 0.0;
        if (deph.sigma_sd > 0) {
            dw1 = deph.sigma_sd * normal(rng);
            dw2 = rho * dw1 + deph.sigma_sd * std::sqrt(1.0 - rho * rho) * normal(rng);
        }
        const double smax = std::max(s1, s2);
        const double t = smax + envelope(rng);
        const double u = smax + envelope(rng);

        double x = 0.0;
        if (!binned || (t <= time_bin_ns && u <= time_bin_ns)) {
            double phase = (dw2 - dw1) * (t - u);
            if (deph.gamma_star > 0) phase += normal(rng) * std::sqrt(4.0 * deph.gamma_star * std::abs(t - u));
            x = std::exp(-a * std::abs(s1 - s2)) * std::cos(phase);
        }
        double y = 1.0;
        if (binned) {
            const double n1 = s1 < time_bin_ns ? 1.0 - std::exp(-a * (time_bin_ns - s1)) : 0.0;
            const double n2 = s2 < time_bin_ns ? 1.0 - std::exp(-a * (time_bin_ns - s2)) : 0.0;
            y = n1 * n2;
        }
        sum_x += x;
        sum_x2 += x * x;
        sum_y += y;
        sum_y2 += y * y;
        sum_xy += x * y;
    }
    const double n = double(n_pairs);
    const double ex = sum_x / n, ey = sum_y / n;
    if (ey <= 0.0) throw std::domain_error("undefined overlap: empty time bin");

    HomResult res;
    res.pairs = n_pairs;
    res.overlap = ex / ey;
    res.acceptance = ey;
    // delta-method error of the ratio estimator
    const double vx = sum_x2 / n - ex * ex;
    const double vy = sum_y2 / n - ey * ey;
    const double cxy = sum_xy / n - ex * ey;
    const double var =
        (vx + res.overlap * res.overlap * vy - 2.0 * res.overlap * cxy) / (ey * ey) / n;
    res.stat_error = std::sqrt(std::max(var, 0.0));
    return res;
}

// Brightness-indistinguishability tradeoff of one pumping scheme. Pump power
// P (in saturation units) creates a pair with probability 1-exp(-P); the
// charge-noise amplitude follows sigma_sd = sigma0 * P^exponent.
struct PumpScheme {
    std::string name;
    double b_max = 0.79;          // brightness at full saturation
    double sigma0 = 0.0;          // rad/ns at P = 1
    double exponent = 0.5;
    double jitter_rate = 0.0;     // 1/ns; 0 for quasi-resonant injection
};

struct TradeoffPoint {
    double pump_power = 0.0;
    double brightness = 0.0;
    double overlap = 0.0;
    double stat_error = 0.0;
};

inline std::vector<TradeoffPoint> brightness_indistinguishability_tradeoff(
    const PumpScheme& scheme, const DephasingModel& base, double t1_ns, double delay_ns,
    const std::vector<double>& powers, long n_pairs) {
    std::vector<TradeoffPoint> out;
    out.reserve(powers.size());
    for (std::size_t i = 0; i < powers.size(); ++i) {
        const double p = powers[i];
        if (p < 0) throw std::invalid_argument("pump power must be >= 0");
        TradeoffPoint pt;
        pt.pump_power = p;
        pt.brightness = scheme.b_max * (1.0 - std::exp(-p));
        if (p == 0.0) {
            pt.overlap = 1.0 / (1.0 + 2.0 * base.gamma_star * t1_ns);  // intrinsic T2/(2T1)
            pt.stat_error = 0.0;
        } else {
            DephasingModel deph = base;
            deph.sigma_sd = scheme.sigma0 * std::pow(p, scheme.exponent);
            deph.jitter_rate = scheme.jitter_rate;
            deph.seed = mix64(base.seed ^ mix64(i + 1));
            auto hom = hom_indistinguishability(deph, t1_ns, delay_ns,
                                                std::numeric_limits<double>::infinity(), n_pairs);
            pt.overlap = hom.overlap;
            pt.stat_error = hom.stat_error;
        }
        out.push_back(pt);
    }
    return out;
}

}  // namespace source
}  // namespace qdsim
