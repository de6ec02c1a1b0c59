#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qdsim/evolve.hpp"
#include "qdsim/lindblad.hpp"
#include "qdsim/qed_core.hpp"

namespace qdsim {

// Coherent drive description. Pulses are Gaussian in field amplitude with
// the intensity-FWHM bandwidth locked to the cavity linewidth kappa/2pi.
struct DriveSpec {
    enum class Mode { cw, pulsed };
    Mode mode = Mode::cw;
    double flux = 0.0;      // |b_in|^2, photons/ns (cw)
    double photons = 0.0;   // N = integral |b_in|^2 dt (pulsed)
    double detuning = 0.0;  // laser detuning from the cavity, rad/ns

    void validate() const {
        if (flux < 0) throw std::invalid_argument("flux must be >= 0");
        if (photons < 0) throw std::invalid_argument("photons per pulse must be >= 0");
    }
};

struct GaussianPulse {
    double center = 0.0;   // ns
    double tau = 1.0;      // ns; intensity envelope exp(-(t-t0)^2/tau^2)
    double photons = 0.0;  // integral of |b|^2

    double amplitude(double t) const {
        const double x = (t - center) / tau;
        return std::sqrt(photons / (tau * std::sqrt(std::numbers::pi))) * std::exp(-0.5 * x * x);
    }

    // Intensity spectral FWHM equal to the cavity linewidth kappa/2pi.
    static GaussianPulse bandwidth_matched(double kappa, double photons, double center) {
        GaussianPulse p;
        p.tau = 2.0 * std::sqrt(std::numbers::ln2) / kappa;
        p.photons = photons;
        p.center = center;
        return p;
    }
};

// Weak-drive reflection amplitude of the mode-matched field,
//   r(D) = 1 - eta_top*kappa / [ i(wc-w) + kappa/2 + g^2/(i(wqd-w) + gamma) ].
// The analytic oracle for the master-equation path; g_eff = 0 describes a
// saturated or absent QD.
inline Complex linear_reflection_amplitude(const DeviceParams& p, double detuning, bool qd_active) {
    p.validate();
    const Complex i(0.0, 1.0);
    const double omega = p.omega_c + detuning;
    Complex denom = i * (p.omega_c - omega) + 0.5 * p.kappa();
    if (qd_active && p.g != 0.0)
        denom += p.g * p.g / (i * (p.omega_qd - omega) + p.gamma_total());
    return 1.0 - p.eta_top() * p.kappa() / denom;
}

// Light that misses the mode (fraction 1-eta_in) is reflected unchanged.
inline double measured_reflectivity(const DeviceParams& p, double detuning, bool qd_active) {
    const Complex r = linear_reflection_amplitude(p, detuning, qd_active);
    return (1.0 - p.eta_in) + p.eta_in * std::norm(r);
}

struct ReflectivityPoint {
    double detuning = 0.0;       // rad/ns
    double reflectivity = 0.0;   // total (coherent + incoherent) outgoing flux ratio
    double coherent_only = 0.0;  // drops the incoherent cavity emission term
    int n_max_used = 0;
};

struct Spectrum {
    std::vector<ReflectivityPoint> points;
    double flux = 0.0;
    std::string device_hash;
    double truncation_tol = 0.0;
};

inline std::string device_hash(const DeviceParams& p) {
    char buf[240];
    std::snprintf(buf, sizeof(buf), "%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g", p.g,
                  p.kappa_top, p.kappa_bottom, p.kappa_loss, p.gamma_sp, p.gamma_star, p.omega_c,
                  p.omega_qd, p.eta_in);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char* c = buf; *c; ++c) {
        h ^= static_cast<unsigned char>(*c);
        h *= 0x100000001b3ull;
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return out;
}

// Steady-state reflectivity at one detuning, Fock truncation converged.
// Output flux counts the interference of the directly reflected beam with
// the re-emitted cavity field plus the incoherent cavity emission.
inline ReflectivityPoint cw_reflectivity(const DeviceParams& p, double detuning, double flux,
                                         const HilbertConfig& cfg) {
    p.validate();
    if (flux <= 0) throw std::invalid_argument("cw reflectivity needs positive flux");
    ReflectivityPoint pt;
    pt.detuning = detuning;
    const double b = std::sqrt(flux);
    auto evaluate = [&](int n_max) {
        LindbladGenerator gen(p, p.omega_c + detuning, b, n_max);
        Matrix rho = steady_state(gen, cfg);
        detail::MasterEquationRhs rhs(gen, constant_drive(b));
        const Complex a = rhs.expect_a(rho);
        pt.coherent_only =
            ((1.0 - p.eta_in) * flux +
             std::norm(std::sqrt(p.eta_in) * b - std::sqrt(p.kappa_top) * a)) /
            flux;
        return rhs.output_flux(rho, b) / flux;
    };
    auto conv = converge_truncation(evaluate, cfg);
    pt.n_max_used = conv.n_max;
    pt.reflectivity = evaluate(conv.n_max);  // refresh coherent_only for the accepted truncation
    if (pt.reflectivity < -1e-6 || pt.reflectivity > 1.0 + 1e-6)
        throw SolverError("reflectivity " + std::to_string(pt.reflectivity) +
                          " outside [0,1] (passive device)");
    return pt;
}

inline Spectrum cw_spectrum(const DeviceParams& p, const DriveSpec& drive,
                            const std::vector<double>& detunings, const HilbertConfig& cfg) {
    drive.validate();
    if (drive.mode != DriveSpec::Mode::cw) throw std::invalid_argument("cw_spectrum needs a cw drive");
    Spectrum s;
    s.flux = drive.flux;
    s.device_hash = device_hash(p);
    s.truncation_tol = cfg.truncation_tol;
    s.points.reserve(detunings.size());
    for (double d : detunings) s.points.push_back(cw_reflectivity(p, d, drive.flux, cfg));
    return s;
}

struct PulseResponse {
    double photons = 0.0;      // N incident per pulse
    double reflectivity = 0.0; // reflected photons / incident photons
    int n_max_used = 0;
    double trace_drift = 0.0;
};

// Reflectivity of one bandwidth-matched Gaussian pulse, integrated over the
// pulse and the subsequent ringdown.
inline PulseResponse pulsed_response(const DeviceParams& p, const DriveSpec& drive,
                                     const HilbertConfig& cfg) {
    drive.validate();
    if (drive.mode != DriveSpec::Mode::pulsed)
        throw std::invalid_argument("pulsed_response needs a pulsed drive");
    if (drive.photons <= 0) throw std::invalid_argument("pulsed drive needs photons > 0");
    p.validate();

    const double kappa = p.kappa();
    GaussianPulse pulse = GaussianPulse::bandwidth_matched(kappa, drive.photons, 0.0);
    pulse.center = 5.0 * pulse.tau;
    const double rate_sum = 2.0 * p.g * p.g / kappa + p.gamma_sp;
    double ringdown = 2.0 / kappa;
    if (rate_sum > 0) ringdown = std::max(ringdown, 1.0 / rate_sum);
    const double t_end = pulse.center + 5.0 * pulse.tau + 10.0 * ringdown;

    std::vector<double> grid;
    const int n_grid = 33;
    for (int i = 0; i < n_grid; ++i) grid.push_back(t_end * i / (n_grid - 1));

    DriveFunction drive_fn = [pulse](double t) { return Complex(pulse.amplitude(t), 0.0); };

    PulseResponse out;
    out.photons = drive.photons;
    auto evaluate = [&](int n_max) {
        LindbladGenerator gen(p, p.omega_c + drive.detuning, 0.0, n_max);
        HilbertSpace hs(n_max);
        auto res = evolve(gen, drive_fn, hs.basis_state(0, 0), grid, cfg);
        out.trace_drift = res.max_trace_drift;
        return res.reflected_photons / res.incident_photons;
    };
    auto conv = converge_truncation(evaluate, cfg);
    out.n_max_used = conv.n_max;
    out.reflectivity = conv.value;
    return out;
}

inline std::vector<PulseResponse> pulsed_curve(const DeviceParams& p, double detuning,
                                               const std::vector<double>& photon_grid,
                                               const HilbertConfig& cfg) {
    std::vector<PulseResponse> out;
    out.reserve(photon_grid.size());
    for (double n : photon_grid) {
        DriveSpec d;
        d.mode = DriveSpec::Mode::pulsed;
        d.photons = n;
        d.detuning = detuning;
        out.push_back(pulsed_response(p, d, cfg));
    }
    return out;
}

class ThresholdError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Threshold of a saturation curve R(N): the N where R crosses the midpoint
// between its two asymptotes, interpolated linearly in log N. The curve must
// be monotone (either direction) and flat at both ends.
inline double threshold(const std::vector<double>& photons, const std::vector<double>& r) {
    if (photons.size() != r.size() || photons.size() < 4)
        throw std::invalid_argument("threshold needs >= 4 (N, R) samples");
    for (std::size_t i = 1; i < photons.size(); ++i)
        if (!(photons[i] > photons[i - 1]) || photons[i - 1] <= 0)
            throw std::invalid_argument("photon grid must be positive ascending");

    const double r_first = r.front(), r_last = r.back();
    const double swing = std::abs(r_first - r_last);
    if (swing < 1e-9) throw ThresholdError("curve has no contrast between asymptotes");
    const double sign = (r_last > r_first) ? 1.0 : -1.0;  // +1: rising curve

    const double noise = 0.02 * swing;
    for (std::size_t i = 1; i < r.size(); ++i)
        if (sign * (r[i] - r[i - 1]) < -noise)
            throw ThresholdError("curve is not monotone within noise");
    const double flat = 0.05 * swing;
    if (std::abs(r[1] - r[0]) > flat || std::abs(r[r.size() - 1] - r[r.size() - 2]) > flat)
        throw ThresholdError("curve does not reach flat asymptotes on the sampled grid");

    const double mid = 0.5 * (r_first + r_last);
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        const double a = sign * (r[i] - mid);
        const double b = sign * (r[i + 1] - mid);
        if (a <= 0.0 && b >= 0.0) {
            if (a == 0.0 && b == 0.0) return std::sqrt(photons[i] * photons[i + 1]);
            const double f = -a / (b - a);
            return std::exp(std::log(photons[i]) +
                            f * (std::log(photons[i + 1]) - std::log(photons[i])));
        }
    }
    throw ThresholdError("midpoint crossing not found");
}

inline double threshold(const std::vector<PulseResponse>& curve) {
    std::vector<double> n, r;
    n.reserve(curve.size());
    r.reserve(curve.size());
    for (const auto& pt : curve) {
        n.push_back(pt.photons);
        r.push_back(pt.reflectivity);
    }
    return threshold(n, r);
}

// Linear temperature tuning of the QD and cavity lines around t_ref.
struct TuningCurves {
    double domega_qd_dt = 0.0;  // rad/ns per K
    double domega_c_dt = 0.0;   // rad/ns per K
    double t_ref = 0.0;         // K

    static TuningCurves from_config(const Config& cfg, const std::string& section = "tuning") {
        TuningCurves t;
        t.domega_qd_dt = uev_to_rad_ns(cfg.get_energy_uev(section, "domega_qd_dT_ueV_per_K"));
        t.domega_c_dt = uev_to_rad_ns(cfg.get_energy_uev(section, "domega_c_dT_ueV_per_K"));
        t.t_ref = cfg.get_number(section, "t_ref_K");
        return t;
    }
};

struct TemperatureMap {
    std::vector<double> temperatures;  // K
    std::vector<double> detunings;     // rad/ns, relative to the cavity at t_ref
    std::vector<std::vector<double>> reflectivity;  // [i_T][i_delta]
};

// Linear-regime reflectivity map; the low-reflectivity ridges trace the two
// polariton branches and anticross where the lines would meet.
inline TemperatureMap temperature_map(const DeviceParams& p, const TuningCurves& tuning,
                                      const std::vector<double>& temperatures,
                                      const std::vector<double>& detunings) {
    p.validate();
    TemperatureMap map;
    map.temperatures = temperatures;
    map.detunings = detunings;
    map.reflectivity.reserve(temperatures.size());
    const double omega_ref = p.omega_c;
    for (double t : temperatures) {
        DeviceParams pt = p;
        pt.omega_c = p.omega_c + tuning.domega_c_dt * (t - tuning.t_ref);
        pt.omega_qd = p.omega_qd + tuning.domega_qd_dt * (t - tuning.t_ref);
        std::vector<double> row;
        row.reserve(detunings.size());
        for (double d : detunings) {
            const double omega_laser = omega_ref + d;
            row.push_back(measured_reflectivity(pt, omega_laser - pt.omega_c, true));
        }
        map.reflectivity.push_back(std::move(row));
    }
    return map;
}

// Spin-dependent polarization rotation. Spin-up couples the QD to the
// right-circular component only; spin-down mirrors this. Jones vectors are
// (E_H, E_V); the circular components are R = (H - iV)/sqrt2, L = (H + iV)/sqrt2.
struct KerrResult {
    Eigen::Vector2cd out_up;    // renormalized Jones vector, (H, V)
    Eigen::Vector2cd out_down;
    Complex overlap;            // <psi_up|psi_down> before renormalization
    double norm_up = 0.0;       // conditional output power (input power = 1)
    double norm_down = 0.0;
};

inline KerrResult kerr_rotation(const DeviceParams& params_up, const DeviceParams& params_down,
                                double detuning, const Eigen::Vector2cd& jones_in) {
    const double norm_in = jones_in.norm();
    if (norm_in < 1e-12) throw std::invalid_argument("zero input polarization vector");
    const Eigen::Vector2cd in = jones_in / norm_in;

    const Complex i(0.0, 1.0);
    const Complex alpha_r = (in(0) + i * in(1)) / std::sqrt(2.0);
    const Complex alpha_l = (in(0) - i * in(1)) / std::sqrt(2.0);

    const Complex r_up_r = linear_reflection_amplitude(params_up, detuning, true);
    const Complex r_up_l = linear_reflection_amplitude(params_up, detuning, false);
    const Complex r_dn_r = linear_reflection_amplitude(params_down, detuning, false);
    const Complex r_dn_l = linear_reflection_amplitude(params_down, detuning, true);

    const Complex up_r = alpha_r * r_up_r, up_l = alpha_l * r_up_l;
    const Complex dn_r = alpha_r * r_dn_r, dn_l = alpha_l * r_dn_l;

    KerrResult out;
    out.overlap = std::conj(up_r) * dn_r + std::conj(up_l) * dn_l;
    out.norm_up = std::norm(up_r) + std::norm(up_l);
    out.norm_down = std::norm(dn_r) + std::norm(dn_l);
    if (out.norm_up < 1e-24 || out.norm_down < 1e-24)
        throw std::domain_error("degenerate output: conditional reflected field has zero norm");

    auto to_jones = [&](Complex cr, Complex cl) {
        Eigen::Vector2cd v;
        v(0) = (cr + cl) / std::sqrt(2.0);
        v(1) = (cl - cr) * i / std::sqrt(2.0);
        return v;
    };
    out.out_up = to_jones(up_r, up_l) / std::sqrt(out.norm_up);
    out.out_down = to_jones(dn_r, dn_l) / std::sqrt(out.norm_down);
    return out;
}

}  // namespace qdsim
