#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdsim/config.hpp"
#include "qdsim/units.hpp"

namespace qdsim {

// Physical rates and frequencies of one QD-pillar device. Frequencies are
// offsets from a common reference energy; everything in rad/ns.
struct DeviceParams {
    double g = 0.0;             // QD-cavity coupling strength
    double kappa_top = 0.0;     // intensity damping through the top mirror
    double kappa_bottom = 0.0;  // intensity damping through the bottom mirror
    double kappa_loss = 0.0;    // sidewall losses
    double gamma_sp = 0.0;      // spontaneous emission outside the mode
    double gamma_star = 0.0;    // pure dephasing
    double omega_c = 0.0;       // cavity mode frequency offset
    double omega_qd = 0.0;      // QD transition frequency offset
    double eta_in = 1.0;        // input mode matching, 0..1

    double kappa() const { return kappa_top + kappa_bottom + kappa_loss; }
    double eta_top() const { return kappa_top / kappa(); }
    // Total QD dephasing rate gamma = gamma_sp/2 + gamma*.
    double gamma_total() const { return 0.5 * gamma_sp + gamma_star; }

    void validate() const {
        if (g < 0 || kappa_top < 0 || kappa_bottom < 0 || kappa_loss < 0 || gamma_sp < 0 ||
            gamma_star < 0)
            throw std::invalid_argument("device rates must be non-negative");
        if (eta_in < 0 || eta_in > 1)
            throw std::invalid_argument("eta_in must lie in [0,1]");
        if (kappa() <= 0) throw std::invalid_argument("invalid device: kappa must be positive");
    }

    // Reads the [device] section; keys are in ueV as in spectroscopy practice.
    static DeviceParams from_config(const Config& cfg, const std::string& section = "device") {
        DeviceParams p;
        p.g = uev_to_rad_ns(cfg.get_energy_uev(section, "g_ueV"));
        p.kappa_top = uev_to_rad_ns(cfg.get_energy_uev(section, "kappa_top_ueV"));
        p.kappa_bottom = uev_to_rad_ns(cfg.get_energy_uev(section, "kappa_bottom_ueV"));
        p.kappa_loss = uev_to_rad_ns(cfg.get_energy_uev(section, "kappa_loss_ueV"));
        p.gamma_sp = uev_to_rad_ns(cfg.get_energy_uev(section, "gamma_sp_ueV"));
        p.gamma_star = uev_to_rad_ns(cfg.get_energy_uev(section, "gamma_star_ueV"));
        p.omega_c = uev_to_rad_ns(cfg.get_energy_uev(section, "omega_c_ueV", 0.0));
        p.omega_qd = uev_to_rad_ns(cfg.get_energy_uev(section, "omega_qd_ueV", 0.0));
        p.eta_in = cfg.get_number(section, "eta_in", 1.0);
        p.validate();
        return p;
    }
};

enum class CouplingRegime { strong, weak };

// Closed-form figures of merit derived from DeviceParams.
struct FiguresOfMerit {
    double cooperativity = 0.0;  // C = g^2/(kappa*gamma)
    double purcell = 0.0;        // F_p = Gamma/gamma_sp
    double beta = 0.0;           // F_p/(F_p+1)
    double eta_top = 0.0;
    double emission_rate = 0.0;  // Gamma = 2 g^2/kappa, rad/ns
    double gamma_total = 0.0;    // gamma_sp/2 + gamma*
    double t1_ns = 0.0;          // 1/(Gamma+gamma_sp)
    double t2_ns = 0.0;          // 1/((Gamma+gamma_sp)/2 + gamma*)
    double m_intrinsic = 0.0;    // T2/(2 T1)
    CouplingRegime regime = CouplingRegime::weak;
};

inline FiguresOfMerit figures_of_merit(const DeviceParams& p) {
    p.validate();
    if (p.gamma_sp == 0.0)
        throw std::domain_error("undefined Purcell factor: gamma_sp = 0");
    FiguresOfMerit f;
    const double kappa = p.kappa();
    f.gamma_total = p.gamma_total();
    f.cooperativity = p.g * p.g / (kappa * f.gamma_total);
    f.emission_rate = 2.0 * p.g * p.g / kappa;
    f.purcell = f.emission_rate / p.gamma_sp;
    f.beta = f.purcell / (f.purcell + 1.0);
    f.eta_top = p.eta_top();
    f.t1_ns = 1.0 / (f.emission_rate + p.gamma_sp);
    f.t2_ns = 1.0 / (0.5 * (f.emission_rate + p.gamma_sp) + p.gamma_star);
    f.m_intrinsic = f.t2_ns / (2.0 * f.t1_ns);
    f.regime = (p.g > kappa / 4.0 && p.g > f.gamma_total / 4.0) ? CouplingRegime::strong
                                                                : CouplingRegime::weak;
    return f;
}

// Corrected brightness B*sqrt(1 - g2) accounting for multi-photon events.
inline double corrected_brightness(double brightness, double g2) {
    if (brightness < 0 || brightness > 1) throw std::domain_error("brightness must lie in [0,1]");
    if (g2 < 0 || g2 > 1) throw std::domain_error("g2 must lie in [0,1]");
    return brightness * std::sqrt(1.0 - g2);
}

// Diameter laws for the extraction-efficiency design sweep. Sidewall
// scattering follows kappa_loss(d) = A exp(-d/d0); the coupling follows
// g(d) = g_ref * d_ref/d (mode volume scaling with pillar cross-section).
struct LossModel {
    double q0 = 3000.0;            // planar cavity quality factor
    double loss_amplitude = 0.0;   // A, rad/ns
    double loss_length_um = 1.0;   // d0, um
    double g_ref = 0.0;            // coupling at the reference diameter, rad/ns
    double d_ref_um = 2.5;         // reference diameter, um
    double omega_c = 0.0;          // absolute mode frequency, rad/ns
    double gamma_sp = 0.0;         // QD emission rate outside the mode, rad/ns

    void validate() const {
        if (q0 <= 0) throw std::invalid_argument("Q0 must be positive");
        if (loss_amplitude < 0) throw std::invalid_argument("loss amplitude must be >= 0");
        if (loss_length_um <= 0) throw std::invalid_argument("loss length must be positive");
        if (g_ref < 0 || d_ref_um <= 0 || omega_c <= 0 || gamma_sp <= 0)
            throw std::invalid_argument("invalid loss model parameters");
    }

    double kappa_planar() const { return omega_c / q0; }
    double kappa_loss_at(double d_um) const {
        return loss_amplitude * std::exp(-d_um / loss_length_um);
    }
    double g_at(double d_um) const { return g_ref * d_ref_um / d_um; }

    // Defaults calibrated so the Q0 = 3000 sweep peaks near 0.80 for a
    // diameter between 2 and 3 um, with F_p(d_ref) in the measured 2-3.5
    // window. See configs/default.cfg, section [design].
    static LossModel from_config(const Config& cfg, const std::string& section = "design") {
        LossModel m;
        m.q0 = cfg.get_number(section, "q0", 3000.0);
        m.loss_amplitude = uev_to_rad_ns(cfg.get_energy_uev(section, "loss_amplitude_ueV"));
        m.loss_length_um = cfg.get_number(section, "loss_length_um");
        m.g_ref = uev_to_rad_ns(cfg.get_energy_uev(section, "g_ref_ueV"));
        m.d_ref_um = cfg.get_number(section, "d_ref_um", 2.5);
        m.omega_c = uev_to_rad_ns(cfg.get_energy_uev(section, "omega_c_ueV"));
        m.gamma_sp = uev_to_rad_ns(cfg.get_energy_uev(section, "gamma_sp_ueV"));
        m.validate();
        return m;
    }
};

struct ExtractionPoint {
    double d_um = 0.0;
    double q = 0.0;
    double eta_top = 0.0;
    double beta = 0.0;
    double product = 0.0;  // eta_top * beta
};

struct ExtractionSweep {
    std::vector<ExtractionPoint> points;
    std::size_t argmax = 0;  // index of the best eta_top*beta

    const ExtractionPoint& best() const { return points.at(argmax); }
};

// Per-diameter Q, eta_top = Q/Q0 (asymmetric-mirror limit where the planar
// damping is dominated by the top mirror) and beta from the g(d) law.
inline ExtractionSweep extraction_sweep(const LossModel& model, const std::vector<double>& diameters_um) {
    model.validate();
    if (diameters_um.empty()) throw std::invalid_argument("empty diameter grid");
    for (std::size_t i = 0; i < diameters_um.size(); ++i) {
        if (diameters_um[i] <= 0) throw std::invalid_argument("diameters must be positive");
        if (i > 0 && diameters_um[i] <= diameters_um[i - 1])
            throw std::invalid_argument("diameter grid must be ascending");
    }
    ExtractionSweep sweep;
    sweep.points.reserve(diameters_um.size());
    const double kp = model.kappa_planar();
    for (double d : diameters_um) {
        ExtractionPoint pt;
        pt.d_um = d;
        const double kappa = kp + model.kappa_loss_at(d);
        pt.q = model.omega_c / kappa;
        pt.eta_top = pt.q / model.q0;  // = kp/kappa
        const double g = model.g_at(d);
        const double purcell = 2.0 * g * g / (kappa * model.gamma_sp);
        pt.beta = purcell / (purcell + 1.0);
        pt.product = pt.eta_top * pt.beta;
        sweep.points.push_back(pt);
    }
    for (std::size_t i = 1; i < sweep.points.size(); ++i)
        if (sweep.points[i].product > sweep.points[sweep.argmax].product) sweep.argmax = i;
    return sweep;
}

}  // namespace qdsim
