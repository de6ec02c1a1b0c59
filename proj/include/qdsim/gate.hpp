#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qdsim {
namespace gate {

using Complex = std::complex<double>;

// Linear-optical circuit over spatial x polarization modes. Channel index is
// 2*spatial + pol with pol 0 = H, 1 = V. Transfer matrices map input mode j
// to output mode i (column j holds the output amplitudes of input j).
class OpticalCircuit {
public:
    OpticalCircuit(int n_spatial, int in_control, int in_target, int out_control, int out_target)
        : n_spatial_(n_spatial),
          in_control_(in_control),
          in_target_(in_target),
          out_control_(out_control),
          out_target_(out_target) {
        if (n_spatial < 1) throw std::invalid_argument("need at least one spatial mode");
        for (int m : {in_control, in_target, out_control, out_target})
            if (m < 0 || m >= n_spatial) throw std::invalid_argument("marked mode out of range");
        if (in_control == in_target || out_control == out_target)
            throw std::invalid_argument("control and target modes must differ");
        unitary_ = Eigen::MatrixXcd::Identity(2 * n_spatial, 2 * n_spatial);
    }

    int n_spatial() const { return n_spatial_; }
    int in_control() const { return in_control_; }
    int in_target() const { return in_target_; }
    int out_control() const { return out_control_; }
    int out_target() const { return out_target_; }
    static int channel(int spatial, int pol) { return 2 * spatial + pol; }

    // Polarizing beam splitter: H transmits (keeps its spatial mode), V
    // reflects (swaps spatial modes).
    void add_pbs(int a, int b) {
        Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(2 * n_spatial_, 2 * n_spatial_);
        t(channel(a, 1), channel(a, 1)) = 0;
        t(channel(b, 1), channel(b, 1)) = 0;
        t(channel(b, 1), channel(a, 1)) = 1;
        t(channel(a, 1), channel(b, 1)) = 1;
        apply(t);
    }

    // Half-wave plate at angle theta on one spatial mode.
    void add_hwp(int m, double theta_rad) {
        Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(2 * n_spatial_, 2 * n_spatial_);
        const double c = std::cos(2 * theta_rad), s = std::sin(2 * theta_rad);
        t(channel(m, 0), channel(m, 0)) = c;
        t(channel(m, 0), channel(m, 1)) = s;
        t(channel(m, 1), channel(m, 0)) = s;
        t(channel(m, 1), channel(m, 1)) = -c;
        apply(t);
    }

    // Polarization-independent beam splitter of reflectivity eta in the real
    // rotation convention: input a stays with amplitude sqrt(eta) and crosses
    // to b with -sqrt(1-eta); input b stays with sqrt(eta), crosses with
    // +sqrt(1-eta). add_bs(b, a, eta) realizes the inverse rotation.
    void add_bs(int a, int b, double eta) {
        if (eta < 0 || eta > 1) throw std::invalid_argument("reflectivity must lie in [0,1]");
        Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(2 * n_spatial_, 2 * n_spatial_);
        const double r = std::sqrt(eta), s = std::sqrt(1.0 - eta);
        for (int pol = 0; pol < 2; ++pol) {
            t(channel(a, pol), channel(a, pol)) = r;
            t(channel(a, pol), channel(b, pol)) = s;
            t(channel(b, pol), channel(a, pol)) = -s;
            t(channel(b, pol), channel(b, pol)) = r;
        }
        apply(t);
    }

    void add_swap(int a, int b) {
        Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(2 * n_spatial_, 2 * n_spatial_);
        for (int pol = 0; pol < 2; ++pol) {
            t(channel(a, pol), channel(a, pol)) = 0;
            t(channel(b, pol), channel(b, pol)) = 0;
            t(channel(b, pol), channel(a, pol)) = 1;
            t(channel(a, pol), channel(b, pol)) = 1;
        }
        apply(t);
    }

    const Eigen::MatrixXcd& single_photon_unitary() const { return unitary_; }

    double unitarity_defect() const {
        const auto& u = unitary_;
        return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols()))
            .cwiseAbs()
            .maxCoeff();
    }

    // Post-selected CNOT: PBS path encoding on both qubits, a Mach-Zehnder on
    // the target rails, a 1/3 splitter shared by the control arm and one MZI
    // arm, and 1/3 attenuators balancing the other rails.
    static OpticalCircuit cnot() {
        // spatial modes: 0 control line, 1 control arm, 2 target line,
        // 3 target arm, 4/5 vacuum ports of the balancing splitters
        OpticalCircuit c(6, 0, 2, 0, 2);
        const double third = 1.0 / 3.0;
        c.add_pbs(0, 1);
        c.add_hwp(1, std::numbers::pi / 4);
        c.add_pbs(2, 3);
        c.add_hwp(3, std::numbers::pi / 4);
        c.add_bs(2, 3, 0.5);       // MZI entrance
        c.add_bs(1, 2, third);     // two-photon interference
        c.add_bs(0, 4, third);     // balance control line
        c.add_bs(3, 5, third);     // balance second MZI arm
        c.add_bs(3, 2, 0.5);       // MZI exit (inverse of the entrance)
        c.add_hwp(3, std::numbers::pi / 4);
        c.add_pbs(2, 3);
        c.add_hwp(1, std::numbers::pi / 4);
        c.add_pbs(0, 1);
        c.add_hwp(0, 0.0);         // pi phase on control V
        return c;
    }

private:
    void apply(const Eigen::MatrixXcd& t) {
        Eigen::MatrixXcd tt = t;
        const double defect =
            (tt.adjoint() * tt - Eigen::MatrixXcd::Identity(tt.rows(), tt.cols()))
                .cwiseAbs()
                .maxCoeff();
        if (defect > 1e-12) throw std::logic_error("circuit element is not unitary");
        unitary_ = (tt * unitary_).eval();
    }

    int n_spatial_;
    int in_control_, in_target_, out_control_, out_target_;
    Eigen::MatrixXcd unitary_;
};

// Two polarization qubits with a mean wavepacket overlap M between the
// photons' internal states.
struct TwoPhotonInput {
    Eigen::Vector2cd control{1.0, 0.0};
    Eigen::Vector2cd target{1.0, 0.0};
    double overlap = 1.0;  // M in [0,1]

    void validate() const {
        if (std::abs(control.norm() - 1.0) > 1e-12 || std::abs(target.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("qubit amplitudes must be normalized");
        if (overlap < 0.0 || overlap > 1.0) throw std::invalid_argument("overlap must lie in [0,1]");
    }

    static Eigen::Vector2cd h() { return {1.0, 0.0}; }
    static Eigen::Vector2cd v() { return {0.0, 1.0}; }
    static Eigen::Vector2cd d() { return {1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2}; }
    static Eigen::Vector2cd a() { return {1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2}; }
};

struct GateOutcome {
    // Joint polarization density matrix, basis HH, HV, VH, VV (control x target).
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    double success_probability = 0.0;
    // Post-selected amplitudes indexed (pol_c*2 + w_c, pol_t*2 + w_t) where w
    // labels the internal wavepacket (0 = shared, 1 = orthogonal).
    Eigen::Matrix4cd amplitudes = Eigen::Matrix4cd::Zero();
};

// Exact two-photon evolution through the circuit with post-selection on one
// photon in each marked output spatial mode. The target photon occupies
// sqrt(M)|shared> + sqrt(1-M)|orthogonal> in an internal two-state space that
// every optical element acts on trivially.
inline GateOutcome run_gate(const OpticalCircuit& circuit, const TwoPhotonInput& input) {
    input.validate();
    const int n_ch = 2 * circuit.n_spatial();
    const int n_modes = 2 * n_ch;  // channel (x) internal
    const auto mode = [](int channel, int w) { return 2 * channel + w; };

    const Eigen::MatrixXcd& u_ch = circuit.single_photon_unitary();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(n_modes, n_modes);
    for (int i = 0; i < n_ch; ++i)
        for (int j = 0; j < n_ch; ++j)
            for (int w = 0; w < 2; ++w) u(mode(i, w), mode(j, w)) = u_ch(i, j);

    Eigen::VectorXcd photon_c = Eigen::VectorXcd::Zero(n_modes);
    Eigen::VectorXcd photon_t = Eigen::VectorXcd::Zero(n_modes);
    for (int pol = 0; pol < 2; ++pol) {
        photon_c(mode(OpticalCircuit::channel(circuit.in_control(), pol), 0)) = input.control(pol);
        photon_t(mode(OpticalCircuit::channel(circuit.in_target(), pol), 0)) =
            std::sqrt(input.overlap) * input.target(pol);
        photon_t(mode(OpticalCircuit::channel(circuit.in_target(), pol), 1)) =
            std::sqrt(1.0 - input.overlap) * input.target(pol);
    }

    // Symmetric two-photon amplitude tensor; S' = U S U^T.
    Eigen::MatrixXcd s = 0.5 * (photon_c * photon_t.transpose() + photon_t * photon_c.transpose());
    Eigen::MatrixXcd s_out = u * s * u.transpose();

    GateOutcome out;
    for (int pc = 0; pc < 2; ++pc)
        for (int wc = 0; wc < 2; ++wc)
            for (int pt = 0; pt < 2; ++pt)
                for (int wt = 0; wt < 2; ++wt) {
                    const int i = mode(OpticalCircuit::channel(circuit.out_control(), pc), wc);
                    const int j = mode(OpticalCircuit::channel(circuit.out_target(), pt), wt);
                    out.amplitudes(pc * 2 + wc, pt * 2 + wt) = 2.0 * s_out(i, j);
                }
    out.success_probability = out.amplitudes.cwiseAbs2().sum();
    if (out.success_probability < 1e-14)
        throw std::domain_error("degenerate post-selection: no amplitude reaches the marked outputs");

    for (int pc = 0; pc < 2; ++pc)
        for (int pt = 0; pt < 2; ++pt)
            for (int qc = 0; qc < 2; ++qc)
                for (int qt = 0; qt < 2; ++qt) {
                    Complex sum(0.0, 0.0);
                    for (int wc = 0; wc < 2; ++wc)
                        for (int wt = 0; wt < 2; ++wt)
                            sum += out.amplitudes(pc * 2 + wc, pt * 2 + wt) *
                                   std::conj(out.amplitudes(qc * 2 + wc, qt * 2 + wt));
                    out.rho(pc * 2 + pt, qc * 2 + qt) = sum / out.success_probability;
                }
    return out;
}

struct TruthTable {
    // rows: inputs HH, HV, VH, VV; columns: measured outputs HH, HV, VH, VV
    std::array<std::array<double, 4>, 4> p{};
    double average_correct = 0.0;
    std::array<double, 4> success_probability{};
};

inline TruthTable truth_table(double overlap) {
    OpticalCircuit circuit = OpticalCircuit::cnot();
    const std::array<Eigen::Vector2cd, 2> basis{TwoPhotonInput::h(), TwoPhotonInput::v()};
    // ideal CNOT: target flips when control is V
    const std::array<int, 4> ideal{0, 1, 3, 2};
    TruthTable table;
    for (int row = 0; row < 4; ++row) {
        TwoPhotonInput in;
        in.control = basis[row / 2];
        in.target = basis[row % 2];
        in.overlap = overlap;
        GateOutcome out = run_gate(circuit, in);
        for (int col = 0; col < 4; ++col) table.p[row][col] = out.rho(col, col).real();
        table.success_probability[row] = out.success_probability;
        table.average_correct += 0.25 * table.p[row][ideal[row]];
    }
    return table;
}

enum class CorrelationBasis { hv, da, rl };

// E = (A_aa + A_bb - A_ab - A_ba) / (A_aa + A_bb + A_ab + A_ba) from the
// basis-projected joint probabilities of the post-selected state.
inline double correlation_E(const GateOutcome& outcome, CorrelationBasis basis) {
    const Complex i(0.0, 1.0);
    Eigen::Vector2cd e0, e1;
    switch (basis) {
        case CorrelationBasis::hv:
            e0 << 1.0, 0.0;
            e1 << 0.0, 1.0;
            break;
        case CorrelationBasis::da:
            e0 << 1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2;
            e1 << 1.0 / std::numbers::sqrt2, -1.0 / std::numbers::sqrt2;
            break;
        case CorrelationBasis::rl:
            e0 << 1.0 / std::numbers::sqrt2, -i / std::numbers::sqrt2;
            e1 << 1.0 / std::numbers::sqrt2, i / std::numbers::sqrt2;
            break;
    }
    const std::array<Eigen::Vector2cd, 2> e{e0, e1};
    std::array<std::array<double, 2>, 2> a{};
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            Eigen::Vector4cd proj;
            for (int pc = 0; pc < 2; ++pc)
                for (int pt = 0; pt < 2; ++pt) proj(pc * 2 + pt) = e[x](pc) * e[y](pt);
            a[x][y] = std::real(proj.dot(outcome.rho * proj));
        }
    const double denom = a[0][0] + a[1][1] + a[0][1] + a[1][0];
    if (std::abs(denom) < 1e-15) throw std::domain_error("undefined correlation: zero denominator");
    return (a[0][0] + a[1][1] - a[0][1] - a[1][0]) / denom;
}

inline double bell_fidelity(double e_hv, double e_da, double e_rl) {
    for (double e : {e_hv, e_da, e_rl})
        if (e < -1.0 || e > 1.0) throw std::domain_error("correlation values must lie in [-1,1]");
    return (1.0 + e_hv + e_da - e_rl) / 4.0;
}

// Closed-form Bell-state fidelity of the gate output for control D, target H.
inline double fidelity_vs_overlap(double overlap) {
    if (overlap < 0.0 || overlap > 1.0) throw std::domain_error("overlap must lie in [0,1]");
    return (1.0 + overlap) / (2.0 * (2.0 - overlap));
}

// Simulated Bell fidelity through run_gate -> correlation_E -> bell_fidelity.
inline double simulated_bell_fidelity(double overlap, double* success = nullptr) {
    OpticalCircuit circuit = OpticalCircuit::cnot();
    TwoPhotonInput in;
    in.control = TwoPhotonInput::d();
    in.target = TwoPhotonInput::h();
    in.overlap = overlap;
    GateOutcome out = run_gate(circuit, in);
    if (success) *success = out.success_probability;
    return bell_fidelity(correlation_E(out, CorrelationBasis::hv),
                         correlation_E(out, CorrelationBasis::da),
                         correlation_E(out, CorrelationBasis::rl));
}

}  // namespace gate
}  // namespace qdsim
