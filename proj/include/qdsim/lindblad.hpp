#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "qdsim/hilbert.hpp"
#include "qdsim/qed_core.hpp"

namespace qdsim {

namespace detail {

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

}  // namespace detail

// Lindblad generator of the driven Jaynes-Cummings system in the frame
// rotating at the laser frequency:
//
//   H = Dc a^+a + Dq s^+s + g(a^+s + a s^+) + i sqrt(eta_in kappa_top)(b a^+ - b* a)
//   dissipators: kappa D[a], gamma_sp D[s], 2 gamma* D[s^+s]
//
// with Dc = omega_c - omega_laser, Dq = omega_qd - omega_laser. kappa is an
// intensity damping rate, so the cavity linewidth (FWHM) equals kappa and the
// QD coherence decays at gamma_sp/2 + gamma*.
class LindbladGenerator {
public:
    LindbladGenerator(const DeviceParams& params, double laser_omega, Complex b_in, int n_max)
        : params_(params),
          laser_omega_(laser_omega),
          b_in_(b_in),
          space_(n_max),
          a_(space_.annihilation()),
          sigma_(space_.qd_lower()),
          proj_e_(space_.qd_excited_projector()) {
        params_.validate();
        drive_coupling_ = std::sqrt(params_.eta_in * params_.kappa_top);
        h_static_ = Matrix::Zero(space_.dim(), space_.dim());
        const double dc = params_.omega_c - laser_omega_;
        const double dq = params_.omega_qd - laser_omega_;
        h_static_ += dc * (a_.adjoint() * a_);
        h_static_ += dq * proj_e_;
        h_static_ += params_.g * (a_.adjoint() * sigma_ + a_ * sigma_.adjoint());
    }

    const DeviceParams& params() const { return params_; }
    const HilbertSpace& space() const { return space_; }
    double laser_omega() const { return laser_omega_; }
    Complex drive_amplitude() const { return b_in_; }
    double drive_coupling() const { return drive_coupling_; }
    const Matrix& annihilation_op() const { return a_; }
    const Matrix& qd_lower_op() const { return sigma_; }
    const Matrix& qd_projector_op() const { return proj_e_; }

    // Hamiltonian for drive amplitude b (defaults to the CW amplitude).
    Matrix hamiltonian(Complex b) const {
        const Complex i(0.0, 1.0);
        return h_static_ + i * drive_coupling_ * (b * a_.adjoint() - std::conj(b) * a_);
    }
    Matrix hamiltonian() const { return hamiltonian(b_in_); }

    // (rate, collapse operator) pairs.
    std::vector<std::pair<double, Matrix>> dissipators() const {
        return {{params_.kappa(), a_},
                {params_.gamma_sp, sigma_},
                {2.0 * params_.gamma_star, proj_e_}};
    }

    // L(rho) for drive amplitude b.
    Matrix apply(const Matrix& rho, Complex b) const {
        const Complex i(0.0, 1.0);
        Matrix h = hamiltonian(b);
        Matrix out = -i * (h * rho - rho * h);
        for (const auto& [rate, c] : dissipators()) {
            if (rate == 0.0) continue;
            Matrix cdc = c.adjoint() * c;
            out += rate * (c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
        }
        return out;
    }
    Matrix apply(const Matrix& rho) const { return apply(rho, b_in_); }

    // Dense superoperator on column-major vec(rho).
    Matrix liouvillian_matrix() const {
        const int d = space_.dim();
        const Matrix id = Matrix::Identity(d, d);
        const Complex i(0.0, 1.0);
        Matrix h = hamiltonian();
        Matrix lv = -i * (detail::kron(id, h) - detail::kron(h.transpose(), id));
        for (const auto& [rate, c] : dissipators()) {
            if (rate == 0.0) continue;
            Matrix cdc = c.adjoint() * c;
            lv += rate * (detail::kron(c.conjugate(), c) -
                          0.5 * detail::kron(id, cdc) -
                          0.5 * detail::kron(cdc.transpose(), id));
        }
        return lv;
    }

private:
    DeviceParams params_;
    double laser_omega_;
    Complex b_in_;
    HilbertSpace space_;
    Matrix a_, sigma_, proj_e_;
    Matrix h_static_;
    double drive_coupling_ = 0.0;
};

// Steady state of the generator: solves L vec(rho) = 0 with the trace
// constraint replacing the first row (the dropped row is redundant because
// the trace functional is a left null vector of L).
inline Matrix steady_state(const LindbladGenerator& gen, const HilbertConfig& cfg) {
    cfg.validate();
    const int d = gen.space().dim();
    Matrix lv = gen.liouvillian_matrix();
    const double lv_norm = lv.norm();

    Matrix m = lv;
    Vector rhs = Vector::Zero(d * d);
    m.row(0).setZero();
    for (int k = 0; k < d; ++k) m(0, k * d + k) = 1.0;  // tr(rho) = 1
    rhs(0) = 1.0;

    Eigen::PartialPivLU<Matrix> lu(m);
    Vector v = lu.solve(rhs);
    // One step of iterative refinement.
    v += lu.solve(rhs - m * v);

    Matrix rho = Eigen::Map<const Matrix>(v.data(), d, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const Complex tr = rho.trace();
    if (!std::isfinite(std::abs(tr)) || std::abs(tr) < 1e-12)
        throw SolverError("steady-state solve produced a non-normalizable state");
    rho /= tr;

    const double residual = gen.apply(rho).norm();
    const double bound = cfg.steady_tol * lv_norm * rho.norm();
    if (!(residual <= bound))
        throw SolverError("steady-state residual " + std::to_string(residual) +
                          " exceeds tolerance " + std::to_string(bound) +
                          " (degenerate null space?)");
    return rho;
}

// Doubles n_max until the scalar observable changes by less than
// cfg.truncation_tol across a doubling. Returns the accepted truncation and
// its value.
struct TruncationResult {
    int n_max = 0;
    double value = 0.0;
};

inline TruncationResult converge_truncation(const std::function<double(int)>& evaluate,
                                            const HilbertConfig& cfg) {
    cfg.validate();
    int n = cfg.n_max;
    double current = evaluate(n);
    while (true) {
        if (2 * n > cfg.n_max_cap)
            throw TruncationError("observable not converged at n_max cap " +
                                  std::to_string(cfg.n_max_cap));
        const double doubled = evaluate(2 * n);
        if (std::abs(doubled - current) < cfg.truncation_tol) return {n, current};
        n *= 2;
        current = doubled;
    }
}

}  // namespace qdsim
