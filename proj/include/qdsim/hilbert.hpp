#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include "qdsim/config.hpp"

namespace qdsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical controls for the master-equation solvers.
struct HilbertConfig {
    int n_max = 8;                 // Fock cutoff (photon number)
    double steady_tol = 1e-10;     // relative residual for the steady state
    double ode_rtol = 1e-8;        // integrator relative tolerance
    double ode_atol = 1e-10;       // integrator absolute tolerance
    double truncation_tol = 1e-4;  // observable change across a doubling
    int n_max_cap = 64;            // hard cap for converge_truncation

    void validate() const {
        if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
        if (steady_tol <= 0 || ode_rtol <= 0 || ode_atol <= 0 || truncation_tol <= 0)
            throw std::invalid_argument("solver tolerances must be positive");
        if (n_max_cap < n_max) throw std::invalid_argument("n_max_cap must be >= n_max");
    }

    static HilbertConfig from_config(const Config& cfg, const std::string& section = "solver") {
        HilbertConfig h;
        h.n_max = static_cast<int>(cfg.get_integer(section, "n_max", h.n_max));
        h.steady_tol = cfg.get_number(section, "steady_tol", h.steady_tol);
        h.ode_rtol = cfg.get_number(section, "ode_rtol", h.ode_rtol);
        h.ode_atol = cfg.get_number(section, "ode_atol", h.ode_atol);
        h.truncation_tol = cfg.get_number(section, "truncation_tol", h.truncation_tol);
        h.n_max_cap = static_cast<int>(cfg.get_integer(section, "n_max_cap", h.n_max_cap));
        h.validate();
        return h;
    }
};

// Two-level QD tensor truncated Fock space. Basis ordering |s> x |n> with
// ground s=0, excited s=1 and n ascending: index = s*(n_max+1) + n.
class HilbertSpace {
public:
    explicit HilbertSpace(int n_max) : n_max_(n_max) {
        if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
        dim_ = 2 * (n_max + 1);
    }

    int n_max() const { return n_max_; }
    int dim() const { return dim_; }
    int index(int qd_state, int n) const { return qd_state * (n_max_ + 1) + n; }

    // Photon annihilation operator a.
    Matrix annihilation() const {
        Matrix a = Matrix::Zero(dim_, dim_);
        for (int s = 0; s < 2; ++s)
            for (int n = 1; n <= n_max_; ++n) a(index(s, n - 1), index(s, n)) = std::sqrt(double(n));
        return a;
    }

    // QD lowering operator sigma = |ground><excited| (x) identity.
    Matrix qd_lower() const {
        Matrix s = Matrix::Zero(dim_, dim_);
        for (int n = 0; n <= n_max_; ++n) s(index(0, n), index(1, n)) = 1.0;
        return s;
    }

    Matrix number() const {
        Matrix n = Matrix::Zero(dim_, dim_);
        for (int s = 0; s < 2; ++s)
            for (int k = 0; k <= n_max_; ++k) n(index(s, k), index(s, k)) = double(k);
        return n;
    }

    Matrix qd_excited_projector() const {
        Matrix p = Matrix::Zero(dim_, dim_);
        for (int n = 0; n <= n_max_; ++n) p(index(1, n), index(1, n)) = 1.0;
        return p;
    }

    // |qd_state, n><qd_state, n| pure state.
    Matrix basis_state(int qd_state, int n) const {
        Matrix rho = Matrix::Zero(dim_, dim_);
        rho(index(qd_state, n), index(qd_state, n)) = 1.0;
        return rho;
    }

private:
    int n_max_;
    int dim_;
};

inline Complex expectation(const Matrix& op, const Matrix& rho) { return (op * rho).trace(); }

// Validity checks for a density matrix: trace 1, Hermitian, positive up to
// numerical noise.
struct DensityChecks {
    double trace_error = 0.0;       // |tr(rho) - 1|
    double hermiticity_error = 0.0; // max |rho - rho^dagger|
    double min_eigenvalue = 0.0;

    bool ok(double trace_tol = 1e-9, double herm_tol = 1e-10, double pos_tol = -1e-8) const {
        return trace_error <= trace_tol && hermiticity_error <= herm_tol &&
               min_eigenvalue >= pos_tol;
    }
};

inline DensityChecks check_density_matrix(const Matrix& rho) {
    DensityChecks c;
    c.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
    c.hermiticity_error = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    return c;
}

}  // namespace qdsim
