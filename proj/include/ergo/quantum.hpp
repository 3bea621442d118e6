// quantum.hpp — Finite-dimensional operator algebra: states, observables,
// entropies, and spectral utilities shared by all other modules.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ergo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Error hierarchy. Numerical-guard errors (truncation, trace drift,
// stationarity) are kept distinct so the CLI can map them to exit code 3.

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// Relative entropy would diverge: support of rho not inside support of sigma.
class SupportError : public Error {
public:
    using Error::Error;
};

class TruncationError : public Error {
public:
    using Error::Error;
};

class TraceDriftError : public Error {
public:
    using Error::Error;
};

class StationarityError : public Error {
public:
    using Error::Error;
};

class RegimeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------

struct HilbertSpace {
    int dim;

    explicit HilbertSpace(int d) : dim(d) {
        if (d < 2) throw DomainError("HilbertSpace: dim must be >= 2, got " + std::to_string(d));
    }
};

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Matrix& m, double atol = 1e-12) {
    if (m.rows() != m.cols()) return false;
    return max_abs(m - m.adjoint()) <= atol;
}

inline void require_hermitian(const Matrix& m, const char* what, double atol = 1e-12) {
    if (!is_hermitian(m, atol))
        throw ValidationError(std::string(what) + ": operator is not Hermitian within tolerance");
}

// Real part of Tr[rho * op]; the imaginary part is discarded (it vanishes for
// Hermitian pairs up to round-off).
inline double real_trace_product(const Matrix& a, const Matrix& b) {
    Complex t = (a * b).trace();
    return t.real();
}

inline Complex trace_product(const Matrix& a, const Matrix& b) { return (a * b).trace(); }

// ---------------------------------------------------------------------------
// Elementary operators

inline Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

/// Annihilation operator in the truncated Fock basis: <n-1|a|n> = sqrt(n).
inline Matrix fock_annihilation(const HilbertSpace& space) {
    Matrix a = Matrix::Zero(space.dim, space.dim);
    for (int n = 1; n < space.dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

inline Matrix fock_creation(const HilbertSpace& space) {
    return fock_annihilation(space).adjoint();
}

inline Matrix number_operator(const HilbertSpace& space) {
    Matrix n = Matrix::Zero(space.dim, space.dim);
    for (int k = 0; k < space.dim; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

inline Matrix sigma_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

inline Matrix sigma_y() {
    Matrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

inline Matrix sigma_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

// ---------------------------------------------------------------------------
// Spectral decomposition of Hermitian operators

struct SpectralDecomposition {
    RVector eigenvalues;  // ascending
    Matrix eigenvectors;  // orthonormal columns, matching order
};

inline SpectralDecomposition spectral(const Matrix& a, double herm_tol = 1e-12) {
    require_hermitian(a, "spectral", herm_tol);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) throw Error("spectral: eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// V f(Lambda) V^dagger for Hermitian A and a real scalar function f.
inline Matrix matrix_function(const Matrix& a, const std::function<double(double)>& f) {
    SpectralDecomposition sd = spectral(a);
    RVector fl(sd.eigenvalues.size());
    for (Eigen::Index i = 0; i < fl.size(); ++i) fl(i) = f(sd.eigenvalues(i));
    return sd.eigenvectors * fl.asDiagonal() * sd.eigenvectors.adjoint();
}

/// exp(X) for anti-Hermitian X (X^dagger = -X), via the spectrum of -iX.
/// Used for displacement and squeezing unitaries.
inline Matrix expm_antihermitian(const Matrix& x, double atol = 1e-10) {
    if (max_abs(x + x.adjoint()) > atol) throw ValidationError("expm_antihermitian: X is not anti-Hermitian");
    Matrix k = Complex(0, -1) * x;  // Hermitian
    SpectralDecomposition sd = spectral((k + k.adjoint()) / 2.0);
    CVector phases(sd.eigenvalues.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases(i) = std::exp(Complex(0, sd.eigenvalues(i)));
    return sd.eigenvectors * phases.asDiagonal() * sd.eigenvectors.adjoint();
}

// ---------------------------------------------------------------------------
// Density operators

class DensityOperator {
public:
    /// Validating constructor: Hermiticity, unit trace, positivity.
    static DensityOperator checked(Matrix m) {
        DensityOperator rho(std::move(m));
        rho.validate();
        return rho;
    }

    /// No validation; for hot paths that guarantee validity by construction.
    static DensityOperator trusted(Matrix m) { return DensityOperator(std::move(m)); }

    const Matrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    void validate(double herm_tol = 1e-12, double trace_tol = 1e-10, double eig_floor = -1e-10) const {
        if (m_.rows() != m_.cols()) throw ValidationError("DensityOperator: matrix not square");
        if (!is_hermitian(m_, herm_tol)) throw ValidationError("DensityOperator: not Hermitian");
        double tr = m_.trace().real();
        if (std::abs(tr - 1.0) > trace_tol)
            throw ValidationError("DensityOperator: trace deviates from 1 by " + std::to_string(tr - 1.0));
        Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < eig_floor)
            throw ValidationError("DensityOperator: negative eigenvalue " +
                                  std::to_string(solver.eigenvalues().minCoeff()));
    }

private:
    explicit DensityOperator(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

inline DensityOperator pure_state(const CVector& psi) {
    CVector n = psi / psi.norm();
    return DensityOperator::trusted(n * n.adjoint());
}

inline DensityOperator fock_state(const HilbertSpace& space, int n) {
    if (n < 0 || n >= space.dim) throw DomainError("fock_state: level outside truncation");
    CVector psi = CVector::Zero(space.dim);
    psi(n) = 1.0;
    return pure_state(psi);
}

inline DensityOperator maximally_mixed(int dim) {
    return DensityOperator::trusted(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

// Thermal oscillator state with mean occupation n_bar (geometric populations).
// Handles n_bar = 0 (vacuum) exactly, unlike a Gibbs exponential at T = 0.
inline DensityOperator thermal_oscillator(const HilbertSpace& space, double n_bar) {
    if (n_bar < 0) throw DomainError("thermal_oscillator: n_bar must be >= 0");
    Matrix rho = Matrix::Zero(space.dim, space.dim);
    if (n_bar == 0.0) {
        rho(0, 0) = 1.0;
        return DensityOperator::trusted(rho);
    }
    double q = n_bar / (n_bar + 1.0);
    double z = 0.0;
    for (int n = 0; n < space.dim; ++n) z += std::pow(q, n);
    for (int n = 0; n < space.dim; ++n) rho(n, n) = std::pow(q, n) / z;
    return DensityOperator::trusted(rho);
}

// ---------------------------------------------------------------------------
// Entropies (k_B = 1)

/// -sum_i l_i ln l_i with 0 ln 0 = 0. Eigenvalues in [-1e-10, 0] are clamped
/// to zero; anything below is treated as genuine positivity loss.
inline double von_neumann_entropy(const DensityOperator& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(rho.matrix(), Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        double l = solver.eigenvalues()(i);
        if (l < -1e-10)
            throw ValidationError("von_neumann_entropy: eigenvalue " + std::to_string(l) + " below clamp window");
        if (l <= 0.0) continue;
        s -= l * std::log(l);
    }
    return std::max(s, 0.0);
}

/// Tr[rho (ln rho - ln sigma)] >= 0. Throws SupportError when rho has weight
/// on directions where sigma's eigenvalues fall below 1e-14.
inline double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
    constexpr double kSupportFloor = 1e-14;
    SpectralDecomposition dr = spectral(rho.matrix());
    SpectralDecomposition ds = spectral(sigma.matrix());

    double s = 0.0;
    for (Eigen::Index i = 0; i < dr.eigenvalues.size(); ++i) {
        double l = dr.eigenvalues(i);
        if (l > 0.0) s += l * std::log(l);
    }
    for (Eigen::Index j = 0; j < ds.eigenvalues.size(); ++j) {
        double mu = ds.eigenvalues(j);
        // weight of rho along sigma's j-th eigenvector
        double w = (ds.eigenvectors.col(j).adjoint() * rho.matrix() * ds.eigenvectors.col(j))(0, 0).real();
        if (mu < kSupportFloor) {
            if (w > 1e-12)
                throw SupportError("relative_entropy: rho has weight " + std::to_string(w) +
                                   " outside the support of sigma");
            continue;
        }
        s -= w * std::log(mu);
    }
    if (s < -1e-9) throw Error("relative_entropy: negative value " + std::to_string(s));
    return std::max(s, 0.0);
}

/// Trace distance (1/2)||rho - sigma||_1.
inline double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
    Matrix d = rho.matrix() - sigma.matrix();
    Eigen::SelfAdjointEigenSolver<Matrix> solver((d + d.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Thermal states and Bose-Einstein helpers (hbar = k_B = 1)

inline DensityOperator gibbs_state(const Matrix& h, double temperature) {
    if (!(temperature > 0)) throw DomainError("gibbs_state: temperature must be positive");
    SpectralDecomposition sd = spectral(h);
    double emin = sd.eigenvalues.minCoeff();
    RVector p(sd.eigenvalues.size());
    double z = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        p(i) = std::exp(-(sd.eigenvalues(i) - emin) / temperature);
        z += p(i);
    }
    p /= z;
    Matrix rho = sd.eigenvectors * p.asDiagonal() * sd.eigenvectors.adjoint();
    return DensityOperator::trusted((rho + rho.adjoint()) / 2.0);
}

inline double bose_occupation(double omega, double temperature) {
    if (!(omega > 0)) throw DomainError("bose_occupation: omega must be positive");
    if (temperature <= 0) return 0.0;
    return 1.0 / std::expm1(omega / temperature);
}

/// Entropy of a thermal oscillator state with occupation n_bar.
inline double bose_entropy(double n_bar) {
    if (n_bar < 0) throw DomainError("bose_entropy: n_bar must be >= 0");
    if (n_bar == 0.0) return 0.0;
    return (n_bar + 1.0) * std::log(n_bar + 1.0) - n_bar * std::log(n_bar);
}

/// Temperature of a thermal oscillator with occupation n_bar at frequency omega.
/// Returns 0 for n_bar below 1e-12 (zero-temperature sentinel).
inline double bose_temperature(double omega, double n_bar) {
    if (n_bar < 1e-12) return 0.0;
    return omega / std::log1p(1.0 / n_bar);
}

}  // namespace ergo
