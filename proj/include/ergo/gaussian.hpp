// gaussian.hpp — Closed-form single-mode Gaussian dynamics: squeezed thermal
// states, Wigner widths under drift/diffusion/pumping, passive occupation,
// and the Fock-space bridge used for cross-validation.
//
// Conventions: alpha = x1 + i x2, quadratures x1 = (a+a†)/2, x2 = (a-a†)/2i.
// The Wigner widths f± are the principal variances of the distribution;
// vacuum has f+ = f- = 1/4. axis_phase is the angle of the f+ axis relative
// to x1 (the pump-aligned frame has axis_phase 0 or pi/2).

#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "ergo/lindblad.hpp"
#include "ergo/quantum.hpp"

namespace ergo {

struct GaussianState {
    double x1_mean = 0.0;
    double x2_mean = 0.0;
    double f_plus = 0.25;
    double f_minus = 0.25;
    double axis_phase = 0.0;

    void validate() const {
        if (!(f_plus >= f_minus) || !(f_minus >= 1e-12))
            throw ValidationError("GaussianState: need f_plus >= f_minus >= 1e-12");
        if (4.0 * std::sqrt(f_plus * f_minus) < 1.0 - 1e-9)
            throw ValidationError("GaussianState: uncertainty below the vacuum floor");
    }
};

inline GaussianState vacuum_state() { return {}; }

inline GaussianState coherent_state(Complex alpha) {
    return {alpha.real(), alpha.imag(), 0.25, 0.25, 0.0};
}

/// Squeezed thermal state: widths (n_bar + 1/2) e^{±2r} / 2 with the
/// anti-squeezed axis along axis_phase.
inline GaussianState squeezed_thermal_state(double n_bar, double r, double axis_phase = 0.0,
                                            Complex mean = 0.0) {
    if (n_bar < 0 || r < 0) throw DomainError("squeezed_thermal_state: n_bar, r must be >= 0");
    double w = 0.5 * (n_bar + 0.5);
    return {mean.real(), mean.imag(), w * std::exp(2.0 * r), w * std::exp(-2.0 * r), axis_phase};
}

inline Complex mean_alpha(const GaussianState& s) { return {s.x1_mean, s.x2_mean}; }

/// <a†a> = f+ + f- - 1/2 + |mean|^2.
inline double occupation(const GaussianState& s) {
    return s.f_plus + s.f_minus - 0.5 + s.x1_mean * s.x1_mean + s.x2_mean * s.x2_mean;
}

/// <a^2> = e^{2i axis_phase} (f+ - f-) + mean^2.
inline Complex second_moment(const GaussianState& s) {
    Complex mean = mean_alpha(s);
    return std::exp(Complex(0, 2.0 * s.axis_phase)) * (s.f_plus - s.f_minus) + mean * mean;
}

/// Lab-frame covariance entries (Var x1, Var x2, Cov).
inline std::array<double, 3> covariance_xy(const GaussianState& s) {
    double c = std::cos(s.axis_phase), sn = std::sin(s.axis_phase);
    double v1 = s.f_plus * c * c + s.f_minus * sn * sn;
    double v2 = s.f_plus * sn * sn + s.f_minus * c * c;
    double cov = (s.f_plus - s.f_minus) * sn * c;
    return {v1, v2, cov};
}

inline GaussianState state_from_covariance(double x1, double x2, double v1, double v2, double cov) {
    double avg = 0.5 * (v1 + v2);
    double half = std::sqrt(0.25 * (v1 - v2) * (v1 - v2) + cov * cov);
    double phase = 0.5 * std::atan2(2.0 * cov, v1 - v2);
    GaussianState s{x1, x2, avg + half, avg - half, phase};
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Drift/diffusion/pump drive of the piston family

struct GaussianBathDrive {
    double Gamma = 0.0;       // drift; negative in the gain regime
    double D = 0.0;           // diffusion
    double kappa_pump = 0.0;  // |kappa|, pump phase zero
    PumpKind pump_kind = PumpKind::none;

    double gamma_plus() const { return -0.5 * Gamma + (pump_kind == PumpKind::quadratic ? kappa_pump : 0.0); }
    double gamma_minus() const { return -0.5 * Gamma - (pump_kind == PumpKind::quadratic ? kappa_pump : 0.0); }

    void validate() const {
        if (D < 0) throw DomainError("GaussianBathDrive: D must be >= 0");
        if (D + Gamma < -1e-12) throw DomainError("GaussianBathDrive: D + Gamma must be >= 0");
        if (kappa_pump < 0) throw DomainError("GaussianBathDrive: kappa_pump is a magnitude (phase fixed to 0)");
    }
};

namespace detail {

/// Width evolution f(t) = e^{2 g t} f0 + (D + Gamma/2)/(4g) (e^{2 g t} - 1),
/// with the removable singularity at g = 0 handled analytically.
inline double evolve_width(double f0, double g, double diffusion_term, double t) {
    if (std::abs(g) < 1e-12) return f0 + 0.5 * diffusion_term * t;
    double e = std::exp(2.0 * g * t);
    return e * f0 + diffusion_term / (4.0 * g) * (e - 1.0);
}

}  // namespace detail

/// Wigner widths at time t for an initial coherent state (f±(0) = 1/4).
inline std::pair<double, double> widths_at(const GaussianBathDrive& drive, double t) {
    drive.validate();
    if (t < 0) throw DomainError("widths_at: t must be >= 0");
    double diff = drive.D + 0.5 * drive.Gamma;
    double fp = detail::evolve_width(0.25, drive.gamma_plus(), diff, t);
    double fm = detail::evolve_width(0.25, drive.gamma_minus(), diff, t);
    return {fp, fm};
}

/// First-moment evolution. Quadratic pump (or none): x1 scales with e^{G+ t},
/// x2 with e^{G- t}. Linear pump: alpha(t) = alpha0 e^{-Gamma t/2}
/// + (2 kappa/|Gamma|)(e^{-Gamma t/2} - 1).
inline std::pair<double, double> means_at(const GaussianState& state0, const GaussianBathDrive& drive,
                                          double t) {
    drive.validate();
    if (drive.pump_kind == PumpKind::linear) {
        Complex a0 = mean_alpha(state0);
        double decay = std::exp(-0.5 * drive.Gamma * t);
        Complex alpha;
        if (std::abs(drive.Gamma) < 1e-300) {
            alpha = a0 + drive.kappa_pump * t;
        } else {
            alpha = a0 * decay + (2.0 * drive.kappa_pump / std::abs(drive.Gamma)) * (decay - 1.0);
        }
        return {alpha.real(), alpha.imag()};
    }
    return {state0.x1_mean * std::exp(drive.gamma_plus() * t),
            state0.x2_mean * std::exp(drive.gamma_minus() * t)};
}

/// Full Gaussian state at time t under the drive. The initial principal axes
/// must be pump-aligned (axis_phase a multiple of pi/2); widths then evolve
/// independently along x1 (rate 2*Gamma+) and x2 (rate 2*Gamma-).
inline GaussianState evolve_gaussian(const GaussianState& state0, const GaussianBathDrive& drive, double t) {
    drive.validate();
    state0.validate();
    if (t < 0) throw DomainError("evolve_gaussian: t must be >= 0");
    if (std::abs(std::sin(2.0 * state0.axis_phase)) > 1e-9)
        throw DomainError("evolve_gaussian: initial axes must be pump-aligned (axis_phase multiple of pi/2)");

    auto [v1_0, v2_0, cov] = covariance_xy(state0);
    (void)cov;
    double diff = drive.D + 0.5 * drive.Gamma;
    double g1 = drive.gamma_plus(), g2 = drive.gamma_minus();
    if (drive.pump_kind == PumpKind::linear) g1 = g2 = -0.5 * drive.Gamma;
    double v1 = detail::evolve_width(v1_0, g1, diff, t);
    double v2 = detail::evolve_width(v2_0, g2, diff, t);
    auto [x1, x2] = means_at(state0, drive, t);
    return state_from_covariance(x1, x2, v1, v2, 0.0);
}

// ---------------------------------------------------------------------------
// Passive (thermal) content of a Gaussian state

struct GaussianPassiveInfo {
    double n_pas;  // 2 sqrt(f+ f-) - 1/2
    double r;      // cosh 2r = (f+ + f-) / (2 sqrt(f+ f-))
};

inline GaussianPassiveInfo n_passive(const GaussianState& s) {
    s.validate();
    double root = std::sqrt(s.f_plus * s.f_minus);
    double n_pas = std::max(2.0 * root - 0.5, 0.0);
    double c2r = (s.f_plus + s.f_minus) / (2.0 * root);
    double r = 0.5 * std::acosh(std::max(c2r, 1.0));
    return {n_pas, r};
}

struct GaussianEnergySplit {
    double energy;
    double passive_energy;
    double ergotropy;
};

/// Energy, passive energy, and ergotropy at mode frequency nu.
inline GaussianEnergySplit gaussian_energy_ergotropy(const GaussianState& s, double nu) {
    if (!(nu > 0)) throw DomainError("gaussian_energy_ergotropy: nu must be positive");
    GaussianPassiveInfo info = n_passive(s);
    double energy = nu * occupation(s);
    double passive = nu * info.n_pas;
    return {energy, passive, energy - passive};
}

/// Bose entropy of the passive occupation; 0 for pure states.
inline double gaussian_entropy(const GaussianState& s) { return bose_entropy(n_passive(s).n_pas); }

/// Passive temperature at frequency nu (0 sentinel for n_pas < 1e-12).
inline double gaussian_passive_temperature(const GaussianState& s, double nu) {
    return bose_temperature(nu, n_passive(s).n_pas);
}

// ---------------------------------------------------------------------------
// Fock-space bridge

/// Density operator reproducing the Gaussian data: displaced, squeezed
/// thermal state D(alpha) S ρ_th(n_pas) S† D(alpha)†.
inline DensityOperator to_fock(const GaussianState& s, const HilbertSpace& space) {
    s.validate();
    double occ = occupation(s);
    if (space.dim - 1 < 8.0 * (occ + 1.0))
        throw TruncationError("to_fock: truncation too small for occupation " + detail::format_double(occ));

    GaussianPassiveInfo info = n_passive(s);
    Matrix rho = thermal_oscillator(space, info.n_pas).matrix();

    Matrix a = fock_annihilation(space);
    Matrix ad = fock_creation(space);
    if (info.r > 1e-14) {
        // anti-squeeze along the axis_phase direction
        Complex xi = -info.r * std::exp(Complex(0, 2.0 * s.axis_phase));
        Matrix gen_sq = 0.5 * (std::conj(xi) * (a * a) - xi * (ad * ad));
        Matrix sq = expm_antihermitian(gen_sq);
        rho = sq * rho * sq.adjoint();
    }
    Complex alpha = mean_alpha(s);
    if (std::abs(alpha) > 1e-14) {
        Matrix gen_d = alpha * ad - std::conj(alpha) * a;
        Matrix disp = expm_antihermitian(gen_d);
        rho = disp * rho * disp.adjoint();
    }
    rho = ((rho + rho.adjoint()) / 2.0).eval();
    return DensityOperator::trusted(std::move(rho));
}

/// Gaussian description of a Fock-space state from its first and second
/// moments (the inverse bridge, used for cross-validation).
inline GaussianState gaussian_from_fock(const DensityOperator& rho) {
    HilbertSpace space(rho.dim());
    Matrix a = fock_annihilation(space);
    Complex am = trace_product(rho.matrix(), a);
    Complex a2 = trace_product(rho.matrix(), Matrix(a * a));
    double n = real_trace_product(rho.matrix(), Matrix(fock_creation(space) * a));

    Complex a2c = a2 - am * am;
    double nc = n - std::norm(am);
    double v1 = 0.25 * (2.0 * a2c.real() + 2.0 * nc + 1.0);
    double v2 = 0.25 * (-2.0 * a2c.real() + 2.0 * nc + 1.0);
    double cov = 0.5 * a2c.imag();
    return state_from_covariance(am.real(), am.imag(), v1, v2, cov);
}

// ---------------------------------------------------------------------------
// Closed-form relaxation under the squeezed-thermal-bath master equation
// (decay kappa, coefficients N and M): means decay at kappa, all second
// moments relax toward the squeezed-thermal values at rate 2 kappa.

inline GaussianState relax_in_squeezed_bath(const GaussianState& state0, double kappa, double n_bar,
                                            double r, double t) {
    if (!(kappa > 0)) throw DomainError("relax_in_squeezed_bath: kappa must be positive");
    if (t < 0) throw DomainError("relax_in_squeezed_bath: t must be >= 0");
    state0.validate();
    auto [N, M] = squeezed_bath_coefficients(n_bar, r);

    double v1_ss = 0.25 * (2.0 * N + 2.0 * M + 1.0);  // M < 0: squeezed axis x1
    double v2_ss = 0.25 * (2.0 * N - 2.0 * M + 1.0);
    auto [v1_0, v2_0, cov_0] = covariance_xy(state0);

    double decay2 = std::exp(-2.0 * kappa * t);
    double v1 = v1_ss + (v1_0 - v1_ss) * decay2;
    double v2 = v2_ss + (v2_0 - v2_ss) * decay2;
    double cov = cov_0 * decay2;

    double decay1 = std::exp(-kappa * t);
    return state_from_covariance(state0.x1_mean * decay1, state0.x2_mean * decay1, v1, v2, cov);
}

}  // namespace ergo
