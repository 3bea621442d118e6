// lindblad.hpp — Markovian master-equation generators and adaptive
// integration for static and slowly-varying (adiabatic) generators.
//
// Conventions:
//   * Dissipator D(A,B)[rho] := 2 A rho B - B A rho - rho B A.
//   * Bosonic bath generators act in the frame co-rotating with the mode
//     frequency: the free Hamiltonian omega(t) a†a is recorded for energy
//     bookkeeping (Trajectory snapshots) but does not enter the equation of
//     motion; the squeezed-bath coefficients are constants in this frame.
//     All ledger quantities (energies, entropies, passive states) commute
//     with the frame rotation, so they are identical in either frame.
//   * Vectorization is column-major (Eigen default): vec index = col*dim+row.

#pragma once

#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <vector>

#include "ergo/passivity.hpp"
#include "ergo/quantum.hpp"

namespace ergo {

// ---------------------------------------------------------------------------

struct DissipatorTerm {
    Matrix A;
    Matrix B;
    double rate = 0.0;  // may be negative only for anomalous (squeezed) cross-terms
    Matrix BA;          // cached product

    DissipatorTerm(Matrix a, Matrix b, double r)
        : A(std::move(a)), B(std::move(b)), rate(r), BA(B * A) {}
};

/// Squeezed-thermal-bath master-equation coefficients.
struct SqueezedBathCoefficients {
    double N;
    double M;
};

inline SqueezedBathCoefficients squeezed_bath_coefficients(double n_bar, double r) {
    if (n_bar < 0) throw DomainError("squeezed_bath_coefficients: n_bar must be >= 0");
    if (r < 0) throw DomainError("squeezed_bath_coefficients: r must be >= 0");
    double ch = std::cosh(r), sh = std::sinh(r);
    double N = n_bar * (ch * ch + sh * sh) + sh * sh;
    double M = -ch * sh * (2.0 * n_bar + 1.0);
    // complete positivity: N(N+1) - M^2 equals n_bar(n_bar+1) identically
    double residual = N * (N + 1.0) - M * M - n_bar * (n_bar + 1.0);
    if (std::abs(residual) > 1e-9 * (1.0 + N * N) || N * (N + 1.0) - M * M < -1e-12)
        throw ValidationError("squeezed_bath_coefficients: complete-positivity identity violated");
    return {N, M};
}

/// Excess excitation of the squeezed-bath steady state over thermal.
inline double squeezed_excess_occupation(double n_bar, double r) {
    double sh = std::sinh(r);
    return (2.0 * n_bar + 1.0) * sh * sh;
}

// ---------------------------------------------------------------------------
// Fused application of the bosonic generator family
//
//   L rho = -i omega [a†a, rho]
//           + down D(a,a†) + up D(a†,a) + anomalous (D(a,a) + D(a†,a†))
//           + (eps/2)[a†²,rho] - (eps*/2)[a²,rho]          (squeeze drive)
//           + beta [a†,rho] - beta* [a,rho]                (linear drive)
//
// written entrywise with truncated operator products, so it agrees with the
// generic matrix-product path to round-off.

struct BosonicTerms {
    double omega = 0.0;
    double down = 0.0;
    double up = 0.0;
    double anomalous = 0.0;
    Complex squeeze_drive = 0.0;
    Complex linear_drive = 0.0;
};

namespace detail {

inline void apply_bosonic(const BosonicTerms& c, const std::vector<double>& s, const Matrix& rho,
                          Matrix& out) {
    const int d = static_cast<int>(rho.rows());
    out.resize(d, d);
    const Complex i_unit(0.0, 1.0);
    for (int n = 0; n < d; ++n) {
        for (int m = 0; m < d; ++m) {
            Complex acc(0.0, 0.0);
            const Complex r_nm = rho(n, m);

            if (c.omega != 0.0) acc += -i_unit * c.omega * static_cast<double>(n - m) * r_nm;

            if (c.down != 0.0) {
                Complex t(0.0, 0.0);
                if (n + 1 < d && m + 1 < d) t += 2.0 * s[n + 1] * s[m + 1] * rho(n + 1, m + 1);
                t -= static_cast<double>(n + m) * r_nm;
                acc += c.down * t;
            }
            if (c.up != 0.0) {
                Complex t(0.0, 0.0);
                if (n >= 1 && m >= 1) t += 2.0 * s[n] * s[m] * rho(n - 1, m - 1);
                // truncated a a† is diagonal with n+1 except 0 at the top level
                double nn = (n + 1 < d) ? static_cast<double>(n + 1) : 0.0;
                double mm = (m + 1 < d) ? static_cast<double>(m + 1) : 0.0;
                t -= (nn + mm) * r_nm;
                acc += c.up * t;
            }
            if (c.anomalous != 0.0) {
                Complex t(0.0, 0.0);
                // D(a,a): 2 a rho a - a² rho - rho a²
                if (n + 1 < d && m >= 1) t += 2.0 * s[n + 1] * s[m] * rho(n + 1, m - 1);
                if (n + 2 < d) t -= s[n + 1] * s[n + 2] * rho(n + 2, m);
                if (m >= 2) t -= s[m - 1] * s[m] * rho(n, m - 2);
                // D(a†,a†): 2 a† rho a† - a†² rho - rho a†²
                if (n >= 1 && m + 1 < d) t += 2.0 * s[n] * s[m + 1] * rho(n - 1, m + 1);
                if (n >= 2) t -= s[n - 1] * s[n] * rho(n - 2, m);
                if (m + 2 < d) t -= s[m + 1] * s[m + 2] * rho(n, m + 2);
                acc += c.anomalous * t;
            }
            if (c.squeeze_drive != 0.0) {
                Complex comm_pp(0.0, 0.0);  // [a†², rho]
                if (n >= 2) comm_pp += s[n - 1] * s[n] * rho(n - 2, m);
                if (m + 2 < d) comm_pp -= s[m + 1] * s[m + 2] * rho(n, m + 2);
                Complex comm_mm(0.0, 0.0);  // [a², rho]
                if (n + 2 < d) comm_mm += s[n + 1] * s[n + 2] * rho(n + 2, m);
                if (m >= 2) comm_mm -= s[m - 1] * s[m] * rho(n, m - 2);
                acc += 0.5 * c.squeeze_drive * comm_pp - 0.5 * std::conj(c.squeeze_drive) * comm_mm;
            }
            if (c.linear_drive != 0.0) {
                Complex comm_p(0.0, 0.0);  // [a†, rho]
                if (n >= 1) comm_p += s[n] * rho(n - 1, m);
                if (m + 1 < d) comm_p -= s[m + 1] * rho(n, m + 1);
                Complex comm_m(0.0, 0.0);  // [a, rho]
                if (n + 1 < d) comm_m += s[n + 1] * rho(n + 1, m);
                if (m >= 1) comm_m -= s[m] * rho(n, m - 1);
                acc += c.linear_drive * comm_p - std::conj(c.linear_drive) * comm_m;
            }
            out(n, m) = acc;
        }
    }
}

inline std::vector<double> sqrt_table(int dim) {
    std::vector<double> s(dim + 2);
    for (int k = 0; k < dim + 2; ++k) s[k] = std::sqrt(static_cast<double>(k));
    return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------

class GeneratorSpec {
public:
    std::string label;
    std::string family;  // identifies the master-equation family (squeezing excluded)
    bool time_dependent = false;
    bool fock_truncation_guard = false;
    int dim = 0;
    double rate_scale = 0.0;  // characteristic dissipative rate (for slow-driving checks)

    std::function<Matrix(double)> energy_hamiltonian;                       // bookkeeping H(t)
    std::function<Matrix(double)> drive_hamiltonian;                        // coherent part of L (optional)
    std::function<std::vector<DissipatorTerm>(double)> dissipators;         // optional
    std::function<void(double, const Matrix&, Matrix&)> fused_apply;        // optional fast path

    Matrix hamiltonian(double t) const {
        if (!energy_hamiltonian) throw Error("GeneratorSpec: missing energy Hamiltonian");
        return energy_hamiltonian(t);
    }

    void apply(double t, const Matrix& rho, Matrix& out) const {
        if (fused_apply) {
            fused_apply(t, rho, out);
            return;
        }
        out.setZero(rho.rows(), rho.cols());
        if (drive_hamiltonian) {
            Matrix h = drive_hamiltonian(t);
            out.noalias() += Complex(0, -1) * (h * rho - rho * h);
        }
        if (dissipators) {
            for (const DissipatorTerm& term : dissipators(t)) {
                out.noalias() += term.rate * (2.0 * (term.A * (rho * term.B)));
                out.noalias() -= term.rate * (term.BA * rho);
                out.noalias() -= term.rate * (rho * term.BA);
            }
        }
    }

    Matrix apply(double t, const Matrix& rho) const {
        Matrix out;
        apply(t, rho, out);
        return out;
    }

    /// Column-stacked matrix representation of L at time t.
    Matrix liouvillian_matrix(double t) const {
        const int d = dim;
        Matrix L(d * d, d * d);
        Matrix basis = Matrix::Zero(d, d);
        Matrix image;
        for (int c = 0; c < d; ++c) {
            for (int r = 0; r < d; ++r) {
                basis(r, c) = 1.0;
                apply(t, basis, image);
                basis(r, c) = 0.0;
                L.col(c * d + r) = Eigen::Map<const CVector>(image.data(), d * d);
            }
        }
        return L;
    }

    /// Power-iteration estimate of the spectral radius of L at time t,
    /// used to cap explicit step sizes near the stability boundary.
    double spectral_radius_estimate(double t, int iterations = 25) const {
        std::mt19937_64 rng(0x5eedULL);
        std::normal_distribution<double> dist(0.0, 1.0);
        Matrix v(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) v(r, c) = Complex(dist(rng), dist(rng));
        v = (v + v.adjoint()).eval();
        v /= max_abs(v);
        Matrix w;
        double norm = 0.0;
        for (int it = 0; it < iterations; ++it) {
            apply(t, v, w);
            norm = max_abs(w);
            if (norm < 1e-300) return 0.0;
            v = w / norm;
        }
        return norm;
    }
};

// ---------------------------------------------------------------------------
// Generator builders

namespace detail {

inline std::string format_double(double x) {
    std::ostringstream os;
    os.precision(12);
    os << x;
    return os.str();
}

}  // namespace detail

/// Squeezed-thermal-bath generator for a Fock-truncated oscillator at fixed
/// frequency: kappa(N+1) D(a,a†) + kappa N D(a†,a) - kappa M [D(a,a) + D(a†,a†)],
/// squeezing phase zero, with omega a†a recorded for energy bookkeeping.
inline GeneratorSpec squeezed_bath_generator(double kappa, double n_bar, double r, double omega,
                                             const HilbertSpace& space) {
    if (!(kappa > 0)) throw DomainError("squeezed_bath_generator: kappa must be positive");
    if (!(omega > 0)) throw DomainError("squeezed_bath_generator: omega must be positive");
    auto [N, M] = squeezed_bath_coefficients(n_bar, r);
    double target = n_bar + squeezed_excess_occupation(n_bar, r);
    if (space.dim - 1 < 10.0 * target)
        throw TruncationError("squeezed_bath_generator: need N_max >= 10*(n_bar + excess) = " +
                              detail::format_double(10.0 * target));

    GeneratorSpec gen;
    gen.dim = space.dim;
    gen.rate_scale = kappa;
    gen.fock_truncation_guard = true;
    gen.label = "squeezed_bath(kappa=" + detail::format_double(kappa) + ",n_bar=" + detail::format_double(n_bar) +
                ",r=" + detail::format_double(r) + ",omega=" + detail::format_double(omega) + ")";
    gen.family = "squeezed_bath(kappa=" + detail::format_double(kappa) + ",n_bar=" + detail::format_double(n_bar) +
                 ",omega=" + detail::format_double(omega) + ",dim=" + std::to_string(space.dim) + ")";

    auto h = std::make_shared<const Matrix>(omega * number_operator(space));
    gen.energy_hamiltonian = [h](double) { return *h; };

    Matrix a = fock_annihilation(space);
    Matrix ad = fock_creation(space);
    auto terms = std::make_shared<const std::vector<DissipatorTerm>>(std::vector<DissipatorTerm>{
        {a, ad, kappa * (N + 1.0)}, {ad, a, kappa * N}, {a, a, -kappa * M}, {ad, ad, -kappa * M}});
    gen.dissipators = [terms](double) { return *terms; };

    BosonicTerms coeffs;
    coeffs.down = kappa * (N + 1.0);
    coeffs.up = kappa * N;
    coeffs.anomalous = -kappa * M;
    auto table = std::make_shared<const std::vector<double>>(detail::sqrt_table(space.dim));
    gen.fused_apply = [coeffs, table](double, const Matrix& rho, Matrix& out) {
        detail::apply_bosonic(coeffs, *table, rho, out);
    };
    return gen;
}

/// Squeezed-bath generator with a linear frequency ramp omega(t) = omega0 +
/// rate*t at fixed bath temperature; coefficients are re-evaluated at the
/// instantaneous frequency (adiabatic generator).
inline GeneratorSpec squeezed_bath_generator_ramped(double kappa, double temperature, double r,
                                                    double omega0, double omega_rate,
                                                    const HilbertSpace& space) {
    if (!(kappa > 0)) throw DomainError("squeezed_bath_generator_ramped: kappa must be positive");
    if (!(temperature > 0)) throw DomainError("squeezed_bath_generator_ramped: temperature must be positive");
    if (!(omega0 > 0)) throw DomainError("squeezed_bath_generator_ramped: omega0 must be positive");

    GeneratorSpec gen;
    gen.dim = space.dim;
    gen.rate_scale = kappa;
    gen.fock_truncation_guard = true;
    gen.time_dependent = true;
    gen.label = "squeezed_bath_ramp(kappa=" + detail::format_double(kappa) +
                ",T=" + detail::format_double(temperature) + ",r=" + detail::format_double(r) +
                ",omega0=" + detail::format_double(omega0) + ",rate=" + detail::format_double(omega_rate) + ")";
    gen.family = "squeezed_bath_ramp(kappa=" + detail::format_double(kappa) +
                 ",T=" + detail::format_double(temperature) + ",omega0=" + detail::format_double(omega0) +
                 ",rate=" + detail::format_double(omega_rate) + ",dim=" + std::to_string(space.dim) + ")";

    auto num_op = std::make_shared<const Matrix>(number_operator(space));
    auto omega_at = [omega0, omega_rate](double t) {
        double w = omega0 + omega_rate * t;
        if (!(w > 0)) throw DomainError("squeezed_bath_generator_ramped: omega(t) must stay positive");
        return w;
    };
    gen.energy_hamiltonian = [num_op, omega_at](double t) -> Matrix { return omega_at(t) * (*num_op); };

    Matrix a = fock_annihilation(space);
    Matrix ad = fock_creation(space);
    gen.dissipators = [=](double t) {
        auto [N, M] = squeezed_bath_coefficients(bose_occupation(omega_at(t), temperature), r);
        return std::vector<DissipatorTerm>{
            {a, ad, kappa * (N + 1.0)}, {ad, a, kappa * N}, {a, a, -kappa * M}, {ad, ad, -kappa * M}};
    };

    auto table = std::make_shared<const std::vector<double>>(detail::sqrt_table(space.dim));
    gen.fused_apply = [kappa, temperature, r, omega_at, table](double t, const Matrix& rho, Matrix& out) {
        auto [N, M] = squeezed_bath_coefficients(bose_occupation(omega_at(t), temperature), r);
        BosonicTerms coeffs;
        coeffs.down = kappa * (N + 1.0);
        coeffs.up = kappa * N;
        coeffs.anomalous = -kappa * M;
        detail::apply_bosonic(coeffs, *table, rho, out);
    };
    return gen;
}

enum class PumpKind { none, linear, quadratic };

inline const char* pump_kind_name(PumpKind k) {
    switch (k) {
        case PumpKind::none: return "none";
        case PumpKind::linear: return "linear";
        case PumpKind::quadratic: return "quadratic";
    }
    return "?";
}

/// Reduced piston-mode generator: drift/diffusion dissipators with rates
/// (Gamma+D)/2 and D/2 plus the pump commutators, in the frame co-rotating at
/// the piston frequency nu (pump phase zero).
inline GeneratorSpec piston_generator(double Gamma, double D, double kappa_pump, PumpKind pump,
                                      double nu, const HilbertSpace& space) {
    if (D < 0) throw DomainError("piston_generator: D must be >= 0");
    if (Gamma + D < -1e-12) throw DomainError("piston_generator: Gamma + D must be >= 0");
    if (!(nu > 0)) throw DomainError("piston_generator: nu must be positive");

    GeneratorSpec gen;
    gen.dim = space.dim;
    gen.rate_scale = std::max(std::abs(Gamma), D);
    gen.fock_truncation_guard = true;
    gen.label = std::string("piston(Gamma=") + detail::format_double(Gamma) + ",D=" + detail::format_double(D) +
                ",pump=" + pump_kind_name(pump) + ",kappa=" + detail::format_double(kappa_pump) +
                ",nu=" + detail::format_double(nu) + ")";
    gen.family = std::string("piston(Gamma=") + detail::format_double(Gamma) + ",D=" + detail::format_double(D) +
                 ",nu=" + detail::format_double(nu) + ",dim=" + std::to_string(space.dim) + ")";

    auto h = std::make_shared<const Matrix>(nu * number_operator(space));
    gen.energy_hamiltonian = [h](double) { return *h; };

    Matrix a = fock_annihilation(space);
    Matrix ad = fock_creation(space);
    auto terms = std::make_shared<const std::vector<DissipatorTerm>>(
        std::vector<DissipatorTerm>{{a, ad, 0.5 * (Gamma + D)}, {ad, a, 0.5 * D}});
    gen.dissipators = [terms](double) { return *terms; };

    if (pump != PumpKind::none && kappa_pump != 0.0) {
        Matrix hp;
        if (pump == PumpKind::quadratic) {
            hp = Complex(0, 0.5 * kappa_pump) * (ad * ad) - Complex(0, 0.5 * kappa_pump) * (a * a);
        } else {
            hp = Complex(0, kappa_pump) * ad - Complex(0, kappa_pump) * a;
        }
        auto hp_shared = std::make_shared<const Matrix>(std::move(hp));
        gen.drive_hamiltonian = [hp_shared](double) { return *hp_shared; };
    }

    BosonicTerms coeffs;
    coeffs.down = 0.5 * (Gamma + D);
    coeffs.up = 0.5 * D;
    if (pump == PumpKind::quadratic) coeffs.squeeze_drive = kappa_pump;
    if (pump == PumpKind::linear) coeffs.linear_drive = kappa_pump;
    auto table = std::make_shared<const std::vector<double>>(detail::sqrt_table(space.dim));
    gen.fused_apply = [coeffs, table](double, const Matrix& rho, Matrix& out) {
        detail::apply_bosonic(coeffs, *table, rho, out);
    };
    return gen;
}

/// Thermal two-level generator with detailed-balance rates in the eigenbasis
/// of H = (omega/2) sigma_z.
inline GeneratorSpec thermal_qubit_generator(double gamma, double omega, double temperature) {
    if (!(gamma > 0) || !(omega > 0) || !(temperature > 0))
        throw DomainError("thermal_qubit_generator: gamma, omega, T must be positive");
    double n_bar = bose_occupation(omega, temperature);

    GeneratorSpec gen;
    gen.dim = 2;
    gen.rate_scale = gamma;
    gen.label = "thermal_qubit(gamma=" + detail::format_double(gamma) + ",omega=" + detail::format_double(omega) +
                ",T=" + detail::format_double(temperature) + ")";
    gen.family = gen.label;

    auto h = std::make_shared<const Matrix>(0.5 * omega * sigma_z());
    gen.energy_hamiltonian = [h](double) { return *h; };
    gen.drive_hamiltonian = [h](double) { return *h; };

    Matrix lower = Matrix::Zero(2, 2);  // |g><e| with excited = +omega/2 level
    lower(1, 0) = 1.0;
    Matrix raise = lower.adjoint();
    auto terms = std::make_shared<const std::vector<DissipatorTerm>>(std::vector<DissipatorTerm>{
        {lower, raise, 0.5 * gamma * (n_bar + 1.0)}, {raise, lower, 0.5 * gamma * n_bar}});
    gen.dissipators = [terms](double) { return *terms; };
    return gen;
}

/// Purely unitary generator (no dissipators).
inline GeneratorSpec hamiltonian_generator(Matrix h, const std::string& label = "unitary") {
    require_hermitian(h, "hamiltonian_generator");
    GeneratorSpec gen;
    gen.dim = static_cast<int>(h.rows());
    gen.rate_scale = 0.0;
    gen.label = label;
    gen.family = label;
    auto hp = std::make_shared<const Matrix>(std::move(h));
    gen.energy_hamiltonian = [hp](double) { return *hp; };
    gen.drive_hamiltonian = [hp](double) { return *hp; };
    return gen;
}

// ---------------------------------------------------------------------------
// Integration

struct IntegrationConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = 0.0;     // 0: derive from a spectral-radius estimate
    double store_every = 0.0;  // 0: (t1-t0)/1000
    bool validate_positivity = true;
    double positivity_floor = -1e-8;
    double trace_tol = 1e-8;
    double truncation_tail_tol = 1e-6;

    void validate() const {
        if (!(rel_tol > 0) || !(abs_tol > 0)) throw DomainError("IntegrationConfig: tolerances must be positive");
        if (max_step < 0 || store_every < 0) throw DomainError("IntegrationConfig: steps must be >= 0");
    }
};

namespace detail {

struct Dopri5Stepper {
    // Dormand-Prince 5(4) tableau
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    Matrix k1, k2, k3, k4, k5, k6, k7, ytmp, err;

    // One attempted step from (t, y, f(t,y)=k1) with size h. On exit yout and
    // k7 = f(t+h, yout) are the FSAL values. Returns the scaled error norm.
    template <typename F>
    double step(F&& f, double t, const Matrix& y, double h, Matrix& yout, double abs_tol, double rel_tol) {
        ytmp = y + h * a21 * k1;
        f(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        yout = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, yout, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double norm = 0.0;
        for (Eigen::Index idx = 0; idx < err.size(); ++idx) {
            double sc = abs_tol + rel_tol * std::max(std::abs(y(idx)), std::abs(yout(idx)));
            norm = std::max(norm, std::abs(err(idx)) / sc);
        }
        return norm;
    }
};

inline void validate_stored_state(const Matrix& rho, const GeneratorSpec& gen, const IntegrationConfig& cfg,
                                  double t) {
    double tr_drift = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
    if (tr_drift > cfg.trace_tol)
        throw TraceDriftError("integrate: trace drift " + format_double(tr_drift) + " at t=" + format_double(t));
    double herm = max_abs(rho - rho.adjoint());
    if (herm > 1e-9 * std::max(1.0, max_abs(rho)))
        throw ValidationError("integrate: hermiticity drift " + format_double(herm));
    if (gen.fock_truncation_guard && gen.dim >= 3) {
        double tail = rho(gen.dim - 1, gen.dim - 1).real() + rho(gen.dim - 2, gen.dim - 2).real();
        if (tail > cfg.truncation_tail_tol)
            throw TruncationError("integrate: top-two Fock-level population " + format_double(tail) +
                                  " at t=" + format_double(t) + "; increase the truncation");
    }
    if (cfg.validate_positivity) {
        Eigen::SelfAdjointEigenSolver<Matrix> es((rho + rho.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < cfg.positivity_floor)
            throw ValidationError("integrate: eigenvalue " + format_double(es.eigenvalues().minCoeff()) +
                                  " below positivity floor at t=" + format_double(t));
    }
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of drho/dt = L(t) rho.
/// States are stored on a uniform grid and re-validated; accepted steps are
/// clipped to land exactly on the storage points, so every stored state is an
/// error-controlled solution point (no interpolation error can undercut the
/// positivity floor). Trace renormalization is never applied.
inline Trajectory integrate(const GeneratorSpec& gen, const DensityOperator& rho0, double t0, double t1,
                            const IntegrationConfig& cfg = {}) {
    cfg.validate();
    if (!(t1 > t0)) throw DomainError("integrate: need t1 > t0");
    if (rho0.dim() != gen.dim) throw DomainError("integrate: state dimension does not match generator");

    const double span = t1 - t0;
    double store_every = cfg.store_every > 0 ? cfg.store_every : span / 1000.0;

    double max_step = cfg.max_step;
    if (max_step == 0.0) {
        double radius = gen.spectral_radius_estimate(t0);
        if (gen.time_dependent)
            radius = std::max({radius, gen.spectral_radius_estimate(0.5 * (t0 + t1)),
                               gen.spectral_radius_estimate(t1)});
        max_step = radius > 1e-12 ? 2.8 / radius : span;
    }
    max_step = std::min(max_step, span);

    auto f = [&gen](double t, const Matrix& y, Matrix& out) { gen.apply(t, y, out); };

    Trajectory traj;
    traj.generator_label = gen.label;
    traj.generator_family = gen.family;

    auto h_snapshot = [&gen](double t) { return std::make_shared<const Matrix>(gen.hamiltonian(t)); };
    std::shared_ptr<const Matrix> h_static;
    if (!gen.time_dependent) h_static = h_snapshot(t0);
    auto h_at = [&](double t) { return gen.time_dependent ? h_snapshot(t) : h_static; };

    Matrix y = rho0.matrix();
    detail::validate_stored_state(y, gen, cfg, t0);
    traj.append(t0, DensityOperator::trusted(y), h_at(t0));

    detail::Dopri5Stepper stepper;
    stepper.k1.resize(gen.dim, gen.dim);
    f(t0, y, stepper.k1);

    double t = t0;
    double h = std::min(max_step, span / 100.0);
    double next_store = t0 + store_every;
    Matrix ynew;
    const int max_rejects = 60;
    long step_count = 0;

    while (t < t1 - 1e-14 * span) {
        double h_free = std::min({h, t1 - t, max_step});  // controller's preferred step
        double h_attempt = h_free;
        // land exactly on the next storage point
        bool stores_here = false;
        if (next_store < t1 - 1e-12 * span && t + h_attempt >= next_store - 1e-12 * span) {
            h_attempt = next_store - t;
            stores_here = true;
        }

        double err = stepper.step(f, t, y, h_attempt, ynew, cfg.abs_tol, cfg.rel_tol);
        int rejects = 0;
        while (err > 1.0) {
            if (++rejects > max_rejects) throw Error("integrate: step size control failed (stiff problem?)");
            h_attempt *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            stores_here = false;
            err = stepper.step(f, t, y, h_attempt, ynew, cfg.abs_tol, cfg.rel_tol);
        }

        t += h_attempt;
        y.swap(ynew);
        stepper.k1.swap(stepper.k7);  // FSAL
        ++step_count;

        if (stores_here && t < t1 - 1e-14 * span) {
            detail::validate_stored_state(y, gen, cfg, t);
            traj.append(t, DensityOperator::trusted(y), h_at(t));
            next_store += store_every;
        }

        double factor = std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
        h = h_attempt * factor;
        if (stores_here && rejects == 0) h = std::max(h, h_free);  // clipping must not starve the controller
    }

    detail::validate_stored_state(y, gen, cfg, t1);
    if (traj.final_time() < t1 - 1e-12 * span)
        traj.append(t1, DensityOperator::trusted(y), h_at(t1));

    // slow-driving validity: ||dH/dt|| should stay below 0.1 * rate * ||H||
    if (gen.time_dependent && gen.rate_scale > 0 && traj.size() >= 2) {
        for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
            double dt = traj.time(i + 1) - traj.time(i);
            double dh = max_abs(traj.hamiltonian(i + 1) - traj.hamiltonian(i)) / dt;
            double scale = std::max(max_abs(traj.hamiltonian(i)), 1e-300);
            if (dh / scale > 0.1 * gen.rate_scale) {
                traj.slow_driving_violated = true;
                break;
            }
        }
    }
    (void)step_count;
    return traj;
}

/// Stationarity residual ||L rho||_max.
inline double stationarity_residual(const GeneratorSpec& gen, const DensityOperator& rho, double t = 0.0) {
    return max_abs(gen.apply(t, rho.matrix()));
}

struct StationarityResult {
    Trajectory trajectory;
    bool converged = false;
    double residual = 0.0;
};

/// Integrate a static generator in blocks of block_time until the state stops
/// moving (trace-distance change below tol per block), or max_time is reached.
inline StationarityResult integrate_to_stationarity(const GeneratorSpec& gen, const DensityOperator& rho0,
                                                    double block_time, double max_time,
                                                    const IntegrationConfig& cfg = {},
                                                    double trace_change_tol = 1e-7) {
    StationarityResult result;
    DensityOperator current = rho0;
    double t = 0.0;
    bool first = true;
    while (t < max_time - 1e-12) {
        double t_next = std::min(t + block_time, max_time);
        Trajectory block = integrate(gen, current, t, t_next, cfg);
        for (std::size_t i = first ? 0 : 1; i < block.size(); ++i)
            result.trajectory.append(block.time(i), block.state(i), block.hamiltonian_ptr(i));
        result.trajectory.generator_label = block.generator_label;
        result.trajectory.generator_family = block.generator_family;
        first = false;
        double moved = trace_distance(block.final_state(), current);
        current = block.final_state();
        t = t_next;
        if (moved < trace_change_tol) {
            result.converged = true;
            break;
        }
    }
    result.residual = stationarity_residual(gen, current, t);
    return result;
}

// ---------------------------------------------------------------------------
// Steady state via the vectorized Liouvillian null space

inline DensityOperator steady_state(const GeneratorSpec& gen, double t = 0.0) {
    if (gen.dim > 48)
        throw DomainError("steady_state: null-space solve limited to dim <= 48; use integrate_to_stationarity");
    const int d = gen.dim;
    Matrix L = gen.liouvillian_matrix(t);

    Eigen::BDCSVD<Matrix> svd(L, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    double smax = sv(0);
    int nullity = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= 1e-9 * smax) ++nullity;
    if (nullity == 0) throw Error("steady_state: Liouvillian has no null vector at rank tolerance 1e-9");
    if (nullity > 1)
        throw Error("steady_state: degenerate null space (nullity " + std::to_string(nullity) + ")");

    CVector v = svd.matrixV().col(sv.size() - 1);
    Matrix x = Eigen::Map<const Matrix>(v.data(), d, d);
    Matrix rho = (x + x.adjoint()) / 2.0;
    Complex tr = rho.trace();
    if (std::abs(tr) < 1e-12) throw Error("steady_state: null vector is traceless");
    rho /= tr;
    DensityOperator out = DensityOperator::trusted(std::move(rho));
    out.validate(1e-9, 1e-9, -1e-8);
    return out;
}

}  // namespace ergo
