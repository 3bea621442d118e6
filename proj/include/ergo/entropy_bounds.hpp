// entropy_bounds.hpp — Entropy-production functionals and the hierarchy of
// entropy-change bounds (second-law form vs. tightened passive-path form).

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "ergo/lindblad.hpp"
#include "ergo/passivity.hpp"
#include "ergo/quantum.hpp"

namespace ergo {

struct SigmaPoint {
    double time;
    double sigma;
};

struct BoundReport {
    double delta_S = 0.0;
    double bound_second_law = std::numeric_limits<double>::quiet_NaN();  // E_d/T (or E_d of the transformed path)
    double bound_tight = std::numeric_limits<double>::quiet_NaN();       // Q/T or Q'/T
    std::vector<SigmaPoint> sigma_trace;
    bool satisfied_second_law = false;
    bool satisfied_tight = false;
    double slack_second_law = std::numeric_limits<double>::quiet_NaN();
    double slack_tight = std::numeric_limits<double>::quiet_NaN();
    bool t_zero_sentinel = false;  // bounds reported as +/-inf, T below 1e-9
};

namespace detail {

inline void fill_satisfaction(BoundReport& report) {
    if (std::isfinite(report.bound_second_law)) {
        report.slack_second_law = report.delta_S - report.bound_second_law;
        report.satisfied_second_law = report.slack_second_law >= -1e-12;
    }
    if (std::isfinite(report.bound_tight)) {
        report.slack_tight = report.delta_S - report.bound_tight;
        report.satisfied_tight = report.slack_tight >= -1e-12;
    }
}

inline double signed_infinity(double x) {
    return x >= 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

constexpr double kTZeroGuard = 1e-9;

}  // namespace detail

/// Entropy-production rate sigma = -Tr[rho_dot (ln rho - ln rho_ss)].
/// rho_dot must come from the generator (L rho), not from finite differences.
/// Eigenvalues of rho below 1e-18 are floored inside the logarithm; rho_ss
/// must be full rank.
inline double spohn_rate(const DensityOperator& rho, const DensityOperator& rho_ss, const Matrix& rho_dot) {
    double scale = std::max(1.0, max_abs(rho_dot));
    if (std::abs(rho_dot.trace()) > 1e-10 * scale)
        throw ValidationError("spohn_rate: rho_dot is not traceless");
    if (!is_hermitian(rho_dot, 1e-10 * scale)) throw ValidationError("spohn_rate: rho_dot is not Hermitian");

    SpectralDecomposition ss = spectral(rho_ss.matrix());
    SpectralDecomposition sr = spectral(rho.matrix());
    double term_rho = 0.0;
    for (Eigen::Index i = 0; i < sr.eigenvalues.size(); ++i) {
        double w = (sr.eigenvectors.col(i).adjoint() * rho_dot * sr.eigenvectors.col(i))(0, 0).real();
        term_rho += w * std::log(std::max(sr.eigenvalues(i), 1e-18));
    }
    double term_ss = 0.0;
    for (Eigen::Index j = 0; j < ss.eigenvalues.size(); ++j) {
        double w = (ss.eigenvectors.col(j).adjoint() * rho_dot * ss.eigenvectors.col(j))(0, 0).real();
        if (ss.eigenvalues(j) < 1e-14 && std::abs(w) > 1e-3 * scale)
            throw SupportError("spohn_rate: rho_ss is rank deficient where rho_dot has weight");
        // below-resolution eigenvalues (truncated thermal tails, null-space
        // noise) are floored inside the log; the flow there is tiny
        term_ss += w * std::log(std::max(ss.eigenvalues(j), 1e-18));
    }
    return -(term_rho - term_ss);
}

/// Integrated entropy production for the relaxation rho0 -> rho_ss.
inline double entropy_production_total(const DensityOperator& rho0, const DensityOperator& rho_ss) {
    return relative_entropy(rho0, rho_ss);
}

/// sigma(t) along a stored trajectory of a static generator.
inline std::vector<SigmaPoint> spohn_trace(const GeneratorSpec& gen, const Trajectory& traj,
                                           const DensityOperator& rho_ss) {
    SpectralDecomposition ss = spectral(rho_ss.matrix());
    RVector log_ss(ss.eigenvalues.size());
    std::vector<bool> empty_direction(ss.eigenvalues.size(), false);
    for (Eigen::Index j = 0; j < log_ss.size(); ++j) {
        empty_direction[j] = ss.eigenvalues(j) < 1e-14;
        log_ss(j) = std::log(std::max(ss.eigenvalues(j), 1e-18));
    }

    std::vector<SigmaPoint> out;
    out.reserve(traj.size());
    Matrix rho_dot;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        gen.apply(traj.time(i), traj.state(i).matrix(), rho_dot);
        double scale = std::max(1.0, max_abs(rho_dot));
        SpectralDecomposition sr = spectral(traj.state(i).matrix(), 1e-9);
        double term_rho = 0.0;
        for (Eigen::Index k = 0; k < sr.eigenvalues.size(); ++k) {
            double w = (sr.eigenvectors.col(k).adjoint() * rho_dot * sr.eigenvectors.col(k))(0, 0).real();
            term_rho += w * std::log(std::max(sr.eigenvalues(k), 1e-18));
        }
        double term_ss = 0.0;
        for (Eigen::Index j = 0; j < log_ss.size(); ++j) {
            double w = (ss.eigenvectors.col(j).adjoint() * rho_dot * ss.eigenvectors.col(j))(0, 0).real();
            if (empty_direction[j] && std::abs(w) > 1e-3 * scale)
                throw SupportError("spohn_trace: rho_ss is rank deficient where the dynamics has weight");
            term_ss += w * log_ss(j);
        }
        out.push_back({traj.time(i), -(term_rho - term_ss)});
    }
    return out;
}

/// Trapezoidal integral of a sigma trace.
inline double integrate_sigma(const std::vector<SigmaPoint>& trace) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < trace.size(); ++i)
        total += 0.5 * (trace[i].sigma + trace[i + 1].sigma) * (trace[i + 1].time - trace[i].time);
    return total;
}

namespace detail {

inline void check_finality(const Trajectory& traj) {
    if (traj.size() < 2) throw DomainError("bound: trajectory needs at least 2 points");
    double moved = trace_distance(traj.final_state(), traj.state(traj.size() - 2));
    if (moved > 1e-6)
        throw StationarityError("bound: trajectory does not end near stationarity (last step moved " +
                                format_double(moved) + "); pass waive_finality to override");
}

}  // namespace detail

/// Second-law bound Delta S >= E_d / T from the dissipated energy of the
/// trajectory as integrated (valid as a bound for thermal baths; reported
/// as-is for non-thermal ones, where it may fail by a wide margin).
inline BoundReport second_law_bound(const Trajectory& traj, double temperature, bool waive_finality = false) {
    if (temperature < 0) throw DomainError("second_law_bound: temperature must be >= 0");
    if (!waive_finality) detail::check_finality(traj);

    BoundReport report;
    report.delta_S = von_neumann_entropy(traj.final_state()) - von_neumann_entropy(traj.initial_state());
    double e_d = dissipative_energy_along(traj);
    if (temperature < detail::kTZeroGuard) {
        report.t_zero_sentinel = true;
        report.bound_second_law = detail::signed_infinity(e_d);
        return report;
    }
    report.bound_second_law = e_d / temperature;
    detail::fill_satisfaction(report);
    return report;
}

/// Tight bound Delta S >= Q/T for a constant Hamiltonian, with Q the
/// passive-energy change between the endpoints.
inline BoundReport tight_bound_constant_H(const Trajectory& traj, double temperature,
                                          bool waive_finality = false) {
    if (temperature < 0) throw DomainError("tight_bound_constant_H: temperature must be >= 0");
    if (traj.size() < 2) throw DomainError("tight_bound_constant_H: trajectory needs at least 2 points");
    for (std::size_t i = 1; i < traj.size(); ++i) {
        if (traj.hamiltonian_ptr(i) == traj.hamiltonian_ptr(0)) continue;
        if (max_abs(traj.hamiltonian(i) - traj.hamiltonian(0)) > 1e-12)
            throw DomainError("tight_bound_constant_H: Hamiltonian varies; use tight_bound_time_dependent");
    }
    if (!waive_finality) detail::check_finality(traj);

    BoundReport report;
    report.delta_S = von_neumann_entropy(traj.final_state()) - von_neumann_entropy(traj.initial_state());
    double q = passive_state(traj.final_state(), traj.hamiltonian(traj.size() - 1)).passive_energy -
               passive_state(traj.initial_state(), traj.hamiltonian(0)).passive_energy;
    double e_d = dissipative_energy_along(traj);
    if (temperature < detail::kTZeroGuard) {
        report.t_zero_sentinel = true;
        report.bound_tight = detail::signed_infinity(q);
        report.bound_second_law = detail::signed_infinity(e_d);
        return report;
    }
    report.bound_tight = q / temperature;
    report.bound_second_law = e_d / temperature;
    detail::fill_satisfaction(report);
    return report;
}

/// Auxiliary passive-start trajectory: the supplied generator family (the
/// thermal counterpart of the one that produced traj) integrated from the
/// passive initial condition pi_0 on the same storage grid.
inline Trajectory auxiliary_passive_trajectory(const Trajectory& traj, const GeneratorSpec& family,
                                               IntegrationConfig cfg = {}) {
    if (family.family != traj.generator_family)
        throw DomainError("auxiliary_passive_trajectory: generator family '" + family.family +
                          "' does not match the trajectory's family '" + traj.generator_family + "'");
    DensityOperator pi0 = passive_state(traj.initial_state(), traj.hamiltonian(0)).passive_state;
    double spacing = (traj.final_time() - traj.initial_time()) / static_cast<double>(traj.size() - 1);
    cfg.store_every = spacing;
    return integrate(family, pi0, traj.initial_time(), traj.final_time(), cfg);
}

/// Tight bound Delta S >= Q'/T for slowly-varying Hamiltonians, with
/// Q' = int Tr[d(varrho)/dt H] dt along the auxiliary passive-start path.
inline BoundReport tight_bound_time_dependent(const Trajectory& traj, double temperature,
                                              const GeneratorSpec& family, IntegrationConfig cfg = {},
                                              bool waive_finality = false) {
    if (temperature < 0) throw DomainError("tight_bound_time_dependent: temperature must be >= 0");
    if (!waive_finality) detail::check_finality(traj);

    Trajectory aux = auxiliary_passive_trajectory(traj, family, cfg);
    BoundReport report;
    report.delta_S = von_neumann_entropy(traj.final_state()) - von_neumann_entropy(traj.initial_state());
    double q_prime = dissipative_energy_along(aux);
    double e_d = dissipative_energy_along(traj);
    if (temperature < detail::kTZeroGuard) {
        report.t_zero_sentinel = true;
        report.bound_tight = detail::signed_infinity(q_prime);
        report.bound_second_law = detail::signed_infinity(e_d);
        return report;
    }
    report.bound_tight = q_prime / temperature;
    report.bound_second_law = e_d / temperature;
    detail::fill_satisfaction(report);
    return report;
}

/// S(pi_0 || pi_ss): relative entropy of the passive counterparts, the
/// tightest of the entropy-change inequalities for non-thermal baths.
inline double passive_pair_inequality(const DensityOperator& pi0, const DensityOperator& pi_ss) {
    return relative_entropy(pi0, pi_ss);
}

}  // namespace ergo
