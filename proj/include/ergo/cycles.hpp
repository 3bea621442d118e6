// cycles.hpp — Engine-cycle orchestration and efficiency analytics for the
// squeezed-bath Otto and Carnot variants, the equivalent hybrid cycle, and
// the operating-regime classification.
//
// Cycle runners come in two backends: a closed-form Gaussian path (exact
// stroke bookkeeping, used for the analytic results and the hybrid
// equivalence) and a Fock-space Lindblad path (numeric cross-check).
// Adiabatic strokes are exact occupation-preserving frequency maps; the
// ergotropy-extraction stroke is an instantaneous lossless unitary credited
// to the piston.

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ergo/entropy_bounds.hpp"
#include "ergo/gaussian.hpp"
#include "ergo/lindblad.hpp"
#include "ergo/passivity.hpp"
#include "ergo/quantum.hpp"

namespace ergo {

enum class Regime { engine, engine_and_refrigerator, second_kind, no_engine };

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::engine: return "engine";
        case Regime::engine_and_refrigerator: return "engine_and_refrigerator";
        case Regime::second_kind: return "second_kind";
        case Regime::no_engine: return "no_engine";
    }
    return "?";
}

enum class CycleBackend { gaussian_analytic, fock_numeric };
enum class BathKind { squeezed_first_kind, thermalizing_second_kind };

// ---------------------------------------------------------------------------
// Efficiency formulas

/// eta_max = 1 - (Tc/Th) Q'_h / E_dh. Valid when the hot bath supplies energy
/// and entropy: E_dh > 0 and Q'_h >= 0.
inline double eta_max_general(double t_c, double t_h, double q_prime_h, double e_dh) {
    if (!(t_c > 0) || !(t_h > 0)) throw DomainError("eta_max_general: temperatures must be positive");
    if (!(e_dh > 0)) throw RegimeError("eta_max_general: requires E_dh > 0 (hot bath supplies energy)");
    if (q_prime_h < 0) throw RegimeError("eta_max_general: requires Q'_h >= 0 (hot bath raises the entropy)");
    return 1.0 - (t_c / t_h) * (q_prime_h / e_dh);
}

struct EtaSigma {
    double value;
    bool unphysical;  // value exceeds 1
};

/// eta_Sigma = 1 - (Tc/Th) E~_dh / E_dh, the bound that follows from bare
/// entropy production. Unbounded above; flagged when it exceeds 1.
inline EtaSigma eta_sigma_general(double t_c, double t_h, double e_tilde_dh, double e_dh) {
    if (!(t_c > 0) || !(t_h > 0)) throw DomainError("eta_sigma_general: temperatures must be positive");
    if (!(e_dh > 0)) throw RegimeError("eta_sigma_general: requires E_dh > 0");
    double value = 1.0 - (t_c / t_h) * (e_tilde_dh / e_dh);
    return {value, value > 1.0 + 1e-15};
}

/// Ergotropy (in quanta at omega_h) that the squeezing unitary adds to the
/// thermal state entering the hot stroke along the dashed (thermal) path;
/// this is the Delta n_c appearing in the Otto eta_Sigma expression.
inline double otto_dashed_delta_n_c(double n_c, double r) {
    double sh = std::sinh(r);
    return (2.0 * n_c + 1.0) * sh * sh;
}

struct OttoEfficiencies {
    double eta;
    double eta_max;
    double eta_sigma;
    bool eta_sigma_unphysical;
};

/// Closed-form efficiencies of the modified Otto cycle. Occupations are the
/// Bose values at the stroke frequencies. Throws RegimeError outside the
/// engine regime (no work delivered, or the cold bath heats the working
/// fluid; see classify_regime for the eta = 1 branch). delta_n_c defaults to
/// 0 (thermal dashed path); pass otto_dashed_delta_n_c(n_c, r) for the
/// squeezed-bath comparison curves.
inline OttoEfficiencies otto_efficiencies(double n_c, double n_h, double delta_n_h, double omega_c,
                                          double omega_h, double t_c, double t_h, double delta_n_c = 0.0) {
    if (!(omega_c > 0) || !(omega_h > 0) || omega_c > omega_h)
        throw DomainError("otto_efficiencies: need 0 < omega_c <= omega_h");
    if (t_c <= 0 || t_h <= 0)
        throw DomainError("otto_efficiencies: temperatures must be positive; the T = 0 machine is handled by "
                          "zero_temperature_work");
    double supply = n_h + delta_n_h - n_c;  // E_dh / omega_h
    if (supply < 0) throw RegimeError("otto_efficiencies: n_h + delta_n_h < n_c, no work is delivered");
    if (n_c > n_h)
        throw RegimeError("otto_efficiencies: cold bath heats the working fluid (E_dc > 0); the machine runs "
                          "as engine and refrigerator with eta = 1");
    if (supply == 0) throw RegimeError("otto_efficiencies: vanishing hot-bath energy supply");

    OttoEfficiencies out{};
    out.eta = 1.0 - ((n_h - n_c) * omega_c) / (supply * omega_h);
    out.eta_max = 1.0 - (t_c / t_h) * (n_h - n_c) / supply;
    EtaSigma sigma = eta_sigma_general(t_c, t_h, n_h - n_c - delta_n_c, supply);
    out.eta_sigma = sigma.value;
    out.eta_sigma_unphysical = sigma.unphysical;
    return out;
}

/// Net work of the zero-temperature machine (n_bar = 0 baths): the squeezed
/// bath still delivers W = -(omega_h - omega_c) * Delta n_h with
/// Delta n_h = sinh^2 r.
inline double zero_temperature_work(double omega_c, double omega_h, double r) {
    if (!(omega_c > 0) || !(omega_h > 0) || omega_c > omega_h)
        throw DomainError("zero_temperature_work: need 0 < omega_c <= omega_h");
    double sh = std::sinh(r);
    return -(omega_h - omega_c) * sh * sh;
}

// ---------------------------------------------------------------------------
// Cycle configuration and result

struct OttoConfig {
    double omega_c = 1.0;
    double omega_h = 2.0;
    double t_c = 1.0;
    double t_h = 3.0;
    double r = 0.0;
    double kappa = 1.0;
    double stroke_time = 12.0;
    int fock_dim = 41;
    CycleBackend backend = CycleBackend::gaussian_analytic;
    BathKind bath = BathKind::squeezed_first_kind;

    void validate() const {
        if (!(omega_c > 0) || !(omega_h > 0) || omega_c > omega_h)
            throw DomainError("OttoConfig: need 0 < omega_c <= omega_h");
        if (t_c < 0 || t_h < 0 || t_c > t_h) throw DomainError("OttoConfig: need 0 <= T_c <= T_h");
        if ((t_c == 0) != (t_h == 0))
            throw DomainError("OttoConfig: the zero-temperature machine needs T_c = T_h = 0");
        if (r < 0) throw DomainError("OttoConfig: r must be >= 0");
        if (!(kappa > 0) || !(stroke_time > 0)) throw DomainError("OttoConfig: kappa, stroke_time positive");
        if (fock_dim < 3) throw DomainError("OttoConfig: fock_dim too small");
    }
};

struct CycleResult {
    std::vector<EnergyLedger> stroke_ledgers;
    std::vector<std::string> stroke_names;
    double net_work = 0.0;    // piston work; negative = extracted
    double efficiency = 0.0;  // regime-appropriate value
    double eta_max = std::numeric_limits<double>::quiet_NaN();
    double eta_sigma = std::numeric_limits<double>::quiet_NaN();
    double eta_carnot = std::numeric_limits<double>::quiet_NaN();
    bool eta_sigma_unphysical = false;
    Regime regime = Regime::no_engine;
    bool bounds_applicable = true;  // bound formulas defined (engine regime, T > 0)
    double external_work = 0.0;     // hybrid cycle: work from the auxiliary reservoir
    double cycle_closure = 0.0;     // sum of stroke Delta E; 0 for a closed cycle
    double t_h_real = std::numeric_limits<double>::quiet_NaN();  // second-kind machines
};

struct RegimeClassification {
    Regime regime;
    double efficiency;
};

/// Operating-regime label from the hot/cold stroke ledgers and the net work.
/// For hybrid cycles, fold external squeezing work into hot.dissipative_energy
/// before calling (the bath-plus-reservoir supplies that energy jointly).
inline RegimeClassification classify_regime(const EnergyLedger& hot, const EnergyLedger& cold,
                                            double net_work, BathKind bath_kind) {
    if (bath_kind == BathKind::thermalizing_second_kind) {
        if (hot.heat > 0 && net_work < 0) return {Regime::second_kind, -net_work / hot.heat};
        return {Regime::no_engine, 0.0};
    }
    if (net_work >= 0) return {Regime::no_engine, 0.0};
    if (cold.dissipative_energy > 0) return {Regime::engine_and_refrigerator, 1.0};
    if (hot.dissipative_energy > 0) return {Regime::engine, -net_work / hot.dissipative_energy};
    return {Regime::no_engine, 0.0};
}

// ---------------------------------------------------------------------------
// Stroke helpers

namespace detail {

inline EnergyLedger unitary_stroke(double work) {
    EnergyLedger l;
    l.work = work;
    return l;
}

inline EnergyLedger isochore_ledger(double omega, double occ_in, double occ_out, double pas_in,
                                    double pas_out) {
    EnergyLedger l;
    l.dissipative_energy = omega * (occ_out - occ_in);
    l.heat = omega * (pas_out - pas_in);
    l.dissipative_ergotropy = l.dissipative_energy - l.heat;
    return l;
}

struct IsochoreOutcome {
    GaussianState state;
    EnergyLedger ledger;
};

/// Gaussian-path isochore: relax for stroke_time in the squeezed (or thermal,
/// r = 0) bath at fixed frequency, with a stationarity check against the
/// exact steady state.
inline IsochoreOutcome gaussian_isochore(const GaussianState& in, double omega, double kappa, double n_bar,
                                         double r, double stroke_time) {
    GaussianState out = relax_in_squeezed_bath(in, kappa, n_bar, r, stroke_time);
    GaussianState ss = relax_in_squeezed_bath(in, kappa, n_bar, r, stroke_time * 64.0);
    double drift = std::abs(occupation(out) - occupation(ss)) +
                   std::abs(n_passive(out).n_pas - n_passive(ss).n_pas);
    if (drift > 1e-6 * std::max(1.0, occupation(ss)))
        throw StationarityError("gaussian_isochore: steady state not reached (residual " +
                                format_double(drift) + "); increase stroke_time");
    IsochoreOutcome res;
    res.state = out;
    res.ledger = isochore_ledger(omega, occupation(in), occupation(out), n_passive(in).n_pas,
                                 n_passive(out).n_pas);
    return res;
}

struct FockIsochoreOutcome {
    DensityOperator state;
    EnergyLedger ledger;
};

/// Fock-path isochore via Lindblad integration with the end-of-stroke
/// stationarity check (trace-distance change below 1e-7 per 1/kappa).
inline FockIsochoreOutcome fock_isochore(const DensityOperator& in, double omega, double kappa, double n_bar,
                                         double r, double stroke_time, const HilbertSpace& space) {
    GeneratorSpec gen = squeezed_bath_generator(kappa, n_bar, r, omega, space);
    IntegrationConfig cfg;
    cfg.store_every = stroke_time;    // endpoints only; ledgers are endpoint-exact at constant H
    cfg.validate_positivity = false;  // validated on the final state below
    double probe = std::min(1.0 / kappa, 0.5 * stroke_time);
    Trajectory main = integrate(gen, in, 0.0, stroke_time - probe, cfg);
    Trajectory tail = integrate(gen, main.final_state(), stroke_time - probe, stroke_time, cfg);
    double moved = trace_distance(tail.final_state(), main.final_state());
    if (moved > 1e-7 * (probe * kappa))
        throw StationarityError("fock_isochore: not stationary by the end of the stroke (moved " +
                                format_double(moved) + " per probe window); increase stroke_time");
    DensityOperator out = tail.final_state();
    out.validate(1e-9, 1e-8, -1e-8);

    Matrix n_op = number_operator(space);
    double occ_in = real_trace_product(in.matrix(), n_op);
    double occ_out = real_trace_product(out.matrix(), n_op);
    Matrix h = omega * n_op;
    double pas_in = passive_state(in, h).passive_energy / omega;
    double pas_out = passive_state(out, h).passive_energy / omega;
    FockIsochoreOutcome res{std::move(out), isochore_ledger(omega, occ_in, occ_out, pas_in, pas_out)};
    return res;
}

/// Auxiliary passive-start trajectory on the grid of a reference trajectory.
inline Trajectory integrate_aux_same_grid(const Trajectory& reference, const GeneratorSpec& gen,
                                          IntegrationConfig cfg) {
    DensityOperator pi0 = passive_state(reference.initial_state(), reference.hamiltonian(0)).passive_state;
    double spacing =
        (reference.final_time() - reference.initial_time()) / static_cast<double>(reference.size() - 1);
    cfg.store_every = spacing;
    return integrate(gen, pi0, reference.initial_time(), reference.final_time(), cfg);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Modified Otto cycle

namespace detail {

/// Shared bookkeeping once the stroke ledgers are known. The hot-stroke
/// ledger must sit at index 1 and the cold isochore last; external_work (the
/// hybrid's reservoir input, already listed as a stroke) is treated as part
/// of the hot energizing step for classification and bounds.
inline CycleResult assemble_otto_result(const OttoConfig& cfg, std::vector<EnergyLedger> ledgers,
                                        std::vector<std::string> names, double n_c_meas, double n_h_meas,
                                        double external_work = 0.0) {
    CycleResult res;
    res.stroke_ledgers = std::move(ledgers);
    res.stroke_names = std::move(names);
    res.external_work = external_work;

    for (const EnergyLedger& l : res.stroke_ledgers) {
        res.net_work += l.work;
        res.cycle_closure += l.work + l.dissipative_energy;
    }
    res.net_work -= external_work;  // reservoir work is not piston work

    EnergyLedger hot = res.stroke_ledgers[1];
    hot.dissipative_energy += external_work;
    hot.dissipative_ergotropy += external_work;
    const EnergyLedger& cold = res.stroke_ledgers.back();

    RegimeClassification cls = classify_regime(hot, cold, res.net_work, cfg.bath);
    res.regime = cls.regime;
    res.efficiency = cls.efficiency;

    bool zero_t = cfg.t_c < 1e-12 && cfg.t_h < 1e-12;
    if (zero_t) {
        // mechanical limit: no heat exchanged, eta_max = 1
        res.eta_max = 1.0;
        res.bounds_applicable = res.regime == Regime::engine;
        return res;
    }
    res.eta_carnot = 1.0 - cfg.t_c / cfg.t_h;
    if (cfg.bath == BathKind::thermalizing_second_kind) {
        res.t_h_real = bose_temperature(cfg.omega_h, n_h_meas);
        res.eta_carnot = res.t_h_real > 0 ? 1.0 - cfg.t_c / res.t_h_real
                                          : std::numeric_limits<double>::quiet_NaN();
        res.bounds_applicable = res.regime == Regime::second_kind;
        return res;
    }
    if (res.regime != Regime::engine || hot.dissipative_energy <= 0 || hot.heat < 0) {
        res.bounds_applicable = false;
        return res;
    }
    res.eta_max = eta_max_general(cfg.t_c, cfg.t_h, hot.heat, hot.dissipative_energy);
    double e_tilde = cfg.omega_h * (n_h_meas - n_c_meas - otto_dashed_delta_n_c(n_c_meas, cfg.r));
    EtaSigma sigma = eta_sigma_general(cfg.t_c, cfg.t_h, e_tilde, hot.dissipative_energy);
    res.eta_sigma = sigma.value;
    res.eta_sigma_unphysical = sigma.unphysical;
    return res;
}

}  // namespace detail

/// Modified Otto cycle: adiabatic compression, squeezed-bath isochore,
/// ergotropy-extraction unitary, adiabatic expansion, cold thermal isochore.
/// At T_c = T_h = 0 the extraction stroke is omitted and the squeezed state
/// is carried through the expansion into the cold contact (the
/// zero-temperature machine): the net work then reduces to
/// zero_temperature_work(). Second-kind machines replace the squeezed bath
/// by a thermalizing bath at the real temperature matching n_h + Delta n_h.
inline CycleResult run_modified_otto(const OttoConfig& cfg) {
    cfg.validate();
    const bool zero_t = cfg.t_c < 1e-12 && cfg.t_h < 1e-12;
    const bool second_kind = cfg.bath == BathKind::thermalizing_second_kind;
    double n_c = zero_t ? 0.0 : bose_occupation(cfg.omega_c, cfg.t_c);
    double n_h = zero_t ? 0.0 : bose_occupation(cfg.omega_h, cfg.t_h);
    double hot_target = n_h + squeezed_excess_occupation(n_h, cfg.r);
    const bool extract = !zero_t && !second_kind;

    std::vector<EnergyLedger> ledgers;
    std::vector<std::string> names;
    double n_c_meas = n_c, n_h_meas = n_h;

    if (cfg.backend == CycleBackend::gaussian_analytic) {
        GaussianState state = squeezed_thermal_state(n_c, 0.0);  // thermal
        ledgers.push_back(detail::unitary_stroke((cfg.omega_h - cfg.omega_c) * occupation(state)));
        names.push_back("adiabatic_compression");

        detail::IsochoreOutcome hot =
            second_kind
                ? detail::gaussian_isochore(state, cfg.omega_h, cfg.kappa, hot_target, 0.0, cfg.stroke_time)
                : detail::gaussian_isochore(state, cfg.omega_h, cfg.kappa, n_h, cfg.r, cfg.stroke_time);
        ledgers.push_back(hot.ledger);
        names.push_back(second_kind ? "hot_thermalizing_isochore" : "hot_squeezed_isochore");
        state = hot.state;
        n_h_meas = n_passive(state).n_pas;

        if (extract) {
            GaussianEnergySplit split = gaussian_energy_ergotropy(state, cfg.omega_h);
            ledgers.push_back(detail::unitary_stroke(-split.ergotropy));
            state = squeezed_thermal_state(n_passive(state).n_pas, 0.0);
        } else {
            ledgers.push_back(detail::unitary_stroke(0.0));
        }
        names.push_back("ergotropy_extraction");

        ledgers.push_back(detail::unitary_stroke((cfg.omega_c - cfg.omega_h) * occupation(state)));
        names.push_back("adiabatic_expansion");

        detail::IsochoreOutcome cold =
            detail::gaussian_isochore(state, cfg.omega_c, cfg.kappa, n_c, 0.0, cfg.stroke_time);
        ledgers.push_back(cold.ledger);
        names.push_back("cold_thermal_isochore");
    } else {
        HilbertSpace space(cfg.fock_dim);
        Matrix n_op = number_operator(space);
        DensityOperator state = thermal_oscillator(space, n_c);
        ledgers.push_back(
            detail::unitary_stroke((cfg.omega_h - cfg.omega_c) * real_trace_product(state.matrix(), n_op)));
        names.push_back("adiabatic_compression");

        detail::FockIsochoreOutcome hot =
            second_kind
                ? detail::fock_isochore(state, cfg.omega_h, cfg.kappa, hot_target, 0.0, cfg.stroke_time, space)
                : detail::fock_isochore(state, cfg.omega_h, cfg.kappa, n_h, cfg.r, cfg.stroke_time, space);
        ledgers.push_back(hot.ledger);
        names.push_back(second_kind ? "hot_thermalizing_isochore" : "hot_squeezed_isochore");
        state = hot.state;

        Matrix h_hot = cfg.omega_h * n_op;
        PassiveDecomposition hot_split = passive_state(state, h_hot);
        n_h_meas = hot_split.passive_energy / cfg.omega_h;
        if (extract) {
            ledgers.push_back(detail::unitary_stroke(-hot_split.ergotropy));
            state = hot_split.passive_state;
        } else {
            ledgers.push_back(detail::unitary_stroke(0.0));
        }
        names.push_back("ergotropy_extraction");

        ledgers.push_back(
            detail::unitary_stroke((cfg.omega_c - cfg.omega_h) * real_trace_product(state.matrix(), n_op)));
        names.push_back("adiabatic_expansion");

        detail::FockIsochoreOutcome cold =
            detail::fock_isochore(state, cfg.omega_c, cfg.kappa, n_c, 0.0, cfg.stroke_time, space);
        ledgers.push_back(cold.ledger);
        names.push_back("cold_thermal_isochore");
    }
    return detail::assemble_otto_result(cfg, std::move(ledgers), std::move(names), n_c_meas, n_h_meas);
}

/// Equivalent hybrid cycle: hot thermal isochore at T_h followed by an
/// external work reservoir squeezing the working fluid (W_ext equals the
/// ergotropy the squeezed bath would have imparted). Asserts agreement of
/// net work and efficiency with run_modified_otto to 1e-6.
inline CycleResult run_equivalent_hybrid(const OttoConfig& cfg) {
    cfg.validate();
    if (cfg.backend != CycleBackend::gaussian_analytic)
        throw DomainError("run_equivalent_hybrid: implemented for the Gaussian analytic backend");
    if (cfg.bath != BathKind::squeezed_first_kind)
        throw DomainError("run_equivalent_hybrid: defined for squeezed-bath machines");
    const bool zero_t = cfg.t_c < 1e-12 && cfg.t_h < 1e-12;
    double n_c = zero_t ? 0.0 : bose_occupation(cfg.omega_c, cfg.t_c);
    double n_h = zero_t ? 0.0 : bose_occupation(cfg.omega_h, cfg.t_h);

    std::vector<EnergyLedger> ledgers;
    std::vector<std::string> names;

    GaussianState state = squeezed_thermal_state(n_c, 0.0);
    ledgers.push_back(detail::unitary_stroke((cfg.omega_h - cfg.omega_c) * occupation(state)));
    names.push_back("adiabatic_compression");

    detail::IsochoreOutcome hot =
        detail::gaussian_isochore(state, cfg.omega_h, cfg.kappa, n_h, 0.0, cfg.stroke_time);
    ledgers.push_back(hot.ledger);
    names.push_back("hot_thermal_isochore");
    state = hot.state;
    double n_h_meas = n_passive(state).n_pas;

    // external squeezing (not a piston stroke)
    double external_work = 0.0;
    if (cfg.r > 0) {
        GaussianState squeezed = squeezed_thermal_state(n_passive(state).n_pas, cfg.r);
        external_work = cfg.omega_h * (occupation(squeezed) - occupation(state));
        state = squeezed;
    }
    ledgers.push_back(detail::unitary_stroke(external_work));
    names.push_back("external_squeezing");

    if (!zero_t) {
        GaussianEnergySplit split = gaussian_energy_ergotropy(state, cfg.omega_h);
        ledgers.push_back(detail::unitary_stroke(-split.ergotropy));
        state = squeezed_thermal_state(n_passive(state).n_pas, 0.0);
    } else {
        ledgers.push_back(detail::unitary_stroke(0.0));
    }
    names.push_back("ergotropy_extraction");

    ledgers.push_back(detail::unitary_stroke((cfg.omega_c - cfg.omega_h) * occupation(state)));
    names.push_back("adiabatic_expansion");

    detail::IsochoreOutcome cold =
        detail::gaussian_isochore(state, cfg.omega_c, cfg.kappa, n_c, 0.0, cfg.stroke_time);
    ledgers.push_back(cold.ledger);
    names.push_back("cold_thermal_isochore");

    CycleResult res = detail::assemble_otto_result(cfg, std::move(ledgers), std::move(names), n_c, n_h_meas,
                                                   external_work);

    CycleResult otto = run_modified_otto(cfg);
    double work_scale = std::max({std::abs(otto.net_work), std::abs(res.net_work), 1.0});
    if (std::abs(res.net_work - otto.net_work) > 1e-6 * work_scale ||
        std::abs(res.efficiency - otto.efficiency) > 1e-6)
        throw Error("run_equivalent_hybrid: hybrid cycle disagrees with the modified Otto cycle");
    return res;
}

// ---------------------------------------------------------------------------
// Modified Carnot cycle

struct CarnotConfig {
    double omega_c = 5.0;
    double omega_h = 8.0;
    double t_c = 2.5;
    double t_h = 5.0;
    double r = 0.2;
    double kappa = 1.0;
    double ramp_rate = 0.05;   // |d omega / dt|
    double settle_time = 8.0;  // bath contact after each ramp, units of 1/kappa
    int fock_dim = 41;
    CycleBackend backend = CycleBackend::fock_numeric;

    double omega_2() const { return omega_c * t_h / t_c; }
    double omega_1() const { return omega_h * t_c / t_h; }

    void validate() const {
        if (!(omega_c > 0) || !(omega_h > 0)) throw DomainError("CarnotConfig: frequencies must be positive");
        if (!(t_c > 0) || !(t_h > 0) || t_c > t_h) throw DomainError("CarnotConfig: need 0 < T_c <= T_h");
        if (!(omega_h <= omega_2() + 1e-12) || !(omega_c <= omega_h))
            throw DomainError("CarnotConfig: need omega_c <= omega_h <= omega_c T_h/T_c");
        if (!(ramp_rate > 0) || !(kappa > 0)) throw DomainError("CarnotConfig: rates must be positive");
        if (r < 0 || settle_time < 0) throw DomainError("CarnotConfig: r, settle_time must be >= 0");
        if (fock_dim < 3) throw DomainError("CarnotConfig: fock_dim too small");
    }
};

/// Energizing stroke of the modified Carnot cycle (stroke 2): frequency ramp
/// under squeezed-bath contact starting from the thermal state at omega_2,
/// plus the auxiliary thermal (r = 0) path from the same passive start on the
/// same grid. Used for the entropy-bound saturation curves.
struct CarnotStrokeTrajectories {
    Trajectory physical;
    Trajectory auxiliary;
};

inline CarnotStrokeTrajectories carnot_energizing_stroke(const CarnotConfig& cfg, double duration,
                                                         double store_every = 0.0) {
    cfg.validate();
    if (!(duration > 0)) throw DomainError("carnot_energizing_stroke: duration must be positive");
    HilbertSpace space(cfg.fock_dim);
    double w2 = cfg.omega_2();
    GeneratorSpec phys = squeezed_bath_generator_ramped(cfg.kappa, cfg.t_h, cfg.r, w2, -cfg.ramp_rate, space);
    GeneratorSpec aux = squeezed_bath_generator_ramped(cfg.kappa, cfg.t_h, 0.0, w2, -cfg.ramp_rate, space);

    DensityOperator start = thermal_oscillator(space, bose_occupation(w2, cfg.t_h));
    IntegrationConfig icfg;
    icfg.store_every = store_every > 0 ? store_every : duration / 1000.0;
    icfg.validate_positivity = false;

    CarnotStrokeTrajectories out;
    out.physical = integrate(phys, start, 0.0, duration, icfg);
    out.auxiliary = detail::integrate_aux_same_grid(out.physical, aux, icfg);
    return out;
}

namespace detail {

struct RampOutcome {
    EnergyLedger ledger;
    double q_prime;  // E_d of the auxiliary passive-start thermal path
};

/// Quasi-static ledger for a bath-contact frequency ramp along which the
/// state tracks the squeezed-thermal (or thermal) form at the instantaneous
/// frequency. The entering state is thermal, so the ledger includes the
/// isochoric squeeze-up transient at omega_from (pure ergotropy intake, no
/// heat). Simpson quadrature with the analytic Bose derivative
/// d n_bar / d omega = -n_bar (n_bar + 1) / T.
inline RampOutcome gaussian_ramp_stroke(double omega_from, double omega_to, double temperature, double r,
                                        int panels = 2000) {
    auto occ_at = [&](double w) {
        double nb = bose_occupation(w, temperature);
        return nb + squeezed_excess_occupation(nb, r);
    };
    auto heat_integrand = [&](double w) {  // omega * d n_bar / d omega
        double nb = bose_occupation(w, temperature);
        return -w * nb * (nb + 1.0) / temperature;
    };

    double h = (omega_to - omega_from) / panels;
    double work = 0.0, q_pas = 0.0;
    for (int i = 0; i < panels; ++i) {
        double w0 = omega_from + i * h, w1 = w0 + h, wm = w0 + 0.5 * h;
        work += h / 6.0 * (occ_at(w0) + 4.0 * occ_at(wm) + occ_at(w1));
        q_pas += h / 6.0 * (heat_integrand(w0) + 4.0 * heat_integrand(wm) + heat_integrand(w1));
    }
    RampOutcome out;
    double e_start_thermal = omega_from * bose_occupation(omega_from, temperature);
    double e_end = omega_to * occ_at(omega_to);
    out.ledger.work = work;
    out.ledger.dissipative_energy = e_end - e_start_thermal - work;
    out.ledger.heat = q_pas;
    out.ledger.dissipative_ergotropy = out.ledger.dissipative_energy - q_pas;
    out.q_prime = q_pas;  // quasi-static thermal path
    return out;
}

}  // namespace detail

/// Modified Carnot cycle: adiabat to omega_2 = omega_c T_h/T_c, energizing
/// squeezed-bath ramp to omega_h, unsqueezing stroke, adiabat to
/// omega_1 = omega_h T_c/T_h, cold isothermal ramp back to omega_c.
/// Quasi-static ramps give efficiency = eta_max.
inline CycleResult run_modified_carnot(const CarnotConfig& cfg) {
    cfg.validate();
    double w2 = cfg.omega_2(), w1 = cfg.omega_1();
    double n_start = bose_occupation(cfg.omega_c, cfg.t_c);  // equals n(omega_2, T_h)
    double n_h = bose_occupation(cfg.omega_h, cfg.t_h);
    double dn_h = squeezed_excess_occupation(n_h, cfg.r);

    std::vector<EnergyLedger> ledgers;
    std::vector<std::string> names;
    double q_prime_h = 0.0;
    bool slow_flag = false;

    if (cfg.backend == CycleBackend::gaussian_analytic) {
        ledgers.push_back(detail::unitary_stroke((w2 - cfg.omega_c) * n_start));
        names.push_back("adiabatic_compression");

        detail::RampOutcome hot = detail::gaussian_ramp_stroke(w2, cfg.omega_h, cfg.t_h, cfg.r);
        ledgers.push_back(hot.ledger);
        names.push_back("hot_squeezed_ramp");
        q_prime_h = hot.q_prime;

        ledgers.push_back(detail::unitary_stroke(-cfg.omega_h * dn_h));
        names.push_back("ergotropy_extraction");

        ledgers.push_back(detail::unitary_stroke((w1 - cfg.omega_h) * n_h));
        names.push_back("adiabatic_expansion");

        detail::RampOutcome cold = detail::gaussian_ramp_stroke(w1, cfg.omega_c, cfg.t_c, 0.0);
        ledgers.push_back(cold.ledger);
        names.push_back("cold_isothermal_ramp");
    } else {
        HilbertSpace space(cfg.fock_dim);
        Matrix n_op = number_operator(space);
        DensityOperator state = thermal_oscillator(space, n_start);
        ledgers.push_back(detail::unitary_stroke((w2 - cfg.omega_c) * n_start));
        names.push_back("adiabatic_compression");

        // stroke 2: ramp + settle under the squeezed bath; the auxiliary
        // passive-start thermal path supplies Q'_h on the same grid
        double ramp_time = (w2 - cfg.omega_h) / cfg.ramp_rate;
        double settle = cfg.settle_time / cfg.kappa;
        IntegrationConfig icfg;
        icfg.validate_positivity = false;
        IntegrationConfig endpoint_cfg = icfg;

        EnergyLedger hot;
        DensityOperator aux_state = thermal_oscillator(space, n_start);
        if (ramp_time > 0) {
            GeneratorSpec gen =
                squeezed_bath_generator_ramped(cfg.kappa, cfg.t_h, cfg.r, w2, -cfg.ramp_rate, space);
            GeneratorSpec aux_gen =
                squeezed_bath_generator_ramped(cfg.kappa, cfg.t_h, 0.0, w2, -cfg.ramp_rate, space);
            icfg.store_every = ramp_time / 1000.0;
            Trajectory ramp = integrate(gen, state, 0.0, ramp_time, icfg);
            slow_flag = slow_flag || ramp.slow_driving_violated;
            state = ramp.final_state();
            hot = ledger_for_stroke(ramp);
            Trajectory aux = detail::integrate_aux_same_grid(ramp, aux_gen, icfg);
            q_prime_h = dissipative_energy_along(aux);
            aux_state = aux.final_state();
        }
        if (settle > 0) {
            GeneratorSpec hold_gen = squeezed_bath_generator(cfg.kappa, n_h, cfg.r, cfg.omega_h, space);
            endpoint_cfg.store_every = settle;
            Trajectory hold = integrate(hold_gen, state, 0.0, settle, endpoint_cfg);
            state = hold.final_state();
            EnergyLedger hold_ledger = ledger_for_stroke(hold);
            hot.dissipative_energy += hold_ledger.dissipative_energy;
            hot.heat += hold_ledger.heat;
            hot.dissipative_ergotropy = hot.dissipative_energy - hot.heat;

            GeneratorSpec aux_hold = squeezed_bath_generator(cfg.kappa, n_h, 0.0, cfg.omega_h, space);
            Trajectory aux_traj = integrate(aux_hold, aux_state, 0.0, settle, endpoint_cfg);
            q_prime_h += dissipative_energy_along(aux_traj);
        }
        ledgers.push_back(hot);
        names.push_back("hot_squeezed_ramp");

        Matrix h_h = cfg.omega_h * n_op;
        PassiveDecomposition split = passive_state(state, h_h);
        ledgers.push_back(detail::unitary_stroke(-split.ergotropy));
        names.push_back("ergotropy_extraction");
        state = split.passive_state;

        double n_after = real_trace_product(state.matrix(), n_op);
        ledgers.push_back(detail::unitary_stroke((w1 - cfg.omega_h) * n_after));
        names.push_back("adiabatic_expansion");

        double cold_ramp_time = (cfg.omega_c - w1) / cfg.ramp_rate;
        EnergyLedger cold;
        if (cold_ramp_time > 0) {
            GeneratorSpec gen =
                squeezed_bath_generator_ramped(cfg.kappa, cfg.t_c, 0.0, w1, cfg.ramp_rate, space);
            icfg.store_every = cold_ramp_time / 1000.0;
            Trajectory cold_ramp = integrate(gen, state, 0.0, cold_ramp_time, icfg);
            slow_flag = slow_flag || cold_ramp.slow_driving_violated;
            state = cold_ramp.final_state();
            cold = ledger_for_stroke(cold_ramp);
        }
        if (settle > 0) {
            GeneratorSpec cold_hold = squeezed_bath_generator(
                cfg.kappa, bose_occupation(cfg.omega_c, cfg.t_c), 0.0, cfg.omega_c, space);
            endpoint_cfg.store_every = settle;
            Trajectory hold = integrate(cold_hold, state, 0.0, settle, endpoint_cfg);
            EnergyLedger hold_l = ledger_for_stroke(hold);
            cold.dissipative_energy += hold_l.dissipative_energy;
            cold.heat += hold_l.heat;
            cold.dissipative_ergotropy = cold.dissipative_energy - cold.heat;
        }
        ledgers.push_back(cold);
        names.push_back("cold_isothermal_ramp");
    }

    if (slow_flag)
        throw StationarityError("run_modified_carnot: ramp violates the slow-driving regime; reduce ramp_rate");

    CycleResult res;
    res.stroke_ledgers = std::move(ledgers);
    res.stroke_names = std::move(names);
    for (const EnergyLedger& l : res.stroke_ledgers) {
        res.net_work += l.work;
        res.cycle_closure += l.work + l.dissipative_energy;
    }
    const EnergyLedger& hot = res.stroke_ledgers[1];
    const EnergyLedger& cold = res.stroke_ledgers.back();
    RegimeClassification cls = classify_regime(hot, cold, res.net_work, BathKind::squeezed_first_kind);
    res.regime = cls.regime;
    res.efficiency = cls.efficiency;
    res.eta_carnot = 1.0 - cfg.t_c / cfg.t_h;
    if (res.regime == Regime::engine && hot.dissipative_energy > 0 && q_prime_h >= 0) {
        res.eta_max = eta_max_general(cfg.t_c, cfg.t_h, q_prime_h, hot.dissipative_energy);
    } else {
        res.bounds_applicable = false;
    }
    return res;
}

}  // namespace ergo
