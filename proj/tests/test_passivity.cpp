#include <catch2/catch_amalgamated.hpp>

#include "ergo/passivity.hpp"
#include "oracles.hpp"

using namespace ergo;
using Catch::Approx;

namespace {

std::shared_ptr<const Matrix> shared_h(Matrix h) { return std::make_shared<const Matrix>(std::move(h)); }

}  // namespace

TEST_CASE("passive state construction", "[passivity]") {
    SECTION("thermal states are passive") {
        HilbertSpace space(20);
        Matrix h = 1.3 * number_operator(space);
        DensityOperator rho = gibbs_state(h, 0.9);
        PassiveDecomposition pd = passive_state(rho, h);
        CHECK(pd.ergotropy <= 1e-10);
        CHECK(max_abs(pd.passive_state.matrix() - rho.matrix()) < 1e-9);
    }
    SECTION("inverted qubit populations") {
        double omega = 1.7;
        Matrix h = 0.5 * omega * sigma_z();
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = 0.7;  // excited level (+omega/2) overpopulated
        m(1, 1) = 0.3;
        PassiveDecomposition pd = passive_state(DensityOperator::checked(m), h);
        CHECK(pd.ergotropy == Approx(0.4 * omega).epsilon(1e-12));
        // brute force over both arrangements
        double direct = 0.7 * (omega / 2) + 0.3 * (-omega / 2);
        double swapped = 0.3 * (omega / 2) + 0.7 * (-omega / 2);
        CHECK(pd.passive_energy == Approx(std::min(direct, swapped)).epsilon(1e-12));
    }
    SECTION("dim-4 diagonal case matches the permutation oracle") {
        auto gen = testing::rng(41);
        std::uniform_real_distribution<double> dist(0.1, 1.0);
        RVector pops(4);
        double z = 0;
        for (int i = 0; i < 4; ++i) {
            pops(i) = dist(gen);
            z += pops(i);
        }
        pops /= z;
        Matrix rho = Matrix::Zero(4, 4);
        Matrix h = Matrix::Zero(4, 4);
        std::vector<double> pvec, evec;
        for (int i = 0; i < 4; ++i) {
            rho(i, i) = pops(i);
            h(i, i) = dist(gen) * 3.0;
            pvec.push_back(pops(i));
        }
        SpectralDecomposition sd = spectral(h);
        for (int i = 0; i < 4; ++i) evec.push_back(sd.eigenvalues(i));
        PassiveDecomposition pd = passive_state(DensityOperator::checked(rho), h);
        // library populations are rho's eigenvalues ascending
        std::sort(pvec.begin(), pvec.end());
        CHECK(pd.passive_energy == testing::min_energy_over_permutations(pvec, evec));
    }
    SECTION("extraction unitary maps rho to pi and preserves entropy") {
        auto gen = testing::rng(43);
        for (int trial = 0; trial < 20; ++trial) {
            int dim = 2 + static_cast<int>(gen() % 7);
            DensityOperator rho = testing::random_density(dim, gen);
            Matrix h = testing::random_hermitian(dim, gen);
            PassiveDecomposition pd = passive_state(rho, h);
            CHECK(max_abs(pd.extraction_unitary * rho.matrix() * pd.extraction_unitary.adjoint() -
                          pd.passive_state.matrix()) < 1e-9);
            CHECK(von_neumann_entropy(pd.passive_state) == Approx(von_neumann_entropy(rho)).margin(1e-9));
            CHECK(pd.ergotropy >= -1e-10);
            CHECK(pd.total_energy == Approx(pd.passive_energy + pd.ergotropy).margin(1e-9));
            // passive state commutes with H (non-degenerate random H)
            CHECK(max_abs(pd.passive_state.matrix() * h - h * pd.passive_state.matrix()) < 1e-9);
        }
    }
    SECTION("thermal-state passivity for random H and T") {
        auto gen = testing::rng(47);
        std::uniform_real_distribution<double> temp(0.2, 5.0);
        for (int trial = 0; trial < 20; ++trial) {
            int dim = 2 + static_cast<int>(gen() % 6);
            Matrix h = testing::random_hermitian(dim, gen);
            DensityOperator rho = gibbs_state(h, temp(gen));
            CHECK(ergotropy(rho, h) <= 1e-10);
        }
    }
    SECTION("degenerate H: passive energy invariant under basis rotations in the block") {
        // H with a two-fold degenerate level; rotate the degenerate block
        Matrix h = Matrix::Zero(3, 3);
        h(0, 0) = 1.0;
        h(1, 1) = 1.0;
        h(2, 2) = 2.0;
        auto gen = testing::rng(53);
        DensityOperator rho = testing::random_density(3, gen);
        double base = passive_state(rho, h).passive_energy;
        for (int trial = 0; trial < 5; ++trial) {
            Matrix u = Matrix::Identity(3, 3);
            Matrix block = testing::random_unitary(2, gen);
            u.topLeftCorner(2, 2) = block;
            Matrix h_rot = u * h * u.adjoint();  // same operator up to round-off
            double rotated = passive_state(rho, h_rot).passive_energy;
            CHECK(rotated == Approx(base).margin(1e-9));
        }
    }
}

TEST_CASE("trajectory ledger integrals", "[passivity]") {
    SECTION("constant Hamiltonian gives exactly zero work") {
        auto gen = testing::rng(59);
        auto h = shared_h(testing::random_hermitian(3, gen));
        Trajectory traj;
        for (int i = 0; i < 5; ++i) traj.append(0.1 * i, testing::random_density(3, gen), h);
        CHECK(work_along(traj) == 0.0);
        CHECK(dissipative_energy_along(traj) == Approx(energy_change(traj)).margin(1e-12));
    }
    SECTION("static state under a linear frequency ramp") {
        // H(t) = omega(t) n with fixed rho: W = <n> (omega_1 - omega_0)
        HilbertSpace space(12);
        DensityOperator rho = thermal_oscillator(space, 0.7);
        Matrix n_op = number_operator(space);
        double mean_n = real_trace_product(rho.matrix(), n_op);  // truncated mean
        Trajectory traj;
        int steps = 200;
        for (int i = 0; i <= steps; ++i) {
            double t = static_cast<double>(i) / steps;
            double omega = 1.0 + t;  // 1 -> 2
            traj.append(t, rho, shared_h(omega * n_op));
        }
        CHECK(work_along(traj) == Approx(mean_n * 1.0).epsilon(1e-10));
        CHECK(dissipative_energy_along(traj) == Approx(0.0).margin(1e-10));
    }
    SECTION("unitary trajectory has zero dissipative energy") {
        auto gen = testing::rng(61);
        Matrix h = testing::random_hermitian(4, gen);
        auto hp = shared_h(h);
        DensityOperator rho0 = testing::random_density(4, gen);
        Trajectory traj;
        int steps = 400;
        double t_final = 1.0;
        SpectralDecomposition sd = spectral(h);
        for (int i = 0; i <= steps; ++i) {
            double t = t_final * i / steps;
            CVector phases(4);
            for (int k = 0; k < 4; ++k) phases(k) = std::exp(Complex(0, -sd.eigenvalues(k) * t));
            Matrix u = sd.eigenvectors * phases.asDiagonal() * sd.eigenvectors.adjoint();
            traj.append(t, DensityOperator::trusted(u * rho0.matrix() * u.adjoint()), hp);
        }
        CHECK(std::abs(dissipative_energy_along(traj)) < 1e-9);
        EnergyLedger ledger = ledger_for_stroke(traj);
        CHECK(std::abs(ledger.heat) < 1e-6);
        CHECK(std::abs(ledger.work) < 1e-12);
    }
    SECTION("thermal relaxation at constant H: E_d is the endpoint energy difference") {
        // two-point trajectory is enough for the constant-H shortcuts
        Matrix h = 0.5 * sigma_z();
        auto hp = shared_h(h);
        Matrix excited = Matrix::Zero(2, 2);
        excited(0, 0) = 1.0;
        DensityOperator rho0 = DensityOperator::checked(excited);
        DensityOperator rho1 = gibbs_state(h, 0.5);
        Trajectory traj;
        traj.append(0.0, rho0, hp);
        traj.append(1.0, rho1, hp);
        double de = real_trace_product(rho1.matrix(), h) - real_trace_product(rho0.matrix(), h);
        CHECK(dissipative_energy_along(traj) == Approx(de).margin(1e-12));
        // heat equals the passive-energy difference, and the split closes
        EnergyLedger ledger = ledger_for_stroke(traj);
        double dpas = passive_state(rho1, h).passive_energy - passive_state(rho0, h).passive_energy;
        CHECK(ledger.heat == Approx(dpas).margin(1e-12));
        CHECK(ledger.dissipative_ergotropy == Approx(ledger.dissipative_energy - ledger.heat).margin(1e-12));
        // all initial ergotropy is lost: Delta W|_d = -W_0
        double w0 = ergotropy(rho0, h);
        CHECK(ledger.dissipative_ergotropy == Approx(-w0).margin(1e-9));
    }
    SECTION("purely unitary ergotropy extraction: heat = 0") {
        auto gen = testing::rng(67);
        Matrix h = testing::random_hermitian(3, gen);
        auto hp = shared_h(h);
        DensityOperator rho = testing::random_density(3, gen);
        PassiveDecomposition pd = passive_state(rho, h);
        Trajectory traj;
        traj.append(0.0, rho, hp);
        traj.append(1.0, pd.passive_state, hp);
        CHECK(std::abs(heat_along(traj)) < 1e-10);
    }
    SECTION("first-law closure on a synthetic driven-dissipative path") {
        auto gen = testing::rng(71);
        HilbertSpace space(8);
        Matrix n_op = number_operator(space);
        Trajectory traj;
        int steps = 300;
        for (int i = 0; i <= steps; ++i) {
            double t = static_cast<double>(i) / steps;
            double omega = 1.0 + 0.5 * t;
            double nbar = 0.3 + 0.4 * t;
            traj.append(t, thermal_oscillator(space, nbar), shared_h(omega * n_op));
        }
        double de = energy_change(traj);
        EnergyLedger ledger = ledger_for_stroke(traj);
        CHECK(std::abs(de - ledger.work - ledger.dissipative_energy) <= 1e-6 * std::max(std::abs(de), 1.0));
        CHECK(std::abs(ledger.dissipative_energy - ledger.heat - ledger.dissipative_ergotropy) <= 1e-9);
    }
    SECTION("fewer than two points rejected") {
        Trajectory traj;
        traj.append(0.0, maximally_mixed(2), shared_h(sigma_z()));
        CHECK_THROWS_AS(work_along(traj), DomainError);
    }
}

TEST_CASE("ergotropy non-negativity sweep", "[passivity]") {
    auto gen = testing::rng(73);
    for (int trial = 0; trial < 500; ++trial) {
        int dim = 2 + static_cast<int>(gen() % 7);
        DensityOperator rho = testing::random_density(dim, gen);
        Matrix h = testing::random_hermitian(dim, gen);
        CHECK(passive_state(rho, h).ergotropy >= -1e-10);
    }
}

TEST_CASE("permutation-oracle equivalence across dims", "[passivity]") {
    auto gen = testing::rng(79);
    for (int trial = 0; trial < 60; ++trial) {
        int dim = 2 + static_cast<int>(gen() % 4);  // 2..5
        DensityOperator rho = testing::random_density(dim, gen);
        Matrix h = testing::random_hermitian(dim, gen);
        PassiveDecomposition pd = passive_state(rho, h);
        SpectralDecomposition sr = spectral(rho.matrix());
        SpectralDecomposition sh = spectral(h);
        std::vector<double> pops(sr.eigenvalues.data(), sr.eigenvalues.data() + dim);
        std::vector<double> energies(sh.eigenvalues.data(), sh.eigenvalues.data() + dim);
        double oracle = testing::min_energy_over_permutations(pops, energies);
        CHECK(pd.passive_energy == oracle);  // bit-identical accumulation
    }
}
