#include <catch2/catch_amalgamated.hpp>

#include "ergo/gaussian.hpp"
#include "ergo/lindblad.hpp"
#include "oracles.hpp"

using namespace ergo;
using Catch::Approx;

TEST_CASE("squeezed bath coefficients", "[lindblad]") {
    SECTION("r = 0 reduces to the thermal bath") {
        auto [N, M] = squeezed_bath_coefficients(1.7, 0.0);
        CHECK(N == Approx(1.7).epsilon(1e-15));
        CHECK(M == 0.0);
    }
    SECTION("frozen values at n_bar = 0, r = 0.5") {
        auto [N, M] = squeezed_bath_coefficients(0.0, 0.5);
        CHECK(N == Approx(0.27154031740762189).epsilon(1e-14));   // sinh^2(0.5)
        CHECK(M == Approx(-0.58760059682190071).epsilon(1e-14));  // -cosh(0.5) sinh(0.5)
    }
    SECTION("complete-positivity identity N(N+1) - M^2 = n(n+1)") {
        auto gen = testing::rng(101);
        std::uniform_real_distribution<double> nd(0.0, 4.0), rd(0.0, 1.2);
        for (int i = 0; i < 100; ++i) {
            double n = nd(gen), r = rd(gen);
            auto [N, M] = squeezed_bath_coefficients(n, r);
            CHECK(N * (N + 1) - M * M >= -1e-12);
            CHECK(N * (N + 1) - M * M == Approx(n * (n + 1)).margin(1e-9 * (1 + N * N)));
        }
    }
}

TEST_CASE("generator application", "[lindblad]") {
    SECTION("fused bosonic fast path agrees with the generic product path") {
        HilbertSpace space(12);
        GeneratorSpec gen = squeezed_bath_generator(0.8, 0.6, 0.4, 1.3, space);
        GeneratorSpec generic = gen;
        generic.fused_apply = nullptr;  // force the matrix-product path
        auto rng = testing::rng(103);
        for (int trial = 0; trial < 10; ++trial) {
            Matrix rho = testing::random_complex_matrix(12, rng);
            Matrix a = gen.apply(0.0, rho);
            Matrix b = generic.apply(0.0, rho);
            CHECK(max_abs(a - b) < 1e-12 * std::max(1.0, max_abs(b)));
        }
    }
    SECTION("fused piston path agrees with the generic path, all pump kinds") {
        HilbertSpace space(8);
        auto rng = testing::rng(107);
        for (PumpKind pump : {PumpKind::none, PumpKind::linear, PumpKind::quadratic}) {
            GeneratorSpec gen = piston_generator(-1.0, 1.2, 0.1, pump, 2.0, space);
            GeneratorSpec generic = gen;
            generic.fused_apply = nullptr;
            Matrix rho = testing::random_complex_matrix(8, rng);
            CHECK(max_abs(gen.apply(0.0, rho) - generic.apply(0.0, rho)) < 1e-12);
        }
    }
    SECTION("trace annihilation on random states") {
        HilbertSpace space(10);
        GeneratorSpec gen = squeezed_bath_generator(1.0, 0.5, 0.3, 1.0, space);
        GeneratorSpec piston = piston_generator(-0.5, 0.8, 0.05, PumpKind::quadratic, 1.0, HilbertSpace(10));
        auto rng = testing::rng(109);
        for (int trial = 0; trial < 10; ++trial) {
            DensityOperator rho = testing::random_density(10, rng);
            CHECK(std::abs(gen.apply(0.0, rho.matrix()).trace()) < 1e-12);
            CHECK(std::abs(piston.apply(0.0, rho.matrix()).trace()) < 1e-12);
        }
    }
    SECTION("truncation precondition on the space") {
        CHECK_THROWS_AS(squeezed_bath_generator(1.0, 3.0, 0.8, 1.0, HilbertSpace(12)), TruncationError);
    }
}

TEST_CASE("unitary integration conserves purity", "[lindblad]") {
    auto rng = testing::rng(113);
    Matrix h = testing::random_hermitian(4, rng);
    GeneratorSpec gen = hamiltonian_generator(h);
    DensityOperator rho0 = testing::random_pure(4, rng);
    IntegrationConfig cfg;
    cfg.store_every = 0.5;
    Trajectory traj = integrate(gen, rho0, 0.0, 5.0, cfg);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        double purity = real_trace_product(traj.state(i).matrix(), traj.state(i).matrix());
        CHECK(purity == Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("thermal relaxation reaches the Gibbs state", "[lindblad]") {
    HilbertSpace space(25);
    double omega = 1.1, temperature = 0.9, kappa = 1.0;
    double n_bar = bose_occupation(omega, temperature);
    GeneratorSpec gen = squeezed_bath_generator(kappa, n_bar, 0.0, omega, space);
    DensityOperator rho0 = fock_state(space, 3);
    StationarityResult res = integrate_to_stationarity(gen, rho0, 1.0, 40.0);
    REQUIRE(res.converged);
    DensityOperator gibbs = gibbs_state(omega * number_operator(space), temperature);
    CHECK(trace_distance(res.trajectory.final_state(), gibbs) < 1e-6);
    // steady state from the null-space solve agrees
    DensityOperator ss = steady_state(gen);
    CHECK(trace_distance(ss, gibbs) < 1e-8);
}

TEST_CASE("squeezed-bath steady state", "[lindblad]") {
    HilbertSpace space(48);  // the +-2 coherence ladder converges slowly in the truncation
    double kappa = 1.0, omega = 1.0, n_bar = 0.4, r = 0.5;
    GeneratorSpec gen = squeezed_bath_generator(kappa, n_bar, r, omega, space);
    DensityOperator ss = steady_state(gen);
    Matrix a = fock_annihilation(space);
    double n = real_trace_product(ss.matrix(), Matrix(fock_creation(space) * a));
    Complex a2 = trace_product(ss.matrix(), Matrix(a * a));
    auto [N, M] = squeezed_bath_coefficients(n_bar, r);
    CHECK(n == Approx(n_bar + squeezed_excess_occupation(n_bar, r)).epsilon(1e-6));
    CHECK(a2.real() == Approx(M).epsilon(1e-6));
    CHECK(std::abs(a2.imag()) < 1e-10);
    CHECK(N == Approx(n).epsilon(1e-6));
}

TEST_CASE("qubit detailed balance", "[lindblad]") {
    double omega = 1.4, temperature = 0.8;
    GeneratorSpec gen = thermal_qubit_generator(0.7, omega, temperature);
    DensityOperator ss = steady_state(gen);
    double p_e = ss.matrix()(0, 0).real();  // +omega/2 level
    double p_g = ss.matrix()(1, 1).real();
    CHECK(p_e / p_g == Approx(std::exp(-omega / temperature)).epsilon(1e-9));
}

TEST_CASE("integration guards", "[lindblad]") {
    SECTION("truncation guard trips when the state outgrows the space") {
        // gain-regime piston amplifies occupation without bound
        HilbertSpace space(26);
        GeneratorSpec gen = piston_generator(-1.0, 1.0, 0.3, PumpKind::quadratic, 1.0, space);
        DensityOperator rho0 = to_fock(coherent_state(Complex(0.9, 0.0)), space);
        IntegrationConfig cfg;
        cfg.store_every = 0.25;
        CHECK_THROWS_AS(integrate(gen, rho0, 0.0, 12.0, cfg), TruncationError);
    }
    SECTION("invalid tolerances rejected") {
        IntegrationConfig cfg;
        cfg.rel_tol = 0.0;
        HilbertSpace space(4);
        GeneratorSpec gen = squeezed_bath_generator(1.0, 0.0, 0.0, 1.0, space);
        CHECK_THROWS_AS(integrate(gen, fock_state(space, 0), 0.0, 1.0, cfg), DomainError);
    }
    SECTION("dimension mismatch rejected") {
        GeneratorSpec gen = squeezed_bath_generator(1.0, 0.0, 0.0, 1.0, HilbertSpace(6));
        CHECK_THROWS_AS(integrate(gen, maximally_mixed(4), 0.0, 1.0), DomainError);
    }
}

TEST_CASE("trace and positivity along trajectories", "[lindblad]") {
    HilbertSpace space(26);
    GeneratorSpec gen = squeezed_bath_generator(1.0, 0.3, 0.4, 1.0, space);
    DensityOperator rho0 = fock_state(space, 2);
    IntegrationConfig cfg;
    cfg.store_every = 0.05;
    Trajectory traj = integrate(gen, rho0, 0.0, 6.0, cfg);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(std::abs(traj.state(i).matrix().trace().real() - 1.0) <= 1e-8);
        Eigen::SelfAdjointEigenSolver<Matrix> es(traj.state(i).matrix(), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("Gaussian closure of the Fock integration", "[lindblad][gaussian]") {
    // first and second moments of the Fock solver match the Gaussian closed
    // forms for squeezed-bath relaxations
    struct Case {
        double n_bar, r;
        int dim;
        double tol;
    };
    // the 1e-5 agreement needs extra truncation headroom at r = 0.8, where the
    // +-2 coherence ladder decays only like tanh(r) per quantum pair
    for (const Case& c : {Case{0.0, 0.5, 60, 1e-5}, Case{1.0, 0.3, 60, 1e-5}, Case{3.0, 0.1, 60, 1e-4},
                          Case{0.4, 0.8, 60, 1e-4}, Case{3.0, 0.1, 90, 1e-5}, Case{0.4, 0.8, 90, 1e-5}}) {
        HilbertSpace space(c.dim);
        double kappa = 1.0, omega = 1.0;
        GeneratorSpec gen = squeezed_bath_generator(kappa, c.n_bar, c.r, omega, space);
        GaussianState g0 = coherent_state(Complex(0.6, -0.3));
        DensityOperator rho0 = to_fock(g0, space);
        IntegrationConfig cfg;
        cfg.store_every = 0.5;
        Trajectory traj = integrate(gen, rho0, 0.0, 4.0, cfg);
        Matrix a = fock_annihilation(space);
        Matrix n_op = fock_creation(space) * a;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            GaussianState ref = relax_in_squeezed_bath(g0, kappa, c.n_bar, c.r, traj.time(i));
            double n_fock = real_trace_product(traj.state(i).matrix(), n_op);
            Complex a_fock = trace_product(traj.state(i).matrix(), a);
            Complex a2_fock = trace_product(traj.state(i).matrix(), Matrix(a * a));
            double scale = std::max(1.0, occupation(ref));
            CHECK(n_fock == Approx(occupation(ref)).margin(c.tol * scale));
            CHECK(a_fock.real() == Approx(mean_alpha(ref).real()).margin(c.tol * scale));
            CHECK(a_fock.imag() == Approx(mean_alpha(ref).imag()).margin(c.tol * scale));
            CHECK(a2_fock.real() == Approx(second_moment(ref).real()).margin(c.tol * scale));
            CHECK(a2_fock.imag() == Approx(second_moment(ref).imag()).margin(c.tol * scale));
        }
    }
}

TEST_CASE("liouvillian matrix is consistent with apply", "[lindblad]") {
    HilbertSpace space(5);
    GeneratorSpec gen = squeezed_bath_generator(0.9, 0.2, 0.3, 1.0, space);
    Matrix L = gen.liouvillian_matrix(0.0);
    auto rng = testing::rng(127);
    Matrix rho = testing::random_complex_matrix(5, rng);
    CVector v = Eigen::Map<const CVector>(rho.data(), 25);
    CVector lv = L * v;
    Matrix applied = gen.apply(0.0, rho);
    CVector av = Eigen::Map<const CVector>(applied.data(), 25);
    CHECK((lv - av).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ramped generator evaluates coefficients at the current frequency", "[lindblad]") {
    HilbertSpace space(25);
    double kappa = 1.0, temperature = 5.0, r = 0.2;
    GeneratorSpec gen = squeezed_bath_generator_ramped(kappa, temperature, r, 25.0, -0.05, space);
    CHECK(gen.time_dependent);
    // at t = 100 the frequency is 20: thermal occupation rises accordingly
    Matrix h0 = gen.hamiltonian(0.0);
    Matrix h100 = gen.hamiltonian(100.0);
    CHECK(h0(1, 1).real() == Approx(25.0));
    CHECK(h100(1, 1).real() == Approx(20.0));
    // fused application matches a freshly built static generator at that frequency
    auto rng = testing::rng(131);
    Matrix rho = testing::random_complex_matrix(25, rng);
    GeneratorSpec frozen = squeezed_bath_generator(kappa, bose_occupation(20.0, temperature), r, 20.0, space);
    CHECK(max_abs(gen.apply(100.0, rho) - frozen.apply(100.0, rho)) < 1e-12 * max_abs(rho));
}
