// Cavity-mediated coupling: eta/xi phasors, presets, interaction Hamiltonian,
// effective -chi J^2, Magnus closed form, and the lab-frame cosine model.

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tqsim/drive.hpp"

using namespace tqsim;

namespace {
DriveParams test_drive(double phi_minus = 0.0, double phi_plus = 0.0) {
    // beta = 0.1, delta = 1, chi = 0.04
    return DriveParams(0.2, 1.0, 9.0, 10.0, phi_minus, phi_plus, 1);
}
}  // namespace

TEST_CASE("drive parameter arithmetic and validation", "[drive]") {
    DriveParams d = test_drive();
    REQUIRE(d.beta() == Catch::Approx(0.1));
    REQUIRE(d.delta() == Catch::Approx(1.0));
    REQUIRE(d.chi() == Catch::Approx(0.04));
    REQUIRE(d.loop_time() == Catch::Approx(2.0 * M_PI));
    REQUIRE(d.beta_delta_ok());
    REQUIRE(d.delta_omega_ok());
    REQUIRE_THROWS_AS(DriveParams(0.1, 1.0, 10.0, 10.0), config_error);
    REQUIRE_THROWS_AS(DriveParams(0.1, 1.0, 9.0, 10.0, 0, 0, 0), config_error);
    REQUIRE_THROWS_AS(DriveParams(-0.1, 1.0, 9.0, 10.0), config_error);

    SECTION("chi scaling: beta quadratic, delta inverse") {
        DriveParams d2(0.4, 1.0, 9.0, 10.0);  // double beta, same delta
        REQUIRE(d2.chi() == Catch::Approx(4.0 * d.chi()));
        DriveParams d3(0.2, 1.0, 8.0, 10.0);  // double delta, same beta
        REQUIRE(d3.chi() == Catch::Approx(0.5 * d.chi()));
    }
    SECTION("identical drives give equal row/column couplings") {
        EffectiveCoupling c = effective_coupling(d);
        REQUIRE(c.chi_x == Catch::Approx(c.chi_y));
        REQUIRE(c.chi_x == Catch::Approx(0.04));
    }
}

TEST_CASE("eta and xi phasor sums", "[drive]") {
    SECTION("(phi_plus, phi_minus) = (0, 0)") {
        auto [eta, xi] = eta_xi(0.0, 0.0);
        REQUIRE(std::abs(eta - cxd(2, 0)) < 1e-14);
        REQUIRE(std::abs(xi - cxd(2, 0)) < 1e-14);
    }
    SECTION("(pi/2, pi/2)") {
        auto [eta, xi] = eta_xi(M_PI / 2, M_PI / 2);
        REQUIRE(std::abs(eta - cxd(0, -2)) < 1e-14);
        REQUIRE(std::abs(xi - cxd(0, -2)) < 1e-14);
    }
    SECTION("(pi/4, 0)") {
        auto [eta, xi] = eta_xi(M_PI / 4, 0.0);
        REQUIRE(std::abs(eta - cxd(1, -1)) < 1e-14);
        REQUIRE(std::abs(xi - cxd(1, 1)) < 1e-14);
    }
}

TEST_CASE("coupling presets", "[drive]") {
    SECTION("x preset gives eta = xi = 2 for any k") {
        for (long k : {0L, 1L, 2L, 5L}) {
            auto [pm, pp] = coupling_preset('x', k);
            REQUIRE(pm == 0.0);
            REQUIRE(pp == Catch::Approx(k * M_PI));
            auto [eta, xi] = eta_xi(pp, pm);
            REQUIRE(std::abs(eta - cxd(2, 0)) < 1e-12);
            REQUIRE(std::abs(xi - cxd(2, 0)) < 1e-12);
        }
    }
    SECTION("y preset gives eta = xi = -2i for any k") {
        for (long k : {0L, 1L, 3L}) {
            auto [pm, pp] = coupling_preset('y', k);
            auto [eta, xi] = eta_xi(pp, pm);
            REQUIRE(std::abs(eta - cxd(0, -2)) < 1e-12);
            REQUIRE(std::abs(xi - cxd(0, -2)) < 1e-12);
        }
    }
    SECTION("invalid axis") {
        REQUIRE_THROWS_AS(coupling_preset('z', 0), config_error);
    }
}

TEST_CASE("interaction Hamiltonian reduces to the collective forms", "[drive]") {
    HilbertSpace space = HilbertSpace::qubits_with_boson(2, 4);
    BosonOps b = boson_ops(space);
    std::vector<long> devs{0, 1};

    SECTION("x preset: 2 i beta (a† e^{i dt} - a e^{-i dt}) J_x") {
        auto [pm, pp] = coupling_preset('x', 1);
        DriveParams d = test_drive(pm, pp);
        Mat jx = collective_op('x', devs, space).m;
        for (double t : {0.0, 0.37, 1.9}) {
            const cxd e = std::exp(cxd(0, d.delta() * t));
            Mat want = cxd(0, 2 * d.beta()) * (e * b.adag - std::conj(e) * b.a) * jx;
            Mat got = interaction_hamiltonian(t, devs, d, space).m;
            REQUIRE((got - want).cwiseAbs().maxCoeff() < 1e-13);
        }
    }
    SECTION("y preset: 2 i beta (a† e^{i dt} - a e^{-i dt}) J_y") {
        auto [pm, pp] = coupling_preset('y', 0);
        DriveParams d = test_drive(pm, pp);
        Mat jy = collective_op('y', devs, space).m;
        const double t = 0.61;
        const cxd e = std::exp(cxd(0, d.delta() * t));
        Mat want = cxd(0, 2 * d.beta()) * (e * b.adag - std::conj(e) * b.a) * jy;
        Mat got = interaction_hamiltonian(t, devs, d, space).m;
        REQUIRE((got - want).cwiseAbs().maxCoeff() < 1e-13);
    }
    SECTION("Hermitian at arbitrary phases and times") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-M_PI, M_PI);
        for (int it = 0; it < 5; ++it) {
            DriveParams d = test_drive(u(rng), u(rng));
            Mat h = interaction_hamiltonian(std::abs(u(rng)), devs, d, space).m;
            REQUIRE(is_hermitian(h));
        }
    }
    SECTION("untouched devices stay untouched") {
        auto [pm, pp] = coupling_preset('x', 1);
        DriveParams d = test_drive(pm, pp);
        Mat sx0 = collective_op('x', {0}, space).m;
        Mat got = interaction_hamiltonian(0.2, {0}, d, space).m;
        const cxd e = std::exp(cxd(0, d.delta() * 0.2));
        Mat want = cxd(0, 2 * d.beta()) * (e * b.adag - std::conj(e) * b.a) * sx0;
        REQUIRE((got - want).cwiseAbs().maxCoeff() < 1e-13);
    }
    SECTION("errors") {
        DriveParams d = test_drive();
        REQUIRE_THROWS_AS(interaction_hamiltonian(0.0, {}, d, space),
                          config_error);
        REQUIRE_THROWS_AS(
            interaction_hamiltonian(0.0, {0}, d, HilbertSpace::qubits(2)),
            config_error);
    }
}

TEST_CASE("effective Hamiltonian -chi J^2", "[drive]") {
    SECTION("single device: -chi identity") {
        HilbertSpace space = HilbertSpace::qubits(1);
        Mat h = effective_hamiltonian('x', {0}, 0.3, space).m;
        REQUIRE((h + 0.3 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
    }
    SECTION("two devices: spectrum {-4 chi, -4 chi, 0, 0}") {
        HilbertSpace space = HilbertSpace::qubits(2);
        auto [w, v] =
            eigensolve_hermitian(effective_hamiltonian('x', {0, 1}, 0.5, space));
        REQUIRE(w(0) == Catch::Approx(-2.0));
        REQUIRE(w(1) == Catch::Approx(-2.0));
        REQUIRE(w(2) == Catch::Approx(0.0).margin(1e-12));
        REQUIRE(w(3) == Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("x -> y conjugation by exp(-i pi J_z / 4)") {
        HilbertSpace space = HilbertSpace::qubits(2);
        Mat jz = collective_op('z', {0, 1}, space).m;
        Mat r = expm_i(jz, M_PI / 4.0);
        Mat hx = effective_hamiltonian('x', {0, 1}, 0.7, space).m;
        Mat hy = effective_hamiltonian('y', {0, 1}, 0.7, space).m;
        REQUIRE((r * hx * r.adjoint() - hy).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("errors") {
        HilbertSpace space = HilbertSpace::qubits(1);
        REQUIRE_THROWS_AS(effective_hamiltonian('z', {0}, 0.3, space),
                          config_error);
        REQUIRE_THROWS_AS(effective_hamiltonian('x', {0}, 0.0, space),
                          config_error);
    }
}

TEST_CASE("Magnus coefficients match the quadrature oracle", "[drive]") {
    const double beta = 1.0, delta = 10.0;
    SECTION("alpha at a generic time") {
        cxd a = magnus_alpha(beta, delta, 0.13);
        REQUIRE(std::abs(a - oracle::frozen_alpha_t013) < 1e-12);
        REQUIRE(std::abs(a - oracle::magnus_alpha_quadrature(beta, delta, 0.13)) <
                1e-9);
    }
    SECTION("collective phase at a generic time") {
        REQUIRE(magnus_four_theta(beta, delta, 0.13) ==
                Catch::Approx(oracle::frozen_four_theta_t013).epsilon(1e-10));
    }
    SECTION("loop closure") {
        for (long k : {1L, 2L, 3L}) {
            REQUIRE(std::abs(magnus_alpha(beta, delta, 2 * M_PI * k / delta)) <
                    1e-13);
            REQUIRE(magnus_four_theta(beta, delta, 2 * M_PI * k / delta) ==
                    Catch::Approx(4 * beta * beta / delta * 2 * M_PI * k / delta));
        }
    }
}

TEST_CASE("closed-form propagator structure", "[drive]") {
    HilbertSpace space = HilbertSpace::qubits_with_boson(2, 6);
    auto [pm, pp] = coupling_preset('x', 1);
    DriveParams d = test_drive(pm, pp);
    std::vector<long> devs{0, 1};

    SECTION("t = 0 is the identity") {
        Mat u = closed_form_propagator('x', devs, d, 0.0, space).m;
        REQUIRE((u - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() <
                1e-12);
    }
    SECTION("unitary at generic time") {
        Mat u = closed_form_propagator('x', devs, d, 0.71, space).m;
        REQUIRE((u * u.adjoint() - Mat::Identity(u.rows(), u.cols()))
                    .cwiseAbs()
                    .maxCoeff() < 1e-10);
    }
    SECTION("loop closure factorizes: boson identity x exp(+i chi t J_x^2)") {
        const double t = d.loop_time();
        Mat u = closed_form_propagator('x', devs, d, t, space).m;
        Mat jx2 = collective_op('x', devs, space).m;
        jx2 = jx2 * jx2;
        Mat want = expm_i(jx2, -d.chi() * t);  // exp(+i chi t J_x^2)
        REQUIRE((u - want).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("single qubit at closure: global phase only") {
        HilbertSpace s1 = HilbertSpace::qubits_with_boson(1, 6);
        const double t = d.loop_time();
        Mat u = closed_form_propagator('x', {0}, d, t, s1).m;
        const cxd phase = std::exp(cxd(0, d.chi() * t));
        REQUIRE((u - phase * Mat::Identity(u.rows(), u.cols()))
                    .cwiseAbs()
                    .maxCoeff() < 1e-10);
    }
    SECTION("preset mismatch is rejected") {
        REQUIRE_THROWS_AS(closed_form_propagator('y', devs, d, 0.1, space),
                          config_error);
        auto [ym, yp] = coupling_preset('y', 1);
        DriveParams dy = test_drive(ym, yp);
        REQUIRE_THROWS_AS(closed_form_propagator('x', devs, dy, 0.1, space),
                          config_error);
        REQUIRE_NOTHROW(closed_form_propagator('y', devs, dy, 0.1, space));
    }
}

TEST_CASE("lab-frame cosine Hamiltonian", "[drive]") {
    HilbertSpace space = HilbertSpace::qubits_with_boson(1, 8);
    auto [pm, pp] = coupling_preset('x', 1);
    std::vector<long> devs{0};
    BosonOps b = boson_ops(space);
    const Mat id = Mat::Identity(space.total_dim(), space.total_dim());

    SECTION("g = 0: pure classical drive, no cavity coupling") {
        DriveParams d(0.0, 1.0, 9.0, 10.0, pm, pp, 1);
        Mat jx = collective_op('x', devs, space).m;
        for (double t : {0.0, 0.4}) {
            Mat h = full_flux_hamiltonian(t, devs, d, space).m;
            Mat want = d.omega_c * (b.number + 0.5 * id) -
                       2.0 * d.E_J * std::cos(d.omega * t) * jx;
            REQUIRE((h - want).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SECTION("small g at t = 0: cosine is even in g(a+a†)") {
        const double g = 0.05;
        DriveParams d(g, 1.0, 9.0, 10.0, pm, pp, 1);
        Mat h = full_flux_hamiltonian(0.0, devs, d, space).m;
        Mat jx = collective_op('x', devs, space).m;
        Mat q = b.a + b.adag;
        Mat cos2 = id - 0.5 * g * g * q * q;  // second-order Taylor
        Mat want = d.omega_c * (b.number + 0.5 * id) - 2.0 * d.E_J * cos2 * jx;
        // no first-order term survives; leading mismatch is O(g^4 * q^4)
        const double bound =
            2.0 * d.E_J * std::pow(g, 4) * spectral_norm(Mat(q * q * q * q)) / 24.0 * 4.0;
        REQUIRE((h - want).cwiseAbs().maxCoeff() < bound);
    }
    SECTION("Hermitian at generic time and flux") {
        DriveParams d(0.03, 1.0, 9.0, 10.0, 0.3, 1.1, 1);
        REQUIRE(is_hermitian(full_flux_hamiltonian(0.77, devs, d, space).m));
    }
    SECTION("devices away from the degeneracy point are rejected") {
        DriveParams d(0.03, 1.0, 9.0, 10.0, pm, pp, 1);
        REQUIRE_THROWS_AS(full_flux_hamiltonian(0.0, devs, d, space, 0.4),
                          config_error);
    }
}
