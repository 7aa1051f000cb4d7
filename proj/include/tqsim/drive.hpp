#pragma once
// Drive-induced cavity-mediated interaction: the eta/xi phasor couplings,
// X/Y flux presets, the time-dependent spin-boson Hamiltonian, its exact
// closed-form (displacement x collective-phase) propagator, the effective
// -chi J^2 Hamiltonian, and the unexpanded-cosine lab-frame Hamiltonian used
// to audit the small-coupling and rotating-wave reductions.

#include <cmath>
#include <utility>
#include <vector>

#include "tqsim/core.hpp"

namespace tqsim {

// Drive and coupling bookkeeping. The interaction rate is beta = g E_J / 2,
// the detuning delta = omega_c - omega, and the effective collective coupling
// chi = 4 beta^2 / delta. phi_plus/phi_minus are the SQUID-loop half-sum and
// half-difference phases selecting the coupling axis; k is the loop index
// (the gate closes at t = 2 pi k / delta).
struct DriveParams {
    double g;
    double E_J;
    double omega;
    double omega_c;
    double phi_minus = 0.0;
    double phi_plus = 0.0;
    long k = 1;

    DriveParams(double g_, double E_J_, double omega_, double omega_c_,
                double phi_minus_ = 0.0, double phi_plus_ = 0.0, long k_ = 1)
        : g(g_), E_J(E_J_), omega(omega_), omega_c(omega_c_),
          phi_minus(phi_minus_), phi_plus(phi_plus_), k(k_) {
        if (g < 0.0 || !(E_J > 0.0))
            throw config_error("DriveParams: need g >= 0 and E_J > 0");
        if (!(omega_c > omega))
            throw config_error(
                "DriveParams: detuning omega_c - omega must be positive");
        if (k < 1) throw config_error("DriveParams: k must be >= 1");
    }

    double beta() const { return 0.5 * g * E_J; }
    double delta() const { return omega_c - omega; }
    double chi() const { return 4.0 * beta() * beta() / delta(); }
    double loop_time() const { return 2.0 * M_PI * k / delta(); }

    // Advisory hierarchy flags (beta << delta << omega); never throw.
    bool beta_delta_ok() const { return delta() >= 5.0 * beta(); }
    bool delta_omega_ok() const { return omega >= 5.0 * delta(); }
};

struct EffectiveCoupling {
    double chi_x;
    double chi_y;
};

// Identical drives on rows and columns give equal effective couplings.
inline EffectiveCoupling effective_coupling(const DriveParams& d) {
    return {d.chi(), d.chi()};
}

// The two coupling phasor sums eta = e^{-i phi_-} + e^{-i(2 phi_+ - phi_-)}
// and xi = e^{-i phi_-} + e^{i(2 phi_+ + phi_-)}.
inline std::pair<cxd, cxd> eta_xi(double phi_plus, double phi_minus) {
    const cxd eta = std::exp(cxd(0.0, -phi_minus)) +
                    std::exp(cxd(0.0, -(2.0 * phi_plus - phi_minus)));
    const cxd xi = std::exp(cxd(0.0, -phi_minus)) +
                   std::exp(cxd(0.0, 2.0 * phi_plus + phi_minus));
    return {eta, xi};
}

// Flux preset selecting the coupling axis; returns (phi_minus, phi_plus).
// x: (0, k pi) gives eta = xi = 2; y: (pi/2, k pi + pi/2) gives eta = xi = -2i.
inline std::pair<double, double> coupling_preset(char axis, long k) {
    if (axis == 'x' || axis == 'X') return {0.0, k * M_PI};
    if (axis == 'y' || axis == 'Y')
        return {M_PI / 2.0, k * M_PI + M_PI / 2.0};
    throw config_error("coupling_preset: axis must be x or y");
}

namespace detail {

// Sum of raising operators over the subset, embedded in the full space.
inline Mat collective_raising(const std::vector<long>& devices,
                              const HilbertSpace& space) {
    if (devices.empty())
        throw config_error("interaction: device subset must be non-empty");
    Mat jp = Mat::Zero(space.total_dim(), space.total_dim());
    const Mat sp = sigma_plus();
    for (long d : devices) jp += embed(sp, d, space).m;
    return jp;
}

}  // namespace detail

// Interaction-frame spin-boson Hamiltonian
//   H(t) = i beta sum_j sigma_j^+ (eta a† e^{i delta t} - xi a e^{-i delta t})
//          + h.c.
// precomputed as H(t) = C e^{i delta t} + C† e^{-i delta t} with
// C = i beta (eta J_+ + conj(xi) J_-) a†.
struct InteractionModel {
    HilbertSpace space;
    double delta;
    Mat c;

    InteractionModel(const std::vector<long>& devices, const DriveParams& d,
                     const HilbertSpace& space_)
        : space(space_), delta(d.delta()) {
        if (!space.has_boson())
            throw config_error("interaction: space has no boson factor");
        const auto [eta, xi] = eta_xi(d.phi_plus, d.phi_minus);
        const Mat jp = detail::collective_raising(devices, space);
        const Mat jm = jp.adjoint();
        const BosonOps b = boson_ops(space);
        c = cxd(0.0, d.beta()) * (eta * jp + std::conj(xi) * jm) * b.adag;
    }

    Mat operator()(double t) const {
        const cxd ph = std::exp(cxd(0.0, delta * t));
        return ph * c + std::conj(ph) * c.adjoint();
    }
};

// Snapshot of the interaction Hamiltonian at time t.
inline OperatorMatrix interaction_hamiltonian(double t,
                                              const std::vector<long>& devices,
                                              const DriveParams& d,
                                              const HilbertSpace& space) {
    InteractionModel model(devices, d, space);
    return OperatorMatrix(space, model(t), true);
}

// Effective collective Hamiltonian -chi (J_axis)^2 on the qubit factors.
inline OperatorMatrix effective_hamiltonian(char axis,
                                            const std::vector<long>& devices,
                                            double chi,
                                            const HilbertSpace& space) {
    if (!(axis == 'x' || axis == 'X' || axis == 'y' || axis == 'Y'))
        throw config_error("effective_hamiltonian: axis must be x or y");
    if (!(chi > 0.0))
        throw config_error("effective_hamiltonian: chi must be positive");
    const OperatorMatrix j =
        collective_op(axis == 'X' ? 'x' : axis == 'Y' ? 'y' : axis, devices,
                      space);
    return OperatorMatrix(space, -chi * (j.m * j.m), true);
}

// Magnus coefficients of the interaction Hamiltonian with eta = xi = 2
// (either preset): the displacement amplitude alpha(t) and the accumulated
// collective phase 4 Theta(t). At loop closure t = 2 pi k / delta, alpha = 0
// and 4 Theta = chi t.
inline cxd magnus_alpha(double beta, double delta, double t) {
    return cxd(0.0, -2.0 * beta / delta) *
           (std::exp(cxd(0.0, delta * t)) - 1.0);
}

inline double magnus_four_theta(double beta, double delta, double t) {
    return 4.0 * beta * beta / (delta * delta) *
           (delta * t - std::sin(delta * t));
}

// Exact propagator of the preset interaction Hamiltonian:
//   U(t) = exp[(alpha a† - alpha* a) J_axis] * exp(i 4 Theta J_axis^2).
// The phase conventions are pinned by direct numerical integration (see the
// evolution tests).
inline OperatorMatrix closed_form_propagator(char axis,
                                             const std::vector<long>& devices,
                                             const DriveParams& d, double t,
                                             const HilbertSpace& space) {
    const auto [eta, xi] = eta_xi(d.phi_plus, d.phi_minus);
    const cxd want = (axis == 'x' || axis == 'X') ? cxd(2.0, 0.0)
                                                  : cxd(0.0, -2.0);
    if (!(axis == 'x' || axis == 'X' || axis == 'y' || axis == 'Y'))
        throw config_error("closed_form_propagator: axis must be x or y");
    if (std::abs(eta - want) > 1e-12 || std::abs(xi - want) > 1e-12)
        throw config_error(
            "closed_form_propagator: drive flux preset does not match axis");
    if (!space.has_boson())
        throw config_error("closed_form_propagator: space has no boson factor");

    const char ax = (axis == 'X') ? 'x' : (axis == 'Y') ? 'y' : axis;
    const Mat j = collective_op(ax, devices, space).m;
    const BosonOps b = boson_ops(space);
    const cxd alpha = magnus_alpha(d.beta(), d.delta(), t);
    const double four_theta = magnus_four_theta(d.beta(), d.delta(), t);

    // exp(K) with K = (alpha a† - alpha* a) J: anti-Hermitian, so exp(K) =
    // expm_i(iK, 1) with iK Hermitian.
    const Mat k = (alpha * b.adag - std::conj(alpha) * b.a) * j;
    const Mat u1 = expm_i(Mat(cxd(0.0, 1.0) * k), 1.0);
    const Mat u2 = expm_i(Mat(j * j), -four_theta);
    return OperatorMatrix(space, u1 * u2, false);
}

// Lab-frame Hamiltonian with the cosine unexpanded:
//   H(t) = omega_c (a†a + 1/2)
//          - (E_J/2) sum_j [sigma_j^+ S(t) + h.c.],
//   S(t) = xi e^{i theta(t)} + eta e^{-i theta(t)},
//   theta(t) = omega t + g (a + a†).
// Valid only with every device at the gate-charge degeneracy point. The
// operator exponential e^{i g (a+a†)} is fixed once by eigendecomposition.
struct FullFluxModel {
    HilbertSpace space;
    double E_J;
    double omega;
    Mat h_cav;
    Mat d_op;  // xi J_+ W + conj(eta) J_- W, with W = exp(i g (a + a†))

    FullFluxModel(const std::vector<long>& devices, const DriveParams& d,
                  const HilbertSpace& space_, double n_bar = 0.5)
        : space(space_), E_J(d.E_J), omega(d.omega) {
        if (n_bar != 0.5)
            throw config_error(
                "full_flux: devices must sit at the degeneracy point "
                "(n_bar = 1/2)");
        if (!space.has_boson())
            throw config_error("full_flux: space has no boson factor");
        const auto [eta, xi] = eta_xi(d.phi_plus, d.phi_minus);
        const BosonOps b = boson_ops(space);
        h_cav = d.omega_c *
                (b.number + 0.5 * Mat::Identity(space.total_dim(),
                                                space.total_dim()));
        // W = exp(i g Q), Q = a + a† Hermitian
        const Mat w = expm_i(Mat(b.a + b.adag), -d.g);
        const Mat jp = detail::collective_raising(devices, space);
        const Mat jm = jp.adjoint();
        // H(t) = h_cav - (E_J/2)(D e^{i omega t} + D† e^{-i omega t}),
        // D = xi J_+ W + conj(eta) J_- W
        d_op = xi * jp * w + std::conj(eta) * jm * w;
    }

    Mat operator()(double t) const {
        const cxd ph = std::exp(cxd(0.0, omega * t));
        return h_cav - 0.5 * E_J * (ph * d_op + std::conj(ph) * d_op.adjoint());
    }
};

// Snapshot of the lab-frame Hamiltonian at time t.
inline OperatorMatrix full_flux_hamiltonian(double t,
                                            const std::vector<long>& devices,
                                            const DriveParams& d,
                                            const HilbertSpace& space,
                                            double n_bar = 0.5) {
    FullFluxModel model(devices, d, space, n_bar);
    return OperatorMatrix(space, model(t), true);
}

}  // namespace tqsim
