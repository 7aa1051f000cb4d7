#pragma once
// Two-SQUID charge device: charge-basis Hamiltonian, two-level reduction at
// the gate-charge degeneracy point, flux control, and the experimental
// feasibility arithmetic (cavity lifetime, interaction rate, gate counts).

#include <array>
#include <cmath>
#include <sstream>
#include <string>

#include "tqsim/core.hpp"
#include "tqsim/units.hpp"

namespace tqsim {

// Electrical parameters of one device. Energies are angular frequencies
// (rad/s, hbar = 1); n_bar is the dimensionless gate charge.
struct DeviceParams {
    double E_c;
    double E_J;
    double n_bar;

    DeviceParams(double E_c_, double E_J_, double n_bar_)
        : E_c(E_c_), E_J(E_J_), n_bar(n_bar_) {
        if (!(E_c > 0.0) || !(E_J > 0.0))
            throw config_error("DeviceParams: E_c and E_J must be positive");
        if (n_bar < 0.0 || n_bar > 1.0)
            throw config_error("DeviceParams: n_bar must lie in [0, 1]");
    }

    // Advisory charge-regime check (E_c should dominate E_J); never throws.
    bool charge_regime_ok() const { return E_c >= 5.0 * E_J; }
};

enum class FluxMode { dc, ac };

// Flux bias of the three loops: the two SQUID-loop phases phi1, phi2 (always
// dc) and the inter-loop phase, which is either a dc value phi or an ac ramp
// phi(t) = omega * t.
struct FluxSetting {
    double phi1 = 0.0;
    double phi2 = 0.0;
    FluxMode mode = FluxMode::dc;
    double phi = 0.0;    // dc inter-loop phase (rad); meaningful for dc mode
    double omega = 0.0;  // ac ramp rate (rad/s); meaningful for ac mode

    static FluxSetting dc(double phi1, double phi2, double phi) {
        FluxSetting f;
        f.phi1 = phi1;
        f.phi2 = phi2;
        f.mode = FluxMode::dc;
        f.phi = phi;
        return f;
    }

    static FluxSetting ac(double phi1, double phi2, double omega) {
        if (!(omega > 0.0))
            throw config_error("FluxSetting::ac: omega must be positive");
        FluxSetting f;
        f.phi1 = phi1;
        f.phi2 = phi2;
        f.mode = FluxMode::ac;
        f.omega = omega;
        return f;
    }

    double phi_plus() const { return 0.5 * (phi1 + phi2); }
    double phi_minus() const { return 0.5 * (phi1 - phi2); }
};

// Per-junction phase offsets in the symmetric (zero-mean) gauge, fixed by the
// three loop constraints o1-o2 = 2*phi1, o2-o3 = 2*phi, o3-o4 = 2*phi2 plus
// sum(o) = 0. Any other gauge differs by a constant shift of the conjugate
// phase, i.e. a diagonal unitary in charge basis.
inline std::array<double, 4> junction_offsets(double phi1, double phi2,
                                              double phi) {
    const double pp = 0.5 * (phi1 + phi2);
    const double pm = 0.5 * (phi1 - phi2);
    return {phi + 2.0 * pp + pm, phi - pm, -phi - pm, -phi - 2.0 * pp + pm};
}

// Sum of the four junction phasors e^{i o_l}; the Cooper-pair tunneling
// matrix element between adjacent charge states is -(E_J/2) times this.
inline cxd junction_phasor_sum(double phi1, double phi2, double phi) {
    const auto o = junction_offsets(phi1, phi2, phi);
    cxd s = 0.0;
    for (double x : o) s += std::exp(cxd(0.0, x));
    return s;
}

// Charge-basis Hamiltonian on n_charges states centered on the gate charge:
// diagonal charging energy E_c (n - n_bar)^2 and nearest-neighbor tunneling
// -(E_J/2) * S between adjacent Cooper-pair numbers, with S the four-junction
// phasor sum under the loop constraints. dc flux only.
inline OperatorMatrix charge_hamiltonian(const DeviceParams& p,
                                         const FluxSetting& f,
                                         long n_charges) {
    if (f.mode != FluxMode::dc)
        throw config_error("charge_hamiltonian: requires a dc flux setting");
    if (n_charges < 3 || n_charges % 2 == 0)
        throw config_error(
            "charge_hamiltonian: n_charges must be odd and at least 3");

    const long n0 = std::lround(p.n_bar);
    const long half = (n_charges - 1) / 2;
    const cxd tun = -0.5 * p.E_J * junction_phasor_sum(f.phi1, f.phi2, f.phi);

    HilbertSpace space = HilbertSpace::ladder(n_charges);
    Mat h = Mat::Zero(n_charges, n_charges);
    for (long i = 0; i < n_charges; ++i) {
        const double n = static_cast<double>(n0 - half + i);
        h(i, i) = p.E_c * (n - p.n_bar) * (n - p.n_bar);
        if (i + 1 < n_charges) {
            h(i + 1, i) = tun;            // raises the charge by one pair
            h(i, i + 1) = std::conj(tun);
        }
    }
    return OperatorMatrix(space, h, true);
}

// Coefficients of the two-level restriction. E_ce is the sigma^z coefficient
// of the charging term restricted to the two relevant charge states
// {0, 1}: E_c (n - n_bar)^2 -> const - E_c (1 - 2 n_bar)/2 * sigma^z.
// E_phi is the per-junction tunneling scale E_J cos(phi) at phi1 = phi2 = 0.
struct TwoLevelParams {
    double E_ce;
    double E_phi;
};

inline TwoLevelParams two_level_params(const DeviceParams& p,
                                       const FluxSetting& f) {
    if (f.mode != FluxMode::dc)
        throw config_error("two_level_params: requires a dc flux setting");
    return {0.5 * p.E_c * (1.0 - 2.0 * p.n_bar), p.E_J * std::cos(f.phi)};
}

// Two-level device Hamiltonian H = -E_ce sigma^z - 2 E_phi sigma^x, valid at
// phi1 = phi2 = 0 where the four-junction phasor sum is real (= 4 cos phi).
inline OperatorMatrix two_level_hamiltonian(const DeviceParams& p,
                                            const FluxSetting& f) {
    if (f.mode != FluxMode::dc)
        throw config_error("two_level_hamiltonian: requires a dc flux setting");
    if (std::abs(f.phi1) > 1e-12 || std::abs(f.phi2) > 1e-12)
        throw config_error(
            "two_level_hamiltonian: reduction requires phi1 = phi2 = 0");
    const TwoLevelParams tl = two_level_params(p, f);
    HilbertSpace space = HilbertSpace::qubits(1);
    Mat h = -tl.E_ce * pauli('z') - 2.0 * tl.E_phi * pauli('x');
    return OperatorMatrix(space, h, true);
}

// Maximum deviation between the two lowest charge-basis eigenvalues and the
// two-level spectrum, after removing the common mean shift. Meaningful only
// deep in the charge regime with the gate charge near the degeneracy point.
inline double reduction_consistency_check(const DeviceParams& p,
                                          const FluxSetting& f,
                                          long n_charges = 5) {
    if (!(p.n_bar > 0.3 && p.n_bar < 0.7))
        throw config_error(
            "reduction_consistency_check: n_bar must lie in (0.3, 0.7)");
    if (p.E_c < 10.0 * p.E_J)
        throw config_error(
            "reduction_consistency_check: requires E_c/E_J >= 10");
    const OperatorMatrix hc = charge_hamiltonian(p, f, n_charges);
    const auto [wc, vc] = eigensolve_hermitian(hc);
    const OperatorMatrix h2 = two_level_hamiltonian(p, f);
    const auto [w2, v2] = eigensolve_hermitian(h2);

    const double mean_c = 0.5 * (wc(0) + wc(1));
    const double mean_2 = 0.5 * (w2(0) + w2(1));
    const double d0 = std::abs((wc(0) - mean_c) - (w2(0) - mean_2));
    const double d1 = std::abs((wc(1) - mean_c) - (w2(1) - mean_2));
    return std::max(d0, d1);
}

// Inputs to the feasibility arithmetic. gamma_s is the device lifetime in
// seconds; Omega is the vacuum Rabi frequency (rad/s); epsilon is the
// fractional Josephson-energy nonuniformity across devices.
struct FeasibilityParams {
    double Q;
    double omega_c;
    double gamma_s;
    double Omega;
    double g;
    double E_J;
    double delta_over_beta;
    double epsilon;

    FeasibilityParams(double Q_, double omega_c_, double gamma_s_,
                      double Omega_, double g_, double E_J_,
                      double delta_over_beta_, double epsilon_)
        : Q(Q_), omega_c(omega_c_), gamma_s(gamma_s_), Omega(Omega_), g(g_),
          E_J(E_J_), delta_over_beta(delta_over_beta_), epsilon(epsilon_) {
        if (!(Q > 0) || !(omega_c > 0) || !(gamma_s > 0) || !(Omega > 0) ||
            !(g > 0) || !(E_J > 0) || !(delta_over_beta > 0) || !(epsilon > 0))
            throw config_error(
                "FeasibilityParams: all parameters must be positive");
    }
};

// Derived quantities plus pass/fail flags for the working-regime conditions.
// Infeasible inputs only clear flags; they never raise.
struct FeasibilityReport {
    double tau_c_s;      // cavity decay time Q / omega_c
    double beta;         // interaction rate g E_J / 2 (rad/s)
    double delta;        // detuning delta_over_beta * beta (rad/s)
    double omega;        // drive frequency omega_c - delta (rad/s)
    double chi;          // effective coupling 4 beta^2 / delta (rad/s)
    double t1_s;         // single-loop gate time 2 pi / delta (s)
    double n_ops;        // operations within min(tau_c, gamma)
    double infidelity;   // nonuniformity infidelity exp(-Delta/(eps chi)),
                         // with gap Delta = chi
    bool ld_ok;          // g <= 0.1
    bool beta_delta_ok;  // delta >= 5 beta
    bool delta_omega_ok; // omega >= 5 delta
    bool strong_coupling_ok;  // Omega * min(tau_c, gamma) >= 10
    std::string note;

    bool all_ok() const {
        return ld_ok && beta_delta_ok && delta_omega_ok && strong_coupling_ok;
    }

    std::string text() const {
        std::ostringstream os;
        os.precision(4);
        os << "cavity decay time tau_c = " << tau_c_s * 1e6 << " us\n"
           << "interaction rate beta/2pi = " << beta / units::two_pi / 1e6
           << " MHz\n"
           << "detuning delta/2pi = " << delta / units::two_pi / 1e6
           << " MHz\n"
           << "effective coupling chi/2pi = " << chi / units::two_pi / 1e6
           << " MHz\n"
           << "single-loop gate time t1 = " << t1_s * 1e9 << " ns\n"
           << "operations within coherence: " << n_ops << "\n"
           << "nonuniformity infidelity = " << infidelity * 100 << " %\n"
           << "flags: LD " << (ld_ok ? "ok" : "VIOLATED") << ", beta<<delta "
           << (beta_delta_ok ? "ok" : "VIOLATED") << ", delta<<omega "
           << (delta_omega_ok ? "ok" : "VIOLATED") << ", strong coupling "
           << (strong_coupling_ok ? "ok" : "VIOLATED") << "\n"
           << note << "\n";
        return os.str();
    }
};

inline FeasibilityReport feasibility_report(const FeasibilityParams& fp) {
    FeasibilityReport r{};
    r.tau_c_s = fp.Q / fp.omega_c;
    r.beta = 0.5 * fp.g * fp.E_J;
    r.delta = fp.delta_over_beta * r.beta;
    r.omega = fp.omega_c - r.delta;
    r.chi = 4.0 * r.beta * r.beta / r.delta;
    r.t1_s = units::two_pi / r.delta;
    const double coherence = std::min(r.tau_c_s, fp.gamma_s);
    r.n_ops = coherence / r.t1_s;
    r.infidelity = std::exp(-1.0 / fp.epsilon);  // Delta = chi cancels chi
    r.ld_ok = fp.g <= 0.1;
    r.beta_delta_ok = r.delta >= 5.0 * r.beta;
    r.delta_omega_ok = r.omega >= 5.0 * r.delta;
    r.strong_coupling_ok = fp.Omega * coherence >= 10.0;
    std::ostringstream os;
    os.precision(4);
    os << "note: beta scales linearly with the dimensionless coupling g; "
       << "g = " << fp.g / 2.0 << " would give beta/2pi = "
       << 0.5 * r.beta / units::two_pi / 1e6 << " MHz.";
    r.note = os.str();
    return r;
}

}  // namespace tqsim
