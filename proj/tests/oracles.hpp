#pragma once

// Independent oracles, written before the main implementation and kept free of
// any tqsim header. Everything here derives expected values by a different
// route than the library: bitwise operator construction instead of kron
// embeddings, a linear solve for the junction phase offsets instead of the
// closed-form gauge, and Simpson quadrature instead of closed-form Magnus
// coefficients. Frozen numbers were produced by these same algorithms (and an
// independent numpy/scipy implementation) before the library existed.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace oracle {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// ---- frozen expected values (chi = 1 units for lattice numbers) ----
inline constexpr double frozen_gap_M2 = 1.656854249492;        // = 4*sqrt(2) - 4
inline constexpr double frozen_E0_M2 = -13.656854249492;       // = -8 - 4*sqrt(2)
inline constexpr double frozen_gap_M3 = 1.930214296379;
inline constexpr double frozen_E0_M3 = -40.422205101856;
inline constexpr double frozen_sudden_overlap_M2 = 0.4267766952966365; // = (2+sqrt(2))/8
inline constexpr double frozen_charge_offdiag = 1.6500292060848143;    // (phi1,phi2,phi)=(0.3,-0.2,0.5), E_J=1
inline constexpr cxd frozen_alpha_t013{0.1927116370834386, 0.14650023427508252}; // beta=1, delta=10, t=0.13
inline constexpr double frozen_four_theta_t013 = 0.013457672583312284;
inline constexpr double frozen_tau_c_us = 3.1830988618379066;  // Q=1e6, omega_c/2pi=50 GHz
inline constexpr double frozen_beta_over_2pi_MHz = 48.359784871329346; // g=1e-2, E_J=40 ueV
inline constexpr double frozen_chi_over_2pi_MHz = 19.34391394853174;   // delta = 10 beta
inline constexpr double frozen_exp_minus_5 = 0.006737946999085467;

// ---- row/column device index arithmetic (1-based) ----
inline std::vector<int> row_devices_1based(int i, int M) {
    std::vector<int> out;
    for (int j = 1; j <= M; ++j) out.push_back((i - 1) * M + j);
    return out;
}
inline std::vector<int> col_devices_1based(int j, int M) {
    std::vector<int> out;
    for (int k = 0; k < M; ++k) out.push_back(j + k * M);
    return out;
}

// ---- bitwise lattice Hamiltonian (no kron, no embeddings) ----
// Basis convention matched to the library: device 0 is the most significant
// bit; bit value 0 means the +1 eigenstate of sigma^z.
namespace detail {

// apply sigma^{x|y} on device d (0-based) to basis index b; returns new index
// and multiplies phase.
inline long apply_xy(char axis, int d, int nq, long b, cxd& phase) {
    long bit = 1L << (nq - 1 - d);
    bool one = (b & bit) != 0;
    if (axis == 'y') phase *= one ? cxd(0, -1) : cxd(0, 1);
    return b ^ bit;
}

} // namespace detail

inline Mat lattice_hamiltonian_bitwise(int M, double chi_x, double chi_y) {
    const int nq = M * M;
    const long dim = 1L << nq;
    Mat H = Mat::Zero(dim, dim);
    auto add_sq_term = [&](char axis, const std::vector<int>& devs0, double chi) {
        // -chi * (sum_d S_d)^2 = -chi * sum_{d,e} S_d S_e, applied column-wise.
        for (long b = 0; b < dim; ++b) {
            for (int d : devs0)
                for (int e : devs0) {
                    cxd phase = 1.0;
                    long b1 = detail::apply_xy(axis, e, nq, b, phase);
                    long b2 = detail::apply_xy(axis, d, nq, b1, phase);
                    H(b2, b) += -chi * phase;
                }
        }
    };
    for (int i = 1; i <= M; ++i) {
        std::vector<int> devs0;
        for (int v : row_devices_1based(i, M)) devs0.push_back(v - 1);
        add_sq_term('x', devs0, chi_x);
    }
    for (int j = 1; j <= M; ++j) {
        std::vector<int> devs0;
        for (int v : col_devices_1based(j, M)) devs0.push_back(v - 1);
        add_sq_term('y', devs0, chi_y);
    }
    return H;
}

// ---- junction phase offsets by linear solve ----
// Loop constraints p1-p2 = 2 phi1, p2-p3 = 2 phi, p3-p4 = 2 phi2 and the
// zero-mean gauge p1+p2+p3+p4 = 0 (offsets relative to the conjugate phase).
inline Eigen::Vector4d junction_offsets_solve(double phi1, double phi2, double phi) {
    Eigen::Matrix4d A;
    A << 1, -1, 0, 0,
         0, 1, -1, 0,
         0, 0, 1, -1,
         1, 1, 1, 1;
    Eigen::Vector4d rhs(2 * phi1, 2 * phi, 2 * phi2, 0.0);
    return A.colPivHouseholderQr().solve(rhs);
}

// Four-term phasor sum S = sum_l exp(i o_l); the nearest-neighbor charge
// coupling is -(E_J/2) S on the raising side.
inline cxd phasor_sum(double phi1, double phi2, double phi) {
    Eigen::Vector4d o = junction_offsets_solve(phi1, phi2, phi);
    cxd s = 0.0;
    for (int l = 0; l < 4; ++l) s += std::exp(cxd(0.0, o(l)));
    return s;
}

inline double charge_offdiag_magnitude(double E_J, double phi1, double phi2, double phi) {
    return 0.5 * E_J * std::abs(phasor_sum(phi1, phi2, phi));
}

// ---- two-level closed form ----
inline std::pair<double, double> two_level_eigs(double E_ce, double E_phi) {
    double r = std::sqrt(E_ce * E_ce + 4.0 * E_phi * E_phi);
    return {-r, r};
}

// ---- Magnus coefficients by Simpson quadrature ----
// alpha(t) = int_0^t 2 beta e^{i delta s} ds
// 4 Theta(t) = 4 beta^2 int_0^t dt1 int_0^{t1} dt2 sin(delta (t1 - t2))
namespace detail {

template <typename F>
auto simpson(F f, double a, double b, int n /*even*/) {
    double h = (b - a) / n;
    auto acc = f(a) + f(b);
    for (int i = 1; i < n; ++i) acc += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
    return acc * (h / 3.0);
}

} // namespace detail

inline cxd magnus_alpha_quadrature(double beta, double delta, double t, int n = 2000) {
    return detail::simpson([&](double s) { return 2.0 * beta * std::exp(cxd(0.0, delta * s)); },
                           0.0, t, n);
}

inline double magnus_four_theta_quadrature(double beta, double delta, double t, int n = 800) {
    auto inner = [&](double t1) {
        if (t1 == 0.0) return 0.0;
        return detail::simpson([&](double t2) { return std::sin(delta * (t1 - t2)); }, 0.0, t1, n);
    };
    return 4.0 * beta * beta * detail::simpson(inner, 0.0, t, n);
}

// ---- phase accumulated under H(t) = f(t) sigma^z, by quadrature ----
template <typename F>
double quadrature_phase(F f, double t0, double t1, int n = 20000) {
    return detail::simpson(f, t0, t1, n);
}

} // namespace oracle
