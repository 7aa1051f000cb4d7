#pragma once
// M x M logical lattice on a 1D device array: row/column index maps, the
// target collective-square Hamiltonian, the uniform initialization field,
// spectral reports (degeneracy, gap), and ground-space protection
// diagnostics against low-weight Pauli operators and random local fields.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tqsim/core.hpp"

namespace tqsim {

// Lattice geometry and coupling strengths. Full diagonalization restricts
// M to 3 (N = 9 devices, dimension 512).
struct LatticeSpec {
    long M;
    double chi_x;
    double chi_y;

    LatticeSpec(long M_, double chi_x_, double chi_y_)
        : M(M_), chi_x(chi_x_), chi_y(chi_y_) {
        if (M < 1) throw config_error("LatticeSpec: M must be >= 1");
        if (M > 3)
            throw guard_error(
                "LatticeSpec: M > 3 exceeds the full-diagonalization budget");
        if (!(chi_x > 0.0) || !(chi_y > 0.0))
            throw config_error("LatticeSpec: couplings must be positive");
    }

    long num_devices() const { return M * M; }
};

// 1-based device indices of row i: (i-1)M + 1 .. iM.
inline std::vector<long> row_devices(long i, long M) {
    if (i < 1 || i > M) throw config_error("row_devices: row index out of range");
    std::vector<long> out;
    for (long d = (i - 1) * M + 1; d <= i * M; ++d) out.push_back(d);
    return out;
}

// 1-based device indices of column j: j, j + M, ..., j + (M-1)M.
inline std::vector<long> col_devices(long j, long M) {
    if (j < 1 || j > M)
        throw config_error("col_devices: column index out of range");
    std::vector<long> out;
    for (long r = 0; r < M; ++r) out.push_back(j + r * M);
    return out;
}

// The single boundary where 1-based device labels become 0-based factor
// indices of a HilbertSpace.
inline std::vector<long> to_zero_based(std::vector<long> devices) {
    for (long& d : devices) --d;
    return devices;
}

// Target Hamiltonian: - chi_x sum_rows (J_x^row)^2 - chi_y sum_cols (J_y^col)^2.
inline OperatorMatrix target_hamiltonian(const LatticeSpec& spec,
                                         const HilbertSpace& space) {
    if (space.has_boson() || space.num_qubits() != spec.num_devices())
        throw config_error(
            "target_hamiltonian: space must have exactly M^2 qubit factors");
    const long dim = space.total_dim();
    Mat h = Mat::Zero(dim, dim);
    for (long i = 1; i <= spec.M; ++i) {
        const Mat j = collective_op('x', to_zero_based(row_devices(i, spec.M)),
                                    space).m;
        h -= spec.chi_x * (j * j);
    }
    for (long j = 1; j <= spec.M; ++j) {
        const Mat c = collective_op('y', to_zero_based(col_devices(j, spec.M)),
                                    space).m;
        h -= spec.chi_y * (c * c);
    }
    return OperatorMatrix(space, h, true);
}

// Uniform initialization field sign * field * sum_j sigma_j^x. With sign -1
// the unique ground state is the product of (|0> + |1>)/sqrt(2).
inline OperatorMatrix init_hamiltonian(int sign, double field,
                                       const HilbertSpace& space) {
    if (sign != 1 && sign != -1)
        throw config_error("init_hamiltonian: sign must be +1 or -1");
    if (!(field > 0.0))
        throw config_error("init_hamiltonian: field must be positive");
    if (space.has_boson())
        throw config_error("init_hamiltonian: qubit-only space expected");
    std::vector<long> all(space.num_qubits());
    for (long q = 0; q < space.num_qubits(); ++q) all[q] = q;
    const Mat jx = collective_op('x', all, space).m;
    return OperatorMatrix(space, sign * field * jx, true);
}

struct SpectrumReport {
    Eigen::VectorXd eigenvalues;
    long ground_degeneracy = 0;
    double gap = 0.0;
    double degeneracy_tol = 0.0;
};

// Eigenvalues ascending; the ground multiplet collects all levels within
// degeneracy_tol * (spectral range) of the minimum; the gap is the distance
// from the ground level to the first level above the multiplet (0 if the
// whole spectrum is one multiplet).
inline SpectrumReport spectrum(const OperatorMatrix& h,
                               double degeneracy_tol = 1e-9) {
    if (h.m.rows() > 4096)
        throw guard_error("spectrum: dimension exceeds the 4096 guard");
    SpectrumReport r;
    auto [w, v] = eigensolve_hermitian(h);
    r.eigenvalues = w;
    r.degeneracy_tol = degeneracy_tol;
    const double range = w(w.size() - 1) - w(0);
    const double tol = degeneracy_tol * std::max(range, 1e-300);
    long deg = 1;
    while (deg < w.size() && w(deg) - w(0) <= tol) ++deg;
    r.ground_degeneracy = deg;
    r.gap = (deg < w.size()) ? w(deg) - w(0) : 0.0;
    return r;
}

struct ProtectionEntry {
    PauliString op;
    double scalar_deviation;
};

struct SplittingSample {
    double epsilon;
    double splitting;
};

struct ProtectionReport {
    std::vector<ProtectionEntry> entries;
    double max_scalar_deviation = 0.0;
    std::vector<SplittingSample> splittings;  // averaged over realizations
    double splitting_exponent = 0.0;          // two-point log-log fit (worst
                                              // case over realizations)
    std::uint64_t seed = 0;
};

namespace detail {

// All Pauli strings of exactly the given weight on n qubits.
inline std::vector<PauliString> pauli_strings_of_weight(long n, int weight) {
    const char axes[3] = {'x', 'y', 'z'};
    std::vector<PauliString> out;
    if (weight == 1) {
        for (long d = 0; d < n; ++d)
            for (char a : axes) out.push_back(PauliString({{d, a}}));
    } else if (weight == 2) {
        for (long d1 = 0; d1 < n; ++d1)
            for (long d2 = d1 + 1; d2 < n; ++d2)
                for (char a1 : axes)
                    for (char a2 : axes)
                        out.push_back(PauliString({{d1, a1}, {d2, a2}}));
    } else {
        throw config_error(
            "protection_diagnostic: only weights 1 and 2 are enumerated");
    }
    return out;
}

}  // namespace detail

// Ground-space protection diagnostic. Requires an exactly two-fold
// degenerate ground space. For every Pauli string of weight <= max_weight it
// reports || P O P - c P || with c = tr(P O P)/2 (the deviation of the
// ground-space block from a scalar); additionally it perturbs H with seeded
// random local fields eps * sum_j h_j sigma_j^(axis_j), h_j uniform in
// [-1, 1], and reports the ground-doublet splitting at each eps together
// with a two-point log-log scaling exponent.
inline ProtectionReport protection_diagnostic(
    const OperatorMatrix& h, int max_weight,
    const std::vector<double>& epsilons, long realizations = 3,
    std::uint64_t seed = 12345, double degeneracy_tol = 1e-9) {
    if (max_weight < 1 || max_weight > 2)
        throw config_error("protection_diagnostic: max_weight must be 1 or 2");
    if (realizations < 1)
        throw config_error("protection_diagnostic: need >= 1 realization");

    const HilbertSpace& space = h.space;
    auto [w, v] = eigensolve_hermitian(h);
    const double range = w(w.size() - 1) - w(0);
    long deg = 1;
    while (deg < w.size() && w(deg) - w(0) <= degeneracy_tol * range) ++deg;
    if (deg != 2)
        throw config_error(
            "protection_diagnostic: ground space is not two-fold degenerate");

    ProtectionReport r;
    r.seed = seed;
    const Vec g0 = v.col(0), g1 = v.col(1);

    for (int weight = 1; weight <= max_weight; ++weight) {
        for (const PauliString& ps :
             detail::pauli_strings_of_weight(space.num_qubits(), weight)) {
            const Vec o0 = apply_pauli_string(ps, space, g0);
            const Vec o1 = apply_pauli_string(ps, space, g1);
            Mat m(2, 2);
            m(0, 0) = g0.dot(o0);
            m(0, 1) = g0.dot(o1);
            m(1, 0) = g1.dot(o0);
            m(1, 1) = g1.dot(o1);
            const cxd c = 0.5 * (m(0, 0) + m(1, 1));
            const double dev = spectral_norm(Mat(m - c * Mat::Identity(2, 2)));
            r.entries.push_back({ps, dev});
            r.max_scalar_deviation = std::max(r.max_scalar_deviation, dev);
        }
    }

    // Random local-field perturbations: identical realization across all
    // epsilon values so the scaling fit sees one fixed perturbation.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_int_distribution<int> ax(0, 2);
    const char axes[3] = {'x', 'y', 'z'};
    std::vector<double> mean_split(epsilons.size(), 0.0);
    double worst_exponent = std::numeric_limits<double>::infinity();

    for (long s = 0; s < realizations; ++s) {
        Mat pert = Mat::Zero(h.m.rows(), h.m.cols());
        for (long q = 0; q < space.num_qubits(); ++q)
            pert += amp(rng) * embed(pauli(axes[ax(rng)]), q, space).m;
        std::vector<double> split(epsilons.size());
        for (std::size_t e = 0; e < epsilons.size(); ++e) {
            if (epsilons[e] == 0.0) {
                split[e] = w(1) - w(0);
            } else {
                Eigen::SelfAdjointEigenSolver<Mat> es(
                    Mat(h.m + epsilons[e] * pert), Eigen::EigenvaluesOnly);
                split[e] = es.eigenvalues()(1) - es.eigenvalues()(0);
            }
            mean_split[e] += split[e] / static_cast<double>(realizations);
        }
        // two-point fit over the first two strictly positive epsilons
        std::vector<std::size_t> pos;
        for (std::size_t e = 0; e < epsilons.size() && pos.size() < 2; ++e)
            if (epsilons[e] > 0.0) pos.push_back(e);
        if (pos.size() == 2) {
            const double num =
                std::log(split[pos[1]] / std::max(split[pos[0]], 1e-300));
            const double den = std::log(epsilons[pos[1]] / epsilons[pos[0]]);
            worst_exponent = std::min(worst_exponent, num / den);
        }
    }
    for (std::size_t e = 0; e < epsilons.size(); ++e)
        r.splittings.push_back({epsilons[e], mean_split[e]});
    if (std::isfinite(worst_exponent)) r.splitting_exponent = worst_exponent;
    return r;
}

}  // namespace tqsim
