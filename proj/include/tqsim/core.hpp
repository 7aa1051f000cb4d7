#pragma once

// Composed-Hilbert-space linear algebra: spaces, operators, states, embeddings,
// collective spin operators, ladder operators, partial trace, Hermitian
// eigensolves, matrix exponentials and state distances. Everything is dense,
// immutable after construction, and pure; energies are angular frequencies
// (hbar = 1).

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tqsim {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr const char* tool_version = "0.1.0";

// Guard/resource violations (CLI exit code 3) vs bad configuration input
// (CLI exit code 2). Library precondition violations throw
// std::invalid_argument and map to exit code 2 as well.
struct guard_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// HilbertSpace: ordered factor list, each factor a qubit (dim 2) or the single
// boson mode (dim n_max + 1).
// ---------------------------------------------------------------------------

enum class FactorKind { qubit, boson };

class HilbertSpace {
  public:
    HilbertSpace(std::vector<long> dims, std::vector<FactorKind> kinds)
        : dims_(std::move(dims)), kinds_(std::move(kinds)) {
        if (dims_.size() != kinds_.size() || dims_.empty())
            throw std::invalid_argument("HilbertSpace: factor/label count mismatch");
        long bosons = 0;
        total_ = 1;
        for (std::size_t f = 0; f < dims_.size(); ++f) {
            if (dims_[f] < 2)
                throw std::invalid_argument("HilbertSpace: factor dimension < 2");
            if (kinds_[f] == FactorKind::qubit && dims_[f] != 2)
                throw std::invalid_argument("HilbertSpace: qubit factor must have dimension 2");
            if (kinds_[f] == FactorKind::boson) {
                ++bosons;
                boson_index_ = static_cast<long>(f);
            }
            total_ *= dims_[f];
        }
        if (bosons > 1)
            throw std::invalid_argument("HilbertSpace: at most one boson factor");
    }

    static HilbertSpace qubits(long n) {
        return HilbertSpace(std::vector<long>(n, 2),
                            std::vector<FactorKind>(n, FactorKind::qubit));
    }

    // Qubit factors 0..n-1, boson factor appended last with Fock cutoff n_max.
    static HilbertSpace qubits_with_boson(long n, long n_max) {
        std::vector<long> d(n, 2);
        std::vector<FactorKind> k(n, FactorKind::qubit);
        d.push_back(n_max + 1);
        k.push_back(FactorKind::boson);
        return HilbertSpace(std::move(d), std::move(k));
    }

    // Single-factor ladder space (used for the charge basis of the device
    // model, which is a truncated ladder like the Fock space).
    static HilbertSpace ladder(long dim) {
        return HilbertSpace({dim}, {FactorKind::boson});
    }

    long num_factors() const { return static_cast<long>(dims_.size()); }
    long dim(long f) const { return dims_.at(f); }
    FactorKind kind(long f) const { return kinds_.at(f); }
    long total_dim() const { return total_; }
    bool has_boson() const { return boson_index_ >= 0; }
    long boson_index() const {
        if (boson_index_ < 0) throw std::invalid_argument("space has no boson factor");
        return boson_index_;
    }
    long n_max() const { return dim(boson_index()) - 1; }
    long num_qubits() const {
        return static_cast<long>(std::count(kinds_.begin(), kinds_.end(), FactorKind::qubit));
    }

    // Row-major tensor convention: factor 0 is the most significant index.
    long stride(long f) const {
        long s = 1;
        for (long g = num_factors() - 1; g > f; --g) s *= dims_[g];
        return s;
    }

    bool operator==(const HilbertSpace& o) const {
        return dims_ == o.dims_ && kinds_ == o.kinds_;
    }
    bool operator!=(const HilbertSpace& o) const { return !(*this == o); }

  private:
    std::vector<long> dims_;
    std::vector<FactorKind> kinds_;
    long total_ = 1;
    long boson_index_ = -1;
};

// ---------------------------------------------------------------------------
// Small-matrix building blocks.
// ---------------------------------------------------------------------------

// Qubit basis convention: |0> is the +1 eigenstate of sigma^z.
inline Mat pauli(char axis) {
    Mat s(2, 2);
    switch (axis) {
        case 'x': s << 0, 1, 1, 0; break;
        case 'y': s << 0, cxd(0, -1), cxd(0, 1), 0; break;
        case 'z': s << 1, 0, 0, -1; break;
        default: throw std::invalid_argument(std::string("unknown Pauli axis: ") + axis);
    }
    return s;
}

// sigma^± = (sigma^x ± i sigma^y)/2.
inline Mat sigma_plus() {
    Mat s = Mat::Zero(2, 2);
    s(0, 1) = 1.0;
    return s;
}
inline Mat sigma_minus() {
    Mat s = Mat::Zero(2, 2);
    s(1, 0) = 1.0;
    return s;
}

inline Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Vec kron_vec(const Vec& a, const Vec& b) {
    Vec out(a.size() * b.size());
    for (long i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

inline Vec kron_vec(const std::vector<Vec>& parts) {
    if (parts.empty()) throw std::invalid_argument("kron_vec: empty factor list");
    Vec out = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) out = kron_vec(out, parts[i]);
    return out;
}

inline bool is_hermitian(const Mat& h, double rel_tol = 1e-12) {
    double scale = h.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    return (h - h.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

// ---------------------------------------------------------------------------
// OperatorMatrix / QuantumState / PauliString.
// ---------------------------------------------------------------------------

struct OperatorMatrix {
    HilbertSpace space;
    Mat m;
    bool hermitian = false;

    OperatorMatrix(HilbertSpace s, Mat mat, bool check_hermitian = false)
        : space(std::move(s)), m(std::move(mat)) {
        if (m.rows() != m.cols() || m.rows() != space.total_dim())
            throw std::invalid_argument("OperatorMatrix: dimension does not match space");
        if (check_hermitian) {
            if (!is_hermitian(m))
                throw std::invalid_argument("OperatorMatrix: Hermiticity check failed");
            hermitian = true;
        }
    }
};

struct QuantumState {
    HilbertSpace space;
    bool pure;
    Vec psi; // pure representation
    Mat rho; // mixed representation

    static QuantumState make_pure(HilbertSpace s, Vec v) {
        if (v.size() != s.total_dim())
            throw std::invalid_argument("QuantumState: vector does not match space");
        if (std::abs(v.norm() - 1.0) > 1e-10)
            throw std::invalid_argument("QuantumState: pure state norm != 1");
        QuantumState q{std::move(s), true, std::move(v), Mat()};
        return q;
    }

    static QuantumState make_mixed(HilbertSpace s, Mat r) {
        if (r.rows() != r.cols() || r.rows() != s.total_dim())
            throw std::invalid_argument("QuantumState: density matrix does not match space");
        if (!is_hermitian(r, 1e-10))
            throw std::invalid_argument("QuantumState: density matrix not Hermitian");
        if (std::abs(r.trace().real() - 1.0) > 1e-10 || std::abs(r.trace().imag()) > 1e-10)
            throw std::invalid_argument("QuantumState: density matrix trace != 1");
        Eigen::SelfAdjointEigenSolver<Mat> es(r, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -1e-10)
            throw std::invalid_argument("QuantumState: density matrix not positive");
        QuantumState q{std::move(s), false, Vec(), std::move(r)};
        return q;
    }

    Mat density() const { return pure ? Mat(psi * psi.adjoint()) : rho; }
};

struct PauliSite {
    long device;
    char axis; // 'x' | 'y' | 'z'
};

struct PauliString {
    std::vector<PauliSite> sites;

    explicit PauliString(std::vector<PauliSite> s) : sites(std::move(s)) {
        if (sites.empty())
            throw std::invalid_argument("PauliString: weight must be >= 1");
        for (std::size_t i = 0; i < sites.size(); ++i) {
            if (sites[i].axis != 'x' && sites[i].axis != 'y' && sites[i].axis != 'z')
                throw std::invalid_argument("PauliString: bad axis");
            for (std::size_t j = i + 1; j < sites.size(); ++j)
                if (sites[i].device == sites[j].device)
                    throw std::invalid_argument("PauliString: repeated device index");
        }
    }

    long weight() const { return static_cast<long>(sites.size()); }

    std::string describe() const {
        std::string out;
        for (const auto& s : sites) {
            if (!out.empty()) out += " ";
            out += s.axis;
            out += std::to_string(s.device);
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Operations.
// ---------------------------------------------------------------------------

// I ⊗ ... ⊗ op_local ⊗ ... ⊗ I in the space's factor order.
inline OperatorMatrix embed(const Mat& op_local, long site, const HilbertSpace& space) {
    if (site < 0 || site >= space.num_factors())
        throw std::invalid_argument("embed: site out of range");
    if (op_local.rows() != op_local.cols() || op_local.rows() != space.dim(site))
        throw std::invalid_argument("embed: local operator does not match factor dimension");
    Mat out = Mat::Identity(1, 1);
    for (long f = 0; f < space.num_factors(); ++f) {
        if (f == site)
            out = kron(out, op_local);
        else
            out = kron(out, Mat::Identity(space.dim(f), space.dim(f)));
    }
    return OperatorMatrix(space, std::move(out));
}

// J_axis = sum of embedded single-site Paulis over the device subset.
inline OperatorMatrix collective_op(char axis, const std::vector<long>& devices,
                                    const HilbertSpace& space) {
    if (devices.empty())
        throw std::invalid_argument("collective_op: empty device subset");
    Mat sum = Mat::Zero(space.total_dim(), space.total_dim());
    Mat s = pauli(axis);
    for (long d : devices) {
        if (d < 0 || d >= space.num_factors())
            throw std::invalid_argument("collective_op: device index out of range");
        if (space.kind(d) != FactorKind::qubit)
            throw std::invalid_argument("collective_op: index refers to a non-qubit factor");
        sum += embed(s, d, space).m;
    }
    return OperatorMatrix(space, std::move(sum));
}

// Truncated ladder operators on the local boson factor: a|n> = sqrt(n)|n-1>,
// a†|n_max> = 0 (hard truncation).
inline Mat ladder_local(long n_max) {
    Mat a = Mat::Zero(n_max + 1, n_max + 1);
    for (long n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

struct BosonOps {
    Mat a, adag, number; // embedded on the full space
};

inline BosonOps boson_ops(const HilbertSpace& space) {
    long b = space.boson_index(); // throws if no boson factor
    Mat a_loc = ladder_local(space.dim(b) - 1);
    Mat a = embed(a_loc, b, space).m;
    Mat ad = a.adjoint();
    return BosonOps{a, ad, ad * a};
}

// Reduced density matrix over the kept factors (trace preserved).
inline QuantumState partial_trace(const QuantumState& state, const std::vector<long>& keep) {
    const HilbertSpace& sp = state.space;
    if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
    std::vector<long> k = keep;
    std::sort(k.begin(), k.end());
    if (std::adjacent_find(k.begin(), k.end()) != k.end())
        throw std::invalid_argument("partial_trace: repeated factor in keep set");
    for (long f : k)
        if (f < 0 || f >= sp.num_factors())
            throw std::invalid_argument("partial_trace: factor out of range");

    std::vector<long> traced;
    for (long f = 0; f < sp.num_factors(); ++f)
        if (!std::binary_search(k.begin(), k.end(), f)) traced.push_back(f);

    // Flat offsets of every kept and traced multi-index.
    auto offsets = [&](const std::vector<long>& factors) {
        std::vector<long> off{0};
        for (long f : factors) {
            std::vector<long> next;
            next.reserve(off.size() * sp.dim(f));
            for (long base : off)
                for (long v = 0; v < sp.dim(f); ++v) next.push_back(base + v * sp.stride(f));
            off = std::move(next);
        }
        return off;
    };
    std::vector<long> ko = offsets(k), to = offsets(traced);

    std::vector<long> kept_dims;
    std::vector<FactorKind> kept_kinds;
    for (long f : k) {
        kept_dims.push_back(sp.dim(f));
        kept_kinds.push_back(sp.kind(f));
    }
    HilbertSpace out_space(kept_dims, kept_kinds);

    const long dk = static_cast<long>(ko.size());
    Mat out = Mat::Zero(dk, dk);
    if (state.pure) {
        for (long m = 0; m < static_cast<long>(to.size()); ++m) {
            Vec slice(dk);
            for (long i = 0; i < dk; ++i) slice(i) = state.psi(ko[i] + to[m]);
            out.noalias() += slice * slice.adjoint();
        }
    } else {
        for (long m = 0; m < static_cast<long>(to.size()); ++m)
            for (long i = 0; i < dk; ++i)
                for (long j = 0; j < dk; ++j)
                    out(i, j) += state.rho(ko[i] + to[m], ko[j] + to[m]);
    }
    if (traced.empty() && state.pure) return state; // nothing traced out
    return QuantumState{out_space, false, Vec(), std::move(out)};
}

// Eigenvalues ascending with orthonormal eigenvectors; input must be Hermitian.
inline std::pair<Eigen::VectorXd, Mat> eigensolve_hermitian(const Mat& h) {
    if (!is_hermitian(h))
        throw std::invalid_argument("eigensolve_hermitian: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigensolve_hermitian: solver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

inline std::pair<Eigen::VectorXd, Mat> eigensolve_hermitian(const OperatorMatrix& h) {
    return eigensolve_hermitian(h.m);
}

// exp(-i H t) for Hermitian H.
inline Mat expm_i(const Mat& h, double t) {
    auto [w, v] = eigensolve_hermitian(h);
    Vec phases(w.size());
    for (long i = 0; i < w.size(); ++i) phases(i) = std::exp(cxd(0.0, -w(i) * t));
    return v * phases.asDiagonal() * v.adjoint();
}

// Largest singular value.
inline double spectral_norm(const Mat& a) {
    if (a.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(a.adjoint() * a), Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// Matrix square root of a positive semidefinite Hermitian matrix.
inline Mat sqrtm_psd(const Mat& a) {
    auto [w, v] = eigensolve_hermitian(a);
    Vec r(w.size());
    for (long i = 0; i < w.size(); ++i) r(i) = std::sqrt(std::max(0.0, w(i)));
    return v * r.asDiagonal() * v.adjoint();
}

struct StateDistance {
    double fidelity;
    double trace_distance;
};

// Uhlmann fidelity and trace distance; symmetric in the arguments.
inline StateDistance state_distance(const QuantumState& s1, const QuantumState& s2) {
    if (s1.space != s2.space)
        throw std::invalid_argument("state_distance: states live on different spaces");
    double fid = 0.0;
    if (s1.pure && s2.pure) {
        cxd ov = s1.psi.adjoint() * s2.psi;
        fid = std::norm(ov);
    } else if (s1.pure || s2.pure) {
        const QuantumState& p = s1.pure ? s1 : s2;
        const QuantumState& m = s1.pure ? s2 : s1;
        fid = std::real(cxd(p.psi.adjoint() * m.rho * p.psi));
    } else {
        Mat sr = sqrtm_psd(s1.rho);
        Mat inner = sqrtm_psd(sr * s2.rho * sr);
        double tr = inner.trace().real();
        fid = tr * tr;
    }
    fid = std::clamp(fid, 0.0, 1.0);

    // The difference of two Hermitian matrices is Hermitian; symmetrize to
    // shed floating-point noise inherited from the (much larger) inputs,
    // which otherwise dominates the tiny entries of a near-zero difference.
    Mat diff = s1.density() - s2.density();
    diff = 0.5 * (diff + diff.adjoint()).eval();
    auto [w, v] = eigensolve_hermitian(diff);
    double td = 0.5 * w.cwiseAbs().sum();
    return StateDistance{fid, std::clamp(td, 0.0, 1.0)};
}

// ---------------------------------------------------------------------------
// Pauli strings: dense matrix and fast bitwise application (factor 0 is the
// most significant bit of the basis index; qubit-only spaces).
// ---------------------------------------------------------------------------

inline Vec apply_pauli_string(const PauliString& ps, const HilbertSpace& space, const Vec& v) {
    if (space.has_boson())
        throw std::invalid_argument("apply_pauli_string: qubit-only spaces supported");
    const long n = space.num_factors();
    if (v.size() != space.total_dim())
        throw std::invalid_argument("apply_pauli_string: vector does not match space");
    long flip_mask = 0;
    std::vector<std::pair<long, char>> phase_sites; // (bit position from MSB, axis)
    for (const auto& s : ps.sites) {
        if (s.device < 0 || s.device >= n)
            throw std::invalid_argument("apply_pauli_string: device out of range");
        if (s.axis == 'x' || s.axis == 'y') flip_mask |= 1L << (n - 1 - s.device);
        if (s.axis != 'x') phase_sites.emplace_back(n - 1 - s.device, s.axis);
    }
    Vec out(v.size());
    for (long i = 0; i < v.size(); ++i) {
        long j = i ^ flip_mask;
        cxd amp = v(i);
        for (auto [bit, axis] : phase_sites) {
            bool one = (i >> bit) & 1L;
            if (axis == 'z') {
                if (one) amp = -amp;
            } else { // 'y': out amplitude lands on flipped index j
                amp *= one ? cxd(0, -1) : cxd(0, 1);
            }
        }
        out(j) = amp;
    }
    return out;
}

inline OperatorMatrix pauli_string_matrix(const PauliString& ps, const HilbertSpace& space) {
    Mat out(space.total_dim(), space.total_dim());
    Vec e = Vec::Zero(space.total_dim());
    for (long c = 0; c < space.total_dim(); ++c) {
        e(c) = 1.0;
        out.col(c) = apply_pauli_string(ps, space, e);
        e(c) = 0.0;
    }
    return OperatorMatrix(space, std::move(out));
}

// ---------------------------------------------------------------------------
// State construction helpers.
// ---------------------------------------------------------------------------

inline Vec basis_vec(long dim, long k) {
    Vec v = Vec::Zero(dim);
    v(k) = 1.0;
    return v;
}

// Single-qubit axis eigenstates: z0,z1,x+,x-,y+,y-.
inline Vec qubit_axis_state(const std::string& name) {
    const double r = 1.0 / std::sqrt(2.0);
    Vec v(2);
    if (name == "z0") v << 1, 0;
    else if (name == "z1") v << 0, 1;
    else if (name == "x+") v << r, r;
    else if (name == "x-") v << r, -r;
    else if (name == "y+") v << r, cxd(0, r);
    else if (name == "y-") v << r, cxd(0, -r);
    else throw std::invalid_argument("qubit_axis_state: unknown name " + name);
    return v;
}

// Normalized truncated coherent state on an n_max-cutoff Fock space.
inline Vec coherent_state(long n_max, cxd alpha) {
    Vec v(n_max + 1);
    cxd amp = 1.0;
    v(0) = amp;
    for (long n = 1; n <= n_max; ++n) {
        amp *= alpha / std::sqrt(static_cast<double>(n));
        v(n) = amp;
    }
    v.normalize();
    return v;
}

// Thermal Fock-diagonal weights with mean occupation n_bar (renormalized on
// the truncated space).
inline Eigen::VectorXd thermal_weights(long n_max, double n_bar) {
    Eigen::VectorXd p(n_max + 1);
    double q = n_bar / (1.0 + n_bar);
    double w = 1.0;
    for (long n = 0; n <= n_max; ++n) {
        p(n) = w;
        w *= q;
    }
    p /= p.sum();
    return p;
}

inline Vec random_pure_state(long dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec v(dim);
    for (long i = 0; i < dim; ++i) v(i) = cxd(g(rng), g(rng));
    v.normalize();
    return v;
}

inline Mat random_hermitian(long dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat a(dim, dim);
    for (long i = 0; i < dim; ++i)
        for (long j = 0; j < dim; ++j) a(i, j) = cxd(g(rng), g(rng));
    return 0.5 * (a + Mat(a.adjoint()));
}

// ---------------------------------------------------------------------------
// FNV-1a 64-bit hash (config fingerprint embedded in output files).
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(bytes);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

} // namespace tqsim
