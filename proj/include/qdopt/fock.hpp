#pragma once

#include <Eigen/Dense>
#include <complex>

namespace qdopt {

using Complex = std::complex<double>;

// Highest retained occupation number; the matrix side is n_max + 1.
struct FockDim {
    int n_max;

    explicit FockDim(int n);
    int size() const { return n_max + 1; }

    friend bool operator==(FockDim a, FockDim b) { return a.n_max == b.n_max; }
    friend bool operator!=(FockDim a, FockDim b) { return a.n_max != b.n_max; }
};

// Dense complex operator on Fock levels 0..n_max. Every operator handled by
// this library (ladder, density, POVM element, risk operator) is one of these.
struct TruncatedOperator {
    FockDim dim;
    Eigen::MatrixXcd entries;

    static TruncatedOperator zero(FockDim dim);
    static TruncatedOperator identity(FockDim dim);

    TruncatedOperator adjoint() const;
    TruncatedOperator symmetrized() const;  // (A + A†)/2
    double hermiticity_defect() const;      // max_ij |A - A†|
    Complex trace() const { return entries.trace(); }
    double max_abs() const { return entries.cwiseAbs().maxCoeff(); }
};

TruncatedOperator operator+(const TruncatedOperator& a, const TruncatedOperator& b);
TruncatedOperator operator-(const TruncatedOperator& a, const TruncatedOperator& b);
TruncatedOperator operator*(const TruncatedOperator& a, const TruncatedOperator& b);
TruncatedOperator operator*(Complex c, const TruncatedOperator& a);
TruncatedOperator operator*(const TruncatedOperator& a, Complex c);

struct StateVector {
    FockDim dim;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
    // 1 - ||psi||^2; positive for truncated coherent states.
    double norm_deficit() const { return 1.0 - amplitudes.squaredNorm(); }
    bool truncation_warning() const { return norm_deficit() > 1e-8; }
};

Complex inner(const StateVector& bra, const StateVector& ket);
StateVector apply(const TruncatedOperator& op, const StateVector& v);

struct LadderPair {
    TruncatedOperator annihilate;
    TruncatedOperator create;
};

// a|n> = sqrt(n)|n-1>, a† its conjugate transpose. The commutator [a, a†]
// equals the identity on levels 0..n_max-1; the top diagonal entry is -n_max,
// an unavoidable truncation artifact that is diagnosed, never patched.
LadderPair ladder_operators(FockDim dim);

// Amplitudes exp(-|beta|^2/2) beta^n / sqrt(n!), built by recurrence.
StateVector coherent_state(Complex beta, FockDim dim);

// exp(beta a† - conj(beta) a), computed by eigendecomposition of the
// Hermitian generator i(beta a† - conj(beta) a); unitary to rounding.
TruncatedOperator displacement(Complex beta, FockDim dim);

// scale * D(center) diag((1-rate)^n) D(center)†. The sign of 1 - rate is not
// restricted here; callers needing a PSD operator go through
// normal_ordered_gaussian.
TruncatedOperator displaced_geometric_diagonal(double scale, double rate, Complex center,
                                               FockDim dim);

// Truncated matrix of scale * :exp{-rate (b-center)†(b-center)}:. Requires
// rate in [0, 1]; outside that range the operator is not PSD and is rejected.
TruncatedOperator normal_ordered_gaussian(double scale, double rate, Complex center,
                                          FockDim dim);

struct HermitianSpectrum {
    Eigen::VectorXd eigenvalues;    // ascending
    Eigen::MatrixXcd eigenvectors;  // orthonormal columns
};

// Symmetrizes inputs whose asymmetry is within hermiticity_tol, rejects beyond.
HermitianSpectrum hermitian_spectrum(const TruncatedOperator& op,
                                     double hermiticity_tol = 1e-10);

struct PsdReport {
    bool is_psd;
    double min_eigenvalue;
};

PsdReport psd_check(const TruncatedOperator& op, double tol);
// Default tolerance: 1e-9 scaled by the largest |eigenvalue|.
PsdReport psd_check(const TruncatedOperator& op);

namespace reference {

// <m| scale * :exp{-rate (b-center)†(b-center)}: |n>, summed term by term in
// the normal-ordered power series with extended-precision accumulation. Slow;
// independent of the displaced-diagonal route and used to validate it.
Complex normal_ordered_gaussian_element(double scale, double rate, Complex center,
                                        int m, int n);

}  // namespace reference

}  // namespace qdopt
