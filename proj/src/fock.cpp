#include "qdopt/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace qdopt {

FockDim::FockDim(int n) : n_max(n) {
    if (n < 1) throw std::invalid_argument("FockDim: n_max must be >= 1");
}

TruncatedOperator TruncatedOperator::zero(FockDim dim) {
    return {dim, Eigen::MatrixXcd::Zero(dim.size(), dim.size())};
}

TruncatedOperator TruncatedOperator::identity(FockDim dim) {
    return {dim, Eigen::MatrixXcd::Identity(dim.size(), dim.size())};
}

TruncatedOperator TruncatedOperator::adjoint() const {
    return {dim, entries.adjoint()};
}

TruncatedOperator TruncatedOperator::symmetrized() const {
    return {dim, 0.5 * (entries + entries.adjoint())};
}

double TruncatedOperator::hermiticity_defect() const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

namespace {

void require_same_dim(const TruncatedOperator& a, const TruncatedOperator& b) {
    if (a.dim != b.dim) throw std::invalid_argument("operator dimension mismatch");
}

}  // namespace

TruncatedOperator operator+(const TruncatedOperator& a, const TruncatedOperator& b) {
    require_same_dim(a, b);
    return {a.dim, a.entries + b.entries};
}

TruncatedOperator operator-(const TruncatedOperator& a, const TruncatedOperator& b) {
    require_same_dim(a, b);
    return {a.dim, a.entries - b.entries};
}

TruncatedOperator operator*(const TruncatedOperator& a, const TruncatedOperator& b) {
    require_same_dim(a, b);
    return {a.dim, a.entries * b.entries};
}

TruncatedOperator operator*(Complex c, const TruncatedOperator& a) {
    return {a.dim, c * a.entries};
}

TruncatedOperator operator*(const TruncatedOperator& a, Complex c) {
    return {a.dim, c * a.entries};
}

Complex inner(const StateVector& bra, const StateVector& ket) {
    if (bra.dim != ket.dim) throw std::invalid_argument("state dimension mismatch");
    return bra.amplitudes.dot(ket.amplitudes);  // Eigen dot conjugates the left side
}

StateVector apply(const TruncatedOperator& op, const StateVector& v) {
    if (op.dim != v.dim) throw std::invalid_argument("operator/state dimension mismatch");
    return {v.dim, op.entries * v.amplitudes};
}

LadderPair ladder_operators(FockDim dim) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim.size(), dim.size());
    for (int n = 1; n <= dim.n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
    return {{dim, a}, {dim, a.adjoint()}};
}

StateVector coherent_state(Complex beta, FockDim dim) {
    Eigen::VectorXcd c(dim.size());
    c(0) = std::exp(-0.5 * std::norm(beta));
    for (int n = 0; n < dim.n_max; ++n) c(n + 1) = c(n) * beta / std::sqrt(double(n + 1));
    return {dim, std::move(c)};
}

TruncatedOperator displacement(Complex beta, FockDim dim) {
    auto ladder = ladder_operators(dim);
    // generator G = beta a† - conj(beta) a is skew-Hermitian; iG is Hermitian
    Eigen::MatrixXcd h =
        Complex(0, 1) * (beta * ladder.create.entries - std::conj(beta) * ladder.annihilate.entries);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    if (es.info() != Eigen::Success) throw std::runtime_error("displacement: eigensolver failed");
    Eigen::VectorXcd phases =
        (Complex(0, -1) * es.eigenvalues().cast<Complex>().array()).exp().matrix();
    return {dim, es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint()};
}

TruncatedOperator displaced_geometric_diagonal(double scale, double rate, Complex center,
                                               FockDim dim) {
    Eigen::VectorXd diag(dim.size());
    double q = 1.0;
    for (int n = 0; n < dim.size(); ++n) {
        diag(n) = scale * q;
        q *= 1.0 - rate;
    }
    if (center == Complex(0, 0)) {
        Eigen::MatrixXcd m = diag.cast<Complex>().asDiagonal();
        return {dim, std::move(m)};
    }
    TruncatedOperator d = displacement(center, dim);
    return {dim, d.entries * diag.asDiagonal() * d.entries.adjoint()};
}

TruncatedOperator normal_ordered_gaussian(double scale, double rate, Complex center,
                                          FockDim dim) {
    if (rate < 0.0 || rate > 1.0)
        throw std::invalid_argument("normal_ordered_gaussian: rate must lie in [0, 1]");
    return displaced_geometric_diagonal(scale, rate, center, dim);
}

HermitianSpectrum hermitian_spectrum(const TruncatedOperator& op, double hermiticity_tol) {
    double defect = op.hermiticity_defect();
    if (defect > hermiticity_tol)
        throw std::invalid_argument("hermitian_spectrum: asymmetry " + std::to_string(defect) +
                                    " exceeds tolerance");
    Eigen::MatrixXcd sym = 0.5 * (op.entries + op.entries.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("hermitian_spectrum: solver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

PsdReport psd_check(const TruncatedOperator& op, double tol) {
    auto spec = hermitian_spectrum(op, 1e-10 * std::max(1.0, op.max_abs()));
    double min_eig = spec.eigenvalues(0);
    return {min_eig >= -tol, min_eig};
}

PsdReport psd_check(const TruncatedOperator& op) {
    auto spec = hermitian_spectrum(op, 1e-10 * std::max(1.0, op.max_abs()));
    double min_eig = spec.eigenvalues(0);
    double scale = std::max(std::abs(min_eig), std::abs(spec.eigenvalues(spec.eigenvalues.size() - 1)));
    return {min_eig >= -1e-9 * scale, min_eig};
}

namespace reference {

// Differentiating the coherent-basis value
//   <gamma| :exp{-r (b-mu)†(b-mu)}: |delta>
//     = exp{-r |mu|^2 + (1-r) conj(gamma) delta + r mu conj(gamma) + r conj(mu) delta}
//       * exp{-|gamma|^2/2 - |delta|^2/2}
// m times in conj(gamma) and n times in delta at the origin gives the exact
// finite sum below; no displacement matrix and no truncation enters.
Complex normal_ordered_gaussian_element(double scale, double rate, Complex center,
                                        int m, int n) {
    using LC = std::complex<long double>;
    if (m < 0 || n < 0) throw std::invalid_argument("negative Fock index");
    const long double r = rate;
    const LC mu(center.real(), center.imag());
    const LC r_mu = r * mu;
    const LC r_mub = r * std::conj(mu);

    // sqrt(m! n!) sum_k (1-r)^k (r mu)^{m-k} (r conj(mu))^{n-k} / (k! (m-k)! (n-k)!)
    LC sum = 0.0L;
    for (int k = 0; k <= std::min(m, n); ++k) {
        LC term = 1.0L;
        for (int i = 0; i < k; ++i) term *= (1.0L - r) / LC(i + 1);
        for (int i = 0; i < m - k; ++i) term *= r_mu / LC(i + 1);
        for (int i = 0; i < n - k; ++i) term *= r_mub / LC(i + 1);
        sum += term;
    }
    long double root_factorials = 1.0L;
    for (int i = 1; i <= m; ++i) root_factorials *= std::sqrt((long double)i);
    for (int i = 1; i <= n; ++i) root_factorials *= std::sqrt((long double)i);
    LC element = (long double)scale * std::exp(-r * (long double)std::norm(center)) *
                 root_factorials * sum;
    return {(double)element.real(), (double)element.imag()};
}

}  // namespace reference

}  // namespace qdopt
