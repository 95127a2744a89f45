#include "spincool/fockspace.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "spincool/error.hpp"

namespace spincool {

namespace {

void require_dim(int dim) {
    if (dim < 2) {
        throw DomainError("Fock dimension must be at least 2, got " + std::to_string(dim));
    }
}

// Hermitian generator i(u b^dagger - u^* b); tridiagonal.
CMatrix hermitian_generator(cplx u, int dim) {
    CMatrix g = CMatrix::Zero(dim, dim);
    const cplx i{0.0, 1.0};
    for (int n = 1; n < dim; ++n) {
        const double s = std::sqrt(static_cast<double>(n));
        g(n, n - 1) = i * u * s;             // <n| i u b^dagger |n-1>
        g(n - 1, n) = -i * std::conj(u) * s; // <n-1| -i u^* b |n>
    }
    return g;
}

} // namespace

FockOperator annihilation(int dim) {
    require_dim(dim);
    CMatrix b = CMatrix::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) {
        b(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return {std::move(b)};
}

FockOperator creation(int dim) { return {annihilation(dim).matrix.adjoint()}; }

FockOperator number_operator(int dim) {
    require_dim(dim);
    return {RVector::LinSpaced(dim, 0.0, dim - 1.0).cast<cplx>().asDiagonal()};
}

FockOperator free_rotation(double t, int dim) {
    require_dim(dim);
    CVector phases(dim);
    for (int n = 0; n < dim; ++n) {
        phases(n) = std::polar(1.0, -t * n);
    }
    return {phases.asDiagonal()};
}

int required_dimension(double abs_alpha) {
    return std::max(2, static_cast<int>(std::ceil(4.0 * abs_alpha * abs_alpha)));
}

int recommended_dimension(double nbar, double max_amplitude) {
    if (nbar < 0.0 || max_amplitude < 0.0) {
        throw DomainError("recommended_dimension: arguments must be non-negative");
    }
    const double spread = std::sqrt(nbar) + max_amplitude;
    int dim = static_cast<int>(std::ceil(spread * spread + 10.0 * spread + 10.0));
    if (nbar > 0.0) {
        const double tail = std::log(1e-6) / std::log(nbar / (nbar + 1.0));
        dim = std::max(dim, static_cast<int>(std::ceil(tail)));
    }
    return std::max(dim, required_dimension(max_amplitude));
}

FockOperator displacement_matrix(cplx alpha, int dim) {
    require_dim(dim);
    const double a2 = std::norm(alpha);
    if (a2 > dim / 4.0) {
        std::ostringstream msg;
        msg << "displacement |alpha| = " << std::sqrt(a2) << " exceeds the support of a " << dim
            << "-level truncation; need dim >= " << required_dimension(std::sqrt(a2));
        throw AmplitudeTooLargeError(msg.str(), required_dimension(std::sqrt(a2)));
    }
    if (a2 == 0.0) {
        return {CMatrix::Identity(dim, dim)};
    }
    // exp(alpha b^dagger - alpha^* b) = exp(-i G), G = i(alpha b^dagger - alpha^* b)
    const DisplacementFamily family(alpha, dim);
    return {family(1.0)};
}

DisplacementFamily::DisplacementFamily(cplx direction, int dim) : direction_(direction) {
    require_dim(dim);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_generator(direction, dim));
    if (solver.info() != Eigen::Success) {
        throw Error("DisplacementFamily: eigendecomposition failed");
    }
    vectors_ = solver.eigenvectors();
    values_ = solver.eigenvalues();
}

CVector DisplacementFamily::spectral_factor(double scale) const {
    CVector f(values_.size());
    for (Eigen::Index j = 0; j < values_.size(); ++j) {
        f(j) = std::polar(1.0, -scale * values_(j));
    }
    return f;
}

CMatrix DisplacementFamily::operator()(double scale) const {
    return vectors_ * spectral_factor(scale).asDiagonal() * vectors_.adjoint();
}

MechState::MechState(CMatrix rho, double trace_deficit)
    : rho_(std::move(rho)), trace_deficit_(trace_deficit) {
    if (rho_.rows() != rho_.cols()) {
        throw DimensionMismatchError("MechState: density matrix must be square");
    }
    require_dim(static_cast<int>(rho_.rows()));
    if (trace_deficit_ < 0.0) {
        throw DomainError("MechState: trace deficit must be non-negative");
    }
}

MechState MechState::normalized() const {
    const double tr = trace();
    if (!(tr > 0.0)) {
        throw DegenerateStateError("cannot normalise a state with zero trace");
    }
    return MechState(rho_ / tr, 0.0);
}

void MechState::check_invariants(bool check_total) const {
    const double herm = hermiticity_deviation(rho_);
    if (herm > 1e-10) {
        throw DomainError("MechState not Hermitian: deviation " + std::to_string(herm));
    }
    const CMatrix sym = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
    const double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < -1e-8 * std::abs(trace())) {
        throw DomainError("MechState not positive semidefinite: min eigenvalue " +
                          std::to_string(min_eig));
    }
    if (check_total && std::abs(trace() + trace_deficit_ - 1.0) > 1e-8) {
        throw DomainError("MechState trace bookkeeping violated");
    }
}

MechState thermal_density(double nbar, int dim) {
    require_dim(dim);
    if (!(nbar >= 0.0)) {
        throw DomainError("thermal occupancy must be non-negative");
    }
    CMatrix rho = CMatrix::Zero(dim, dim);
    if (nbar == 0.0) {
        rho(0, 0) = 1.0;
        return MechState(std::move(rho), 0.0);
    }
    const double q = nbar / (nbar + 1.0);
    double p = 1.0 / (nbar + 1.0);
    for (int n = 0; n < dim; ++n) {
        rho(n, n) = p;
        p *= q;
    }
    return MechState(std::move(rho), std::pow(q, dim));
}

MechState vacuum_density(int dim) { return thermal_density(0.0, dim); }

CVector coherent_vector(cplx beta, int dim) {
    require_dim(dim);
    CVector v(dim);
    v(0) = std::exp(-0.5 * std::norm(beta));
    for (int n = 1; n < dim; ++n) {
        v(n) = v(n - 1) * beta / std::sqrt(static_cast<double>(n));
    }
    return v;
}

MechState coherent_density(cplx beta, int dim) {
    const CVector v = coherent_vector(beta, dim);
    const double deficit = std::max(0.0, 1.0 - v.squaredNorm());
    return MechState(v * v.adjoint(), deficit);
}

double mean_phonon(const CMatrix &rho) {
    const double tr = rho.trace().real();
    if (!(std::abs(tr) > 0.0)) {
        throw DegenerateStateError("mean_phonon: state has zero trace");
    }
    double acc = 0.0;
    for (Eigen::Index n = 1; n < rho.rows(); ++n) {
        acc += static_cast<double>(n) * rho(n, n).real();
    }
    return acc / tr;
}

double mean_phonon(const MechState &state) { return mean_phonon(state.rho()); }

QuadratureSpread quadrature_variances(const CMatrix &rho) {
    const Eigen::Index d = rho.rows();
    const double tr = rho.trace().real();
    if (!(std::abs(tr) > 0.0)) {
        throw DegenerateStateError("quadrature_variances: state has zero trace");
    }
    // Moments with truncated operator products: <b>, <b b>, <b^dagger b>, <b b^dagger>.
    cplx mb = 0.0, mbb = 0.0;
    double nn = 0.0, aa = 0.0;
    for (Eigen::Index n = 0; n + 1 < d; ++n) {
        mb += std::sqrt(n + 1.0) * rho(n + 1, n);
        aa += (n + 1.0) * rho(n, n).real();
    }
    for (Eigen::Index n = 0; n + 2 < d; ++n) {
        mbb += std::sqrt((n + 1.0) * (n + 2.0)) * rho(n + 2, n);
    }
    for (Eigen::Index n = 1; n < d; ++n) {
        nn += n * rho(n, n).real();
    }
    mb /= tr;
    mbb /= tr;
    nn /= tr;
    aa /= tr;
    const double x_mean = std::sqrt(2.0) * mb.real();
    const double y_mean = std::sqrt(2.0) * mb.imag();
    const double x2 = 0.5 * (2.0 * mbb.real() + nn + aa);
    const double y2 = 0.5 * (-2.0 * mbb.real() + nn + aa);
    return {std::sqrt(std::max(0.0, x2 - x_mean * x_mean)),
            std::sqrt(std::max(0.0, y2 - y_mean * y_mean))};
}

QuadratureSpread quadrature_variances(const MechState &state) {
    return quadrature_variances(state.rho());
}

RVector fock_distribution(const MechState &state) {
    const double tr = state.trace();
    if (!(tr > 0.0)) {
        throw DegenerateStateError("fock_distribution: state has zero trace");
    }
    return state.rho().diagonal().real() / tr;
}

double trace_distance(const CMatrix &a, const CMatrix &b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatchError("trace_distance: shape mismatch");
    }
    const CMatrix diff = a - b;
    const CMatrix sym = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym, Eigen::EigenvaluesOnly);
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

double hermiticity_deviation(const CMatrix &m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

} // namespace spincool
