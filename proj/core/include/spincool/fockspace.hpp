#pragma once

/**
 * @file
 * Truncated single-mode bosonic Hilbert space: operators, canonical states
 * and the observables used throughout the cooling protocol (hbar = 1).
 *
 * Fock levels are 0..d-1. Operators are built as dense d x d matrices and all
 * algebra is done inside the truncation; the top `kSupportMargin` levels are
 * never trusted for identities such as D^dagger D = 1.
 */

#include <complex>

#include <Eigen/Dense>

namespace spincool {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Levels at the top of the truncation reserved as a support margin.
inline constexpr int kSupportMargin = 15;

struct FockOperator {
    CMatrix matrix;

    int dim() const { return static_cast<int>(matrix.rows()); }
};

FockOperator annihilation(int dim);
FockOperator creation(int dim);
FockOperator number_operator(int dim);
/// exp(-i b^dagger b t), diagonal.
FockOperator free_rotation(double t, int dim);

/// exp(alpha b^dagger - alpha^* b) as the exact exponential of the truncated
/// generator. Requires |alpha|^2 <= dim/4.
FockOperator displacement_matrix(cplx alpha, int dim);

/// Smallest dimension accepted by the displacement support guard for |alpha|.
int required_dimension(double abs_alpha);

/// Truncation suggested for a thermal state of occupancy `nbar` displaced by
/// at most `max_amplitude`: thermal tail below 1e-6 and room for the
/// displaced distribution.
int recommended_dimension(double nbar, double max_amplitude);

/// Displacements along a fixed complex direction `u`,
/// D(s u) = exp(s (u b^dagger - u^* b)) for any real scale s.
///
/// The Hermitian matrix i(u b^dagger - u^* b) is diagonalised once; every
/// member of the family is then V diag(exp(-i s mu)) V^dagger. All spin
/// sectors of one evolution step share a direction (u = eta), so a single
/// eigendecomposition serves the whole step.
class DisplacementFamily {
  public:
    DisplacementFamily(cplx direction, int dim);

    CMatrix operator()(double scale) const;
    /// diag(exp(-i s mu)) in the eigenbasis.
    CVector spectral_factor(double scale) const;

    const CMatrix &eigenvectors() const { return vectors_; }
    const RVector &eigenvalues() const { return values_; }
    cplx direction() const { return direction_; }
    int dim() const { return static_cast<int>(values_.size()); }

  private:
    cplx direction_;
    CMatrix vectors_;
    RVector values_;
};

/// Mechanical density matrix. `trace_deficit` carries probability mass lost
/// to truncation; it is bookkept, never silently renormalised.
class MechState {
  public:
    explicit MechState(CMatrix rho, double trace_deficit = 0.0);

    int dim() const { return static_cast<int>(rho_.rows()); }
    const CMatrix &rho() const { return rho_; }
    double trace_deficit() const { return trace_deficit_; }
    double trace() const { return rho_.trace().real(); }

    /// Divides by the current trace; the result has zero deficit.
    MechState normalized() const;

    /// Throws DomainError unless Hermitian (1e-10), positive semidefinite
    /// (min eigenvalue > -1e-8 trace) and trace + deficit = 1 (1e-8).
    /// `check_total` = false skips the last condition for conditional states.
    void check_invariants(bool check_total = true) const;

  private:
    CMatrix rho_;
    double trace_deficit_;
};

MechState thermal_density(double nbar, int dim);
MechState vacuum_density(int dim);
/// Analytic Poisson amplitudes e^{-|beta|^2/2} beta^n / sqrt(n!).
CVector coherent_vector(cplx beta, int dim);
MechState coherent_density(cplx beta, int dim);

/// tr(n rho) / tr(rho).
double mean_phonon(const MechState &state);
double mean_phonon(const CMatrix &rho);

struct QuadratureSpread {
    double dx;
    double dy;
};

/// Standard deviations of x = (b + b^dagger)/sqrt2 and y = i(b^dagger - b)/sqrt2.
QuadratureSpread quadrature_variances(const MechState &state);
QuadratureSpread quadrature_variances(const CMatrix &rho);

/// Diagonal of rho / tr(rho).
RVector fock_distribution(const MechState &state);

/// (1/2) sum |eig(a - b)| for Hermitian a, b.
double trace_distance(const CMatrix &a, const CMatrix &b);

/// max |m - m^dagger|.
double hermiticity_deviation(const CMatrix &m);

} // namespace spincool
