#pragma once

/**
 * @file
 * Closed spin-oscillator evolution under H = b^dagger b - lambda S (b + b^dagger),
 * with S = sum_i sigma_z,i (product basis) or S_z = m (collective basis).
 *
 * For a spin basis state with coupling label k the evolution factorises as
 *
 *     U_k(t) = exp(i (lambda k)^2 (t - sin t)) D[lambda k eta] exp(-i b^dagger b t),
 *     eta = 1 - exp(-i t),
 *
 * so U is block diagonal in the spin basis. In the collective basis lambda is
 * the collective coupling lambda_c and k = m; the two engines agree under
 * lambda_c = 2 lambda.
 */

#include <numbers>
#include <span>
#include <vector>

#include "spincool/fockspace.hpp"
#include "spincool/state.hpp"

namespace spincool {

enum class Basis { product, collective };

struct ModelParams {
    double lambda = 0.12;
    double t = std::numbers::pi / 2.0;
    double nbar = 10.0;
    int n_spins = 1;
    int fock_dim = 150;
    Basis basis = Basis::product;

    /// Throws DomainError on lambda < 0, t outside (0, 2 pi], nbar < 0,
    /// n_spins < 1 or fock_dim < 2.
    void validate() const;
    /// 1e-4 < lambda < 1e-1.
    bool in_operating_range() const;

    cplx eta() const;
    SpinBasis spin_basis() const;
    /// Displacement per unit eta for spin basis state s: lambda * label(s).
    double coupling(int s) const;
};

/// exp(i kappa^2 (t - sin t)) for effective coupling kappa = lambda * label.
cplx sector_phase(double kappa, double t);

/// U(t) stored per distinct coupling label; basis state s maps to sector
/// `sector_of[s]`.
struct SpinBlockUnitary {
    SpinBasis basis = SpinBasis::none();
    double t = 0.0;
    std::vector<int> sector_of;
    std::vector<double> sector_coupling; ///< lambda * label
    std::vector<cplx> sector_phase;
    std::vector<CMatrix> sector_factor; ///< D[kappa eta] exp(-i b^dagger b t)

    int fock_dim() const { return static_cast<int>(sector_factor.front().rows()); }
    const CMatrix &factor(int s) const { return sector_factor[sector_of[s]]; }
    cplx phase(int s) const { return sector_phase[sector_of[s]]; }
    CMatrix block(int s) const { return phase(s) * factor(s); }
};

SpinBlockUnitary build_evolution(const ModelParams &params);

/// U rho U^dagger applied blockwise.
QuantumState evolve_closed(const QuantumState &state, const ModelParams &params);
QuantumState evolve_closed(const QuantumState &state, const SpinBlockUnitary &unitary);

/// Integrates d rho/dt = -i [H, rho] with fixed-step RK4 (dt = t/steps) on the
/// truncated joint space. Also runs steps/2 and throws ConvergenceError when
/// the two results differ by more than 1e-8 (max entry), or when
/// steps < 2000 t.
QuantumState evolve_brute_force(const QuantumState &state, const ModelParams &params, int steps);

/// (1 - 2 lambda / beta)^2: coherent input beta > 0, spin up postselected at t = pi.
double coherent_ratio_closed_form(double lambda, double beta);

/// n + 2 lambda^2 (1 - cos t): single-spin energy with the spin traced out.
double traced_mean_phonon(double t, double lambda, double nbar);

/// Coherent component carried by the sector with `up_count` up-spins when the
/// oscillator starts in |beta>:
///   U_n |beta> = sector_phase * exp(i phase) |amplitude>.
struct CoherentBranch {
    int up_count = 0;
    cplx amplitude;     ///< beta e^{-it} + lambda (2n - N) eta
    double phase = 0.0; ///< 2 lambda (2n - N) r cos(phi - t/2) sin(t/2)
};

CoherentBranch coherent_branch(int up_count, int n_spins, double lambda, double t, cplx beta);

/// binom(N, n) binom(N, m) exp(i lambda^2 (t - sin t)[(2n-N)^2 - (2m-N)^2]).
cplx branch_pair_weight(int n, int m, int n_spins, double lambda, double t);

/// Single-step postselection evaluated through the coherent-branch route:
/// the thermal state is written as a Gaussian mixture of coherent states and
/// the phase-space integral is done by Gauss-Laguerre (radial) times
/// trapezoidal (angular) quadrature. `sector_weights[n]` is the summed
/// preselection x target amplitude of the sector with n up-spins.
struct BranchIntegral {
    double probability = 0.0;
    double mean_phonon = 0.0;
};

BranchIntegral thermal_branch_integral(const ModelParams &params,
                                       std::span<const cplx> sector_weights,
                                       int radial_nodes = 96, int angular_nodes = 128);

} // namespace spincool
