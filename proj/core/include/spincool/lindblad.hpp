#pragma once

/**
 * @file
 * Markovian open-system dynamics of the joint spin-oscillator state:
 *
 *   d rho/dt = -i[H, rho] + gamma (1 + n) D[b] + gamma n D[b^dagger]
 *              + sum_i { Gamma (1 + n) D[sigma-_i] + Gamma n D[sigma+_i]
 *                        + (gamma_phi / 2) D[sigma_z,i] },
 *   D[O] rho = O rho O^dagger - (O^dagger O rho + rho O^dagger O) / 2,
 *
 * with n the bath occupancy. Only the product spin basis is supported since
 * the single-spin jump operators leave the symmetric subspace.
 */

#include <optional>

#include "spincool/dynamics.hpp"
#include "spincool/protocol.hpp"

namespace spincool {

struct LindbladRates {
    double gamma = 0.0;           ///< mechanical damping
    double spin_relaxation = 0.0; ///< Gamma
    double dephasing = 0.0;       ///< gamma_phi
    /// Bath occupancy; defaults to the model's initial nbar.
    std::optional<double> nbar_bath;

    /// Throws DomainError on any negative rate or occupancy.
    void validate() const;
    bool mechanics_feasible() const { return gamma <= 1e-3; }
    bool spins_feasible() const { return spin_relaxation <= 1e-3 && dephasing <= 1e-2; }
    bool all_zero() const { return gamma == 0.0 && spin_relaxation == 0.0 && dephasing == 0.0; }
};

/// Default integration step, 2 pi x 1e-3.
inline constexpr double kDefaultOpenStep = 2.0 * std::numbers::pi * 1e-3;

/// Right-hand side of the master equation in the Schroedinger picture.
/// Throws UnsupportedBasisError for collective-basis states.
CMatrix liouvillian_apply(const QuantumState &state, const ModelParams &params,
                          const LindbladRates &rates);

struct OpenEvolution {
    QuantumState state;
    /// Largest ||rho - rho^dagger||_max seen before per-step symmetrisation.
    double max_hermiticity_deviation = 0.0;
    int steps = 0;
};

/// Fixed-step RK4 over [0, params.t] with step <= dt, integrated in the frame
/// rotating with b^dagger b and transformed back at the end. Throws
/// PositivityError when the final state has an eigenvalue below -1e-6 tr rho.
OpenEvolution evolve_open(const QuantumState &state, const ModelParams &params,
                          const LindbladRates &rates, double dt = kDefaultOpenStep);

struct OpenProtocolOptions {
    double dt = kDefaultOpenStep;
    /// Overrides the strategy's re-preparation rule when set.
    std::optional<bool> reinitialize_spins;
};

/// Protocol loop with open evolution inside each step. The mechanical state
/// is carried between iterations without re-thermalisation. Stops early on a
/// vanishing branch (see ProtocolRun::halted_at). Requires a product-basis
/// strategy and 1 <= N <= 4.
ProtocolRun run_protocol_open(const ModelParams &params, const Strategy &strategy,
                              const LindbladRates &rates, int iterations,
                              const OpenProtocolOptions &options = {});

} // namespace spincool
