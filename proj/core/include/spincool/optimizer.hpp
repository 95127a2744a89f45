#pragma once

/**
 * @file
 * Multi-start Nelder-Mead search for real target coefficients that minimise
 * the single-step postselected mean phonon number.
 *
 * The single-step outcome depends on the target only through the sector sums
 * w_k = sum_{s in sector k} c_s pre_s, and the ratio only through the
 * direction of w. With g_k(i) the spectral factor of sector k, both the
 * unnormalised energy and the probability are real quadratic forms
 * w^T M w, precomputed once per (lambda, t, nbar).
 */

#include <cstdint>
#include <functional>
#include <optional>

#include "spincool/dynamics.hpp"
#include "spincool/postselect.hpp"
#include "spincool/protocol.hpp"

namespace spincool {

struct NelderMeadResult {
    RVector x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Standard coefficients (reflect 1, expand 2, contract 1/2, shrink 1/2).
/// Converges when the spread of simplex values drops to `tol`.
NelderMeadResult nelder_mead(const std::function<double(const RVector &)> &f, const RVector &x0,
                             double step, int max_evals, double tol);

struct OptimizeConfig {
    int n_spins = 2;
    Basis basis = Basis::product;
    int restarts = 32;
    int max_evals = 20000;
    double tol = 1e-12;
    std::optional<double> probability_floor;
    std::uint64_t seed = 20240601;
    int jobs = 1;

    /// Throws DomainError on restarts < 1, tol <= 0, max_evals < 1, or a
    /// product-basis search beyond 4 spins.
    void validate() const;
};

struct TargetEvaluation {
    double ratio = 0.0;
    double probability = 0.0;
};

/// One evolve+postselect step from the strategy preselection for this target
/// (|+>^N in the product basis, flat Dicke in the collective basis). A vanishing
/// branch gives probability 0 and ratio +inf.
TargetEvaluation evaluate_target(const TargetState &target, const ModelParams &params);

/// Quadratic-form objective over real coefficient vectors of length 2^N
/// (product) or N+1 (collective).
class TargetObjective {
  public:
    TargetObjective(const ModelParams &params, Basis basis);

    int dimension() const { return static_cast<int>(preselection_.size()); }
    /// Normalises c internally; a zero vector evaluates as a vanishing branch.
    TargetEvaluation operator()(const RVector &c) const;
    /// Smallest achievable ratio: lowest generalised eigenvalue of the sector
    /// energy and probability forms.
    double ratio_lower_bound() const;

  private:
    RVector sector_sums(const RVector &c) const;

    SpinBasis basis_;
    RVector preselection_;
    double reference_;
    Eigen::MatrixXd energy_;
    Eigen::MatrixXd norm_;
};

/// Redistributes each sector sum onto the lowest-index configuration of that
/// sector, then normalises and gauge-fixes. Leaves the single-step ratio
/// unchanged; the success probability generally changes.
TargetState canonical_target(const TargetState &target);

struct OptimizeResult {
    TargetState target;     ///< canonical form (raw form if the floor forbids it)
    TargetState raw_target; ///< best restart as found, gauge-fixed
    double ratio = 0.0;
    double probability = 0.0;
    bool converged = false;
    int evaluations = 0;
    int best_restart = 0;
};

OptimizeResult optimize_target(const OptimizeConfig &config, const ModelParams &params);

} // namespace spincool
