#pragma once

/**
 * @file
 * Iterative cooling loop: evolve, postselect, keep the mechanical state on
 * success, repeat.
 *
 * At the start of every step the spins are in a known pure state that is
 * separable from the oscillator, so one step is the single-Kraus map
 *
 *     rho -> A rho A^dagger,   A = sum_s conj(target_s) pre_s U_s,
 *
 * with U_s the spin-block evolution. Only d x d matrices are carried between
 * iterations.
 */

#include <optional>
#include <string>
#include <vector>

#include "spincool/dynamics.hpp"
#include "spincool/postselect.hpp"

namespace spincool {

enum class StrategyKind { independent, correlated, collective };

struct Strategy {
    StrategyKind kind = StrategyKind::independent;
    TargetState target;
    /// Spin state prepared before the first step (and before every step when
    /// reinitialize_spins is set). Same basis as the target.
    CVector preselection;
    bool reinitialize_spins = false;

    /// Target |+>^N, preselection |+>^N, no re-preparation.
    static Strategy independent(int n_spins);
    /// Arbitrary product-basis target, preselection |+>^N, re-prepared each step.
    static Strategy correlated(TargetState target);
    /// Flat Dicke target and preselection over m = -N/2..N/2, re-prepared each step.
    static Strategy collective(int n_spins);

    int n_spins() const { return target.n_spins(); }
    Basis basis() const;
    /// Throws DimensionMismatchError if the preselection does not fit the target.
    void validate() const;
    /// Preselection for step `index` (1-based): after a success without
    /// re-preparation the spins sit in the target.
    CVector spins_before_step(int index) const;
};

/// Summed conj(target) x preselection amplitude per coupling sector
/// (index = number of up spins, or j = m + N/2 in the collective basis).
std::vector<cplx> sector_weights(const SpinBasis &basis, const CVector &target,
                                 const CVector &preselection);

struct IterationRecord {
    int index = 0;
    double mean_phonon = 0.0;
    double ratio = 0.0;
    double dx = 0.0;
    double dy = 0.0;
    double step_probability = 0.0;
    double cumulative_probability = 0.0;
};

/// One evolve+postselect step acting on mechanical states only.
class StepMap {
  public:
    StepMap(const ModelParams &params, const CVector &target, const CVector &preselection);

    const CMatrix &kraus() const { return kraus_; }
    int dim() const { return static_cast<int>(kraus_.rows()); }
    /// Unnormalised image A rho A^dagger; its trace is the step probability
    /// (times tr rho).
    CMatrix apply(const CMatrix &rho) const;

  private:
    CMatrix kraus_;
};

StepMap build_step_superoperator(const ModelParams &params, const Strategy &strategy,
                                 int step_index = 1);

struct ProtocolRun {
    std::vector<IterationRecord> records;
    MechState final_state;
    /// Set when the loop stopped on a vanishing branch.
    std::optional<int> halted_at;
    double halted_probability = 0.0;
};

/// Runs up to K steps from the thermal state at params.nbar (or `initial`).
/// Stops early on a vanishing branch instead of throwing; records up to the
/// halt are kept. Ratios are relative to initial_occupancy of the input.
ProtocolRun simulate_protocol(const ModelParams &params, const Strategy &strategy, int iterations,
                              const std::optional<MechState> &initial = std::nullopt);

/// As simulate_protocol but throws VanishingBranchError carrying the iteration.
std::vector<IterationRecord> run_protocol(const ModelParams &params, const Strategy &strategy,
                                          int iterations);

/// Mean phonon number of the protocol input, the denominator of every ratio
/// (1 for the vacuum so ratios stay finite).
double initial_occupancy(const MechState &state);

IterationRecord make_record(int index, const MechState &state, double reference,
                            double step_probability, double cumulative_probability);

/// Single-step observables for a fixed t and input state, re-evaluated for any
/// lambda in O(d^2) by working in the eigenbasis of the displacement generator.
class SingleStepEvaluator {
  public:
    SingleStepEvaluator(const ModelParams &params, const Strategy &strategy,
                        const std::optional<MechState> &input = std::nullopt);

    struct Result {
        double lambda = 0.0;
        double ratio = 0.0;
        double var_ratio = 0.0; ///< dx / dy
        double probability = 0.0;
        double mean_phonon = 0.0;
    };
    Result operator()(double lambda) const;

  private:
    ModelParams params_;
    double reference_;
    SpinBasis basis_;
    std::vector<double> labels_;
    std::vector<cplx> weights_;
    RVector mu_;
    CMatrix rho_e_;
    CMatrix number_e_, lower_e_, lower2_e_, anti_e_;
};

struct SweepRow {
    double t = 0.0;
    double lambda = 0.0;
    double ratio = 0.0;
    double var_ratio = 0.0;
    double probability = 0.0;
};

/// Grid in row-major (t outer, lambda inner) order. Work is split over up to
/// `jobs` threads by t.
std::vector<SweepRow> sweep_ratio(const ModelParams &params, const Strategy &strategy,
                                  const std::vector<double> &lambdas,
                                  const std::vector<double> &times, int jobs = 1);

/// Among the per-t lambda minima, the one whose dx/dy is closest to 1. The
/// ratio valley is nearly flat along t, and variance balance is what singles
/// out the cooling (rather than squeezing) point.
SweepRow locate_thermal_optimum(const std::vector<SweepRow> &rows);

/// Global minimum ratio over the grid.
SweepRow grid_minimum(const std::vector<SweepRow> &rows);

double single_step_ratio(const ModelParams &params, const Strategy &strategy);

struct LambdaOptimum {
    double lambda = 0.0;
    double ratio = 0.0;
    double probability = 0.0;
};

/// Minimises the single-step ratio over lambda in [lo, hi] at fixed t: coarse
/// scan, then golden-section refinement.
LambdaOptimum optimal_lambda(const ModelParams &params, const Strategy &strategy,
                             double lo = 0.0, double hi = 0.3, double tol = 1e-6);

/// Optimal single-step ratio with N = n_high independent spins over that with
/// n_high - 1, both at t = params.t.
double enhancement_ratio(int n_high, const ModelParams &params);

} // namespace spincool
