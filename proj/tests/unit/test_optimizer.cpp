#include <array>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "spincool/error.hpp"
#include "spincool/optimizer.hpp"

using namespace spincool;

namespace {

constexpr double kPi = std::numbers::pi;

ModelParams model(int n_spins) {
    ModelParams p;
    p.n_spins = n_spins;
    p.lambda = 0.12;
    p.t = kPi / 2.0;
    p.nbar = 10.0;
    p.fock_dim = 150;
    return p;
}

} // namespace

TEST(NelderMead, Rosenbrock) {
    const auto f = [](const RVector &x) {
        return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
    };
    const NelderMeadResult r = nelder_mead(f, RVector::Constant(2, -1.0), 0.5, 5000, 1e-14);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x(0), 1.0, 1e-4);
    EXPECT_NEAR(r.x(1), 1.0, 1e-4);
    EXPECT_LE(r.evaluations, 5000);
}

TEST(NelderMead, BudgetExhaustionFlagged) {
    const auto f = [](const RVector &x) { return x.squaredNorm(); };
    const NelderMeadResult r = nelder_mead(f, RVector::Constant(4, 3.0), 0.1, 10, 1e-14);
    EXPECT_FALSE(r.converged);
    EXPECT_LT(r.value, 36.0);
}

TEST(Objective, SelectsPreselectionAtZeroCoupling) {
    ModelParams p = model(2);
    p.lambda = 0.0;
    const TargetEvaluation e = evaluate_target(target_independent(2), p);
    EXPECT_NEAR(e.probability, 1.0, 1e-12);
    EXPECT_NEAR(e.ratio, 1.0, 1e-12);
}

TEST(Objective, SingleSpinPlusState) {
    const TargetEvaluation e = evaluate_target(target_independent(1), model(1));
    EXPECT_NEAR(e.ratio, 0.7, 0.02);
}

TEST(Objective, Corr3BeatsFourIndependentSpins) {
    const double corr3 = evaluate_target(target_corr3(), model(3)).ratio;
    const double ind4 = evaluate_target(target_independent(4), model(4)).ratio;
    EXPECT_LT(corr3, ind4);
}

TEST(Objective, QuadraticFormAgreesWithDirectEvaluation) {
    const TargetObjective obj(model(2), Basis::product);
    EXPECT_EQ(obj.dimension(), 4);
    RVector c(4);
    c << 0.3, -0.7, 0.2, 0.5;
    const TargetEvaluation a = obj(c);
    const TargetEvaluation b =
        evaluate_target(TargetState::normalized(TargetBasis::product, 2, c.cast<cplx>()), model(2));
    EXPECT_NEAR(a.ratio, b.ratio, 1e-9);
    EXPECT_NEAR(a.probability, b.probability, 1e-9);
}

TEST(Objective, GaugeAndPermutationInvariant) {
    const TargetObjective obj(model(3), Basis::product);
    RVector c(8);
    c << 0.1, -0.4, 0.3, 0.2, 0.6, -0.1, 0.25, 0.5;
    const TargetEvaluation base = obj(c);
    EXPECT_NEAR(obj(-c).ratio, base.ratio, 1e-12);
    EXPECT_NEAR(obj(2.5 * c).ratio, base.ratio, 1e-12);
    const std::array<int, 3> perm{1, 2, 0};
    const RVector permuted = permute_spin_vector(c.cast<cplx>(), 3, perm).real();
    EXPECT_NEAR(obj(permuted).ratio, base.ratio, 1e-12);
    EXPECT_NEAR(obj(permuted).probability, base.probability, 1e-12);
}

TEST(Objective, ZeroVectorIsVanishing) {
    const TargetObjective obj(model(1), Basis::product);
    const TargetEvaluation e = obj(RVector::Zero(2));
    EXPECT_TRUE(std::isinf(e.ratio));
    EXPECT_EQ(e.probability, 0.0);
}

TEST(Optimizer, SingleSpinRecoversPlusState) {
    // Oracle: dense scan over the Bloch angle.
    const ModelParams p = model(1);
    double best_theta = 0.0;
    double best = 1e9;
    for (int i = 0; i <= 44; ++i) {
        const double theta = kPi / 4.0 + (kPi / 2.0) * i / 44.0;
        for (double delta : {0.0, kPi}) {
            const double r = evaluate_target(target_bloch(theta, delta), p).ratio;
            if (r < best) {
                best = r;
                best_theta = theta;
            }
        }
    }
    EXPECT_NEAR(best_theta, kPi / 2.0, 0.01);

    OptimizeConfig cfg;
    cfg.n_spins = 1;
    cfg.restarts = 8;
    const OptimizeResult res = optimize_target(cfg, p);
    EXPECT_LE(res.ratio, best + 1e-9);
    const CVector c = res.target.coefficients();
    EXPECT_NEAR(c(0).real(), std::sqrt(0.5), 1e-3);
    EXPECT_NEAR(c(1).real(), std::sqrt(0.5), 1e-3);
}

TEST(Optimizer, TwoSpinsMatchCorrelatedTarget) {
    const ModelParams p = model(2);
    OptimizeConfig cfg;
    cfg.n_spins = 2;
    const OptimizeResult res = optimize_target(cfg, p);
    const double reference = evaluate_target(target_corr2(), p).ratio;
    EXPECT_LE(res.ratio, reference + 1e-9);
    EXPECT_TRUE(res.converged);

    const TargetObjective obj(p, Basis::product);
    EXPECT_NEAR(res.ratio, obj.ratio_lower_bound(), 1e-8);

    // Compare up to the spin swap |du> <-> |ud>.
    const CVector got = res.target.coefficients();
    const CVector want = target_corr2().coefficients();
    const std::array<int, 2> swap{1, 0};
    const CVector want_swapped = permute_spin_vector(want, 2, swap);
    const double d1 = (got - want).cwiseAbs().maxCoeff();
    const double d2 = (got - want_swapped).cwiseAbs().maxCoeff();
    EXPECT_LT(std::min(d1, d2), 0.02) << got.transpose();
}

TEST(Optimizer, DeterministicForSeed) {
    OptimizeConfig cfg;
    cfg.n_spins = 2;
    cfg.restarts = 6;
    const OptimizeResult a = optimize_target(cfg, model(2));
    const OptimizeResult b = optimize_target(cfg, model(2));
    EXPECT_EQ(a.ratio, b.ratio);
    EXPECT_EQ(a.best_restart, b.best_restart);
    EXPECT_EQ((a.raw_target.coefficients() - b.raw_target.coefficients()).norm(), 0.0);
    cfg.jobs = 3;
    const OptimizeResult c = optimize_target(cfg, model(2));
    EXPECT_EQ(a.ratio, c.ratio);
}

TEST(Optimizer, CanonicalFormKeepsRatio) {
    const ModelParams p = model(3);
    const TargetState canon = canonical_target(target_corr3());
    EXPECT_NEAR(evaluate_target(canon, p).ratio, evaluate_target(target_corr3(), p).ratio, 1e-10);
    EXPECT_GT(canon.coefficients()(0).real(), 0.0);
}

TEST(Optimizer, ProbabilityFloorRespected) {
    OptimizeConfig cfg;
    cfg.n_spins = 2;
    cfg.restarts = 8;
    const double unconstrained = evaluate_target(target_corr2(), model(2)).probability;
    cfg.probability_floor = unconstrained + 0.05;
    const OptimizeResult res = optimize_target(cfg, model(2));
    EXPECT_GE(res.probability, unconstrained + 0.05 - 1e-6);
    cfg.probability_floor.reset();
    const OptimizeResult free = optimize_target(cfg, model(2));
    EXPECT_GE(res.ratio, free.ratio - 1e-9);
}

TEST(Optimizer, ConfigValidation) {
    OptimizeConfig cfg;
    cfg.restarts = 0;
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg = {};
    cfg.tol = 0.0;
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg = {};
    cfg.n_spins = 5;
    EXPECT_THROW(cfg.validate(), DomainError);
    cfg.basis = Basis::collective;
    EXPECT_NO_THROW(cfg.validate());
}
