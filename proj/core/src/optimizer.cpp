#include "spincool/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

#include "spincool/error.hpp"

namespace spincool {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

NelderMeadResult nelder_mead(const std::function<double(const RVector &)> &f, const RVector &x0,
                             double step, int max_evals, double tol) {
    const Eigen::Index n = x0.size();
    std::vector<RVector> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    NelderMeadResult res;
    const auto eval = [&](const RVector &x) {
        ++res.evaluations;
        return f(x);
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        pts[i + 1](i) += step;
    }
    for (Eigen::Index i = 0; i <= n; ++i) {
        vals[i] = eval(pts[i]);
    }

    std::vector<Eigen::Index> order(n + 1);
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return vals[a] < vals[b]; });
        const Eigen::Index best = order.front();
        const Eigen::Index worst = order.back();
        const Eigen::Index second = order[n - 1];
        if (std::isfinite(vals[worst]) && vals[worst] - vals[best] <= tol) {
            res.converged = true;
            break;
        }
        if (res.evaluations >= max_evals) {
            break;
        }

        RVector centroid = RVector::Zero(n);
        for (Eigen::Index i = 0; i <= n; ++i) {
            if (i != worst) {
                centroid += pts[i];
            }
        }
        centroid /= static_cast<double>(n);

        const RVector xr = centroid + (centroid - pts[worst]);
        const double fr = eval(xr);
        if (fr < vals[best]) {
            const RVector xe = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const RVector xc = outside ? RVector(centroid + 0.5 * (xr - centroid))
                                   : RVector(centroid + 0.5 * (pts[worst] - centroid));
        const double fc = eval(xc);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        for (Eigen::Index i = 0; i <= n; ++i) {
            if (i != best) {
                pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
                vals[i] = eval(pts[i]);
            }
        }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    res.x = pts[static_cast<std::size_t>(it - vals.begin())];
    res.value = *it;
    return res;
}

void OptimizeConfig::validate() const {
    if (n_spins < 1) {
        throw DomainError("optimize: at least one spin is required");
    }
    if (basis == Basis::product && n_spins > 4) {
        throw DomainError("optimize: product-basis search is limited to N <= 4");
    }
    if (restarts < 1) {
        throw DomainError("optimize: restarts must be >= 1");
    }
    if (max_evals < 1) {
        throw DomainError("optimize: max_evals must be >= 1");
    }
    if (!(tol > 0.0)) {
        throw DomainError("optimize: tol must be positive");
    }
    if (probability_floor && !(*probability_floor >= 0.0 && *probability_floor <= 1.0)) {
        throw DomainError("optimize: probability_floor must lie in [0, 1]");
    }
}

TargetEvaluation evaluate_target(const TargetState &target, const ModelParams &params) {
    ModelParams p = params;
    p.n_spins = target.n_spins();
    Strategy strategy = target.basis() == TargetBasis::collective
                            ? Strategy::collective(target.n_spins())
                            : Strategy::correlated(target);
    strategy.target = target;
    p.basis = strategy.basis();
    const auto r = SingleStepEvaluator(p, strategy)(p.lambda);
    if (!(r.probability >= kProbabilityFloor)) {
        return {kInf, 0.0};
    }
    return {r.ratio, r.probability};
}

TargetObjective::TargetObjective(const ModelParams &params, Basis basis)
    : basis_(basis == Basis::product ? SpinBasis::product(params.n_spins)
                                     : SpinBasis::collective(params.n_spins)),
      reference_(1.0) {
    ModelParams p = params;
    p.basis = basis;
    p.validate();
    preselection_ = equal_superposition(basis_.dim()).real();

    const SpinBlockUnitary u = build_evolution(p);
    const int d = p.fock_dim;
    const MechState thermal = thermal_density(p.nbar, d);
    const CMatrix rho = thermal.rho() / thermal.trace();
    reference_ = initial_occupancy(thermal);
    const int sectors = p.n_spins + 1;
    std::vector<CMatrix> kraus(sectors);
    std::vector<CMatrix> applied(sectors);
    for (int k = 0; k < sectors; ++k) {
        kraus[k] = u.sector_phase[k] * u.sector_factor[k];
        applied[k] = kraus[k] * rho;
    }
    const RVector levels = RVector::LinSpaced(d, 0.0, d - 1.0);
    energy_.resize(sectors, sectors);
    norm_.resize(sectors, sectors);
    for (int k = 0; k < sectors; ++k) {
        const CMatrix weighted = levels.asDiagonal() * applied[k];
        for (int l = 0; l < sectors; ++l) {
            // tr(O K_k rho K_l^dagger) = sum_ij (O K_k rho)_ij conj(K_l)_ij
            energy_(k, l) = weighted.cwiseProduct(kraus[l].conjugate()).sum().real();
            norm_(k, l) = applied[k].cwiseProduct(kraus[l].conjugate()).sum().real();
        }
    }
    energy_ = 0.5 * (energy_ + energy_.transpose()).eval();
    norm_ = 0.5 * (norm_ + norm_.transpose()).eval();
}

RVector TargetObjective::sector_sums(const RVector &c) const {
    RVector w = RVector::Zero(basis_.n_spins() + 1);
    for (int s = 0; s < basis_.dim(); ++s) {
        w(basis_.up_count(s)) += c(s) * preselection_(s);
    }
    return w;
}

TargetEvaluation TargetObjective::operator()(const RVector &c) const {
    if (c.size() != dimension()) {
        throw DimensionMismatchError("TargetObjective: coefficient length mismatch");
    }
    const double norm = c.norm();
    if (!(norm > 0.0)) {
        return {kInf, 0.0};
    }
    const RVector w = sector_sums(c / norm);
    const double prob = w.dot(norm_ * w);
    if (!(prob >= kProbabilityFloor)) {
        return {kInf, 0.0};
    }
    return {w.dot(energy_ * w) / prob / reference_, prob};
}

double TargetObjective::ratio_lower_bound() const {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(energy_, norm_);
    return solver.eigenvalues().minCoeff() / reference_;
}

TargetState canonical_target(const TargetState &target) {
    if (target.basis() == TargetBasis::collective) {
        return target.gauge_fixed();
    }
    const SpinBasis basis = target.spin_basis();
    const CVector c = target.spin_vector();
    CVector out = CVector::Zero(basis.dim());
    std::vector<bool> seen(basis.n_spins() + 1, false);
    std::vector<int> representative(basis.n_spins() + 1, 0);
    for (int s = 0; s < basis.dim(); ++s) {
        const int k = basis.up_count(s);
        if (!seen[k]) {
            seen[k] = true;
            representative[k] = s;
        }
        out(representative[k]) += c(s);
    }
    return TargetState::normalized(TargetBasis::product, target.n_spins(), out).gauge_fixed();
}

OptimizeResult optimize_target(const OptimizeConfig &config, const ModelParams &params) {
    config.validate();
    ModelParams p = params;
    p.n_spins = config.n_spins;
    p.basis = config.basis;
    const TargetObjective objective(p, config.basis);
    const auto f = [&](const RVector &x) {
        const TargetEvaluation e = objective(x);
        if (!std::isfinite(e.ratio)) {
            return kInf;
        }
        // Exact (L1) penalty: steep enough that the constrained optimum wins.
        if (config.probability_floor && e.probability < *config.probability_floor) {
            return e.ratio + 1e3 * (*config.probability_floor - e.probability);
        }
        return e.ratio;
    };

    const int dim = objective.dimension();
    std::vector<NelderMeadResult> results(config.restarts);
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int r = next++; r < config.restarts; r = next++) {
            std::seed_seq seq{static_cast<std::uint32_t>(config.seed & 0xffffffffu),
                              static_cast<std::uint32_t>(config.seed >> 32),
                              static_cast<std::uint32_t>(r)};
            std::mt19937_64 rng(seq);
            std::normal_distribution<double> normal(0.0, 1.0);
            RVector x0(dim);
            for (int i = 0; i < dim; ++i) {
                x0(i) = normal(rng);
            }
            x0 /= x0.norm();
            NelderMeadResult nm = nelder_mead(f, x0, 0.25, config.max_evals, config.tol);
            // One restart from the best vertex guards against a collapsed simplex.
            if (nm.evaluations < config.max_evals) {
                const RVector again = nm.x / nm.x.norm();
                NelderMeadResult polish =
                    nelder_mead(f, again, 0.05, config.max_evals - nm.evaluations, config.tol);
                polish.evaluations += nm.evaluations;
                if (polish.value <= nm.value) {
                    nm = std::move(polish);
                } else {
                    nm.evaluations = polish.evaluations;
                }
            }
            results[r] = std::move(nm);
        }
    };
    const int n_threads = std::max(1, std::min(config.jobs, config.restarts));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto &th : pool) {
            th.join();
        }
    }

    int best = 0;
    int evaluations = 0;
    for (int r = 0; r < config.restarts; ++r) {
        evaluations += results[r].evaluations;
        if (results[r].value < results[best].value) {
            best = r;
        }
    }
    const NelderMeadResult &win = results[best];
    if (!std::isfinite(win.value)) {
        throw DegenerateStateError("optimize: every restart ended on a vanishing branch");
    }
    const TargetBasis tb =
        config.basis == Basis::product ? TargetBasis::product : TargetBasis::collective;
    const TargetState raw =
        TargetState::normalized(tb, config.n_spins, win.x.cast<cplx>()).gauge_fixed();
    TargetState canon = canonical_target(raw);
    TargetEvaluation at = objective(canon.coefficients().real());
    // Concentrating a sector can lower the success probability; keep the raw
    // optimum when that would break the floor.
    if (config.probability_floor && at.probability < *config.probability_floor) {
        canon = raw;
        at = objective(raw.coefficients().real());
    }
    return OptimizeResult{std::move(canon), raw, at.ratio, at.probability, win.converged,
                          evaluations, best};
}

} // namespace spincool
