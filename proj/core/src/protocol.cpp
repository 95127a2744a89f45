#include "spincool/protocol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "spincool/error.hpp"

namespace spincool {

namespace {

double sector_label(const SpinBasis &basis, int sector) {
    const int n = basis.n_spins();
    return basis.kind() == SpinBasisKind::product ? 2.0 * sector - n : sector - 0.5 * n;
}

std::vector<double> sector_labels(const SpinBasis &basis) {
    std::vector<double> labels(basis.n_spins() + 1);
    for (int k = 0; k <= basis.n_spins(); ++k) {
        labels[k] = sector_label(basis, k);
    }
    return labels;
}

void check_amplitude(const std::vector<double> &labels, double lambda, cplx eta, int d) {
    double widest = 0.0;
    for (double label : labels) {
        widest = std::max(widest, std::abs(lambda * label));
    }
    const double alpha = widest * std::abs(eta);
    if (alpha * alpha > d / 4.0) {
        std::ostringstream msg;
        msg << "largest sector displacement |alpha| = " << alpha << " needs dim >= "
            << required_dimension(alpha) << ", have " << d;
        throw AmplitudeTooLargeError(msg.str(), required_dimension(alpha));
    }
}

// rho -> R rho R^dagger for R = exp(-i n t)
CMatrix rotate(const CMatrix &rho, double t) {
    const Eigen::Index d = rho.rows();
    CMatrix out(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            out(i, j) = rho(i, j) * std::polar(1.0, -static_cast<double>(i - j) * t);
        }
    }
    return out;
}

} // namespace

double initial_occupancy(const MechState &state) {
    const double n0 = mean_phonon(state);
    return n0 > 0.0 ? n0 : 1.0;
}

Basis Strategy::basis() const {
    return target.basis() == TargetBasis::collective ? Basis::collective : Basis::product;
}

void Strategy::validate() const {
    if (preselection.size() != target.spin_basis().dim()) {
        throw DimensionMismatchError("strategy preselection does not match the target basis");
    }
    if (std::abs(preselection.norm() - 1.0) >= 1e-10) {
        throw DomainError("strategy preselection is not unit norm");
    }
}

CVector Strategy::spins_before_step(int index) const {
    if (index <= 1 || reinitialize_spins) {
        return preselection;
    }
    return target.spin_vector();
}

Strategy Strategy::independent(int n_spins) {
    TargetState target = target_independent(n_spins);
    CVector pre = target.spin_vector();
    return Strategy{StrategyKind::independent, std::move(target), std::move(pre), false};
}

Strategy Strategy::correlated(TargetState target) {
    if (target.basis() == TargetBasis::collective) {
        throw UnsupportedBasisError("correlated strategy needs a product or Bell target");
    }
    CVector pre = equal_superposition(1 << target.n_spins());
    return Strategy{StrategyKind::correlated, std::move(target), std::move(pre), true};
}

Strategy Strategy::collective(int n_spins) {
    TargetState target = target_collective_flat(n_spins);
    CVector pre = target.spin_vector();
    return Strategy{StrategyKind::collective, std::move(target), std::move(pre), true};
}

std::vector<cplx> sector_weights(const SpinBasis &basis, const CVector &target,
                                 const CVector &preselection) {
    if (target.size() != basis.dim() || preselection.size() != basis.dim()) {
        throw DimensionMismatchError("sector_weights: vector length does not match the basis");
    }
    std::vector<cplx> w(basis.n_spins() + 1, cplx{0.0, 0.0});
    for (int s = 0; s < basis.dim(); ++s) {
        w[basis.up_count(s)] += std::conj(target(s)) * preselection(s);
    }
    return w;
}

StepMap::StepMap(const ModelParams &params, const CVector &target, const CVector &preselection) {
    params.validate();
    const SpinBasis basis = params.spin_basis();
    const std::vector<cplx> w = sector_weights(basis, target, preselection);
    const std::vector<double> labels = sector_labels(basis);
    const cplx eta = params.eta();
    const int d = params.fock_dim;
    check_amplitude(labels, params.lambda, eta, d);

    const DisplacementFamily family(eta, d);
    const RVector &mu = family.eigenvalues();
    CVector f = CVector::Zero(d);
    for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] == cplx{0.0, 0.0}) {
            continue;
        }
        const double kappa = params.lambda * labels[k];
        const cplx c = w[k] * sector_phase(kappa, params.t);
        for (int i = 0; i < d; ++i) {
            f(i) += c * std::polar(1.0, -kappa * mu(i));
        }
    }
    const CMatrix &v = family.eigenvectors();
    const CVector rotation = free_rotation(params.t, d).matrix.diagonal();
    kraus_ = (v * f.asDiagonal() * v.adjoint()) * rotation.asDiagonal();
}

CMatrix StepMap::apply(const CMatrix &rho) const {
    if (rho.rows() != kraus_.rows() || rho.cols() != kraus_.cols()) {
        throw DimensionMismatchError("StepMap::apply: dimension mismatch");
    }
    return kraus_ * rho * kraus_.adjoint();
}

StepMap build_step_superoperator(const ModelParams &params, const Strategy &strategy,
                                 int step_index) {
    strategy.validate();
    if (params.n_spins != strategy.n_spins() || params.basis != strategy.basis()) {
        throw DimensionMismatchError("strategy spin count or basis differs from model parameters");
    }
    return StepMap(params, strategy.target.spin_vector(), strategy.spins_before_step(step_index));
}

IterationRecord make_record(int index, const MechState &state, double reference,
                            double step_probability, double cumulative_probability) {
    IterationRecord r;
    r.index = index;
    r.mean_phonon = mean_phonon(state);
    r.ratio = r.mean_phonon / reference;
    const QuadratureSpread spread = quadrature_variances(state);
    r.dx = spread.dx;
    r.dy = spread.dy;
    r.step_probability = step_probability;
    r.cumulative_probability = cumulative_probability;
    return r;
}

ProtocolRun simulate_protocol(const ModelParams &params, const Strategy &strategy, int iterations,
                              const std::optional<MechState> &initial) {
    params.validate();
    if (iterations < 1) {
        throw DomainError("protocol needs at least one iteration");
    }
    MechState state = initial ? *initial : thermal_density(params.nbar, params.fock_dim);
    if (state.dim() != params.fock_dim) {
        throw DimensionMismatchError("initial mechanical state has the wrong dimension");
    }

    const StepMap first = build_step_superoperator(params, strategy, 1);
    std::optional<StepMap> later;
    if (iterations > 1 && !strategy.reinitialize_spins &&
        (strategy.preselection - strategy.target.spin_vector()).norm() > 0.0) {
        later = build_step_superoperator(params, strategy, 2);
    }

    const double reference = initial_occupancy(state);
    ProtocolRun run{{}, state, std::nullopt, 0.0};
    double cumulative = 1.0;
    for (int k = 1; k <= iterations; ++k) {
        const StepMap &map = (k > 1 && later) ? *later : first;
        const double before = state.trace();
        CMatrix out = map.apply(state.rho());
        const double after = out.trace().real();
        const double p = after / before;
        if (!(p >= kProbabilityFloor)) {
            run.halted_at = k;
            run.halted_probability = p;
            break;
        }
        out = 0.5 * (out + out.adjoint().eval());
        state = MechState(out / after, 0.0);
        cumulative *= std::min(1.0, p);
        run.records.push_back(make_record(k, state, reference, std::min(1.0, p), cumulative));
    }
    run.final_state = state;
    return run;
}

std::vector<IterationRecord> run_protocol(const ModelParams &params, const Strategy &strategy,
                                          int iterations) {
    ProtocolRun run = simulate_protocol(params, strategy, iterations);
    if (run.halted_at) {
        std::ostringstream msg;
        msg << "postselection probability " << run.halted_probability << " at iteration "
            << *run.halted_at << " is below the floor " << kProbabilityFloor;
        throw VanishingBranchError(msg.str(), run.halted_probability, *run.halted_at);
    }
    return std::move(run.records);
}

SingleStepEvaluator::SingleStepEvaluator(const ModelParams &params, const Strategy &strategy,
                                         const std::optional<MechState> &input)
    : params_(params), reference_(1.0), basis_(params.spin_basis()) {
    params.validate();
    strategy.validate();
    if (params.n_spins != strategy.n_spins() || params.basis != strategy.basis()) {
        throw DimensionMismatchError("strategy spin count or basis differs from model parameters");
    }
    const int d = params.fock_dim;
    labels_ = sector_labels(basis_);
    weights_ = sector_weights(basis_, strategy.target.spin_vector(), strategy.spins_before_step(1));

    const DisplacementFamily family(params.eta(), d);
    mu_ = family.eigenvalues();
    const CMatrix &v = family.eigenvectors();
    const MechState in = input ? *input : thermal_density(params.nbar, d);
    if (in.dim() != d) {
        throw DimensionMismatchError("evaluator input has the wrong dimension");
    }
    rho_e_ = v.adjoint() * rotate(in.rho(), params.t) * v;
    rho_e_ /= in.trace();
    reference_ = initial_occupancy(in);

    // <O> = f^T (O_e^T .* rho_e) conj(f); store the elementwise products.
    const CMatrix lower = annihilation(d).matrix;
    const auto to_eigen = [&](const CMatrix &op) -> CMatrix {
        const CMatrix oe = v.adjoint() * op * v;
        return oe.transpose().cwiseProduct(rho_e_);
    };
    CMatrix anti = CMatrix::Zero(d, d);
    for (int n = 0; n + 1 < d; ++n) {
        anti(n, n) = n + 1.0;
    }
    number_e_ = to_eigen(number_operator(d).matrix);
    lower_e_ = to_eigen(lower);
    lower2_e_ = to_eigen(lower * lower);
    anti_e_ = to_eigen(anti);
}

SingleStepEvaluator::Result SingleStepEvaluator::operator()(double lambda) const {
    if (!(lambda >= 0.0)) {
        throw DomainError("coupling lambda must be non-negative");
    }
    check_amplitude(labels_, lambda, params_.eta(), params_.fock_dim);
    const Eigen::Index d = mu_.size();
    CVector f = CVector::Zero(d);
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        if (weights_[k] == cplx{0.0, 0.0}) {
            continue;
        }
        const double kappa = lambda * labels_[k];
        const cplx c = weights_[k] * sector_phase(kappa, params_.t);
        for (Eigen::Index i = 0; i < d; ++i) {
            f(i) += c * std::polar(1.0, -kappa * mu_(i));
        }
    }
    const CVector fc = f.conjugate();
    const auto expect = [&](const CMatrix &p) -> cplx { return f.transpose() * (p * fc); };

    double prob = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        prob += std::norm(f(i)) * rho_e_(i, i).real();
    }
    Result r;
    r.lambda = lambda;
    r.probability = prob;
    if (!(prob > 0.0)) {
        r.ratio = r.var_ratio = r.mean_phonon = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    const double nn = expect(number_e_).real() / prob;
    const double aa = expect(anti_e_).real() / prob;
    const cplx mb = expect(lower_e_) / prob;
    const cplx mbb = expect(lower2_e_) / prob;
    const double x_mean = std::sqrt(2.0) * mb.real();
    const double y_mean = std::sqrt(2.0) * mb.imag();
    const double vx = 0.5 * (2.0 * mbb.real() + nn + aa) - x_mean * x_mean;
    const double vy = 0.5 * (-2.0 * mbb.real() + nn + aa) - y_mean * y_mean;
    r.mean_phonon = nn;
    r.ratio = nn / reference_;
    r.var_ratio = std::sqrt(std::max(vx, 0.0) / std::max(vy, 1e-300));
    return r;
}

std::vector<SweepRow> sweep_ratio(const ModelParams &params, const Strategy &strategy,
                                  const std::vector<double> &lambdas,
                                  const std::vector<double> &times, int jobs) {
    if (lambdas.empty() || times.empty()) {
        throw DomainError("sweep_ratio: grids must be nonempty");
    }
    std::vector<SweepRow> rows(lambdas.size() * times.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};

    const auto worker = [&] {
        for (std::size_t it = next++; it < times.size() && !failed; it = next++) {
            try {
                ModelParams p = params;
                p.t = times[it];
                const SingleStepEvaluator eval(p, strategy);
                for (std::size_t il = 0; il < lambdas.size(); ++il) {
                    const auto r = eval(lambdas[il]);
                    rows[it * lambdas.size() + il] =
                        SweepRow{p.t, lambdas[il], r.ratio, r.var_ratio, r.probability};
                }
            } catch (...) {
                if (!failed.exchange(true)) {
                    failure = std::current_exception();
                }
            }
        }
    };

    const int n_threads =
        std::max(1, std::min<int>(jobs, static_cast<int>(times.size())));
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
    if (failure) {
        std::rethrow_exception(failure);
    }
    return rows;
}

SweepRow grid_minimum(const std::vector<SweepRow> &rows) {
    if (rows.empty()) {
        throw DomainError("grid_minimum: empty table");
    }
    const SweepRow *best = nullptr;
    for (const SweepRow &r : rows) {
        if (std::isfinite(r.ratio) && (best == nullptr || r.ratio < best->ratio)) {
            best = &r;
        }
    }
    if (best == nullptr) {
        throw DegenerateStateError("grid_minimum: no finite ratio in table");
    }
    return *best;
}

SweepRow locate_thermal_optimum(const std::vector<SweepRow> &rows) {
    if (rows.empty()) {
        throw DomainError("locate_thermal_optimum: empty table");
    }
    std::vector<SweepRow> per_t;
    for (const SweepRow &r : rows) {
        if (!std::isfinite(r.ratio)) {
            continue;
        }
        auto it = std::find_if(per_t.begin(), per_t.end(),
                               [&](const SweepRow &q) { return q.t == r.t; });
        if (it == per_t.end()) {
            per_t.push_back(r);
        } else if (r.ratio < it->ratio) {
            *it = r;
        }
    }
    if (per_t.empty()) {
        throw DegenerateStateError("locate_thermal_optimum: no finite ratio in table");
    }
    return *std::min_element(per_t.begin(), per_t.end(), [](const SweepRow &a, const SweepRow &b) {
        return std::abs(a.var_ratio - 1.0) < std::abs(b.var_ratio - 1.0);
    });
}

double single_step_ratio(const ModelParams &params, const Strategy &strategy) {
    return SingleStepEvaluator(params, strategy)(params.lambda).ratio;
}

LambdaOptimum optimal_lambda(const ModelParams &params, const Strategy &strategy, double lo,
                             double hi, double tol) {
    if (!(lo >= 0.0 && hi > lo && tol > 0.0)) {
        throw DomainError("optimal_lambda: need 0 <= lo < hi and tol > 0");
    }
    const SingleStepEvaluator eval(params, strategy);
    const auto ratio = [&](double x) {
        const double r = eval(x).ratio;
        return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
    };
    constexpr int kScan = 60;
    const double h = (hi - lo) / kScan;
    int best = 0;
    double best_val = ratio(lo);
    for (int i = 1; i <= kScan; ++i) {
        const double v = ratio(lo + i * h);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = lo + std::max(0, best - 1) * h;
    double b = lo + std::min(kScan, best + 1) * h;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a);
    double e = a + g * (b - a);
    double fc = ratio(c);
    double fe = ratio(e);
    while (b - a > tol) {
        if (fc < fe) {
            b = e;
            e = c;
            fe = fc;
            c = b - g * (b - a);
            fc = ratio(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + g * (b - a);
            fe = ratio(e);
        }
    }
    const auto r = eval(0.5 * (a + b));
    return {r.lambda, r.ratio, r.probability};
}

double enhancement_ratio(int n_high, const ModelParams &params) {
    if (n_high < 2) {
        throw DomainError("enhancement_ratio needs n_high >= 2");
    }
    ModelParams hi = params;
    hi.n_spins = n_high;
    hi.basis = Basis::product;
    ModelParams lo_params = hi;
    lo_params.n_spins = n_high - 1;
    const double r_hi = optimal_lambda(hi, Strategy::independent(n_high)).ratio;
    const double r_lo = optimal_lambda(lo_params, Strategy::independent(n_high - 1)).ratio;
    return r_hi / r_lo;
}

} // namespace spincool
