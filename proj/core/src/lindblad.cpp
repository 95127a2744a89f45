#include "spincool/lindblad.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ladder_ops.hpp"
#include "spincool/error.hpp"

namespace spincool {

namespace {

struct Generator {
    int d;
    int n_spins;
    std::vector<double> kappa; // per product configuration
    RVector sq;
    RVector levels;  // b^dagger b
    RVector anti;    // truncated b b^dagger = diag(1, ..., d-1, 0)
    double down_rate; // Gamma (1 + n)
    double up_rate;   // Gamma n
    double dephasing; // gamma_phi
    double loss;      // gamma (1 + n)
    double gain;      // gamma n
    bool has_mechanical;
    bool has_spin;

    Generator(const ModelParams &params, const LindbladRates &rates)
        : d(params.fock_dim), n_spins(params.n_spins), sq(detail::sqrt_levels(params.fock_dim)),
          levels(RVector::LinSpaced(params.fock_dim, 0.0, params.fock_dim - 1.0)),
          anti(RVector::Zero(params.fock_dim)) {
        const double bath = rates.nbar_bath.value_or(params.nbar);
        const SpinBasis basis = params.spin_basis();
        for (int s = 0; s < basis.dim(); ++s) {
            kappa.push_back(params.lambda * basis.coupling_label(s));
        }
        for (int n = 0; n + 1 < d; ++n) {
            anti(n) = n + 1.0;
        }
        down_rate = rates.spin_relaxation * (1.0 + bath);
        up_rate = rates.spin_relaxation * bath;
        dephasing = rates.dephasing;
        loss = rates.gamma * (1.0 + bath);
        gain = rates.gamma * bath;
        has_mechanical = loss != 0.0 || gain != 0.0;
        has_spin = down_rate != 0.0 || up_rate != 0.0 || dephasing != 0.0;
    }

    // `rotating` selects the frame co-rotating with b^dagger b at time tau.
    CMatrix operator()(const CMatrix &rho, bool rotating, double tau) const {
        const int sdim = static_cast<int>(kappa.size());
        const auto at = [&](int s, int sp) {
            return rho.block(static_cast<Eigen::Index>(s) * d, static_cast<Eigen::Index>(sp) * d,
                             d, d);
        };
        const cplx i_unit{0.0, 1.0};
        const cplx phase = rotating ? std::polar(1.0, -tau) : cplx{1.0, 0.0};
        CMatrix out(rho.rows(), rho.cols());
        for (int s = 0; s < sdim; ++s) {
            for (int sp = 0; sp < sdim; ++sp) {
                const CMatrix blk = at(s, sp);
                CMatrix acc = CMatrix::Zero(d, d);
                if (!rotating) {
                    acc.noalias() -= i_unit * (levels.asDiagonal() * blk - blk * levels.asDiagonal());
                }
                if (kappa[s] != 0.0) {
                    acc += (i_unit * kappa[s]) * (phase * detail::b_left(blk, sq) +
                                                  std::conj(phase) * detail::bdag_left(blk, sq));
                }
                if (kappa[sp] != 0.0) {
                    acc -= (i_unit * kappa[sp]) * (phase * detail::b_right(blk, sq) +
                                                   std::conj(phase) * detail::bdag_right(blk, sq));
                }
                if (has_mechanical) {
                    acc += loss * (detail::bdag_right(detail::b_left(blk, sq), sq) -
                                   0.5 * (levels.asDiagonal() * blk + blk * levels.asDiagonal()));
                    acc += gain * (detail::b_right(detail::bdag_left(blk, sq), sq) -
                                   0.5 * (anti.asDiagonal() * blk + blk * anti.asDiagonal()));
                }
                if (has_spin) {
                    double diag = 0.0;
                    for (int j = 0; j < n_spins; ++j) {
                        const int bit = 1 << j;
                        const bool up_s = (s & bit) != 0;
                        const bool up_sp = (sp & bit) != 0;
                        diag -= 0.5 * down_rate * ((up_s ? 1.0 : 0.0) + (up_sp ? 1.0 : 0.0));
                        diag -= 0.5 * up_rate * ((up_s ? 0.0 : 1.0) + (up_sp ? 0.0 : 1.0));
                        if (up_s != up_sp) {
                            diag -= dephasing;
                        }
                        if (!up_s && !up_sp && down_rate != 0.0) {
                            acc += down_rate * at(s | bit, sp | bit);
                        }
                        if (up_s && up_sp && up_rate != 0.0) {
                            acc += up_rate * at(s & ~bit, sp & ~bit);
                        }
                    }
                    acc += diag * blk;
                }
                out.block(static_cast<Eigen::Index>(s) * d, static_cast<Eigen::Index>(sp) * d, d,
                          d) = acc;
            }
        }
        return out;
    }
};

void require_product(const SpinBasis &basis) {
    if (basis.kind() != SpinBasisKind::product) {
        throw UnsupportedBasisError(
            "open-system dynamics needs the product spin basis (per-spin jump operators)");
    }
}

void check_match(const QuantumState &state, const ModelParams &params) {
    require_product(state.spin_basis());
    if (params.basis != Basis::product || state.spin_basis().n_spins() != params.n_spins ||
        state.fock_dim() != params.fock_dim) {
        throw DimensionMismatchError("open evolution: state does not match model parameters");
    }
}

} // namespace

void LindbladRates::validate() const {
    if (!(gamma >= 0.0 && spin_relaxation >= 0.0 && dephasing >= 0.0)) {
        throw DomainError("Lindblad rates must be non-negative");
    }
    if (nbar_bath && !(*nbar_bath >= 0.0)) {
        throw DomainError("bath occupancy must be non-negative");
    }
}

CMatrix liouvillian_apply(const QuantumState &state, const ModelParams &params,
                          const LindbladRates &rates) {
    params.validate();
    rates.validate();
    check_match(state, params);
    return Generator(params, rates)(state.rho(), false, 0.0);
}

OpenEvolution evolve_open(const QuantumState &state, const ModelParams &params,
                          const LindbladRates &rates, double dt) {
    params.validate();
    rates.validate();
    check_match(state, params);
    if (!(dt > 0.0)) {
        throw DomainError("evolve_open: dt must be positive");
    }
    const Generator gen(params, rates);
    const int steps = std::max(1, static_cast<int>(std::ceil(params.t / dt - 1e-12)));
    const double h = params.t / steps;

    OpenEvolution result{state, 0.0, steps};
    CMatrix rho = state.rho();
    for (int k = 0; k < steps; ++k) {
        const double tau = k * h;
        const CMatrix k1 = gen(rho, true, tau);
        const CMatrix k2 = gen(rho + 0.5 * h * k1, true, tau + 0.5 * h);
        const CMatrix k3 = gen(rho + 0.5 * h * k2, true, tau + 0.5 * h);
        const CMatrix k4 = gen(rho + h * k3, true, tau + h);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        result.max_hermiticity_deviation =
            std::max(result.max_hermiticity_deviation, hermiticity_deviation(rho));
        rho = 0.5 * (rho + rho.adjoint().eval());
    }

    // Back to the lab frame: each block picks up exp(-i n t) . exp(+i m t).
    const int d = params.fock_dim;
    const int sdim = state.spin_dim();
    for (int s = 0; s < sdim; ++s) {
        for (int sp = 0; sp < sdim; ++sp) {
            auto blk = rho.block(static_cast<Eigen::Index>(s) * d,
                                 static_cast<Eigen::Index>(sp) * d, d, d);
            for (int m = 0; m < d; ++m) {
                for (int n = 0; n < d; ++n) {
                    blk(n, m) *= std::polar(1.0, -static_cast<double>(n - m) * params.t);
                }
            }
        }
    }

    const double tr = rho.trace().real();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho, Eigen::EigenvaluesOnly);
    const double lowest = solver.eigenvalues().minCoeff();
    if (lowest < -1e-6 * tr) {
        std::ostringstream msg;
        msg << "open evolution lost positivity (min eigenvalue " << lowest << " at trace " << tr
            << "); reduce dt below " << h;
        throw PositivityError(msg.str(), lowest);
    }
    result.state = QuantumState(state.spin_basis(), d, std::move(rho), state.trace_deficit());
    return result;
}

ProtocolRun run_protocol_open(const ModelParams &params, const Strategy &strategy,
                              const LindbladRates &rates, int iterations,
                              const OpenProtocolOptions &options) {
    params.validate();
    rates.validate();
    strategy.validate();
    if (iterations < 1) {
        throw DomainError("protocol needs at least one iteration");
    }
    if (strategy.basis() != Basis::product || params.basis != Basis::product) {
        throw UnsupportedBasisError("open-system protocol needs the product spin basis");
    }
    if (params.n_spins < 1 || params.n_spins > 4 || params.n_spins != strategy.n_spins()) {
        throw DomainError("open-system protocol supports 1 <= N <= 4 matching the strategy");
    }
    Strategy rule = strategy;
    if (options.reinitialize_spins) {
        rule.reinitialize_spins = *options.reinitialize_spins;
    }
    const SpinBasis basis = params.spin_basis();
    MechState mech = thermal_density(params.nbar, params.fock_dim);
    const double reference = initial_occupancy(mech);
    ProtocolRun run{{}, mech, std::nullopt, 0.0};
    double cumulative = 1.0;
    for (int k = 1; k <= iterations; ++k) {
        const QuantumState joint = QuantumState::product(basis, rule.spins_before_step(k), mech);
        const OpenEvolution evolved = evolve_open(joint, params, rates, options.dt);
        const BranchProbabilities p = branch_probabilities(evolved.state, rule.target);
        if (!(p.success >= kProbabilityFloor)) {
            run.halted_at = k;
            run.halted_probability = p.success;
            break;
        }
        PostselectionOutcome out = postselect(evolved.state, rule.target);
        mech = std::move(out.state);
        cumulative *= out.probability;
        run.records.push_back(make_record(k, mech, reference, out.probability, cumulative));
    }
    run.final_state = mech;
    return run;
}

} // namespace spincool
