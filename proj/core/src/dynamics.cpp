#include "spincool/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ladder_ops.hpp"
#include "spincool/error.hpp"

namespace spincool {

void ModelParams::validate() const {
    if (!(lambda >= 0.0)) {
        throw DomainError("coupling lambda must be non-negative");
    }
    if (!(t > 0.0 && t <= 2.0 * std::numbers::pi + 1e-12)) {
        throw DomainError("evolution time t must lie in (0, 2 pi]");
    }
    if (!(nbar >= 0.0)) {
        throw DomainError("thermal occupancy must be non-negative");
    }
    if (n_spins < 1) {
        throw DomainError("at least one spin is required");
    }
    if (fock_dim < 2) {
        throw DomainError("Fock dimension must be at least 2");
    }
}

bool ModelParams::in_operating_range() const { return lambda > 1e-4 && lambda < 1e-1; }

cplx ModelParams::eta() const { return 1.0 - std::polar(1.0, -t); }

SpinBasis ModelParams::spin_basis() const {
    return basis == Basis::product ? SpinBasis::product(n_spins) : SpinBasis::collective(n_spins);
}

double ModelParams::coupling(int s) const { return lambda * spin_basis().coupling_label(s); }

cplx sector_phase(double kappa, double t) { return std::polar(1.0, kappa * kappa * (t - std::sin(t))); }

SpinBlockUnitary build_evolution(const ModelParams &params) {
    params.validate();
    const SpinBasis basis = params.spin_basis();
    const int d = params.fock_dim;
    const cplx eta = params.eta();

    SpinBlockUnitary u;
    u.basis = basis;
    u.t = params.t;
    u.sector_of.resize(basis.dim());
    for (int s = 0; s < basis.dim(); ++s) {
        u.sector_of[s] = basis.up_count(s);
    }

    const int n = params.n_spins;
    double max_kappa = 0.0;
    for (int up = 0; up <= n; ++up) {
        const double label = basis.kind() == SpinBasisKind::product ? 2.0 * up - n : up - 0.5 * n;
        u.sector_coupling.push_back(params.lambda * label);
        max_kappa = std::max(max_kappa, std::abs(params.lambda * label));
    }
    const double max_alpha = max_kappa * std::abs(eta);
    if (max_alpha * max_alpha > d / 4.0) {
        std::ostringstream msg;
        msg << "largest sector displacement |alpha| = " << max_alpha << " needs dim >= "
            << required_dimension(max_alpha) << ", have " << d;
        throw AmplitudeTooLargeError(msg.str(), required_dimension(max_alpha));
    }

    const DisplacementFamily family(eta, d);
    const CVector rotation = free_rotation(params.t, d).matrix.diagonal();
    for (double kappa : u.sector_coupling) {
        u.sector_phase.push_back(sector_phase(kappa, params.t));
        CMatrix f = family(kappa);
        u.sector_factor.push_back(f * rotation.asDiagonal());
    }
    return u;
}

QuantumState evolve_closed(const QuantumState &state, const SpinBlockUnitary &unitary) {
    if (!(state.spin_basis() == unitary.basis) || state.fock_dim() != unitary.fock_dim()) {
        throw DimensionMismatchError("evolve_closed: state and evolution dimensions differ");
    }
    const int d = state.fock_dim();
    const int sdim = state.spin_dim();
    std::vector<CMatrix> blocks;
    blocks.reserve(sdim);
    for (int s = 0; s < sdim; ++s) {
        blocks.push_back(unitary.block(s));
    }
    CMatrix out(state.rho().rows(), state.rho().cols());
    for (int s = 0; s < sdim; ++s) {
        for (int sp = 0; sp < sdim; ++sp) {
            out.block(static_cast<Eigen::Index>(s) * d, static_cast<Eigen::Index>(sp) * d, d, d) =
                blocks[s] * state.block(s, sp) * blocks[sp].adjoint();
        }
    }
    return QuantumState(state.spin_basis(), d, std::move(out), state.trace_deficit());
}

QuantumState evolve_closed(const QuantumState &state, const ModelParams &params) {
    return evolve_closed(state, build_evolution(params));
}

namespace {

CMatrix integrate_rk4(const CMatrix &rho0, const std::vector<double> &kappa, int d, double t,
                      int steps) {
    const RVector sq = detail::sqrt_levels(d);
    const double h = t / steps;
    CMatrix rho = rho0;
    for (int k = 0; k < steps; ++k) {
        const CMatrix k1 = detail::closed_derivative(rho, kappa, d, sq);
        const CMatrix k2 = detail::closed_derivative(rho + 0.5 * h * k1, kappa, d, sq);
        const CMatrix k3 = detail::closed_derivative(rho + 0.5 * h * k2, kappa, d, sq);
        const CMatrix k4 = detail::closed_derivative(rho + h * k3, kappa, d, sq);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return rho;
}

} // namespace

QuantumState evolve_brute_force(const QuantumState &state, const ModelParams &params, int steps) {
    params.validate();
    if (!(state.spin_basis() == params.spin_basis()) || state.fock_dim() != params.fock_dim) {
        throw DimensionMismatchError("evolve_brute_force: state does not match parameters");
    }
    if (steps < 2) {
        throw DomainError("evolve_brute_force needs at least two steps");
    }
    std::vector<double> kappa(state.spin_dim());
    for (int s = 0; s < state.spin_dim(); ++s) {
        kappa[s] = params.coupling(s);
    }
    const int d = state.fock_dim();
    CMatrix fine = integrate_rk4(state.rho(), kappa, d, params.t, steps);
    const CMatrix coarse = integrate_rk4(state.rho(), kappa, d, params.t, steps / 2);
    const double residual = (fine - coarse).cwiseAbs().maxCoeff();
    if (steps < 2000.0 * params.t || residual > 1e-8) {
        std::ostringstream msg;
        msg << "brute-force integration with " << steps << " steps over t = " << params.t
            << " not converged: step-halving residual " << residual << " (need steps >= "
            << std::ceil(2000.0 * params.t) << " and residual <= 1e-8)";
        throw ConvergenceError(msg.str(), residual);
    }
    return QuantumState(state.spin_basis(), d, std::move(fine), state.trace_deficit());
}

double coherent_ratio_closed_form(double lambda, double beta) {
    if (!(beta > 0.0)) {
        throw DomainError("coherent_ratio_closed_form requires beta > 0");
    }
    const double r = 1.0 - 2.0 * lambda / beta;
    return r * r;
}

double traced_mean_phonon(double t, double lambda, double nbar) {
    return nbar + 2.0 * lambda * lambda * (1.0 - std::cos(t));
}

CoherentBranch coherent_branch(int up_count, int n_spins, double lambda, double t, cplx beta) {
    if (up_count < 0 || up_count > n_spins) {
        throw DomainError("coherent_branch: up_count outside 0..N");
    }
    const double k = 2.0 * up_count - n_spins;
    const cplx eta = 1.0 - std::polar(1.0, -t);
    CoherentBranch br;
    br.up_count = up_count;
    br.amplitude = beta * std::polar(1.0, -t) + lambda * k * eta;
    br.phase = 2.0 * lambda * k * std::abs(beta) * std::cos(std::arg(beta) - t / 2.0) *
               std::sin(t / 2.0);
    return br;
}

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

} // namespace

cplx branch_pair_weight(int n, int m, int n_spins, double lambda, double t) {
    const double kn = 2.0 * n - n_spins;
    const double km = 2.0 * m - n_spins;
    return binomial(n_spins, n) * binomial(n_spins, m) *
           std::polar(1.0, lambda * lambda * (t - std::sin(t)) * (kn * kn - km * km));
}

} // namespace spincool
