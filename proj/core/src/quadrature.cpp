// Coherent-branch route for one postselection step on a thermal input.
//
// rho_th = E_beta |beta><beta| with beta complex Gaussian of variance nbar.
// Sector n maps |beta> to phase_n e^{i theta_n} |phi_n>, so the unnormalised
// postselected state is
//   sum_{n,m} w_n w_m^* phase_n phase_m^* E[e^{i(theta_n - theta_m)} |phi_n><phi_m|]
// and only coherent-state overlaps are needed.

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "spincool/dynamics.hpp"
#include "spincool/error.hpp"

namespace spincool {

namespace {

struct GaussLaguerre {
    RVector nodes;
    RVector weights;
};

// Golub-Welsch for weight e^{-u} on [0, inf).
GaussLaguerre gauss_laguerre(int n) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        jacobi(i, i) = 2.0 * i + 1.0;
        if (i + 1 < n) {
            jacobi(i, i + 1) = jacobi(i + 1, i) = i + 1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    GaussLaguerre rule;
    rule.nodes = solver.eigenvalues();
    rule.weights = solver.eigenvectors().row(0).transpose().array().square();
    return rule;
}

} // namespace

BranchIntegral thermal_branch_integral(const ModelParams &params,
                                       std::span<const cplx> sector_weights, int radial_nodes,
                                       int angular_nodes) {
    params.validate();
    const int n_spins = params.n_spins;
    if (static_cast<int>(sector_weights.size()) != n_spins + 1) {
        throw DimensionMismatchError("thermal_branch_integral: need N+1 sector weights");
    }
    if (radial_nodes < 1 || angular_nodes < 1) {
        throw DomainError("thermal_branch_integral: node counts must be positive");
    }

    const double t = params.t;
    const cplx eta = params.eta();
    const cplx rot = std::polar(1.0, -t);
    std::vector<double> kappa(n_spins + 1);
    std::vector<cplx> pre(n_spins + 1);
    for (int n = 0; n <= n_spins; ++n) {
        const double label = params.basis == Basis::product ? 2.0 * n - n_spins : n - 0.5 * n_spins;
        kappa[n] = params.lambda * label;
        pre[n] = sector_weights[n] * sector_phase(kappa[n], t);
    }

    GaussLaguerre rule;
    if (params.nbar > 0.0) {
        rule = gauss_laguerre(radial_nodes);
    } else {
        rule.nodes = RVector::Zero(1);
        rule.weights = RVector::Ones(1);
        angular_nodes = 1;
    }

    std::vector<cplx> amp(n_spins + 1);
    std::vector<cplx> coef(n_spins + 1);
    cplx prob = 0.0;
    cplx energy = 0.0;
    for (Eigen::Index j = 0; j < rule.nodes.size(); ++j) {
        const double r = std::sqrt(params.nbar * rule.nodes(j));
        for (int a = 0; a < angular_nodes; ++a) {
            const double phi = 2.0 * std::numbers::pi * a / angular_nodes;
            const cplx beta = std::polar(r, phi);
            for (int n = 0; n <= n_spins; ++n) {
                amp[n] = beta * rot + kappa[n] * eta;
                const double theta =
                    2.0 * kappa[n] * r * std::cos(phi - t / 2.0) * std::sin(t / 2.0);
                coef[n] = pre[n] * std::polar(1.0, theta);
            }
            const double w = rule.weights(j) / angular_nodes;
            for (int n = 0; n <= n_spins; ++n) {
                for (int m = 0; m <= n_spins; ++m) {
                    // <phi_m|phi_n>
                    const cplx overlap = std::exp(-0.5 * std::norm(amp[n]) - 0.5 * std::norm(amp[m]) +
                                                  std::conj(amp[m]) * amp[n]);
                    const cplx c = w * coef[n] * std::conj(coef[m]) * overlap;
                    prob += c;
                    energy += c * std::conj(amp[m]) * amp[n];
                }
            }
        }
    }
    BranchIntegral out;
    out.probability = prob.real();
    out.mean_phonon = out.probability > 0.0 ? energy.real() / out.probability
                                            : std::numeric_limits<double>::quiet_NaN();
    return out;
}

} // namespace spincool
