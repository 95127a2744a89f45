#include "spincool/postselect.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "spincool/error.hpp"

namespace spincool {

namespace {

int expected_length(TargetBasis basis, int n_spins) {
    switch (basis) {
    case TargetBasis::product:
        return 1 << n_spins;
    case TargetBasis::collective:
        return n_spins + 1;
    case TargetBasis::bell:
        return 4;
    }
    return 0;
}

void check_basis(const QuantumState &state, const TargetState &target) {
    if (!(state.spin_basis() == target.spin_basis())) {
        throw DimensionMismatchError("target basis does not match the state's spin basis");
    }
}

// product index for a ket written left to right as 'u'/'d'
int config(const char *ket) {
    int s = 0;
    for (const char *c = ket; *c != '\0'; ++c) {
        s = 2 * s + (*c == 'u' ? 1 : 0);
    }
    return s;
}

} // namespace

TargetState::TargetState(TargetBasis basis, int n_spins, CVector coefficients)
    : basis_(basis), n_spins_(n_spins), coefficients_(std::move(coefficients)) {
    if (n_spins_ < 1 || (basis_ == TargetBasis::bell && n_spins_ != 2) ||
        (basis_ == TargetBasis::product && n_spins_ > 16)) {
        throw DomainError("TargetState: unsupported spin count for this basis");
    }
    if (coefficients_.size() != expected_length(basis_, n_spins_)) {
        throw DimensionMismatchError("TargetState: coefficient count does not fit the basis");
    }
    if (std::abs(coefficients_.norm() - 1.0) >= 1e-10) {
        throw DomainError("TargetState: coefficients are not unit norm");
    }
}

TargetState TargetState::normalized(TargetBasis basis, int n_spins, const CVector &coefficients) {
    const double norm = coefficients.norm();
    if (!(norm > 0.0)) {
        throw DomainError("TargetState: zero coefficient vector");
    }
    return TargetState(basis, n_spins, coefficients / norm);
}

CVector TargetState::spin_vector() const {
    return basis_ == TargetBasis::bell ? bell_to_product(coefficients_) : coefficients_;
}

SpinBasis TargetState::spin_basis() const {
    return basis_ == TargetBasis::collective ? SpinBasis::collective(n_spins_)
                                             : SpinBasis::product(n_spins_);
}

TargetState TargetState::gauge_fixed() const {
    for (Eigen::Index i = 0; i < coefficients_.size(); ++i) {
        const double mag = std::abs(coefficients_(i));
        if (mag > 1e-12) {
            const cplx phase = std::conj(coefficients_(i)) / mag;
            return TargetState(basis_, n_spins_, coefficients_ * phase);
        }
    }
    return *this;
}

TargetState target_independent(int n_spins) {
    const SpinBasis basis = SpinBasis::product(n_spins);
    return TargetState(TargetBasis::product, n_spins, equal_superposition(basis.dim()));
}

TargetState target_bloch(double theta, double delta) {
    CVector c(2);
    c(config("u")) = std::cos(theta / 2.0);
    c(config("d")) = std::sin(theta / 2.0) * std::polar(1.0, delta);
    return TargetState::normalized(TargetBasis::product, 1, c);
}

TargetState target_corr2() {
    CVector c = CVector::Zero(4);
    c(config("dd")) = 0.5;
    c(config("uu")) = 0.5;
    c(config("du")) = 1.0 / std::sqrt(2.0);
    return TargetState::normalized(TargetBasis::product, 2, c);
}

TargetState target_corr3() {
    const double a = -std::sqrt((1.0 - 2.0 / 25.0) / 6.0);
    CVector c = CVector::Zero(8);
    for (const char *ket : {"uuu", "uud", "udu", "udd", "ddu", "ddd"}) {
        c(config(ket)) = a;
    }
    for (const char *ket : {"duu", "dud"}) {
        c(config(ket)) = 0.2;
    }
    return TargetState::normalized(TargetBasis::product, 3, c);
}

TargetState target_collective_flat(int n_spins) {
    return TargetState(TargetBasis::collective, n_spins, equal_superposition(n_spins + 1));
}

CVector product_to_bell(const CVector &product) {
    if (product.size() != 4) {
        throw DimensionMismatchError("product_to_bell needs four coefficients");
    }
    const double r = 1.0 / std::sqrt(2.0);
    const cplx c1 = product(config("uu"));
    const cplx c2 = product(config("ud"));
    const cplx c3 = product(config("du"));
    const cplx c4 = product(config("dd"));
    CVector bell(4);
    bell << r * (c4 + c1), r * (c4 - c1), r * (c3 + c2), r * (c3 - c2);
    return bell;
}

CVector bell_to_product(const CVector &bell) {
    if (bell.size() != 4) {
        throw DimensionMismatchError("bell_to_product needs four coefficients");
    }
    const double r = 1.0 / std::sqrt(2.0);
    CVector p(4);
    p(config("dd")) = r * (bell(0) + bell(1));
    p(config("uu")) = r * (bell(0) - bell(1));
    p(config("du")) = r * (bell(2) + bell(3));
    p(config("ud")) = r * (bell(2) - bell(3));
    return p;
}

CMatrix collapse(const QuantumState &state, const CVector &spin) {
    if (spin.size() != state.spin_dim()) {
        throw DimensionMismatchError("collapse: spin vector length mismatch");
    }
    const int d = state.fock_dim();
    CMatrix out = CMatrix::Zero(d, d);
    for (int s = 0; s < state.spin_dim(); ++s) {
        if (spin(s) == cplx{0.0, 0.0}) {
            continue;
        }
        for (int sp = 0; sp < state.spin_dim(); ++sp) {
            if (spin(sp) == cplx{0.0, 0.0}) {
                continue;
            }
            out += (std::conj(spin(s)) * spin(sp)) * state.block(s, sp);
        }
    }
    return out;
}

CMatrix collapse_via_projector(const QuantumState &state, const CVector &spin) {
    if (spin.size() != state.spin_dim()) {
        throw DimensionMismatchError("collapse_via_projector: spin vector length mismatch");
    }
    const int d = state.fock_dim();
    const CMatrix projector =
        Eigen::kroneckerProduct(CMatrix(spin * spin.adjoint()), CMatrix::Identity(d, d)).eval();
    const CMatrix projected = projector * state.rho();
    CMatrix out = CMatrix::Zero(d, d);
    for (int s = 0; s < state.spin_dim(); ++s) {
        out += projected.block(static_cast<Eigen::Index>(s) * d, static_cast<Eigen::Index>(s) * d,
                               d, d);
    }
    return out;
}

BranchProbabilities branch_probabilities(const QuantumState &state, const TargetState &target) {
    check_basis(state, target);
    const double total = state.trace();
    if (!(total > 0.0)) {
        throw DegenerateStateError("branch_probabilities: state has zero trace");
    }
    const double success = collapse(state, target.spin_vector()).trace().real() / total;
    return {success, 1.0 - success};
}

namespace {

PostselectionOutcome make_outcome(CMatrix unnormalised, double total, const char *what) {
    const double p = unnormalised.trace().real() / total;
    if (!(p >= kProbabilityFloor)) {
        std::ostringstream msg;
        msg << what << " probability " << p << " is below the floor " << kProbabilityFloor;
        throw VanishingBranchError(msg.str(), p);
    }
    const double tr = unnormalised.trace().real();
    return {MechState(unnormalised / tr, 0.0), std::min(1.0, p)};
}

} // namespace

PostselectionOutcome postselect(const QuantumState &state, const TargetState &target) {
    check_basis(state, target);
    const double total = state.trace();
    if (!(total > 0.0)) {
        throw DegenerateStateError("postselect: state has zero trace");
    }
    return make_outcome(collapse(state, target.spin_vector()), total, "postselection");
}

PostselectionOutcome failed_branch(const QuantumState &state, const TargetState &target) {
    check_basis(state, target);
    const double total = state.trace();
    if (!(total > 0.0)) {
        throw DegenerateStateError("failed_branch: state has zero trace");
    }
    CMatrix rest = state.spin_trace().rho() - collapse(state, target.spin_vector());
    return make_outcome(std::move(rest), total, "failed-branch");
}

} // namespace spincool
