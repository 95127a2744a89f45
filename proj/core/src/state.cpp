#include "spincool/state.hpp"

#include <bit>
#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "spincool/error.hpp"

namespace spincool {

SpinBasis SpinBasis::none() { return SpinBasis(SpinBasisKind::none, 0); }

SpinBasis SpinBasis::product(int n_spins) {
    if (n_spins < 1 || n_spins > 16) {
        throw DomainError("product basis supports 1..16 spins, got " + std::to_string(n_spins));
    }
    return SpinBasis(SpinBasisKind::product, n_spins);
}

SpinBasis SpinBasis::collective(int n_spins) {
    if (n_spins < 1) {
        throw DomainError("collective basis needs at least one spin");
    }
    return SpinBasis(SpinBasisKind::collective, n_spins);
}

int SpinBasis::dim() const {
    switch (kind_) {
    case SpinBasisKind::none:
        return 1;
    case SpinBasisKind::product:
        return 1 << n_spins_;
    case SpinBasisKind::collective:
        return n_spins_ + 1;
    }
    return 1;
}

int SpinBasis::up_count(int s) const {
    switch (kind_) {
    case SpinBasisKind::none:
        return 0;
    case SpinBasisKind::product:
        return std::popcount(static_cast<unsigned>(s));
    case SpinBasisKind::collective:
        return s;
    }
    return 0;
}

double SpinBasis::coupling_label(int s) const {
    const int n = up_count(s);
    switch (kind_) {
    case SpinBasisKind::none:
        return 0.0;
    case SpinBasisKind::product:
        return 2.0 * n - n_spins_;
    case SpinBasisKind::collective:
        return n - 0.5 * n_spins_;
    }
    return 0.0;
}

QuantumState::QuantumState(SpinBasis basis, int fock_dim, CMatrix rho, double trace_deficit)
    : basis_(basis), fock_dim_(fock_dim), rho_(std::move(rho)), trace_deficit_(trace_deficit) {
    const Eigen::Index n = static_cast<Eigen::Index>(basis_.dim()) * fock_dim_;
    if (fock_dim_ < 2 || rho_.rows() != n || rho_.cols() != n) {
        throw DimensionMismatchError("QuantumState: matrix is " + std::to_string(rho_.rows()) +
                                     "x" + std::to_string(rho_.cols()) + ", expected " +
                                     std::to_string(n) + "x" + std::to_string(n));
    }
}

QuantumState QuantumState::product(const SpinBasis &basis, const CVector &spin,
                                   const MechState &mech) {
    if (spin.size() != basis.dim()) {
        throw DimensionMismatchError("spin vector length does not match the spin basis");
    }
    const CMatrix spin_rho = spin * spin.adjoint();
    return QuantumState(basis, mech.dim(), Eigen::kroneckerProduct(spin_rho, mech.rho()).eval(),
                        mech.trace_deficit() * spin.squaredNorm());
}

QuantumState QuantumState::mechanical(const MechState &mech) {
    return QuantumState(SpinBasis::none(), mech.dim(), mech.rho(), mech.trace_deficit());
}

MechState QuantumState::spin_trace() const {
    CMatrix acc = CMatrix::Zero(fock_dim_, fock_dim_);
    for (int s = 0; s < spin_dim(); ++s) {
        acc += block(s, s);
    }
    return MechState(std::move(acc), trace_deficit_);
}

int permute_configuration(int s, int n_spins, std::span<const int> perm) {
    int out = 0;
    for (int i = 0; i < n_spins; ++i) {
        if ((s >> (n_spins - 1 - i)) & 1) {
            out |= 1 << (n_spins - 1 - perm[static_cast<std::size_t>(i)]);
        }
    }
    return out;
}

CVector permute_spin_vector(const CVector &v, int n_spins, std::span<const int> perm) {
    if (static_cast<int>(perm.size()) != n_spins || v.size() != (Eigen::Index{1} << n_spins)) {
        throw DimensionMismatchError("permute_spin_vector: size mismatch");
    }
    CVector out(v.size());
    for (int s = 0; s < v.size(); ++s) {
        out(permute_configuration(s, n_spins, perm)) = v(s);
    }
    return out;
}

QuantumState permute_spins(const QuantumState &state, std::span<const int> perm) {
    const SpinBasis &basis = state.spin_basis();
    if (basis.kind() != SpinBasisKind::product) {
        throw UnsupportedBasisError("permute_spins requires a product-basis state");
    }
    const int n = basis.n_spins();
    if (static_cast<int>(perm.size()) != n) {
        throw DimensionMismatchError("permute_spins: permutation length mismatch");
    }
    const int d = state.fock_dim();
    CMatrix out(state.rho().rows(), state.rho().cols());
    for (int s = 0; s < basis.dim(); ++s) {
        const int ps = permute_configuration(s, n, perm);
        for (int sp = 0; sp < basis.dim(); ++sp) {
            const int psp = permute_configuration(sp, n, perm);
            out.block(static_cast<Eigen::Index>(ps) * d, static_cast<Eigen::Index>(psp) * d, d, d) =
                state.block(s, sp);
        }
    }
    return QuantumState(basis, d, std::move(out), state.trace_deficit());
}

Eigen::MatrixXd dicke_embedding(int n_spins) {
    const SpinBasis basis = SpinBasis::product(n_spins);
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(basis.dim(), n_spins + 1);
    for (int s = 0; s < basis.dim(); ++s) {
        e(s, basis.up_count(s)) = 1.0;
    }
    for (int j = 0; j <= n_spins; ++j) {
        e.col(j).normalize();
    }
    return e;
}

QuantumState collective_to_product(const QuantumState &state) {
    const SpinBasis &basis = state.spin_basis();
    if (basis.kind() != SpinBasisKind::collective) {
        throw UnsupportedBasisError("collective_to_product requires a collective-basis state");
    }
    const CMatrix iso = dicke_embedding(basis.n_spins()).cast<cplx>();
    const CMatrix lift = Eigen::kroneckerProduct(iso, CMatrix::Identity(state.fock_dim(),
                                                                        state.fock_dim()))
                             .eval();
    return QuantumState(SpinBasis::product(basis.n_spins()), state.fock_dim(),
                        lift * state.rho() * lift.adjoint(), state.trace_deficit());
}

CVector equal_superposition(int dim) {
    return CVector::Constant(dim, cplx{1.0 / std::sqrt(static_cast<double>(dim)), 0.0});
}

} // namespace spincool
