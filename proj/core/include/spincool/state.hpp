#pragma once

/**
 * @file
 * Joint spin (x) oscillator density matrices.
 *
 * Product basis: N spins, 2^N states. State index s encodes the configuration
 * with spin i (0-based, leftmost in a ket) up iff bit (N-1-i) of s is set, so
 * index 0 is |dn dn ... dn> and index 1 for N = 2 is |dn up>.
 *
 * Collective basis: symmetric sector s = N/2 with N+1 states; index j carries
 * m = j - N/2 (j up-spins).
 *
 * Joint matrices are spin-major: row s*d + n holds |s>|n>.
 */

#include <span>
#include <vector>

#include "spincool/fockspace.hpp"

namespace spincool {

enum class SpinBasisKind { none, product, collective };

class SpinBasis {
  public:
    static SpinBasis none();
    static SpinBasis product(int n_spins);
    static SpinBasis collective(int n_spins);

    SpinBasisKind kind() const { return kind_; }
    int n_spins() const { return n_spins_; }
    int dim() const;

    /// Number of up-spins in basis state s.
    int up_count(int s) const;

    /// Eigenvalue of the coupling operator on basis state s: sum of sigma_z
    /// (= 2n - N) in the product basis, m (= n - N/2) in the collective one.
    double coupling_label(int s) const;

    friend bool operator==(const SpinBasis &, const SpinBasis &) = default;

  private:
    SpinBasis(SpinBasisKind kind, int n_spins) : kind_(kind), n_spins_(n_spins) {}

    SpinBasisKind kind_;
    int n_spins_;
};

/// Dense density matrix over (spin basis) (x) (Fock levels 0..d-1).
class QuantumState {
  public:
    QuantumState(SpinBasis basis, int fock_dim, CMatrix rho, double trace_deficit = 0.0);

    /// |spin><spin| (x) mech. `spin` need not be normalised.
    static QuantumState product(const SpinBasis &basis, const CVector &spin, const MechState &mech);
    static QuantumState mechanical(const MechState &mech);

    const SpinBasis &spin_basis() const { return basis_; }
    int fock_dim() const { return fock_dim_; }
    int spin_dim() const { return basis_.dim(); }
    const CMatrix &rho() const { return rho_; }
    double trace() const { return rho_.trace().real(); }
    double trace_deficit() const { return trace_deficit_; }

    /// d x d block <s| rho |s'>.
    auto block(int s, int sp) const {
        return rho_.block(static_cast<Eigen::Index>(s) * fock_dim_,
                          static_cast<Eigen::Index>(sp) * fock_dim_, fock_dim_, fock_dim_);
    }

    MechState spin_trace() const;

  private:
    SpinBasis basis_;
    int fock_dim_;
    CMatrix rho_;
    double trace_deficit_;
};

/// Relabels product-basis spins: output spin perm[i] carries input spin i.
int permute_configuration(int s, int n_spins, std::span<const int> perm);
CVector permute_spin_vector(const CVector &v, int n_spins, std::span<const int> perm);
QuantumState permute_spins(const QuantumState &state, std::span<const int> perm);

/// 2^N x (N+1) isometry mapping collective state j to the normalised
/// symmetric sum of product configurations with j up-spins.
Eigen::MatrixXd dicke_embedding(int n_spins);

/// Embeds a collective-basis joint state into the product basis.
QuantumState collective_to_product(const QuantumState &state);

/// Uniform superposition over all 2^N product states, i.e. |+>^N.
CVector equal_superposition(int dim);

} // namespace spincool
