#pragma once

/**
 * @file
 * Spin target states and conditional collapse of the joint state onto them.
 */

#include "spincool/fockspace.hpp"
#include "spincool/state.hpp"

namespace spincool {

/// Postselection probabilities below this are reported as a vanishing branch.
inline constexpr double kProbabilityFloor = 1e-12;

enum class TargetBasis { product, collective, bell };

/// Unit-norm spin vector defining the projector |psi><psi|.
///
/// Bell coefficients are ordered (Phi+, Phi-, Psi+, Psi-) with
/// Phi+- = (|dn dn> +- |up up>)/sqrt2 and Psi+- = (|dn up> +- |up dn>)/sqrt2.
class TargetState {
  public:
    /// Throws DomainError unless | ||c|| - 1 | < 1e-10 and the length fits the basis.
    TargetState(TargetBasis basis, int n_spins, CVector coefficients);
    /// Normalises first.
    static TargetState normalized(TargetBasis basis, int n_spins, const CVector &coefficients);

    TargetBasis basis() const { return basis_; }
    int n_spins() const { return n_spins_; }
    const CVector &coefficients() const { return coefficients_; }

    /// Coefficients in the product or collective basis (Bell is expanded).
    CVector spin_vector() const;
    SpinBasis spin_basis() const;

    /// Global phase fixed so the first nonzero coefficient is real positive.
    TargetState gauge_fixed() const;

  private:
    TargetBasis basis_;
    int n_spins_;
    CVector coefficients_;
};

/// 2^{-N/2} (|up> + |dn>)^N.
TargetState target_independent(int n_spins);
/// cos(theta/2)|up> + sin(theta/2) e^{i delta}|dn>.
TargetState target_bloch(double theta, double delta);
/// (|dn dn> + |up up>)/2 + |dn up>/sqrt2.
TargetState target_corr2();
/// a on |uuu>,|uud>,|udu>,|udd>,|ddu>,|ddd>, 1/5 on |duu>,|dud>,
/// a = -sqrt((1 - 2/25)/6).
TargetState target_corr3();
/// N+1 equal amplitudes 1/sqrt(N+1) over m = -N/2..N/2.
TargetState target_collective_flat(int n_spins);

/// Product coefficients (index order |dd>,|du>,|ud>,|uu>) to Bell coefficients.
CVector product_to_bell(const CVector &product);
CVector bell_to_product(const CVector &bell);

struct PostselectionOutcome {
    MechState state;
    double probability;
};

/// <psi| rho |psi> as a d x d matrix (unnormalised). `spin` is in the state's basis.
CMatrix collapse(const QuantumState &state, const CVector &spin);

/// Same quantity through the projector route: tr_spin[(|psi><psi| (x) 1) rho].
/// Builds the full projector; meant for small spin spaces only.
CMatrix collapse_via_projector(const QuantumState &state, const CVector &spin);

struct BranchProbabilities {
    double success;
    double failure;
};

/// Never throws on small probabilities. Both are relative to tr(rho).
BranchProbabilities branch_probabilities(const QuantumState &state, const TargetState &target);

/// Collapse onto the target. The returned state is normalised; the
/// probability is relative to the input trace. Throws VanishingBranchError
/// below kProbabilityFloor.
PostselectionOutcome postselect(const QuantumState &state, const TargetState &target);

/// Complement outcome, (1 - |psi><psi|) (x) 1, spins traced out.
PostselectionOutcome failed_branch(const QuantumState &state, const TargetState &target);

} // namespace spincool
