#include <array>
#include <bit>
#include <cmath>

#include <gtest/gtest.h>

#include "spincool/error.hpp"
#include "spincool/state.hpp"

using namespace spincool;

TEST(SpinBasis, ProductLabelsAndDimension) {
    const SpinBasis b = SpinBasis::product(3);
    EXPECT_EQ(b.dim(), 8);
    EXPECT_EQ(b.up_count(0), 0);
    EXPECT_EQ(b.up_count(7), 3);
    EXPECT_EQ(b.up_count(5), 2);
    EXPECT_DOUBLE_EQ(b.coupling_label(0), -3.0);
    EXPECT_DOUBLE_EQ(b.coupling_label(6), 1.0);
}

TEST(SpinBasis, CollectiveLabels) {
    const SpinBasis b = SpinBasis::collective(4);
    EXPECT_EQ(b.dim(), 5);
    EXPECT_DOUBLE_EQ(b.coupling_label(0), -2.0);
    EXPECT_DOUBLE_EQ(b.coupling_label(4), 2.0);
    EXPECT_EQ(b.up_count(3), 3);
    EXPECT_EQ(SpinBasis::none().dim(), 1);
}

TEST(QuantumState, ProductStateTraceAndSpinTrace) {
    const SpinBasis b = SpinBasis::product(2);
    const MechState th = thermal_density(1.0, 20);
    const QuantumState q = QuantumState::product(b, equal_superposition(4), th);
    EXPECT_EQ(q.rho().rows(), 80);
    EXPECT_NEAR(q.trace(), th.trace(), 1e-14);
    EXPECT_NEAR((q.spin_trace().rho() - th.rho()).cwiseAbs().maxCoeff(), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(q.block(1, 2)(0, 0) - 0.25 * th.rho()(0, 0)), 0.0, 1e-15);
}

TEST(QuantumState, ShapeChecked) {
    EXPECT_THROW(QuantumState(SpinBasis::product(1), 10, CMatrix::Zero(10, 10)),
                 DimensionMismatchError);
    EXPECT_THROW(QuantumState::product(SpinBasis::product(2), CVector::Ones(3), vacuum_density(4)),
                 DimensionMismatchError);
}

TEST(Permutation, ConfigurationRelabelling) {
    // Ket |u d d> (index 4) with spin 0 moved to position 2 becomes |d d u>.
    const std::array<int, 3> perm{2, 0, 1};
    EXPECT_EQ(permute_configuration(4, 3, perm), 1);
    const std::array<int, 3> identity{0, 1, 2};
    for (int s = 0; s < 8; ++s) {
        EXPECT_EQ(permute_configuration(s, 3, identity), s);
        EXPECT_EQ(std::popcount(static_cast<unsigned>(permute_configuration(s, 3, perm))),
                  std::popcount(static_cast<unsigned>(s)));
    }
}

TEST(Permutation, RoundTripOnState) {
    const SpinBasis b = SpinBasis::product(3);
    CVector v(8);
    for (int s = 0; s < 8; ++s) {
        v(s) = cplx(s + 1.0, 0.5 * s);
    }
    const QuantumState q = QuantumState::product(b, v, thermal_density(0.5, 6));
    const std::array<int, 3> perm{1, 2, 0};
    const std::array<int, 3> inverse{2, 0, 1};
    const QuantumState back = permute_spins(permute_spins(q, perm), inverse);
    EXPECT_LT((back.rho() - q.rho()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Dicke, EmbeddingIsIsometry) {
    for (int n = 1; n <= 5; ++n) {
        const Eigen::MatrixXd e = dicke_embedding(n);
        EXPECT_EQ(e.rows(), 1 << n);
        EXPECT_EQ(e.cols(), n + 1);
        EXPECT_LT((e.transpose() * e - Eigen::MatrixXd::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff(),
                  1e-14);
    }
}

TEST(Dicke, CollectiveEmbeddingPreservesMechanics) {
    const MechState th = thermal_density(2.0, 10);
    CVector c = CVector::Constant(4, 0.5);
    const QuantumState col = QuantumState::product(SpinBasis::collective(3), c, th);
    const QuantumState prod = collective_to_product(col);
    EXPECT_EQ(prod.spin_basis(), SpinBasis::product(3));
    EXPECT_NEAR(prod.trace(), col.trace(), 1e-14);
    EXPECT_LT((prod.spin_trace().rho() - col.spin_trace().rho()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Spin, EqualSuperpositionNormalised) {
    const CVector v = equal_superposition(8);
    EXPECT_NEAR(v.norm(), 1.0, 1e-15);
    EXPECT_NEAR(v(3).real(), 1.0 / std::sqrt(8.0), 1e-15);
}
