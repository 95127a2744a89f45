#pragma once

// Sparse left/right products of truncated ladder operators with dense d x d
// blocks. Each is O(d^2) instead of a dense matrix product.

#include <cmath>
#include <vector>

#include "spincool/fockspace.hpp"

namespace spincool::detail {

inline RVector sqrt_levels(int dim) {
    RVector s(dim - 1);
    for (int n = 1; n < dim; ++n) {
        s(n - 1) = std::sqrt(static_cast<double>(n));
    }
    return s;
}

// out = b M
template <class In>
CMatrix b_left(const In &m, const RVector &sq) {
    const Eigen::Index d = m.rows();
    CMatrix out = CMatrix::Zero(d, m.cols());
    out.topRows(d - 1) = sq.asDiagonal() * m.bottomRows(d - 1);
    return out;
}

// out = b^dagger M
template <class In>
CMatrix bdag_left(const In &m, const RVector &sq) {
    const Eigen::Index d = m.rows();
    CMatrix out = CMatrix::Zero(d, m.cols());
    out.bottomRows(d - 1) = sq.asDiagonal() * m.topRows(d - 1);
    return out;
}

// out = M b
template <class In>
CMatrix b_right(const In &m, const RVector &sq) {
    const Eigen::Index d = m.cols();
    CMatrix out = CMatrix::Zero(m.rows(), d);
    out.rightCols(d - 1) = m.leftCols(d - 1) * sq.asDiagonal();
    return out;
}

// out = M b^dagger
template <class In>
CMatrix bdag_right(const In &m, const RVector &sq) {
    const Eigen::Index d = m.cols();
    CMatrix out = CMatrix::Zero(m.rows(), d);
    out.leftCols(d - 1) = m.rightCols(d - 1) * sq.asDiagonal();
    return out;
}

} // namespace spincool::detail

namespace spincool::detail {

// -i [H, rho] for H = sum_s |s><s| (x) (n - kappa_s (b + b^dagger)) on a
// spin-major joint matrix with d x d blocks.
inline CMatrix closed_derivative(const CMatrix &rho, const std::vector<double> &kappa, int d,
                                 const RVector &sq) {
    const int sdim = static_cast<int>(kappa.size());
    const RVector levels = RVector::LinSpaced(d, 0.0, d - 1.0);
    CMatrix out(rho.rows(), rho.cols());
    const cplx minus_i{0.0, -1.0};
    for (int s = 0; s < sdim; ++s) {
        for (int sp = 0; sp < sdim; ++sp) {
            const auto blk = rho.block(static_cast<Eigen::Index>(s) * d,
                                       static_cast<Eigen::Index>(sp) * d, d, d);
            CMatrix comm = levels.asDiagonal() * blk - blk * levels.asDiagonal();
            if (kappa[s] != 0.0) {
                comm -= kappa[s] * (b_left(blk, sq) + bdag_left(blk, sq));
            }
            if (kappa[sp] != 0.0) {
                comm += kappa[sp] * (b_right(blk, sq) + bdag_right(blk, sq));
            }
            out.block(static_cast<Eigen::Index>(s) * d, static_cast<Eigen::Index>(sp) * d, d, d) =
                minus_i * comm;
        }
    }
    return out;
}

} // namespace spincool::detail
