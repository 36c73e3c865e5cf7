#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace netfbm {

using Complex = std::complex<double>;

using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using IMatrix = Eigen::MatrixXi;

/// Inner product <x, y>_M = y^H M x for a diagonal mass M.
[[nodiscard]] inline Complex mass_inner(const CVector& x, const CVector& y, const RVector& mass) {
    return (y.conjugate().array() * mass.array() * x.array()).sum();
}

[[nodiscard]] inline double mass_norm(const CVector& x, const RVector& mass) {
    return std::sqrt((mass.array() * x.array().abs2()).sum());
}

/// Operator norm induced by the diagonal mass inner product.
[[nodiscard]] inline double mass_operator_norm(const CMatrix& a, const RVector& mass) {
    const RVector s = mass.array().sqrt();
    const CMatrix scaled = s.asDiagonal() * a * s.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<CMatrix> svd(scaled);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

}  // namespace netfbm
