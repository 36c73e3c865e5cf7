#include "netfbm/semigroup.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "netfbm/error.hpp"

namespace netfbm {

namespace {

constexpr double kDefiniteTol = 1e-12;
constexpr double kRankTol = 1e-9;

void check_time(double t) {
    if (!(t >= 0.0)) {
        throw Error(Errc::NegativeTime, "time must be non-negative");
    }
}

bool use_eigenbasis(const DiscreteGenerator& gen, ExpMethod method) {
    switch (method) {
        case ExpMethod::Eigenbasis:
            if (!gen.eigen().diagonalizable()) {
                throw Error(Errc::NonDiagonalizable, "eigenvector matrix is ill conditioned");
            }
            return true;
        case ExpMethod::ScalingSquaring:
            return false;
        case ExpMethod::Auto:
            break;
    }
    return gen.eigen().diagonalizable();
}

CVector exp_factors(const CVector& values, double t) {
    CVector out(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        out(i) = std::exp(values(i) * t);
    }
    return out;
}

}  // namespace

CMatrix semigroup_matrix(const DiscreteGenerator& gen, double t, ExpMethod method) {
    check_time(t);
    const auto d = static_cast<Eigen::Index>(gen.dim());
    if (t == 0.0) {
        return CMatrix::Identity(d, d);
    }
    if (use_eigenbasis(gen, method)) {
        const auto& eig = gen.eigen();
        return eig.vectors * exp_factors(eig.values, t).asDiagonal() * eig.inverse;
    }
    const CMatrix scaled = t * gen.op();
    return scaled.exp();
}

CVector propagate(const DiscreteGenerator& gen, double t, const CVector& v, ExpMethod method) {
    check_time(t);
    if (v.size() != static_cast<Eigen::Index>(gen.dim())) {
        throw Error(Errc::ShapeMismatch, "state has the wrong length");
    }
    if (t == 0.0) {
        return v;
    }
    if (use_eigenbasis(gen, method)) {
        const auto& eig = gen.eigen();
        const CVector modal = eig.inverse * v;
        return eig.vectors * (exp_factors(eig.values, t).array() * modal.array()).matrix();
    }
    return semigroup_matrix(gen, t, ExpMethod::ScalingSquaring) * v;
}

std::string_view to_string(StabilityKind kind) noexcept {
    switch (kind) {
        case StabilityKind::Contractive: return "Contractive";
        case StabilityKind::StronglyStable: return "StronglyStable";
        case StabilityKind::UniformlyExponentiallyStable: return "UniformlyExponentiallyStable";
        case StabilityKind::ProjectionLimit: return "ProjectionLimit";
        case StabilityKind::Unclassified: return "Unclassified";
    }
    return "Unclassified";
}

StabilityClass classify(const DiscreteGenerator& gen, const EdgePotential& potential, const NodeCoupling& coupling) {
    StabilityClass out;
    const CMatrix& b = coupling.B();
    out.potential_nonnegative = potential.min_value() >= 0.0;
    out.potential_zero = potential.is_zero();
    out.coupling_zero = b.cwiseAbs().maxCoeff() == 0.0;

    const CMatrix herm = 0.5 * (b + b.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
    out.min_coupling_eigenvalue = solver.eigenvalues().minCoeff();
    out.coupling_psd = out.min_coupling_eigenvalue >= -kDefiniteTol;
    out.coupling_pd = out.min_coupling_eigenvalue > kDefiniteTol;
    const CVector ones = CVector::Ones(b.rows());
    out.adjoint_kills_constants = (b.adjoint() * ones).cwiseAbs().maxCoeff() <= kDefiniteTol;

    const auto& values = gen.eigen().values;
    out.spectral_bound = gen.eigen().spectral_bound();
    const double tol = kRankTol * std::max(gen.op_norm(), 1e-300);
    out.kernel_dim = static_cast<std::size_t>(
        std::count_if(values.data(), values.data() + values.size(), [&](Complex z) { return std::abs(z) <= tol; }));

    if (!(out.potential_nonnegative && out.coupling_psd)) {
        out.kind = StabilityKind::Unclassified;
        return out;
    }
    if (potential.min_value() > 0.0 || out.coupling_pd) {
        out.kind = StabilityKind::UniformlyExponentiallyStable;
        out.rate = -out.spectral_bound;
        return out;
    }
    if ((out.potential_zero && !out.adjoint_kills_constants) || (out.coupling_zero && !out.potential_zero)) {
        out.kind = StabilityKind::StronglyStable;
        return out;
    }
    if (out.potential_zero && out.coupling_zero && out.kernel_dim == 1) {
        out.kind = StabilityKind::ProjectionLimit;
        return out;
    }
    out.kind = StabilityKind::Contractive;
    return out;
}

CMatrix equilibrium_projection(const DiscreteGenerator& gen) {
    const auto d = static_cast<Eigen::Index>(gen.dim());
    const CVector ones = CVector::Ones(d);
    const auto& values = gen.eigen().values;
    const double tol = kRankTol * std::max(gen.op_norm(), 1e-300);
    const auto kernel = std::count_if(values.data(), values.data() + values.size(),
                                      [&](Complex z) { return std::abs(z) <= tol; });
    const double defect = mass_norm(gen.op() * ones, gen.mass());
    if (kernel != 1 || defect > tol * mass_norm(ones, gen.mass())) {
        throw Error(Errc::NotProjectionCase, "kernel is not spanned by the constants");
    }
    const double weight = gen.mass().sum();
    return ones * (gen.mass().cast<Complex>().transpose() / weight);
}

CMatrix boundary_operator(const DiscreteGenerator& gen) {
    const auto p = static_cast<Eigen::Index>(gen.passive_dim());
    return -gen.full_stiffness().bottomRows(p);
}

CMatrix dirichlet_operator(const DiscreteGenerator& gen, double lambda0) {
    if (gen.passive_dim() == 0) {
        throw Error(Errc::ShapeMismatch, "generator has no passive nodes");
    }
    CMatrix shifted = -gen.pencil();
    shifted.diagonal() += lambda0 * gen.mass().cast<Complex>();
    Eigen::PartialPivLU<CMatrix> lu(shifted);
    if (!(lu.rcond() > 1e-12)) {
        throw Error(Errc::NotUniquelySolvable, "shifted generator is singular");
    }
    // K_sp K_pp^{-1} equals -(recovery)^T only for symmetric K, so solve directly.
    const CMatrix kpp = gen.stiffness_pp();
    const CMatrix coupling = Eigen::PartialPivLU<CMatrix>(kpp.transpose())
                                 .solve(gen.stiffness_sp().transpose())
                                 .transpose();
    return lu.solve(coupling);
}

BlockSemigroup::BlockSemigroup(const DiscreteGenerator& gen)
    : gen_(std::make_shared<const DiscreteGenerator>(gen)), d0_(dirichlet_operator(gen, 0.0)) {}

CMatrix BlockSemigroup::matrix(double t) const {
    const auto s = static_cast<Eigen::Index>(state_dim());
    const auto p = static_cast<Eigen::Index>(boundary_dim());
    const CMatrix st = semigroup_matrix(*gen_, t);
    CMatrix out = CMatrix::Zero(s + p, s + p);
    out.topLeftCorner(s, s) = st;
    out.topRightCorner(s, p) = d0_ - st * d0_;
    out.bottomRightCorner(p, p).setIdentity();
    return out;
}

BlockState block_propagate(const BlockSemigroup& sg, double t, const CVector& v, const CVector& phi) {
    check_time(t);
    if (phi.size() != static_cast<Eigen::Index>(sg.boundary_dim())) {
        throw Error(Errc::ShapeMismatch, "boundary data has the wrong length");
    }
    const CVector lifted = sg.dirichlet() * phi;
    BlockState out;
    out.state = propagate(sg.generator(), t, v - lifted) + lifted;
    out.boundary = phi;
    return out;
}

}  // namespace netfbm
