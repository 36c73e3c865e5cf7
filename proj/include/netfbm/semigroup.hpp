#pragma once

#include <memory>
#include <string_view>

#include "netfbm/linalg.hpp"
#include "netfbm/network.hpp"
#include "netfbm/spatial_operator.hpp"

namespace netfbm {

enum class ExpMethod {
    Auto,             ///< eigenbasis when well conditioned, else scaling and squaring
    Eigenbasis,       ///< throws NonDiagonalizable when the basis is ill conditioned
    ScalingSquaring,  ///< Pade scaling and squaring on G
};

/// S(t) = exp(tG) as a dense matrix. Throws NegativeTime.
[[nodiscard]] CMatrix semigroup_matrix(const DiscreteGenerator& gen, double t, ExpMethod method = ExpMethod::Auto);

/// S(t) v; returns v unchanged at t = 0. Throws NegativeTime.
[[nodiscard]] CVector propagate(const DiscreteGenerator& gen, double t, const CVector& v,
                                ExpMethod method = ExpMethod::Auto);

enum class StabilityKind {
    Contractive,
    StronglyStable,
    UniformlyExponentiallyStable,
    ProjectionLimit,
    Unclassified,
};

[[nodiscard]] std::string_view to_string(StabilityKind kind) noexcept;

struct StabilityClass {
    StabilityKind kind = StabilityKind::Unclassified;
    double rate = 0.0;  ///< decay rate, set for UniformlyExponentiallyStable
    bool potential_nonnegative = false;
    bool potential_zero = false;
    bool coupling_zero = false;
    bool coupling_psd = false;  ///< Hermitian part of B positive semidefinite
    bool coupling_pd = false;   ///< Hermitian part of B positive definite
    bool adjoint_kills_constants = false;  ///< B^H 1 = 0
    double min_coupling_eigenvalue = 0.0;
    double spectral_bound = 0.0;
    std::size_t kernel_dim = 0;
};

/// Strongest long-time class whose premises can be certified from (p, B)
/// and the discrete spectrum.
[[nodiscard]] StabilityClass classify(const DiscreteGenerator& gen, const EdgePotential& potential,
                                      const NodeCoupling& coupling);

/// Rank-one M-orthogonal projection onto the constants. Throws
/// NotProjectionCase unless the kernel is exactly span{1}.
[[nodiscard]] CMatrix equilibrium_projection(const DiscreteGenerator& gen);

/// R u = K_p V - B_p q on full dofs, i.e. the passive rows of -K.
[[nodiscard]] CMatrix boundary_operator(const DiscreteGenerator& gen);

/// Maps passive boundary data phi to the state u_s with (lambda0 - G) u_s = 0
/// in the state rows and R (u_s, u_p) = phi. Throws NotUniquelySolvable,
/// ShapeMismatch (no passive nodes).
[[nodiscard]] CMatrix dirichlet_operator(const DiscreteGenerator& gen, double lambda0 = 0.0);

/// [[S(t), (I - S(t)) D0], [0, I]] acting on (state, passive data).
class BlockSemigroup {
public:
    /// Throws NotUniquelySolvable when G is singular.
    explicit BlockSemigroup(const DiscreteGenerator& gen);

    [[nodiscard]] const DiscreteGenerator& generator() const noexcept { return *gen_; }
    [[nodiscard]] const CMatrix& dirichlet() const noexcept { return d0_; }
    [[nodiscard]] std::size_t state_dim() const noexcept { return gen_->dim(); }
    [[nodiscard]] std::size_t boundary_dim() const noexcept { return gen_->passive_dim(); }

    /// Full block matrix. Throws NegativeTime.
    [[nodiscard]] CMatrix matrix(double t) const;

private:
    std::shared_ptr<const DiscreteGenerator> gen_;
    CMatrix d0_;
};

struct BlockState {
    CVector state;
    CVector boundary;
};

/// (S(t) v + (I - S(t)) D0 phi, phi). Throws NegativeTime, ShapeMismatch.
[[nodiscard]] BlockState block_propagate(const BlockSemigroup& sg, double t, const CVector& v, const CVector& phi);

}  // namespace netfbm
