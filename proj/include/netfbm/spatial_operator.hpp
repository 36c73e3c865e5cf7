#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "netfbm/linalg.hpp"
#include "netfbm/network.hpp"

namespace netfbm {

/// Degree-of-freedom layout of continuous piecewise-linear elements on every
/// edge. Vertex dofs are shared by all incident edges, which is what makes
/// discrete functions continuous across nodes.
///
/// Full dof ordering: active vertices, then edge interiors (edge by edge, in
/// increasing x), then passive vertices. The first state_dofs() entries are
/// the state of the evolution; the trailing passive block is algebraic.
class Mesh {
public:
    [[nodiscard]] static Mesh uniform(const NetworkGraph& graph, int subdivisions);
    [[nodiscard]] static Mesh build(const NetworkGraph& graph, std::vector<int> subdivisions);

    [[nodiscard]] const NetworkGraph& graph() const noexcept { return graph_; }
    [[nodiscard]] int subdivisions(std::size_t edge) const { return subdivisions_.at(edge); }
    [[nodiscard]] double step(std::size_t edge) const { return 1.0 / subdivisions_.at(edge); }

    [[nodiscard]] std::size_t full_dofs() const noexcept { return full_dofs_; }
    [[nodiscard]] std::size_t state_dofs() const noexcept { return full_dofs_ - graph_.passive_count(); }
    [[nodiscard]] std::size_t passive_dofs() const noexcept { return graph_.passive_count(); }

    [[nodiscard]] std::size_t vertex_dof(std::size_t vertex) const;
    /// Dof of grid node k (0..N_j) on edge j.
    [[nodiscard]] std::size_t dof(std::size_t edge, int node) const;

    /// Nodal interpolant of a function given per edge; vertex values are
    /// taken from the first incident edge.
    [[nodiscard]] CVector interpolate(const std::function<Complex(std::size_t edge, double x)>& f) const;

private:
    Mesh(const NetworkGraph& graph, std::vector<int> subdivisions);

    NetworkGraph graph_;
    std::vector<int> subdivisions_;
    std::vector<std::size_t> interior_offset_;
    std::size_t full_dofs_ = 0;
};

/// Net inward edge derivative at each node, split into active (K_a) and
/// passive (K_p) rows; one-sided second-order three-point stencils.
struct KirchhoffTrace {
    CMatrix active;   ///< n0 x full_dofs
    CMatrix passive;  ///< (n - n0) x full_dofs
};

/// Eigendecomposition of the pencil (A_h, M_h), i.e. of the operator
/// G = M_h^{-1} A_h. Columns of `vectors` are normalized in the mass norm.
struct Eigendecomposition {
    CVector values;    ///< sorted by descending real part
    CMatrix vectors;   ///< V
    CMatrix inverse;   ///< V^{-1}
    double condition = 1.0;  ///< condition number of V in the mass norm
    bool self_adjoint = false;

    [[nodiscard]] bool diagonalizable() const noexcept { return condition <= 1e8; }
    [[nodiscard]] double spectral_bound() const { return values.size() ? values(0).real() : 0.0; }
};

/// Finite-dimensional realization of the network generator on state dofs.
class DiscreteGenerator {
public:
    /// Generator given directly by a pencil (A, diag M), without a mesh; used
    /// for scalar and small matrix surrogates.
    [[nodiscard]] static DiscreteGenerator from_pencil(CMatrix pencil, RVector mass);

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(mass_.size()); }
    [[nodiscard]] std::size_t passive_dim() const noexcept { return static_cast<std::size_t>(recovery_.rows()); }

    /// A_h: negative condensed stiffness; <-A_h u, v> is the form value.
    [[nodiscard]] const CMatrix& pencil() const noexcept { return pencil_; }
    /// Diagonal of M_h.
    [[nodiscard]] const RVector& mass() const noexcept { return mass_; }
    /// G = M_h^{-1} A_h, the generator acting on state coordinates.
    [[nodiscard]] const CMatrix& op() const noexcept { return op_; }
    /// Passive vertex values from state dofs under homogeneous node laws.
    [[nodiscard]] const CMatrix& recovery() const noexcept { return recovery_; }

    [[nodiscard]] const Mesh* mesh() const noexcept { return mesh_ ? &*mesh_ : nullptr; }
    [[nodiscard]] const CMatrix& full_stiffness() const noexcept { return full_stiffness_; }
    [[nodiscard]] const RVector& full_mass() const noexcept { return full_mass_; }
    [[nodiscard]] const KirchhoffTrace& kirchhoff() const noexcept { return trace_; }

    /// State-to-passive and passive-to-passive stiffness blocks.
    [[nodiscard]] CMatrix stiffness_ss() const;
    [[nodiscard]] CMatrix stiffness_sp() const;
    [[nodiscard]] CMatrix stiffness_ps() const;
    [[nodiscard]] CMatrix stiffness_pp() const;

    /// Full dof vector with passive values recovered.
    [[nodiscard]] CVector lift(const CVector& state) const;

    /// 0 when G is invertible, otherwise 1.
    [[nodiscard]] double spectral_shift() const noexcept { return shift_; }
    [[nodiscard]] bool invertible() const noexcept { return shift_ == 0.0; }
    [[nodiscard]] const Eigendecomposition& eigen() const noexcept { return eig_; }
    [[nodiscard]] double op_norm() const noexcept { return op_norm_; }

    friend DiscreteGenerator assemble(const NetworkGraph&, const NodeCoupling&, const EdgePotential&, const Mesh&);

private:
    DiscreteGenerator() = default;
    void finalize();

    CMatrix pencil_;
    RVector mass_;
    CMatrix op_;
    CMatrix recovery_;
    std::optional<Mesh> mesh_;
    CMatrix full_stiffness_;
    RVector full_mass_;
    KirchhoffTrace trace_;
    double shift_ = 0.0;
    double op_norm_ = 0.0;
    Eigendecomposition eig_;
};

/// Linear finite elements for the form
///   a(u,v) = (u'|v') + (p u|v) + sum_{i,h} b_ih q^u_h conj(q^v_i)
/// with lumped L2 mass on edges plus unit point mass at active vertices.
/// Passive vertices carry no mass and are condensed out.
///
/// Throws SingularPassiveBlock, ShapeMismatch.
[[nodiscard]] DiscreteGenerator assemble(const NetworkGraph& graph, const NodeCoupling& coupling,
                                         const EdgePotential& potential, const Mesh& mesh);

/// Eigenpairs with residual check ||A x - lambda M x|| <= 1e-9 ||A|| ||x||.
/// Throws EigensolverFailure.
[[nodiscard]] const Eigendecomposition& spectrum(const DiscreteGenerator& gen);

/// (lambda M - A)^{-1} M. Throws SpectrumHit.
[[nodiscard]] CMatrix resolvent(const DiscreteGenerator& gen, Complex lambda);

/// n^2 R(n) - n I. Throws SpectrumHit, OutOfRange (n not above the spectral bound).
[[nodiscard]] CMatrix yosida(const DiscreteGenerator& gen, double n);

/// (lambda0 - G)^alpha via the eigendecomposition, principal branch.
/// Throws NonDiagonalizable, OutOfRange.
[[nodiscard]] CMatrix fractional_power(const DiscreteGenerator& gen, double alpha);

/// ||(lambda0 - G)^alpha v|| in the mass norm. Throws NonDiagonalizable, OutOfRange.
[[nodiscard]] double fractional_norm(const DiscreteGenerator& gen, double alpha, const CVector& v);

/// Eigenvectors of the adjoint G* = M^{-1} G^H M as columns; column i pairs
/// with eigenvalue i and satisfies <x, y_i>_M = (V^{-1} x)_i.
[[nodiscard]] CMatrix adjoint_eigenbasis(const DiscreteGenerator& gen);

/// Writes "row,col,real,imag" lines for every nonzero entry.
void export_csv(std::ostream& out, const CMatrix& matrix);

}  // namespace netfbm
