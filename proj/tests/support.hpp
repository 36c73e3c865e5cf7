#pragma once

// Builders and independent reference computations shared by the test
// executables. Nothing here calls into the library's numerics; oracles only
// borrow the mesh numbering so results can be compared entry by entry.

#include <cstdint>
#include <random>
#include <vector>

#include "netfbm/config.hpp"
#include "netfbm/linalg.hpp"
#include "netfbm/network.hpp"
#include "netfbm/spatial_operator.hpp"

namespace testing {

using netfbm::CMatrix;
using netfbm::Complex;
using netfbm::CVector;
using netfbm::RMatrix;
using netfbm::RVector;

/// Assembles a model from zero-based edges and explicit node matrices.
netfbm::Model make_model(const std::vector<netfbm::Edge>& edges, std::size_t active, double potential,
                         const CMatrix& b, const RMatrix& c, int subdivisions);

/// Single edge, both ends active, B = 0, C = I.
netfbm::Model single_edge(double potential, int subdivisions);

/// 1x1 generator with eigenvalue a and unit mass.
netfbm::DiscreteGenerator scalar(double a);

// ---------------------------------------------------------------------------
// Uncondensed finite-element pencil

/// Stiffness and lumped mass on all dofs, numbered like the library mesh but
/// assembled here from element formulas. Passive vertex rows carry zero mass.
struct FullPencil {
    CMatrix stiffness;
    RVector mass;
    std::size_t state = 0;  ///< leading dofs with positive mass
};
FullPencil assemble_uncondensed(const netfbm::Model& model);

/// Finite generalized eigenvalues of (-K, M), sorted by descending real part.
/// Real problems only.
std::vector<double> dae_eigenvalues(const FullPencil& p);

/// a(u, v) evaluated element by element on full dof vectors.
Complex form_value(const netfbm::Model& model, const CVector& u_full, const CVector& v_full);

/// Dirichlet map by one bordered solve on all dofs: state rows of
/// (lambda0 M + K) u = 0 and passive rows -K u = phi.
CMatrix bordered_dirichlet(const FullPencil& p, double lambda0);

// ---------------------------------------------------------------------------
// Closed forms and quadrature

/// Smallest positive root of x tan(x/2) = 1 squared: the first nonzero decay
/// rate of the single edge with unit point masses at both ends.
double single_edge_second_eigenvalue();

/// Decay rate r = k tanh(k/2) with k^2 + k tanh(k/2) = c, i.e. the slowest
/// mode of the same edge with constant potential c.
double single_edge_decay_rate(double c);

/// E|int_0^t e^{a(t-s)} dB^H(s)|^2 by nested adaptive quadrature after the
/// substitution that removes the diagonal singularity. H in (1/2, 1).
double scalar_variance(double a, double hurst, double t);

/// Order estimate log2((x0 - x1) / (x1 - x2)) from three halvings.
double richardson_order(double x0, double x1, double x2);

/// Strided left sum through exp(dt * Block) of the unsplit block generator
/// [[G, M^-1 K_sp K_pp^-1], [0, 0]] built from the uncondensed pencil.
/// Returns the state part, dim x (K + 1).
CMatrix unsplit_block_solve(const FullPencil& p, const CMatrix& noise_active, const RMatrix& noise_passive,
                            const netfbm::TimeGrid& grid, const RMatrix& path_values, const CVector& initial,
                            const CVector& phi0);

// ---------------------------------------------------------------------------
// Random inputs for property tests

/// Connected multigraph: random spanning tree plus `extra` random non-loop edges.
std::vector<netfbm::Edge> random_graph(std::mt19937_64& rng, std::size_t vertices, std::size_t extra);

/// Hermitian positive semidefinite n x n matrix of the given rank.
CMatrix random_psd(std::mt19937_64& rng, std::size_t n, std::size_t rank, bool complex_entries);

CVector random_vector(std::mt19937_64& rng, Eigen::Index n);

/// Sample skewness and excess kurtosis.
std::pair<double, double> shape_statistics(const std::vector<double>& x);

}  // namespace testing
