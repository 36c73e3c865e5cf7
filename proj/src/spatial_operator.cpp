#include "netfbm/spatial_operator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "netfbm/error.hpp"

namespace netfbm {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kKernelTol = 1e-9;
constexpr double kResidualTol = 1e-9;
constexpr double kPassiveRcond = 1e-12;

double max_abs(const CMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

Eigendecomposition decompose(const CMatrix& pencil, const CMatrix& op, const RVector& mass) {
    const auto d = pencil.rows();
    Eigendecomposition out;
    const RVector sqrt_mass = mass.array().sqrt();
    const RVector inv_sqrt_mass = sqrt_mass.cwiseInverse();

    const double scale = std::max(1.0, max_abs(pencil));
    out.self_adjoint = max_abs(pencil - pencil.adjoint()) <= kHermitianTol * scale;

    if (out.self_adjoint) {
        CMatrix sym = inv_sqrt_mass.asDiagonal() * pencil * inv_sqrt_mass.asDiagonal();
        sym = (0.5 * (sym + sym.adjoint())).eval();
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
        if (solver.info() != Eigen::Success) {
            throw Error(Errc::EigensolverFailure, "Hermitian eigensolver did not converge");
        }
        out.values.resize(d);
        CMatrix u(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
            out.values(i) = solver.eigenvalues()(d - 1 - i);
            u.col(i) = solver.eigenvectors().col(d - 1 - i);
        }
        out.vectors = inv_sqrt_mass.asDiagonal() * u;
        out.inverse = u.adjoint() * sqrt_mass.asDiagonal();
        out.condition = 1.0;
        return out;
    }

    Eigen::ComplexEigenSolver<CMatrix> solver(op);
    if (solver.info() != Eigen::Success) {
        throw Error(Errc::EigensolverFailure, "complex eigensolver did not converge");
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const CVector& raw = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (raw(a).real() != raw(b).real()) {
            return raw(a).real() > raw(b).real();
        }
        return raw(a).imag() > raw(b).imag();
    });
    out.values.resize(d);
    out.vectors.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto src = order[static_cast<std::size_t>(i)];
        out.values(i) = raw(src);
        CVector col = solver.eigenvectors().col(src);
        col /= mass_norm(col, mass);
        out.vectors.col(i) = col;
    }
    Eigen::JacobiSVD<CMatrix> svd(sqrt_mass.asDiagonal() * out.vectors);
    const auto& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    out.condition = smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
    out.inverse = Eigen::FullPivLU<CMatrix>(out.vectors).inverse();
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Mesh

Mesh::Mesh(const NetworkGraph& graph, std::vector<int> subdivisions)
    : graph_(graph), subdivisions_(std::move(subdivisions)) {
    if (subdivisions_.size() != graph_.edge_count()) {
        throw Error(Errc::ShapeMismatch, "one subdivision count per edge required");
    }
    std::size_t offset = graph_.active_count();
    interior_offset_.reserve(subdivisions_.size());
    for (int n : subdivisions_) {
        if (n < 2) {
            throw Error(Errc::OutOfRange, "each edge needs at least 2 subdivisions");
        }
        interior_offset_.push_back(offset);
        offset += static_cast<std::size_t>(n - 1);
    }
    full_dofs_ = offset + graph_.passive_count();
}

Mesh Mesh::uniform(const NetworkGraph& graph, int subdivisions) {
    return Mesh(graph, std::vector<int>(graph.edge_count(), subdivisions));
}

Mesh Mesh::build(const NetworkGraph& graph, std::vector<int> subdivisions) {
    return Mesh(graph, std::move(subdivisions));
}

std::size_t Mesh::vertex_dof(std::size_t vertex) const {
    if (vertex < graph_.active_count()) {
        return vertex;
    }
    return state_dofs() + (vertex - graph_.active_count());
}

std::size_t Mesh::dof(std::size_t edge, int node) const {
    const int n = subdivisions_.at(edge);
    if (node == 0) {
        return vertex_dof(graph_.edges()[edge].tail);
    }
    if (node == n) {
        return vertex_dof(graph_.edges()[edge].head);
    }
    return interior_offset_[edge] + static_cast<std::size_t>(node - 1);
}

CVector Mesh::interpolate(const std::function<Complex(std::size_t, double)>& f) const {
    CVector out = CVector::Zero(static_cast<Eigen::Index>(full_dofs_));
    std::vector<bool> vertex_set(graph_.vertex_count(), false);
    for (std::size_t j = 0; j < graph_.edge_count(); ++j) {
        const int n = subdivisions_[j];
        for (int k = 0; k <= n; ++k) {
            const auto idx = static_cast<Eigen::Index>(dof(j, k));
            const double x = static_cast<double>(k) / n;
            if (k == 0 || k == n) {
                const std::size_t v = k == 0 ? graph_.edges()[j].tail : graph_.edges()[j].head;
                if (vertex_set[v]) {
                    continue;
                }
                vertex_set[v] = true;
            }
            out(idx) = f(j, x);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// DiscreteGenerator

void DiscreteGenerator::finalize() {
    op_ = mass_.cwiseInverse().asDiagonal() * pencil_;
    op_norm_ = mass_operator_norm(op_, mass_);
    eig_ = decompose(pencil_, op_, mass_);
    double radius = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < eig_.values.size(); ++i) {
        radius = std::max(radius, std::abs(eig_.values(i)));
        smallest = std::min(smallest, std::abs(eig_.values(i)));
    }
    shift_ = smallest > kKernelTol * std::max(1.0, radius) ? 0.0 : 1.0;
}

DiscreteGenerator DiscreteGenerator::from_pencil(CMatrix pencil, RVector mass) {
    if (pencil.rows() != pencil.cols() || pencil.rows() != mass.size() || mass.size() == 0) {
        throw Error(Errc::ShapeMismatch, "pencil must be square and match the mass diagonal");
    }
    if ((mass.array() <= 0.0).any()) {
        throw Error(Errc::ShapeMismatch, "mass must be positive");
    }
    DiscreteGenerator g;
    g.pencil_ = std::move(pencil);
    g.mass_ = std::move(mass);
    g.full_stiffness_ = -g.pencil_;
    g.full_mass_ = g.mass_;
    g.recovery_ = CMatrix::Zero(0, g.pencil_.cols());
    g.finalize();
    return g;
}

CMatrix DiscreteGenerator::stiffness_ss() const {
    const auto s = static_cast<Eigen::Index>(dim());
    return full_stiffness_.topLeftCorner(s, s);
}

CMatrix DiscreteGenerator::stiffness_sp() const {
    const auto s = static_cast<Eigen::Index>(dim());
    const auto p = static_cast<Eigen::Index>(passive_dim());
    return full_stiffness_.topRightCorner(s, p);
}

CMatrix DiscreteGenerator::stiffness_ps() const {
    const auto s = static_cast<Eigen::Index>(dim());
    const auto p = static_cast<Eigen::Index>(passive_dim());
    return full_stiffness_.bottomLeftCorner(p, s);
}

CMatrix DiscreteGenerator::stiffness_pp() const {
    const auto p = static_cast<Eigen::Index>(passive_dim());
    return full_stiffness_.bottomRightCorner(p, p);
}

CVector DiscreteGenerator::lift(const CVector& state) const {
    CVector out(static_cast<Eigen::Index>(dim() + passive_dim()));
    out.head(state.size()) = state;
    out.tail(static_cast<Eigen::Index>(passive_dim())) = recovery_ * state;
    return out;
}

DiscreteGenerator assemble(const NetworkGraph& graph, const NodeCoupling& coupling,
                           const EdgePotential& potential, const Mesh& mesh) {
    const std::size_t n = graph.vertex_count();
    if (coupling.node_count() != n || coupling.active_count() != graph.active_count()) {
        throw Error(Errc::ShapeMismatch, "coupling does not match the graph");
    }
    if (potential.edge_count() != graph.edge_count()) {
        throw Error(Errc::ShapeMismatch, "potential does not match the graph");
    }
    if (mesh.graph().edges() != graph.edges() || mesh.graph().active_count() != graph.active_count()) {
        throw Error(Errc::ShapeMismatch, "mesh was built for another graph");
    }

    const auto nf = static_cast<Eigen::Index>(mesh.full_dofs());
    const auto ns = static_cast<Eigen::Index>(mesh.state_dofs());
    const auto np = static_cast<Eigen::Index>(mesh.passive_dofs());
    CMatrix k = CMatrix::Zero(nf, nf);
    RVector m = RVector::Zero(nf);

    for (std::size_t j = 0; j < graph.edge_count(); ++j) {
        const int nj = mesh.subdivisions(j);
        const double h = mesh.step(j);
        for (int e = 0; e < nj; ++e) {
            const auto a = static_cast<Eigen::Index>(mesh.dof(j, e));
            const auto b = static_cast<Eigen::Index>(mesh.dof(j, e + 1));
            k(a, a) += 1.0 / h;
            k(b, b) += 1.0 / h;
            k(a, b) -= 1.0 / h;
            k(b, a) -= 1.0 / h;
        }
        // Trapezoidal weights; a passive endpoint hands its weight to the
        // neighbouring interior node so the passive dof stays massless.
        std::vector<double> w(static_cast<std::size_t>(nj + 1), h);
        w.front() = 0.5 * h;
        w.back() = 0.5 * h;
        const auto& edge = graph.edges()[j];
        if (!graph.is_active(edge.tail)) {
            w[1] += w[0];
            w[0] = 0.0;
        }
        if (!graph.is_active(edge.head)) {
            w[static_cast<std::size_t>(nj - 1)] += w.back();
            w.back() = 0.0;
        }
        for (int node = 0; node <= nj; ++node) {
            const double wk = w[static_cast<std::size_t>(node)];
            if (wk == 0.0) {
                continue;
            }
            const auto a = static_cast<Eigen::Index>(mesh.dof(j, node));
            m(a) += wk;
            k(a, a) += wk * potential(j, static_cast<double>(node) * h);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto vi = static_cast<Eigen::Index>(mesh.vertex_dof(i));
        if (graph.is_active(i)) {
            m(vi) += 1.0;
        }
        for (std::size_t h = 0; h < n; ++h) {
            const auto vh = static_cast<Eigen::Index>(mesh.vertex_dof(h));
            k(vi, vh) += coupling.B()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h));
        }
    }

    DiscreteGenerator g;
    g.full_stiffness_ = k;
    g.full_mass_ = m;
    g.mass_ = m.head(ns);
    CMatrix condensed = k.topLeftCorner(ns, ns);
    if (np > 0) {
        Eigen::PartialPivLU<CMatrix> lu(k.bottomRightCorner(np, np));
        if (!(lu.rcond() > kPassiveRcond)) {
            throw Error(Errc::SingularPassiveBlock, "passive node block is singular");
        }
        g.recovery_ = -lu.solve(k.bottomLeftCorner(np, ns));
        condensed += k.topRightCorner(ns, np) * g.recovery_;
    } else {
        g.recovery_ = CMatrix::Zero(0, ns);
    }
    g.pencil_ = -condensed;

    const auto n0 = static_cast<Eigen::Index>(graph.active_count());
    CMatrix trace = CMatrix::Zero(static_cast<Eigen::Index>(n), nf);
    for (std::size_t j = 0; j < graph.edge_count(); ++j) {
        const int nj = mesh.subdivisions(j);
        const double h = mesh.step(j);
        const auto tail = static_cast<Eigen::Index>(graph.edges()[j].tail);
        const auto head = static_cast<Eigen::Index>(graph.edges()[j].head);
        auto at = [&](int node) { return static_cast<Eigen::Index>(mesh.dof(j, node)); };
        trace(tail, at(0)) += -3.0 / (2.0 * h);
        trace(tail, at(1)) += 4.0 / (2.0 * h);
        trace(tail, at(2)) += -1.0 / (2.0 * h);
        trace(head, at(nj)) += -3.0 / (2.0 * h);
        trace(head, at(nj - 1)) += 4.0 / (2.0 * h);
        trace(head, at(nj - 2)) += -1.0 / (2.0 * h);
    }
    g.trace_.active = trace.topRows(n0);
    g.trace_.passive = trace.bottomRows(static_cast<Eigen::Index>(n) - n0);
    g.mesh_ = mesh;
    g.finalize();
    return g;
}

const Eigendecomposition& spectrum(const DiscreteGenerator& gen) {
    const auto& eig = gen.eigen();
    const double bound = kResidualTol * std::max(1.0, gen.pencil().cwiseAbs().rowwise().sum().maxCoeff());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        const CVector x = eig.vectors.col(i);
        const CVector r = gen.pencil() * x - eig.values(i) * (gen.mass().array() * x.array()).matrix();
        if (r.norm() > bound * x.norm()) {
            throw Error(Errc::EigensolverFailure, "eigenpair " + std::to_string(i) + " residual too large");
        }
    }
    return eig;
}

CMatrix resolvent(const DiscreteGenerator& gen, Complex lambda) {
    const auto& values = gen.eigen().values;
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        gap = std::min(gap, std::abs(lambda - values(i)));
    }
    if (gap <= 1e-10 * std::max(1.0, gen.op_norm())) {
        throw Error(Errc::SpectrumHit, "resolvent evaluated on the spectrum");
    }
    CMatrix shifted = -gen.pencil();
    shifted.diagonal() += lambda * gen.mass().cast<Complex>();
    return Eigen::PartialPivLU<CMatrix>(shifted).solve(CMatrix(gen.mass().cast<Complex>().asDiagonal()));
}

CMatrix yosida(const DiscreteGenerator& gen, double n) {
    if (!(n > gen.eigen().spectral_bound())) {
        throw Error(Errc::OutOfRange, "Yosida index must exceed the spectral bound");
    }
    CMatrix out = n * n * resolvent(gen, Complex(n, 0.0));
    out.diagonal().array() -= n;
    return out;
}

CMatrix fractional_power(const DiscreteGenerator& gen, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error(Errc::OutOfRange, "fractional order must lie in [0, 1]");
    }
    const auto& eig = gen.eigen();
    const auto d = static_cast<Eigen::Index>(gen.dim());
    if (alpha == 0.0) {
        return CMatrix::Identity(d, d);
    }
    if (!eig.diagonalizable()) {
        throw Error(Errc::NonDiagonalizable, "eigenvector matrix condition number exceeds 1e8");
    }
    CVector factors(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const Complex base = gen.spectral_shift() - eig.values(i);
        factors(i) = eig.self_adjoint ? Complex(std::pow(std::max(base.real(), 0.0), alpha), 0.0)
                                      : std::pow(base, alpha);
    }
    return eig.vectors * factors.asDiagonal() * eig.inverse;
}

double fractional_norm(const DiscreteGenerator& gen, double alpha, const CVector& v) {
    if (alpha == 0.0) {
        return mass_norm(v, gen.mass());
    }
    return mass_norm(fractional_power(gen, alpha) * v, gen.mass());
}

CMatrix adjoint_eigenbasis(const DiscreteGenerator& gen) {
    return gen.mass().cwiseInverse().asDiagonal() * gen.eigen().inverse.adjoint();
}

void export_csv(std::ostream& out, const CMatrix& matrix) {
    const auto precision = out.precision(17);
    out << "row,col,real,imag\n";
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            const Complex v = matrix(i, j);
            if (v != Complex(0.0, 0.0)) {
                out << i << ',' << j << ',' << v.real() << ',' << v.imag() << '\n';
            }
        }
    }
    out.precision(precision);
}

}  // namespace netfbm
