#include "support.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace testing {

using netfbm::Edge;
using netfbm::Model;

Model make_model(const std::vector<Edge>& edges, std::size_t active, double potential, const CMatrix& b,
                 const RMatrix& c, int subdivisions) {
    auto graph = netfbm::build_graph(edges, active);
    auto coupling = netfbm::validate_coupling(b, c, active);
    auto pot = netfbm::EdgePotential::constant(edges.size(), potential);
    auto mesh = netfbm::Mesh::uniform(graph, subdivisions);
    auto gen = netfbm::assemble(graph, coupling, pot, mesh);
    return Model{std::move(graph), std::move(coupling), std::move(pot), std::move(mesh), std::move(gen)};
}

Model single_edge(double potential, int subdivisions) {
    return make_model({{0, 1}}, 2, potential, CMatrix::Zero(2, 2), RMatrix::Identity(2, 2), subdivisions);
}

netfbm::DiscreteGenerator scalar(double a) {
    return netfbm::DiscreteGenerator::from_pencil(CMatrix::Constant(1, 1, a), RVector::Ones(1));
}

namespace {

std::vector<double> lumped_weights(const Model& model, std::size_t j) {
    const auto& graph = model.graph;
    const int nj = model.mesh.subdivisions(j);
    const double h = 1.0 / nj;
    std::vector<double> w(static_cast<std::size_t>(nj + 1), h);
    w.front() = w.back() = 0.5 * h;
    const auto& e = graph.edges()[j];
    if (!graph.is_active(e.tail)) {
        w[1] += w[0];
        w[0] = 0.0;
    }
    if (!graph.is_active(e.head)) {
        w[static_cast<std::size_t>(nj - 1)] += w.back();
        w.back() = 0.0;
    }
    return w;
}

}  // namespace

FullPencil assemble_uncondensed(const Model& model) {
    const auto& graph = model.graph;
    const auto& mesh = model.mesh;
    const auto nf = static_cast<Eigen::Index>(mesh.full_dofs());
    FullPencil out;
    out.stiffness = CMatrix::Zero(nf, nf);
    out.mass = RVector::Zero(nf);
    out.state = mesh.state_dofs();
    for (std::size_t j = 0; j < graph.edge_count(); ++j) {
        const int nj = mesh.subdivisions(j);
        const double h = 1.0 / nj;
        const Eigen::Matrix2d element{{1.0 / h, -1.0 / h}, {-1.0 / h, 1.0 / h}};
        for (int e = 0; e < nj; ++e) {
            const std::array<Eigen::Index, 2> idx{static_cast<Eigen::Index>(mesh.dof(j, e)),
                                                  static_cast<Eigen::Index>(mesh.dof(j, e + 1))};
            for (int r = 0; r < 2; ++r) {
                for (int s = 0; s < 2; ++s) {
                    out.stiffness(idx[r], idx[s]) += element(r, s);
                }
            }
        }
        const auto w = lumped_weights(model, j);
        for (int node = 0; node <= nj; ++node) {
            const auto d = static_cast<Eigen::Index>(mesh.dof(j, node));
            const double wk = w[static_cast<std::size_t>(node)];
            out.mass(d) += wk;
            out.stiffness(d, d) += wk * model.potential(j, node * h);
        }
    }
    const auto& b = model.coupling.B();
    for (std::size_t i = 0; i < graph.vertex_count(); ++i) {
        const auto vi = static_cast<Eigen::Index>(mesh.vertex_dof(i));
        if (graph.is_active(i)) {
            out.mass(vi) += 1.0;
        }
        for (std::size_t k = 0; k < graph.vertex_count(); ++k) {
            out.stiffness(vi, static_cast<Eigen::Index>(mesh.vertex_dof(k))) +=
                b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        }
    }
    return out;
}

std::vector<double> dae_eigenvalues(const FullPencil& p) {
    const RMatrix a = -p.stiffness.real();
    const RMatrix m = p.mass.asDiagonal();
    Eigen::GeneralizedEigenSolver<RMatrix> ges(a, m, false);
    std::vector<double> out;
    const double scale = a.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < ges.alphas().size(); ++i) {
        const Complex alpha = ges.alphas()(i);
        const double beta = ges.betas()(i);
        if (std::abs(beta) > 1e-12 * std::max(1.0, std::abs(alpha)) && std::abs(alpha / beta) < 1e6 * scale) {
            out.push_back((alpha / beta).real());
        }
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

Complex form_value(const Model& model, const CVector& u, const CVector& v) {
    const auto& graph = model.graph;
    const auto& mesh = model.mesh;
    Complex total = 0.0;
    for (std::size_t j = 0; j < graph.edge_count(); ++j) {
        const int nj = mesh.subdivisions(j);
        const double h = 1.0 / nj;
        for (int e = 0; e < nj; ++e) {
            const auto a = static_cast<Eigen::Index>(mesh.dof(j, e));
            const auto b = static_cast<Eigen::Index>(mesh.dof(j, e + 1));
            total += (u(b) - u(a)) / h * std::conj((v(b) - v(a)) / h) * h;
        }
        const auto w = lumped_weights(model, j);
        for (int node = 0; node <= nj; ++node) {
            const auto d = static_cast<Eigen::Index>(mesh.dof(j, node));
            total += w[static_cast<std::size_t>(node)] * model.potential(j, node * h) * u(d) * std::conj(v(d));
        }
    }
    const auto& bm = model.coupling.B();
    for (std::size_t i = 0; i < graph.vertex_count(); ++i) {
        for (std::size_t k = 0; k < graph.vertex_count(); ++k) {
            total += bm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) *
                     u(static_cast<Eigen::Index>(mesh.vertex_dof(k))) *
                     std::conj(v(static_cast<Eigen::Index>(mesh.vertex_dof(i))));
        }
    }
    return total;
}

CMatrix bordered_dirichlet(const FullPencil& p, double lambda0) {
    const auto nf = p.stiffness.rows();
    const auto ns = static_cast<Eigen::Index>(p.state);
    const auto np = nf - ns;
    CMatrix system = p.stiffness;
    system.topRows(ns).diagonal().head(ns) += lambda0 * p.mass.head(ns).cast<Complex>();
    system.bottomRows(np) *= -1.0;
    CMatrix rhs = CMatrix::Zero(nf, np);
    rhs.bottomRows(np).setIdentity();
    const CMatrix sol = system.fullPivLu().solve(rhs);
    return sol.topRows(ns);
}

double single_edge_second_eigenvalue() {
    auto f = [](double x) { return x * std::tan(0.5 * x) - 1.0; };
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, 0.1, 3.0, boost::math::tools::eps_tolerance<double>(50), iters);
    const double x = 0.5 * (r.first + r.second);
    return x * x;
}

double single_edge_decay_rate(double c) {
    auto f = [c](double k) { return k * k + k * std::tanh(0.5 * k) - c; };
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, 0.0, std::sqrt(c) + 1.0,
                                                     boost::math::tools::eps_tolerance<double>(50), iters);
    const double k = 0.5 * (r.first + r.second);
    return k * std::tanh(0.5 * k);
}

double scalar_variance(double a, double hurst, double t) {
    const double p = 2.0 * hurst - 1.0;
    auto inner = [a, p](double x) {
        const double top = std::pow(x, p);
        if (top == 0.0) {
            return 0.0;
        }
        auto g = [a, p](double v) { return std::exp(-a * std::pow(v, 1.0 / p)); };
        return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, top, 15, 1e-13);
    };
    boost::math::quadrature::tanh_sinh<double> outer;
    auto h = [&](double x) { return std::exp(2.0 * a * x) * inner(x); };
    return 2.0 * hurst * outer.integrate(h, 0.0, t, 1e-12);
}

double richardson_order(double x0, double x1, double x2) { return std::log2((x0 - x1) / (x1 - x2)); }

CMatrix unsplit_block_solve(const FullPencil& p, const CMatrix& noise_active, const RMatrix& noise_passive,
                            const netfbm::TimeGrid& grid, const RMatrix& path_values, const CVector& initial,
                            const CVector& phi0) {
    const auto nf = p.stiffness.rows();
    const auto ns = static_cast<Eigen::Index>(p.state);
    const auto np = nf - ns;
    const CMatrix kss = p.stiffness.topLeftCorner(ns, ns);
    const CMatrix ksp = p.stiffness.topRightCorner(ns, np);
    const CMatrix kps = p.stiffness.bottomLeftCorner(np, ns);
    const CMatrix kpp = p.stiffness.bottomRightCorner(np, np);
    const CMatrix kpp_inv = kpp.inverse();
    const RVector minv = p.mass.head(ns).cwiseInverse();
    const CMatrix g = -(minv.asDiagonal() * (kss - ksp * kpp_inv * kps));

    CMatrix block = CMatrix::Zero(nf, nf);
    block.topLeftCorner(ns, ns) = g;
    block.topRightCorner(ns, np) = minv.asDiagonal() * ksp * kpp_inv;

    CMatrix channels(nf, noise_active.cols());
    channels.topRows(ns) = noise_active;
    channels.bottomRows(np) = noise_passive.cast<Complex>();

    const auto k = static_cast<Eigen::Index>(grid.cells());
    CMatrix out(ns, k + 1);
    CVector z(nf);
    z << initial, phi0;
    out.col(0) = z.head(ns);
    CMatrix step;
    double step_dt = -1.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double dt = grid.step(static_cast<std::size_t>(i));
        if (dt != step_dt) {
            step = (dt * block).exp();
            step_dt = dt;
        }
        const RVector dz = path_values.col(i + 1) - path_values.col(i);
        z = step * (z + channels * dz.cast<Complex>());
        out.col(i + 1) = z.head(ns);
    }
    return out;
}

std::vector<Edge> random_graph(std::mt19937_64& rng, std::size_t vertices, std::size_t extra) {
    std::vector<std::size_t> order(vertices);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Edge> edges;
    for (std::size_t i = 1; i < vertices; ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        const std::size_t other = order[pick(rng)];
        if (rng() % 2) {
            edges.push_back({order[i], other});
        } else {
            edges.push_back({other, order[i]});
        }
    }
    std::uniform_int_distribution<std::size_t> any(0, vertices - 1);
    while (extra > 0 && vertices > 1) {
        const std::size_t a = any(rng);
        const std::size_t b = any(rng);
        if (a != b) {
            edges.push_back({a, b});
            --extra;
        }
    }
    return edges;
}

CMatrix random_psd(std::mt19937_64& rng, std::size_t n, std::size_t rank, bool complex_entries) {
    std::normal_distribution<double> g;
    CMatrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i) = Complex(g(rng), complex_entries ? g(rng) : 0.0);
    }
    return x * x.adjoint();
}

CVector random_vector(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> g;
    CVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = Complex(g(rng), g(rng));
    }
    return v;
}

std::pair<double, double> shape_statistics(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

}  // namespace testing
