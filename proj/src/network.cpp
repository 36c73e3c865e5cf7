#include "netfbm/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "netfbm/error.hpp"

namespace netfbm {

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}

}  // namespace

NetworkGraph build_graph(std::span<const Edge> edges, std::size_t active_count) {
    if (edges.empty()) {
        throw Error(Errc::EmptyGraph, "graph has no edges");
    }
    std::size_t n = 0;
    for (std::size_t j = 0; j < edges.size(); ++j) {
        const auto& e = edges[j];
        if (e.tail == e.head) {
            throw Error(Errc::LoopNotSupported, "edge " + std::to_string(j + 1) + " is a self-loop");
        }
        n = std::max({n, e.tail + 1, e.head + 1});
    }
    if (active_count < 1 || active_count > n) {
        throw Error(Errc::InvalidVertexCount,
                    "active vertex count " + std::to_string(active_count) + " outside [1, " +
                        std::to_string(n) + "]");
    }

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    for (const auto& e : edges) {
        parent[find_root(parent, e.tail)] = find_root(parent, e.head);
    }
    const std::size_t root = find_root(parent, 0);
    for (std::size_t v = 1; v < n; ++v) {
        if (find_root(parent, v) != root) {
            throw Error(Errc::Disconnected, "vertex " + std::to_string(v + 1) + " is not reachable");
        }
    }

    NetworkGraph g;
    g.edges_.assign(edges.begin(), edges.end());
    g.vertex_count_ = n;
    g.active_count_ = active_count;
    const auto m = static_cast<Eigen::Index>(edges.size());
    g.incoming_ = IMatrix::Zero(static_cast<Eigen::Index>(n), m);
    g.outgoing_ = IMatrix::Zero(static_cast<Eigen::Index>(n), m);
    g.gamma_.assign(n, {});
    for (Eigen::Index j = 0; j < m; ++j) {
        const auto& e = edges[static_cast<std::size_t>(j)];
        g.incoming_(static_cast<Eigen::Index>(e.tail), j) = 1;
        g.outgoing_(static_cast<Eigen::Index>(e.head), j) = 1;
        g.gamma_[e.tail].push_back(static_cast<std::size_t>(j));
        g.gamma_[e.head].push_back(static_cast<std::size_t>(j));
    }
    return g;
}

NodeCoupling validate_coupling(CMatrix b, RMatrix c, std::size_t active_count) {
    const auto n = b.rows();
    if (b.cols() != n || c.rows() != n || c.cols() != n || n == 0) {
        throw Error(Errc::ShapeMismatch, "B and C must both be n x n");
    }
    if (active_count < 1 || static_cast<Eigen::Index>(active_count) > n) {
        throw Error(Errc::ShapeMismatch, "active count does not fit the node matrices");
    }
    if (!b.allFinite() || !c.allFinite()) {
        throw Error(Errc::ShapeMismatch, "B and C must be finite");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index h = 0; h < n; ++h) {
            if (c(i, h) < 0.0) {
                throw Error(Errc::NegativeNoiseEntry, "C(" + std::to_string(i + 1) + "," +
                                                          std::to_string(h + 1) + ") is negative");
            }
        }
    }
    if (c.topRows(static_cast<Eigen::Index>(active_count)).maxCoeff() <= 0.0) {
        throw Error(Errc::NoActiveNoise, "no strictly positive entry in the active rows of C");
    }
    NodeCoupling out;
    out.b_ = std::move(b);
    out.c_ = std::move(c);
    out.active_count_ = active_count;
    return out;
}

EdgePotential::EdgePotential(std::vector<std::vector<double>> samples) : samples_(std::move(samples)) {
    for (const auto& s : samples_) {
        if (s.size() < 2) {
            throw Error(Errc::InvalidPotential, "each edge needs at least two potential samples");
        }
        for (double v : s) {
            if (!std::isfinite(v)) {
                throw Error(Errc::InvalidPotential, "potential samples must be finite");
            }
        }
    }
}

EdgePotential EdgePotential::constant(std::size_t edge_count, double value) {
    return EdgePotential(std::vector<std::vector<double>>(edge_count, {value, value}));
}

EdgePotential EdgePotential::per_edge(std::vector<double> values) {
    std::vector<std::vector<double>> s;
    s.reserve(values.size());
    for (double v : values) {
        s.push_back({v, v});
    }
    return EdgePotential(std::move(s));
}

EdgePotential EdgePotential::sampled(std::vector<std::vector<double>> samples) {
    return EdgePotential(std::move(samples));
}

double EdgePotential::operator()(std::size_t edge, double x) const {
    const auto& s = samples_.at(edge);
    const double scaled = std::clamp(x, 0.0, 1.0) * static_cast<double>(s.size() - 1);
    const auto k = std::min(static_cast<std::size_t>(scaled), s.size() - 2);
    const double w = scaled - static_cast<double>(k);
    return (1.0 - w) * s[k] + w * s[k + 1];
}

double EdgePotential::min_value() const {
    double out = samples_.empty() ? 0.0 : samples_.front().front();
    for (const auto& s : samples_) {
        out = std::min(out, *std::min_element(s.begin(), s.end()));
    }
    return out;
}

double EdgePotential::max_abs() const {
    double out = 0.0;
    for (const auto& s : samples_) {
        for (double v : s) {
            out = std::max(out, std::abs(v));
        }
    }
    return out;
}

bool EdgePotential::is_zero() const { return max_abs() == 0.0; }

}  // namespace netfbm
