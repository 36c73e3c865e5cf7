#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "netfbm/linalg.hpp"

namespace netfbm {

/// An edge parametrized as [0,1], from `tail` (x = 0) to `head` (x = 1).
/// Vertex labels are zero-based.
struct Edge {
    std::size_t tail = 0;
    std::size_t head = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Connected combinatorial graph with its incidence structure. The first
/// `n0` vertices carry dynamic node conditions (active), the remaining
/// ones algebraic Kirchhoff conditions (passive).
class NetworkGraph {
public:
    [[nodiscard]] std::size_t edge_count() const noexcept { return edges_.size(); }
    [[nodiscard]] std::size_t vertex_count() const noexcept { return vertex_count_; }
    [[nodiscard]] std::size_t active_count() const noexcept { return active_count_; }
    [[nodiscard]] std::size_t passive_count() const noexcept { return vertex_count_ - active_count_; }
    [[nodiscard]] bool is_active(std::size_t vertex) const noexcept { return vertex < active_count_; }

    [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }

    /// n x m, entry 1 where the edge starts (x = 0) at the vertex.
    [[nodiscard]] const IMatrix& incoming() const noexcept { return incoming_; }
    /// n x m, entry 1 where the edge ends (x = 1) at the vertex.
    [[nodiscard]] const IMatrix& outgoing() const noexcept { return outgoing_; }
    /// incoming() - outgoing().
    [[nodiscard]] IMatrix incidence() const { return incoming_ - outgoing_; }

    /// Sorted indices of the edges incident to `vertex`.
    [[nodiscard]] const std::vector<std::size_t>& incident_edges(std::size_t vertex) const {
        return gamma_.at(vertex);
    }

    friend NetworkGraph build_graph(std::span<const Edge> edges, std::size_t active_count);

private:
    NetworkGraph() = default;

    std::vector<Edge> edges_;
    std::size_t vertex_count_ = 0;
    std::size_t active_count_ = 0;
    IMatrix incoming_;
    IMatrix outgoing_;
    std::vector<std::vector<std::size_t>> gamma_;
};

/// Validates the edge list and builds the incidence structure. The vertex
/// count is one plus the largest label; every label below it must be used.
///
/// Throws Error with EmptyGraph, LoopNotSupported, Disconnected or
/// InvalidVertexCount (active_count outside [1, n]).
[[nodiscard]] NetworkGraph build_graph(std::span<const Edge> edges, std::size_t active_count);

/// Node matrices: B couples node values into the node laws, C scales the
/// noise channels. Both are n x n; row blocks split active/passive nodes.
class NodeCoupling {
public:
    [[nodiscard]] const CMatrix& B() const noexcept { return b_; }
    [[nodiscard]] const RMatrix& C() const noexcept { return c_; }
    [[nodiscard]] std::size_t active_count() const noexcept { return active_count_; }
    [[nodiscard]] std::size_t node_count() const noexcept { return static_cast<std::size_t>(b_.rows()); }

    [[nodiscard]] auto B_active() const { return b_.topRows(static_cast<Eigen::Index>(active_count_)); }
    [[nodiscard]] auto B_passive() const {
        return b_.bottomRows(static_cast<Eigen::Index>(node_count() - active_count_));
    }
    [[nodiscard]] auto C_active() const { return c_.topRows(static_cast<Eigen::Index>(active_count_)); }
    [[nodiscard]] auto C_passive() const {
        return c_.bottomRows(static_cast<Eigen::Index>(node_count() - active_count_));
    }
    /// Top-left n0 x n0 block of C.
    [[nodiscard]] auto C_active_active() const {
        const auto k = static_cast<Eigen::Index>(active_count_);
        return c_.topLeftCorner(k, k);
    }

    [[nodiscard]] bool has_passive_noise() const { return C_passive().size() > 0 && C_passive().maxCoeff() > 0.0; }

    friend NodeCoupling validate_coupling(CMatrix b, RMatrix c, std::size_t active_count);

private:
    NodeCoupling() = default;

    CMatrix b_;
    RMatrix c_;
    std::size_t active_count_ = 0;
};

/// Throws Error with ShapeMismatch, NegativeNoiseEntry or NoActiveNoise.
[[nodiscard]] NodeCoupling validate_coupling(CMatrix b, RMatrix c, std::size_t active_count);

/// Zero-order coefficient p_j(x) of the cable equation, sampled on a
/// uniform grid of each edge and interpolated piecewise linearly.
class EdgePotential {
public:
    /// Same constant on every edge.
    [[nodiscard]] static EdgePotential constant(std::size_t edge_count, double value);
    /// One constant per edge.
    [[nodiscard]] static EdgePotential per_edge(std::vector<double> values);
    /// samples[j] holds values at x = k / (samples[j].size() - 1); at least two per edge.
    [[nodiscard]] static EdgePotential sampled(std::vector<std::vector<double>> samples);

    [[nodiscard]] std::size_t edge_count() const noexcept { return samples_.size(); }
    [[nodiscard]] double operator()(std::size_t edge, double x) const;
    [[nodiscard]] const std::vector<double>& samples(std::size_t edge) const { return samples_.at(edge); }

    [[nodiscard]] double min_value() const;
    [[nodiscard]] double max_abs() const;
    /// True when all samples are exactly zero.
    [[nodiscard]] bool is_zero() const;

private:
    explicit EdgePotential(std::vector<std::vector<double>> samples);

    std::vector<std::vector<double>> samples_;
};

}  // namespace netfbm
