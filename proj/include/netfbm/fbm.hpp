#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "netfbm/linalg.hpp"

namespace netfbm {

enum class Normalization {
    Standard,        ///< Var B(1) = 1
    PaperPrefactor,  ///< covariance carries 1/(2H) instead of 1/2
};

[[nodiscard]] std::string_view to_string(Normalization n) noexcept;

/// Ratio of the covariance under `n` to the Standard one.
[[nodiscard]] double normalization_factor(Normalization n, double hurst);

struct FbmSpec {
    double hurst = 0.75;
    std::size_t channels = 1;
    Normalization normalization = Normalization::Standard;
    std::uint64_t seed = 0;
};

/// Throws InvalidHurst (H outside [1/2, 1)) or ShapeMismatch (no channels).
void validate(const FbmSpec& spec);

/// E[B(t) B(s)]. Throws InvalidHurst, NegativeTime.
[[nodiscard]] double covariance(const FbmSpec& spec, double t, double s);

/// Strictly increasing times starting at 0.
class TimeGrid {
public:
    /// K equal cells on [0, T].
    [[nodiscard]] static TimeGrid uniform(double horizon, std::size_t cells);
    /// Throws OutOfRange unless the times start at 0 and strictly increase.
    [[nodiscard]] static TimeGrid from_times(std::vector<double> times);

    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] std::size_t cells() const noexcept { return times_.size() - 1; }
    [[nodiscard]] double operator[](std::size_t k) const { return times_[k]; }
    [[nodiscard]] double step(std::size_t k) const { return times_[k + 1] - times_[k]; }
    [[nodiscard]] double horizon() const noexcept { return times_.back(); }
    [[nodiscard]] bool is_uniform() const noexcept;

    /// Every `stride`-th point; requires cells() divisible by stride.
    [[nodiscard]] TimeGrid coarsen(std::size_t stride) const;

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {}
    std::vector<double> times_;
};

struct FbmPath {
    TimeGrid grid;
    RMatrix values;  ///< channels x (K + 1), first column zero
    FbmSpec spec;
    std::uint64_t replicate = 0;

    /// channels x K increments Z(t_{k+1}) - Z(t_k).
    [[nodiscard]] RMatrix increments() const;
    /// Values at every `stride`-th grid point.
    [[nodiscard]] FbmPath coarsen(std::size_t stride) const;
};

enum class SampleMethod { Cholesky, CirculantEmbedding };

/// Engine for (seed, replicate, channel); distinct triples give independent streams.
[[nodiscard]] std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t channel);

/// Exact Gaussian sampler on a fixed grid. The factorization is computed
/// once; sample() is const and safe to call concurrently.
class FbmSampler {
public:
    /// Throws InvalidHurst, NonUniformGrid (circulant on a non-uniform grid),
    /// EmbeddingNotPSD.
    FbmSampler(FbmSpec spec, TimeGrid grid, SampleMethod method);

    [[nodiscard]] FbmPath sample(std::uint64_t replicate) const;
    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const FbmSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] SampleMethod method() const noexcept { return method_; }

private:
    [[nodiscard]] RVector sample_channel(std::mt19937_64& rng) const;

    FbmSpec spec_;
    TimeGrid grid_;
    SampleMethod method_;
    RMatrix chol_;           ///< lower factor of Cov(B(t_1..t_K))
    CVector circulant_sqrt_; ///< sqrt(eigenvalue / size) of the embedding
};

/// w_ab = E[dB_a dB_b] for Standard fBm, which also equals
/// H(2H-1) * integral over cells a x b of |s - r|^{2H-2}. Valid for H in [1/2, 1).
[[nodiscard]] RMatrix cell_weights(const TimeGrid& grid, double hurst);

/// Piecewise-constant, vector-valued function on the cells of a grid.
class RkhsGridFunction {
public:
    /// values: dim x cells. Throws GridMismatch.
    RkhsGridFunction(TimeGrid grid, CMatrix values);
    /// Scalar step function.
    [[nodiscard]] static RkhsGridFunction scalar(TimeGrid grid, const RVector& values);

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] const CMatrix& values() const noexcept { return values_; }

private:
    TimeGrid grid_;
    CMatrix values_;
};

/// alpha_H double integral of <phi(s), psi(r)> |s - r|^{2H-2}.
/// Throws HurstTooLow, GridMismatch.
[[nodiscard]] Complex rkhs_inner(const RkhsGridFunction& phi, const RkhsGridFunction& psi, double hurst);
[[nodiscard]] double rkhs_norm(const RkhsGridFunction& phi, double hurst);
/// Same double integral with |phi(s)| |phi(r)| in place of the inner product.
[[nodiscard]] double rkhs_majorant(const RkhsGridFunction& phi, double hurst);

/// E|integral of phi dB|^2 under the given normalization. Throws HurstTooLow.
[[nodiscard]] double integral_second_moment(const RkhsGridFunction& phi, double hurst,
                                            Normalization normalization = Normalization::Standard);

/// Left-point Riemann-Stieltjes sum of a scalar step function against one channel.
[[nodiscard]] double pathwise_integral(const RVector& cell_values, const FbmPath& path, std::size_t channel);

}  // namespace netfbm
