#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "netfbm/fbm.hpp"
#include "netfbm/linalg.hpp"
#include "netfbm/network.hpp"
#include "netfbm/semigroup.hpp"
#include "netfbm/spatial_operator.hpp"

namespace netfbm {

enum class Formulation {
    Active,  ///< channels = active nodes, driven by C_aa
    Full,    ///< channels = all nodes, C_a on active rows and C_p on passive data
};

[[nodiscard]] std::string_view to_string(Formulation f) noexcept;

/// State-space image of node noise: column h puts c_ih at active vertex i,
/// divided by that vertex's mass. Active: C_aa (n0 channels); Full: C_a (n channels).
[[nodiscard]] CMatrix active_noise_map(const DiscreteGenerator& gen, const NodeCoupling& coupling,
                                       Formulation formulation);

struct Trajectory {
    TimeGrid grid;
    CMatrix states;  ///< dim x (K + 1)
    FbmPath path;
    CMatrix noise;   ///< dim x channels
    CVector initial;
};

/// v(t_{k+1}) = S(dt_k) (v(t_k) + C dZ_k), v(0) = v0; with v0 = 0 this is the
/// left-point sum of the stochastic convolution. Throws GridMismatch.
[[nodiscard]] Trajectory solve(const DiscreteGenerator& gen, const CMatrix& noise, const FbmPath& path,
                               const CVector& initial);
[[nodiscard]] Trajectory convolve(const DiscreteGenerator& gen, const CMatrix& noise, const FbmPath& path);

// ---------------------------------------------------------------------------
// Deterministic second moments

/// One family of modal exponentials: basis * diag(exp(rates * tau)) * coeffs.
struct ExpTerm {
    CVector rates;
    CMatrix coeffs;  ///< rates.size() x channels
};

/// tau -> constant + basis * sum_terms diag(exp(rate tau)) coeffs, a dim x channels map.
struct ModalIntegrand {
    CMatrix basis;     ///< dim x r
    CMatrix constant;  ///< dim x channels (may be all zero)
    std::vector<ExpTerm> terms;

    [[nodiscard]] CMatrix evaluate(double tau) const;
    [[nodiscard]] Eigen::Index channels() const noexcept { return constant.cols(); }
};

/// tau -> S(tau) C.
[[nodiscard]] ModalIntegrand convolution_integrand(const DiscreteGenerator& gen, const CMatrix& noise);

enum class CellRule {
    Average,   ///< exact cell mean of each exponential
    Endpoint,  ///< value at the far end of each tau cell, i.e. at the left time point
};

struct QuadratureOptions {
    double first_cell = 1e-7;       ///< first tau cell
    double growth = 1.08;           ///< geometric ratio of the graded zone
    std::size_t uniform_cells = 200;  ///< cell cap is t / uniform_cells ...
    double max_cell = 0.05;         ///< ... and at most this
    CellRule rule = CellRule::Average;
};

/// Graded grid on [0, t]: geometric from 0, then capped cells.
[[nodiscard]] TimeGrid graded_grid(double t, const QuadratureOptions& opts);

/// E|integral_0^t f(t - s) dZ(s)|^2 in the mass norm, summed over channels,
/// on the given tau grid. Throws HurstTooLow.
[[nodiscard]] double second_moment_on_grid(const ModalIntegrand& f, const RVector& mass, const TimeGrid& tau_grid,
                                           double hurst, Normalization normalization, CellRule rule);

/// Same on graded_grid(t, opts); t = 0 gives 0.
[[nodiscard]] double second_moment(const ModalIntegrand& f, const RVector& mass, double t, double hurst,
                                   Normalization normalization = Normalization::Standard,
                                   const QuadratureOptions& opts = {});

/// E|W(t)|^2 for W(t) = integral of S(t - s) C dZ(s). Throws HurstTooLow.
[[nodiscard]] double variance_quadrature(const DiscreteGenerator& gen, const CMatrix& noise, double t, double hurst,
                                         Normalization normalization = Normalization::Standard,
                                         const QuadratureOptions& opts = {});

/// Exact second moment of the left-point sum at grid time t_k. Valid for H in [1/2, 1).
[[nodiscard]] double discrete_variance(const DiscreteGenerator& gen, const CMatrix& noise, const TimeGrid& grid,
                                       std::size_t k, double hurst,
                                       Normalization normalization = Normalization::Standard);

// ---------------------------------------------------------------------------
// Monte Carlo

/// Worker count: NETFBM_THREADS when set and positive, else hardware concurrency.
[[nodiscard]] std::size_t worker_count();

struct Ensemble {
    std::vector<std::size_t> checkpoints;  ///< grid indices
    std::vector<double> times;
    std::vector<CMatrix> states;           ///< per replicate: dim x checkpoints
};

/// Replicates 0..count-1 of convolve, kept at the checkpoints. Output is
/// independent of the worker count.
[[nodiscard]] Ensemble simulate_ensemble(const DiscreteGenerator& gen, const CMatrix& noise, const FbmSampler& sampler,
                                         std::span<const std::size_t> checkpoints, std::size_t count,
                                         std::size_t workers = 0);

struct MomentEstimate {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> std_error;  ///< sqrt(sample variance / N)
};

/// Per-checkpoint E|W|^2 in the mass norm with compensated sums.
[[nodiscard]] MomentEstimate second_moment_estimate(const Ensemble& ensemble, const RVector& mass);

/// Neumaier-compensated sum.
[[nodiscard]] double compensated_sum(std::span<const double> values);

// ---------------------------------------------------------------------------
// Residuals

struct ResidualReport {
    std::vector<double> times;
    RMatrix values;  ///< rows: test vectors (weak) or one row (strong); cols: grid
    RVector sup;     ///< sup over the grid per row
    double dt = 0.0; ///< largest step
    std::size_t dim = 0;
};

/// |<v(t),y> - <v0,y> - <int_0^t v, G* y> - <C Z(t), y>| per column y of
/// test_vectors, trapezoid rule in time.
[[nodiscard]] ResidualReport weak_residual(const Trajectory& traj, const DiscreteGenerator& gen,
                                           const CMatrix& test_vectors);

/// ||v(t) - v0 - int_0^t G v - C Z(t)|| in the mass norm, trapezoid rule.
[[nodiscard]] ResidualReport strong_residual(const Trajectory& traj, const DiscreteGenerator& gen);

struct RefinementRow {
    double dt = 0.0;
    double strong = 0.0;
    RVector weak;  ///< sup per test vector
};

/// Residuals of solve() on nested grids obtained by subsampling one fine path.
[[nodiscard]] std::vector<RefinementRow> refinement_study(const DiscreteGenerator& gen, const CMatrix& noise,
                                                          const FbmPath& fine_path, const CVector& initial,
                                                          std::span<const std::size_t> strides,
                                                          const CMatrix& test_vectors);

// ---------------------------------------------------------------------------
// Yosida program

struct YosidaRow {
    double n = 0.0;
    double gap = 0.0;            ///< sup_t E|W_n - W|^2
    double generator_gap = 0.0;  ///< sup_t E|A_n W_n - A W|^2
    double phi1 = 0.0;           ///< sup_t E|int A_n (S_n - S) C dZ|^2
    double phi2 = 0.0;           ///< sup_t E|int (A_n - A) S C dZ|^2
};

/// Sup over `times` (all in (0, T]). Throws SpectrumHit, OutOfRange, NonDiagonalizable.
[[nodiscard]] std::vector<YosidaRow> yosida_convergence(const DiscreteGenerator& gen, const CMatrix& noise,
                                                        double hurst, std::span<const double> n_list,
                                                        std::span<const double> times,
                                                        Normalization normalization = Normalization::Standard,
                                                        const QuadratureOptions& opts = {});

// ---------------------------------------------------------------------------
// Regularity

struct RegularityReport {
    double integral = 0.0;          ///< E int_0^T ||W(t)||^2_alpha dt
    std::vector<double> times;
    std::vector<double> profile;    ///< sqrt(E||W(t)||^2_alpha)
    double fitted_constant = 0.0;   ///< max profile / t^{H - alpha}
};

struct RegularityOptions {
    QuadratureOptions quadrature;
    std::size_t panels = 8;  ///< geometric time panels towards 0
};

/// Throws AlphaTooLarge (alpha >= min(1/4, H)), OutOfRange (alpha < 0), NonDiagonalizable.
[[nodiscard]] RegularityReport regularity_profile(const DiscreteGenerator& gen, const CMatrix& noise, double hurst,
                                                  double alpha, double horizon,
                                                  Normalization normalization = Normalization::Standard,
                                                  const RegularityOptions& opts = {});

// ---------------------------------------------------------------------------
// Long-time behaviour

enum class Verdict { InvariantMeasureExists, NoInvariantMeasure, Inconclusive };

[[nodiscard]] std::string_view to_string(Verdict v) noexcept;

struct MomentReport {
    std::vector<double> times;
    std::vector<double> trace;  ///< Tr Q_t
    double exponent = 0.0;      ///< log-log slope over the last decade
    double fit_residual = 0.0;  ///< rms of the fit
    std::size_t fit_points = 0;
    Verdict verdict = Verdict::Inconclusive;
    std::string rule;
};

struct LongTimeInput {
    ModalIntegrand integrand;
    double boundary_weight = 0.0;  ///< ||C_p||_F^2; adds boundary_weight * t^{2H}
    bool passive_noise = false;
};

/// Tr Q_t on `points` log-spaced times in [Tmax/100, Tmax]. Throws HurstTooLow.
[[nodiscard]] MomentReport long_time_report(const DiscreteGenerator& gen, const StabilityClass& cls,
                                            const LongTimeInput& input, double hurst, double horizon,
                                            std::size_t points,
                                            Normalization normalization = Normalization::Standard,
                                            const QuadratureOptions& opts = {});

// ---------------------------------------------------------------------------
// Full system with passive-node noise

struct FullTrajectory {
    TimeGrid grid;
    CMatrix states;    ///< dim x (K + 1)
    CMatrix boundary;  ///< passive x (K + 1)
};

/// Passive block of C as a real matrix (passive x channels).
[[nodiscard]] RMatrix passive_noise_map(const NodeCoupling& coupling);

/// phi0 + C_p Z(t), summed over channels in index order.
[[nodiscard]] CVector passive_data(const RMatrix& cp, const RMatrix& path_values, Eigen::Index k, const CVector& phi0);

/// Throws GridMismatch.
[[nodiscard]] FullTrajectory full_system_solve(const BlockSemigroup& sg, const CMatrix& noise_active,
                                               const RMatrix& noise_passive, const FbmPath& path,
                                               const CVector& initial, const CVector& phi0);

/// tau -> S(tau) C_a + (I - S(tau)) D0 C_p, the state part of the full-system integrand.
[[nodiscard]] ModalIntegrand full_system_integrand(const BlockSemigroup& sg, const CMatrix& noise_active,
                                                   const RMatrix& noise_passive);

}  // namespace netfbm
