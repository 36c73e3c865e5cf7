#include "netfbm/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

#include "netfbm/error.hpp"

namespace netfbm {

namespace {

void require_hurst(double hurst) {
    if (!(hurst > 0.5)) {
        throw Error(Errc::HurstTooLow, "second moments by quadrature need H > 1/2");
    }
    if (!(hurst < 1.0)) {
        throw Error(Errc::InvalidHurst, "H must be below 1");
    }
}

void require_diagonalizable(const DiscreteGenerator& gen) {
    if (!gen.eigen().diagonalizable()) {
        throw Error(Errc::NonDiagonalizable, "modal representation needs a well-conditioned eigenbasis");
    }
}

// (e^z - 1) / z without cancellation near 0.
Complex phi1(Complex z) {
    if (std::abs(z) < 1e-3) {
        return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0)));
    }
    return (std::exp(z) - 1.0) / z;
}

CVector cell_factors(const CVector& rates, double lo, double hi, CellRule rule) {
    CVector out(rates.size());
    const double h = hi - lo;
    for (Eigen::Index i = 0; i < rates.size(); ++i) {
        const Complex r = rates(i);
        out(i) = rule == CellRule::Endpoint ? std::exp(r * hi) : std::exp(r * lo) * phi1(r * h);
    }
    return out;
}

CMatrix modal_coefficients(const DiscreteGenerator& gen, const CMatrix& noise) {
    if (noise.rows() != static_cast<Eigen::Index>(gen.dim())) {
        throw Error(Errc::ShapeMismatch, "noise map rows must match the state dimension");
    }
    return gen.eigen().inverse * noise;
}

double sup_moment(const ModalIntegrand& f, const RVector& mass, std::span<const double> times, double hurst,
                  Normalization normalization, const QuadratureOptions& opts) {
    double out = 0.0;
    for (double t : times) {
        out = std::max(out, second_moment(f, mass, t, hurst, normalization, opts));
    }
    return out;
}

}  // namespace

std::string_view to_string(Formulation f) noexcept { return f == Formulation::Active ? "active" : "full"; }

CMatrix active_noise_map(const DiscreteGenerator& gen, const NodeCoupling& coupling, Formulation formulation) {
    const Mesh* mesh = gen.mesh();
    if (mesh == nullptr) {
        throw Error(Errc::ShapeMismatch, "noise map needs a mesh-based generator");
    }
    const auto n0 = static_cast<Eigen::Index>(coupling.active_count());
    const auto channels = formulation == Formulation::Active ? n0 : static_cast<Eigen::Index>(coupling.node_count());
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(gen.dim()), channels);
    for (Eigen::Index i = 0; i < n0; ++i) {
        const auto dof = static_cast<Eigen::Index>(mesh->vertex_dof(static_cast<std::size_t>(i)));
        for (Eigen::Index h = 0; h < channels; ++h) {
            out(dof, h) = coupling.C()(i, h) / gen.mass()(dof);
        }
    }
    return out;
}

Trajectory solve(const DiscreteGenerator& gen, const CMatrix& noise, const FbmPath& path, const CVector& initial) {
    const auto d = static_cast<Eigen::Index>(gen.dim());
    if (noise.cols() != path.values.rows()) {
        throw Error(Errc::GridMismatch, "noise map and path disagree on the channel count");
    }
    if (noise.rows() != d || initial.size() != d) {
        throw Error(Errc::ShapeMismatch, "noise map or initial state has the wrong length");
    }
    const auto k = static_cast<Eigen::Index>(path.grid.cells());
    Trajectory out{path.grid, CMatrix(d, k + 1), path, noise, initial};
    out.states.col(0) = initial;
    const RMatrix dz = path.increments();
    const auto& eig = gen.eigen();

    if (eig.diagonalizable()) {
        const CMatrix beta = eig.inverse * noise;
        CVector y = eig.inverse * initial;
        CVector factors(d);
        double cached = -1.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double h = path.grid.step(static_cast<std::size_t>(j));
            if (h != cached) {
                for (Eigen::Index i = 0; i < d; ++i) {
                    factors(i) = std::exp(eig.values(i) * h);
                }
                cached = h;
            }
            y = (factors.array() * (y + beta * dz.col(j)).array()).matrix();
            out.states.col(j + 1) = eig.vectors * y;
        }
        return out;
    }

    CMatrix step_op;
    double cached = -1.0;
    CVector v = initial;
    for (Eigen::Index j = 0; j < k; ++j) {
        const double h = path.grid.step(static_cast<std::size_t>(j));
        if (h != cached) {
            step_op = semigroup_matrix(gen, h, ExpMethod::ScalingSquaring);
            cached = h;
        }
        v = step_op * (v + noise * dz.col(j));
        out.states.col(j + 1) = v;
    }
    return out;
}

Trajectory convolve(const DiscreteGenerator& gen, const CMatrix& noise, const FbmPath& path) {
    return solve(gen, noise, path, CVector::Zero(static_cast<Eigen::Index>(gen.dim())));
}

// ---------------------------------------------------------------------------

CMatrix ModalIntegrand::evaluate(double tau) const {
    CMatrix out = constant;
    for (const auto& term : terms) {
        CVector f(term.rates.size());
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            f(i) = std::exp(term.rates(i) * tau);
        }
        out += basis * (f.asDiagonal() * term.coeffs);
    }
    return out;
}

ModalIntegrand convolution_integrand(const DiscreteGenerator& gen, const CMatrix& noise) {
    require_diagonalizable(gen);
    ModalIntegrand f;
    f.basis = gen.eigen().vectors;
    f.constant = CMatrix::Zero(noise.rows(), noise.cols());
    f.terms.push_back({gen.eigen().values, modal_coefficients(gen, noise)});
    return f;
}

TimeGrid graded_grid(double t, const QuadratureOptions& opts) {
    if (!(t > 0.0) || !(opts.growth >= 1.0) || opts.uniform_cells == 0 || !(opts.first_cell > 0.0) ||
        !(opts.max_cell > 0.0)) {
        throw Error(Errc::OutOfRange, "invalid quadrature grid parameters");
    }
    const double hmax = std::min(t / static_cast<double>(opts.uniform_cells), opts.max_cell);
    double h = std::min(opts.first_cell, hmax);
    std::vector<double> times{0.0};
    double tau = 0.0;
    while (true) {
        const double step = std::min(h, hmax);
        if (t - (tau + step) < 0.25 * step) {
            times.push_back(t);
            break;
        }
        tau += step;
        times.push_back(tau);
        h *= opts.growth;
    }
    return TimeGrid::from_times(std::move(times));
}

double second_moment_on_grid(const ModalIntegrand& f, const RVector& mass, const TimeGrid& tau_grid, double hurst,
                             Normalization normalization, CellRule rule) {
    const auto d = f.constant.rows();
    const auto ch = f.channels();
    const auto k = static_cast<Eigen::Index>(tau_grid.cells());
    if (mass.size() != d) {
        throw Error(Errc::ShapeMismatch, "mass does not match the integrand");
    }
    const RVector root = mass.array().sqrt();
    CMatrix z(d * ch, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        const double lo = tau_grid[static_cast<std::size_t>(a)];
        const double hi = tau_grid[static_cast<std::size_t>(a + 1)];
        CMatrix x = f.constant;
        for (const auto& term : f.terms) {
            const CVector factors = cell_factors(term.rates, lo, hi, rule);
            x.noalias() += f.basis * (factors.asDiagonal() * term.coeffs);
        }
        x = root.asDiagonal() * x;
        z.col(a) = Eigen::Map<const CVector>(x.data(), d * ch);
    }
    const RMatrix w = cell_weights(tau_grid, hurst);
    const CMatrix zw = z * w.cast<Complex>();
    const double raw = (z.conjugate().array() * zw.array()).real().sum();
    return normalization_factor(normalization, hurst) * raw;
}

double second_moment(const ModalIntegrand& f, const RVector& mass, double t, double hurst, Normalization normalization,
                     const QuadratureOptions& opts) {
    require_hurst(hurst);
    if (t < 0.0) {
        throw Error(Errc::NegativeTime, "time must be non-negative");
    }
    if (t == 0.0) {
        return 0.0;
    }
    return second_moment_on_grid(f, mass, graded_grid(t, opts), hurst, normalization, opts.rule);
}

double variance_quadrature(const DiscreteGenerator& gen, const CMatrix& noise, double t, double hurst,
                           Normalization normalization, const QuadratureOptions& opts) {
    require_hurst(hurst);
    return second_moment(convolution_integrand(gen, noise), gen.mass(), t, hurst, normalization, opts);
}

double discrete_variance(const DiscreteGenerator& gen, const CMatrix& noise, const TimeGrid& grid, std::size_t k,
                         double hurst, Normalization normalization) {
    if (k > grid.cells()) {
        throw Error(Errc::GridMismatch, "time index outside the grid");
    }
    if (k == 0) {
        return 0.0;
    }
    std::vector<double> tau(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
        tau[i] = grid[k] - grid[k - i];
    }
    return second_moment_on_grid(convolution_integrand(gen, noise), gen.mass(), TimeGrid::from_times(std::move(tau)),
                                 hurst, normalization, CellRule::Endpoint);
}

// ---------------------------------------------------------------------------

std::size_t worker_count() {
    if (const char* env = std::getenv("NETFBM_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

Ensemble simulate_ensemble(const DiscreteGenerator& gen, const CMatrix& noise, const FbmSampler& sampler,
                           std::span<const std::size_t> checkpoints, std::size_t count, std::size_t workers) {
    Ensemble out;
    out.checkpoints.assign(checkpoints.begin(), checkpoints.end());
    for (auto c : checkpoints) {
        if (c > sampler.grid().cells()) {
            throw Error(Errc::GridMismatch, "checkpoint outside the grid");
        }
        out.times.push_back(sampler.grid()[c]);
    }
    out.states.resize(count);
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(workers == 0 ? worker_count() : workers, count));
    std::vector<std::exception_ptr> failures(n_workers);
    auto task = [&](std::size_t w) {
        try {
            for (std::size_t r = w; r < count; r += n_workers) {
                const Trajectory traj = convolve(gen, noise, sampler.sample(r));
                CMatrix kept(traj.states.rows(), static_cast<Eigen::Index>(checkpoints.size()));
                for (std::size_t c = 0; c < checkpoints.size(); ++c) {
                    kept.col(static_cast<Eigen::Index>(c)) = traj.states.col(static_cast<Eigen::Index>(checkpoints[c]));
                }
                out.states[r] = std::move(kept);
            }
        } catch (...) {
            failures[w] = std::current_exception();
        }
    };
    if (n_workers == 1) {
        task(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            pool.emplace_back(task, w);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (const auto& f : failures) {
        if (f) {
            std::rethrow_exception(f);
        }
    }
    return out;
}

double compensated_sum(std::span<const double> values) {
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

MomentEstimate second_moment_estimate(const Ensemble& ensemble, const RVector& mass) {
    MomentEstimate out;
    out.times = ensemble.times;
    const std::size_t n = ensemble.states.size();
    if (n < 2) {
        throw Error(Errc::OutOfRange, "need at least two replicates");
    }
    std::vector<double> x(n);
    for (std::size_t c = 0; c < ensemble.checkpoints.size(); ++c) {
        for (std::size_t r = 0; r < n; ++r) {
            const double nrm = mass_norm(ensemble.states[r].col(static_cast<Eigen::Index>(c)), mass);
            x[r] = nrm * nrm;
        }
        const double mean = compensated_sum(x) / static_cast<double>(n);
        std::vector<double> dev(n);
        for (std::size_t r = 0; r < n; ++r) {
            dev[r] = (x[r] - mean) * (x[r] - mean);
        }
        const double var = compensated_sum(dev) / static_cast<double>(n - 1);
        out.mean.push_back(mean);
        out.std_error.push_back(std::sqrt(var / static_cast<double>(n)));
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// Running trapezoid integral of the trajectory, one column per grid point.
CMatrix cumulative_integral(const Trajectory& traj) {
    const auto cols = traj.states.cols();
    CMatrix out = CMatrix::Zero(traj.states.rows(), cols);
    for (Eigen::Index k = 1; k < cols; ++k) {
        const double h = traj.grid.step(static_cast<std::size_t>(k - 1));
        out.col(k) = out.col(k - 1) + 0.5 * h * (traj.states.col(k - 1) + traj.states.col(k));
    }
    return out;
}

double max_step(const TimeGrid& grid) {
    double h = 0.0;
    for (std::size_t k = 0; k < grid.cells(); ++k) {
        h = std::max(h, grid.step(k));
    }
    return h;
}

}  // namespace

ResidualReport weak_residual(const Trajectory& traj, const DiscreteGenerator& gen, const CMatrix& test_vectors) {
    const RVector& m = gen.mass();
    const CMatrix adjoint = m.cwiseInverse().asDiagonal() * gen.op().adjoint() * m.asDiagonal();
    const CMatrix ay = adjoint * test_vectors;
    const CMatrix integral = cumulative_integral(traj);
    const auto cols = traj.states.cols();
    ResidualReport out;
    out.times = traj.grid.times();
    out.values = RMatrix::Zero(test_vectors.cols(), cols);
    out.dt = max_step(traj.grid);
    out.dim = gen.dim();
    const CVector v0 = traj.states.col(0);
    for (Eigen::Index k = 0; k < cols; ++k) {
        const CVector cz = traj.noise * traj.path.values.col(k).cast<Complex>();
        for (Eigen::Index i = 0; i < test_vectors.cols(); ++i) {
            const CVector y = test_vectors.col(i);
            const Complex r = mass_inner(traj.states.col(k), y, m) - mass_inner(v0, y, m) -
                              mass_inner(integral.col(k), ay.col(i), m) - mass_inner(cz, y, m);
            out.values(i, k) = std::abs(r);
        }
    }
    out.sup = out.values.rowwise().maxCoeff();
    return out;
}

ResidualReport strong_residual(const Trajectory& traj, const DiscreteGenerator& gen) {
    const CMatrix integral = cumulative_integral(traj);
    const auto cols = traj.states.cols();
    ResidualReport out;
    out.times = traj.grid.times();
    out.values = RMatrix::Zero(1, cols);
    out.dt = max_step(traj.grid);
    out.dim = gen.dim();
    const CVector v0 = traj.states.col(0);
    for (Eigen::Index k = 0; k < cols; ++k) {
        const CVector cz = traj.noise * traj.path.values.col(k).cast<Complex>();
        const CVector e = traj.states.col(k) - v0 - gen.op() * integral.col(k) - cz;
        out.values(0, k) = mass_norm(e, gen.mass());
    }
    out.sup = out.values.rowwise().maxCoeff();
    return out;
}

std::vector<RefinementRow> refinement_study(const DiscreteGenerator& gen, const CMatrix& noise,
                                            const FbmPath& fine_path, const CVector& initial,
                                            std::span<const std::size_t> strides, const CMatrix& test_vectors) {
    std::vector<RefinementRow> rows;
    for (auto stride : strides) {
        const Trajectory traj = solve(gen, noise, fine_path.coarsen(stride), initial);
        RefinementRow row;
        row.dt = max_step(traj.grid);
        row.strong = strong_residual(traj, gen).sup(0);
        row.weak = test_vectors.cols() > 0 ? RVector(weak_residual(traj, gen, test_vectors).sup) : RVector();
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------

std::vector<YosidaRow> yosida_convergence(const DiscreteGenerator& gen, const CMatrix& noise, double hurst,
                                          std::span<const double> n_list, std::span<const double> times,
                                          Normalization normalization, const QuadratureOptions& opts) {
    require_hurst(hurst);
    require_diagonalizable(gen);
    const auto& eig = gen.eigen();
    const CMatrix beta = modal_coefficients(gen, noise);
    const CVector& lam = eig.values;
    const CMatrix zero = CMatrix::Zero(noise.rows(), noise.cols());
    std::vector<YosidaRow> rows;
    for (double n : n_list) {
        if (!(n > eig.spectral_bound())) {
            throw Error(Errc::OutOfRange, "Yosida index must exceed the spectral bound");
        }
        (void)resolvent(gen, Complex(n, 0.0));
        CVector lam_n(lam.size());
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            lam_n(i) = n * lam(i) / (n - lam(i));
        }
        auto integrand = [&](std::vector<ExpTerm> terms) {
            return ModalIntegrand{eig.vectors, zero, std::move(terms)};
        };
        const CMatrix lam_beta = lam.asDiagonal() * beta;
        const CMatrix lam_n_beta = lam_n.asDiagonal() * beta;
        const CVector diff = lam_n - lam;
        YosidaRow row;
        row.n = n;
        row.gap = sup_moment(integrand({{lam_n, beta}, {lam, -beta}}), gen.mass(), times, hurst, normalization, opts);
        row.generator_gap = sup_moment(integrand({{lam_n, lam_n_beta}, {lam, -lam_beta}}), gen.mass(), times, hurst,
                                       normalization, opts);
        row.phi1 = sup_moment(integrand({{lam_n, lam_n_beta}, {lam, -lam_n_beta}}), gen.mass(), times, hurst,
                              normalization, opts);
        row.phi2 = sup_moment(integrand({{lam, CMatrix(diff.asDiagonal() * beta)}}), gen.mass(), times, hurst,
                              normalization, opts);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------

RegularityReport regularity_profile(const DiscreteGenerator& gen, const CMatrix& noise, double hurst, double alpha,
                                    double horizon, Normalization normalization, const RegularityOptions& opts) {
    require_hurst(hurst);
    if (!(alpha >= 0.0)) {
        throw Error(Errc::OutOfRange, "alpha must be non-negative");
    }
    if (alpha >= std::min(0.25, hurst)) {
        throw Error(Errc::AlphaTooLarge, "alpha must stay below min(1/4, H)");
    }
    if (!(horizon > 0.0)) {
        throw Error(Errc::OutOfRange, "horizon must be positive");
    }
    require_diagonalizable(gen);
    const auto& eig = gen.eigen();
    CVector weights(eig.values.size());
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        const Complex base = gen.spectral_shift() - eig.values(i);
        weights(i) = eig.self_adjoint ? Complex(std::pow(std::max(base.real(), 0.0), alpha), 0.0)
                                      : std::pow(base, alpha);
    }
    const ModalIntegrand f{eig.vectors, CMatrix::Zero(noise.rows(), noise.cols()),
                           {{eig.values, CMatrix(weights.asDiagonal() * modal_coefficients(gen, noise))}}};

    RegularityReport out;
    std::vector<std::pair<double, double>> samples;
    auto g = [&](double t) {
        const double v = second_moment(f, gen.mass(), t, hurst, normalization, opts.quadrature);
        samples.emplace_back(t, v);
        return v;
    };
    using Rule = boost::math::quadrature::gauss<double, 10>;
    double lo = 0.0;
    double hi = horizon * std::ldexp(1.0, -static_cast<int>(opts.panels));
    double total = Rule::integrate(g, lo, hi);
    for (std::size_t p = 0; p < opts.panels; ++p) {
        lo = hi;
        hi *= 2.0;
        total += Rule::integrate(g, lo, hi);
    }
    out.integral = total;
    std::sort(samples.begin(), samples.end());
    for (const auto& [t, v] : samples) {
        out.times.push_back(t);
        out.profile.push_back(std::sqrt(std::max(v, 0.0)));
        out.fitted_constant = std::max(out.fitted_constant, out.profile.back() / std::pow(t, hurst - alpha));
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::InvariantMeasureExists: return "InvariantMeasureExists";
        case Verdict::NoInvariantMeasure: return "NoInvariantMeasure";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "Inconclusive";
}

MomentReport long_time_report(const DiscreteGenerator& gen, const StabilityClass& cls, const LongTimeInput& input,
                              double hurst, double horizon, std::size_t points, Normalization normalization,
                              const QuadratureOptions& opts) {
    require_hurst(hurst);
    if (!(horizon > 0.0) || points < 19) {
        throw Error(Errc::OutOfRange, "need a positive horizon and at least 19 log-spaced points");
    }
    MomentReport out;
    const double factor = normalization_factor(normalization, hurst);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = horizon * std::pow(10.0, -2.0 + 2.0 * static_cast<double>(i) / static_cast<double>(points - 1));
        out.times.push_back(t);
        double tr = second_moment(input.integrand, gen.mass(), t, hurst, normalization, opts);
        tr += input.boundary_weight * factor * std::pow(t, 2.0 * hurst);
        out.trace.push_back(tr);
    }

    std::vector<double> xs;
    std::vector<double> ys;
    bool positive = true;
    for (std::size_t i = 0; i < points; ++i) {
        if (out.times[i] >= horizon / 10.0 * (1.0 - 1e-12)) {
            positive = positive && out.trace[i] > 0.0;
            xs.push_back(std::log(out.times[i]));
            ys.push_back(positive ? std::log(out.trace[i]) : 0.0);
        }
    }
    out.fit_points = xs.size();
    if (positive) {
        const double n = static_cast<double>(xs.size());
        double mx = 0.0;
        double my = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            mx += xs[i];
            my += ys[i];
        }
        mx /= n;
        my /= n;
        double sxx = 0.0;
        double sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        out.exponent = sxy / sxx;
        double rss = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = ys[i] - (my + out.exponent * (xs[i] - mx));
            rss += r * r;
        }
        out.fit_residual = std::sqrt(rss / n);
    }

    if (input.passive_noise) {
        out.verdict = Verdict::NoInvariantMeasure;
        out.rule = "passive-noise";
    } else if (positive && cls.kind == StabilityKind::UniformlyExponentiallyStable && out.exponent <= 0.05) {
        out.verdict = Verdict::InvariantMeasureExists;
        out.rule = "dissipative";
    } else if (positive && cls.potential_zero && cls.coupling_zero &&
               std::abs(out.exponent - 2.0 * hurst) <= 0.15) {
        out.verdict = Verdict::NoInvariantMeasure;
        out.rule = "no-dissipation";
    } else {
        out.verdict = Verdict::Inconclusive;
        out.rule = "none";
    }
    return out;
}

// ---------------------------------------------------------------------------

RMatrix passive_noise_map(const NodeCoupling& coupling) { return coupling.C_passive(); }

CVector passive_data(const RMatrix& cp, const RMatrix& path_values, Eigen::Index k, const CVector& phi0) {
    CVector out(cp.rows());
    for (Eigen::Index i = 0; i < cp.rows(); ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < cp.cols(); ++j) {
            acc += cp(i, j) * path_values(j, k);
        }
        out(i) = phi0(i) + acc;
    }
    return out;
}

FullTrajectory full_system_solve(const BlockSemigroup& sg, const CMatrix& noise_active, const RMatrix& noise_passive,
                                 const FbmPath& path, const CVector& initial, const CVector& phi0) {
    const auto channels = path.values.rows();
    const auto p = static_cast<Eigen::Index>(sg.boundary_dim());
    if (noise_active.cols() != channels || noise_passive.cols() != channels) {
        throw Error(Errc::GridMismatch, "noise maps and path disagree on the channel count");
    }
    if (noise_passive.rows() != p || phi0.size() != p) {
        throw Error(Errc::ShapeMismatch, "passive noise or data has the wrong length");
    }
    const CMatrix& d0 = sg.dirichlet();
    const CMatrix lifted_noise = noise_active - d0 * noise_passive.cast<Complex>();
    const Trajectory base = solve(sg.generator(), lifted_noise, path, initial - d0 * phi0);
    FullTrajectory out{path.grid, base.states, CMatrix(p, base.states.cols())};
    for (Eigen::Index k = 0; k < base.states.cols(); ++k) {
        const CVector data = passive_data(noise_passive, path.values, k, phi0);
        out.boundary.col(k) = data;
        out.states.col(k) += d0 * data;
    }
    return out;
}

ModalIntegrand full_system_integrand(const BlockSemigroup& sg, const CMatrix& noise_active,
                                     const RMatrix& noise_passive) {
    const auto& gen = sg.generator();
    require_diagonalizable(gen);
    const CMatrix constant = sg.dirichlet() * noise_passive.cast<Complex>();
    ModalIntegrand f;
    f.basis = gen.eigen().vectors;
    f.constant = constant;
    f.terms.push_back({gen.eigen().values, modal_coefficients(gen, noise_active - constant)});
    return f;
}

}  // namespace netfbm
