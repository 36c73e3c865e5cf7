#include "netfbm/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/FFT>

#include "netfbm/error.hpp"

namespace netfbm {

namespace {

// (y + h)^{2H} - y^{2H} without cancellation for h << y.
double power_step(double y, double h, double two_h) {
    if (y <= 0.0) {
        return std::pow(h, two_h);
    }
    return std::pow(y, two_h) * std::expm1(two_h * std::log1p(h / y));
}

void require_rkhs_hurst(double hurst) {
    if (!(hurst > 0.5)) {
        throw Error(Errc::HurstTooLow, "kernel |s-r|^{2H-2} needs H > 1/2");
    }
    if (!(hurst < 1.0)) {
        throw Error(Errc::InvalidHurst, "H must be below 1");
    }
}

}  // namespace

std::string_view to_string(Normalization n) noexcept {
    return n == Normalization::Standard ? "Standard" : "PaperPrefactor";
}

double normalization_factor(Normalization n, double hurst) {
    return n == Normalization::Standard ? 1.0 : 1.0 / hurst;
}

void validate(const FbmSpec& spec) {
    if (!(spec.hurst >= 0.5 && spec.hurst < 1.0)) {
        throw Error(Errc::InvalidHurst, "H = " + std::to_string(spec.hurst) + " outside [1/2, 1)");
    }
    if (spec.channels == 0) {
        throw Error(Errc::ShapeMismatch, "at least one channel required");
    }
}

double covariance(const FbmSpec& spec, double t, double s) {
    validate(spec);
    if (t < 0.0 || s < 0.0) {
        throw Error(Errc::NegativeTime, "covariance needs t, s >= 0");
    }
    const double two_h = 2.0 * spec.hurst;
    const double base = 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
    return normalization_factor(spec.normalization, spec.hurst) * base;
}

// ---------------------------------------------------------------------------

TimeGrid TimeGrid::uniform(double horizon, std::size_t cells) {
    if (!(horizon > 0.0) || cells == 0) {
        throw Error(Errc::OutOfRange, "uniform grid needs T > 0 and at least one cell");
    }
    std::vector<double> t(cells + 1);
    for (std::size_t k = 0; k <= cells; ++k) {
        t[k] = horizon * static_cast<double>(k) / static_cast<double>(cells);
    }
    t.back() = horizon;
    return TimeGrid(std::move(t));
}

TimeGrid TimeGrid::from_times(std::vector<double> times) {
    if (times.size() < 2 || times.front() != 0.0) {
        throw Error(Errc::OutOfRange, "grid must start at 0 and have at least one cell");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1]) || !std::isfinite(times[k])) {
            throw Error(Errc::OutOfRange, "grid times must strictly increase");
        }
    }
    return TimeGrid(std::move(times));
}

bool TimeGrid::is_uniform() const noexcept {
    const double h = horizon() / static_cast<double>(cells());
    for (std::size_t k = 0; k < cells(); ++k) {
        if (std::abs(step(k) - h) > 1e-9 * h) {
            return false;
        }
    }
    return true;
}

TimeGrid TimeGrid::coarsen(std::size_t stride) const {
    if (stride == 0 || cells() % stride != 0) {
        throw Error(Errc::GridMismatch, "stride must divide the cell count");
    }
    std::vector<double> t;
    t.reserve(cells() / stride + 1);
    for (std::size_t k = 0; k < times_.size(); k += stride) {
        t.push_back(times_[k]);
    }
    return TimeGrid(std::move(t));
}

RMatrix FbmPath::increments() const {
    const auto k = values.cols() - 1;
    return values.rightCols(k) - values.leftCols(k);
}

FbmPath FbmPath::coarsen(std::size_t stride) const {
    FbmPath out{grid.coarsen(stride), RMatrix(), spec, replicate};
    const auto cols = static_cast<Eigen::Index>(out.grid.times().size());
    out.values.resize(values.rows(), cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        out.values.col(j) = values.col(j * static_cast<Eigen::Index>(stride));
    }
    return out;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t channel) {
    auto lo = [](std::uint64_t x) { return static_cast<std::uint32_t>(x & 0xffffffffU); };
    auto hi = [](std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32U); };
    std::seed_seq seq{lo(seed), hi(seed), lo(replicate), hi(replicate), lo(channel), hi(channel)};
    return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------

FbmSampler::FbmSampler(FbmSpec spec, TimeGrid grid, SampleMethod method)
    : spec_(spec), grid_(std::move(grid)), method_(method) {
    validate(spec_);
    const auto k = static_cast<Eigen::Index>(grid_.cells());
    const double scale = normalization_factor(spec_.normalization, spec_.hurst);
    const double two_h = 2.0 * spec_.hurst;

    if (method_ == SampleMethod::Cholesky) {
        RMatrix cov(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                cov(i, j) = covariance(spec_, grid_[static_cast<std::size_t>(i + 1)], grid_[static_cast<std::size_t>(j + 1)]);
                cov(j, i) = cov(i, j);
            }
        }
        Eigen::LLT<RMatrix> llt(cov);
        if (llt.info() != Eigen::Success) {
            throw Error(Errc::EigensolverFailure, "covariance matrix is not numerically positive definite");
        }
        chol_ = llt.matrixL();
        return;
    }

    if (!grid_.is_uniform()) {
        throw Error(Errc::NonUniformGrid, "circulant embedding needs a uniform grid");
    }
    const double h = grid_.horizon() / static_cast<double>(k);
    auto gamma = [&](Eigen::Index lag) {
        const double l = static_cast<double>(lag);
        return 0.5 * scale * std::pow(h, two_h) *
               (std::pow(l + 1.0, two_h) - 2.0 * std::pow(l, two_h) + std::pow(std::abs(l - 1.0), two_h));
    };
    const Eigen::Index m = 2 * k;
    CVector row(m);
    for (Eigen::Index j = 0; j <= k; ++j) {
        row(j) = gamma(j);
    }
    for (Eigen::Index j = k + 1; j < m; ++j) {
        row(j) = gamma(m - j);
    }
    Eigen::FFT<double> fft;
    CVector eig(m);
    fft.fwd(eig, row);
    const double top = eig.real().maxCoeff();
    circulant_sqrt_.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double lam = eig(j).real();
        if (lam < -1e-12 * std::max(1.0, top)) {
            throw Error(Errc::EmbeddingNotPSD, "negative circulant eigenvalue; use Cholesky");
        }
        circulant_sqrt_(j) = std::sqrt(std::max(lam, 0.0) / static_cast<double>(m));
    }
}

RVector FbmSampler::sample_channel(std::mt19937_64& rng) const {
    std::normal_distribution<double> normal;
    const auto k = static_cast<Eigen::Index>(grid_.cells());
    RVector values(k + 1);
    values(0) = 0.0;
    if (method_ == SampleMethod::Cholesky) {
        RVector z(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            z(i) = normal(rng);
        }
        values.tail(k) = chol_.triangularView<Eigen::Lower>() * z;
        return values;
    }
    const Eigen::Index m = circulant_sqrt_.size();
    CVector w(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double re = normal(rng);
        const double im = normal(rng);
        w(j) = circulant_sqrt_(j) * Complex(re, im);
    }
    Eigen::FFT<double> fft;
    CVector y(m);
    fft.fwd(y, w);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        acc += y(i).real();
        values(i + 1) = acc;
    }
    return values;
}

FbmPath FbmSampler::sample(std::uint64_t replicate) const {
    const auto channels = static_cast<Eigen::Index>(spec_.channels);
    FbmPath path{grid_, RMatrix(channels, static_cast<Eigen::Index>(grid_.cells() + 1)), spec_, replicate};
    for (Eigen::Index c = 0; c < channels; ++c) {
        auto rng = make_stream(spec_.seed, replicate, static_cast<std::uint64_t>(c));
        path.values.row(c) = sample_channel(rng).transpose();
    }
    return path;
}

// ---------------------------------------------------------------------------

RMatrix cell_weights(const TimeGrid& grid, double hurst) {
    if (!(hurst >= 0.5 && hurst < 1.0)) {
        throw Error(Errc::InvalidHurst, "H outside [1/2, 1)");
    }
    const double two_h = 2.0 * hurst;
    const auto k = static_cast<Eigen::Index>(grid.cells());
    RMatrix w(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        const double ha = grid.step(static_cast<std::size_t>(a));
        w(a, a) = std::pow(ha, two_h);
        for (Eigen::Index b = 0; b < a; ++b) {
            const double hb = grid.step(static_cast<std::size_t>(b));
            const double gap = grid[static_cast<std::size_t>(a)] - grid[static_cast<std::size_t>(b + 1)];
            const double v = 0.5 * (power_step(gap + hb, ha, two_h) - power_step(gap, ha, two_h));
            w(a, b) = v;
            w(b, a) = v;
        }
    }
    return w;
}

RkhsGridFunction::RkhsGridFunction(TimeGrid grid, CMatrix values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.cols() != static_cast<Eigen::Index>(grid_.cells())) {
        throw Error(Errc::GridMismatch, "one value column per cell required");
    }
}

RkhsGridFunction RkhsGridFunction::scalar(TimeGrid grid, const RVector& values) {
    return RkhsGridFunction(std::move(grid), CMatrix(values.transpose().cast<Complex>()));
}

Complex rkhs_inner(const RkhsGridFunction& phi, const RkhsGridFunction& psi, double hurst) {
    require_rkhs_hurst(hurst);
    if (!(phi.grid() == psi.grid()) || phi.values().rows() != psi.values().rows()) {
        throw Error(Errc::GridMismatch, "functions live on different grids");
    }
    const RMatrix w = cell_weights(phi.grid(), hurst);
    const CMatrix smoothed = phi.values() * w.cast<Complex>();
    return (psi.values().conjugate().array() * smoothed.array()).sum();
}

double rkhs_norm(const RkhsGridFunction& phi, double hurst) {
    return std::sqrt(std::max(0.0, rkhs_inner(phi, phi, hurst).real()));
}

double rkhs_majorant(const RkhsGridFunction& phi, double hurst) {
    require_rkhs_hurst(hurst);
    const RMatrix w = cell_weights(phi.grid(), hurst);
    const RVector mags = phi.values().colwise().norm().transpose();
    return mags.dot(w * mags);
}

double integral_second_moment(const RkhsGridFunction& phi, double hurst, Normalization normalization) {
    const double n = rkhs_norm(phi, hurst);
    return normalization_factor(normalization, hurst) * n * n;
}

double pathwise_integral(const RVector& cell_values, const FbmPath& path, std::size_t channel) {
    const auto k = static_cast<Eigen::Index>(path.grid.cells());
    if (cell_values.size() != k || channel >= static_cast<std::size_t>(path.values.rows())) {
        throw Error(Errc::GridMismatch, "integrand does not match the path");
    }
    const auto row = path.values.row(static_cast<Eigen::Index>(channel));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        acc += cell_values(i) * (row(i + 1) - row(i));
    }
    return acc;
}

}  // namespace netfbm
