#include "netfbm/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "netfbm/error.hpp"
#include "netfbm/semigroup.hpp"
#include "netfbm/stochastic.hpp"

#ifndef NETFBM_VERSION
#define NETFBM_VERSION "0.0.0"
#endif

namespace netfbm {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check(StudyResult& r, std::string name, bool ok, std::string detail) {
    r.assertions.push_back({std::move(name), ok, std::move(detail)});
}

std::size_t cell_count(const ExperimentConfig& cfg) {
    const auto& d = cfg.discretization;
    const double ratio = d.horizon / d.dt;
    const auto k = static_cast<std::size_t>(std::llround(ratio));
    if (k == 0 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * ratio) {
        throw Error(Errc::OutOfRange, "T must be an integer multiple of dt");
    }
    return k;
}

bool non_increasing(const std::vector<double>& v, double slack) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1] * (1.0 + slack)) {
            return false;
        }
    }
    return true;
}

StudyResult stability(const Model& m) {
    StudyResult r;
    const auto& gen = m.generator;
    const auto cls = classify(gen, m.potential, m.coupling);
    r.header = {"index", "real", "imag"};
    const auto& values = gen.eigen().values;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        r.rows.push_back({static_cast<double>(i), values(i).real(), values(i).imag()});
    }
    r.verdicts = {{"class", std::string(to_string(cls.kind))},
                  {"rate", num(cls.rate)},
                  {"spectral_bound", num(cls.spectral_bound)},
                  {"kernel_dim", std::to_string(cls.kernel_dim)}};
    if (cls.potential_nonnegative && cls.coupling_psd) {
        const double tol = 1e-10 * std::max(1.0, gen.op_norm());
        check(r, "dissipative_spectrum", cls.spectral_bound <= tol, "spectral bound " + num(cls.spectral_bound));
        for (double t : {0.1, 1.0, 10.0}) {
            const double nrm = mass_operator_norm(semigroup_matrix(gen, t), gen.mass());
            check(r, "contraction_t=" + num(t), nrm <= 1.0 + 1e-9, "norm " + num(nrm));
        }
    }
    if (cls.kind == StabilityKind::ProjectionLimit) {
        const CMatrix gap = semigroup_matrix(gen, 50.0) - equilibrium_projection(gen);
        const double d = mass_operator_norm(gap, gen.mass());
        check(r, "projection_limit_T=50", d <= 1e-6, "||S(50) - P|| = " + num(d));
    }
    if (cls.kind == StabilityKind::UniformlyExponentiallyStable) {
        check(r, "positive_rate", cls.rate > 0.0, "rate " + num(cls.rate));
    }
    return r;
}

StudyResult convolution(const ExperimentConfig& cfg, const Model& m) {
    StudyResult r;
    const auto& gen = m.generator;
    const CMatrix noise = active_noise_map(gen, m.coupling, cfg.formulation);
    const std::size_t k = cell_count(cfg);
    const TimeGrid grid = TimeGrid::uniform(cfg.discretization.horizon, k);
    const FbmSpec spec{cfg.hurst, static_cast<std::size_t>(noise.cols()), cfg.normalization, cfg.seed};
    const FbmSampler sampler(spec, grid, cfg.method);
    std::vector<std::size_t> checkpoints;
    for (std::size_t i = 1; i <= 5; ++i) {
        checkpoints.push_back(std::max<std::size_t>(1, i * k / 5));
    }
    const Ensemble ens = simulate_ensemble(gen, noise, sampler, checkpoints, cfg.discretization.replicates);
    const MomentEstimate est = second_moment_estimate(ens, gen.mass());
    r.header = {"time", "mc_mean", "std_error", "reference", "z"};
    double worst = 0.0;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        const double ref = cfg.hurst > 0.5
                               ? variance_quadrature(gen, noise, est.times[i], cfg.hurst, cfg.normalization)
                               : discrete_variance(gen, noise, grid, checkpoints[i], cfg.hurst, cfg.normalization);
        const double z = (est.mean[i] - ref) / est.std_error[i];
        worst = std::max(worst, std::abs(z));
        r.rows.push_back({est.times[i], est.mean[i], est.std_error[i], ref, z});
    }
    r.verdicts = {{"max_abs_z", num(worst)}, {"replicates", std::to_string(cfg.discretization.replicates)}};
    check(r, "mc_within_3_sigma", worst <= 3.0, "max |z| = " + num(worst));
    return r;
}

StudyResult yosida_study(const ExperimentConfig& cfg, const Model& m) {
    StudyResult r;
    const auto& gen = m.generator;
    const CMatrix noise = active_noise_map(gen, m.coupling, cfg.formulation);
    std::vector<double> times;
    for (int i = 1; i <= 8; ++i) {
        times.push_back(cfg.discretization.horizon * i / 8.0);
    }
    const auto table = yosida_convergence(gen, noise, cfg.hurst, cfg.study.yosida_n, times, cfg.normalization);
    r.header = {"n", "gap", "generator_gap", "phi1", "phi2"};
    std::vector<double> gap;
    std::vector<double> gen_gap;
    bool split_ok = true;
    for (const auto& row : table) {
        r.rows.push_back({row.n, row.gap, row.generator_gap, row.phi1, row.phi2});
        gap.push_back(row.gap);
        gen_gap.push_back(row.generator_gap);
        split_ok = split_ok && row.generator_gap <= 2.0 * (row.phi1 + row.phi2) * (1.0 + 1e-9);
    }
    r.verdicts = {{"generator_gap_premise", cfg.hurst > 0.75 ? "H>3/4" : "H<=3/4"}};
    check(r, "gap_non_increasing", non_increasing(gap, 0.05), "sup_t E|W_n - W|^2 column");
    check(r, "generator_gap_non_increasing", non_increasing(gen_gap, 0.05), "sup_t E|A_n W_n - A W|^2 column");
    check(r, "split_bound", split_ok, "generator gap <= 2 (phi1 + phi2)");
    return r;
}

StudyResult regularity(const ExperimentConfig& cfg, const Model& m) {
    StudyResult r;
    const auto& gen = m.generator;
    const CMatrix noise = active_noise_map(gen, m.coupling, cfg.formulation);
    const auto rep =
        regularity_profile(gen, noise, cfg.hurst, cfg.study.alpha, cfg.discretization.horizon, cfg.normalization);
    r.header = {"time", "profile"};
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        r.rows.push_back({rep.times[i], rep.profile[i]});
    }
    r.verdicts = {{"integral", num(rep.integral)}, {"fitted_constant", num(rep.fitted_constant)}};
    check(r, "finite_integral", std::isfinite(rep.integral) && rep.integral > 0.0, "integral " + num(rep.integral));
    return r;
}

StudyResult longtime(const ExperimentConfig& cfg, const Model& m) {
    StudyResult r;
    const auto& gen = m.generator;
    const auto cls = classify(gen, m.potential, m.coupling);
    const CMatrix noise = active_noise_map(gen, m.coupling, cfg.formulation);
    LongTimeInput input;
    const bool full = cfg.formulation == Formulation::Full && m.coupling.has_passive_noise();
    if (full) {
        const BlockSemigroup sg(gen);
        const RMatrix cp = passive_noise_map(m.coupling);
        input.integrand = full_system_integrand(sg, noise, cp);
        input.boundary_weight = cp.squaredNorm();
        input.passive_noise = true;
    } else {
        input.integrand = convolution_integrand(gen, noise);
    }
    const auto rep =
        long_time_report(gen, cls, input, cfg.hurst, cfg.discretization.long_horizon, 21, cfg.normalization);
    r.header = {"time", "trace"};
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        r.rows.push_back({rep.times[i], rep.trace[i]});
    }
    Verdict expected = Verdict::Inconclusive;
    if (full) {
        expected = Verdict::NoInvariantMeasure;
    } else if (cls.kind == StabilityKind::UniformlyExponentiallyStable) {
        expected = Verdict::InvariantMeasureExists;
    } else if (cls.potential_zero && cls.coupling_zero) {
        expected = Verdict::NoInvariantMeasure;
    }
    r.verdicts = {{"verdict", std::string(to_string(rep.verdict))},
                  {"rule", rep.rule},
                  {"exponent", num(rep.exponent)},
                  {"fit_points", std::to_string(rep.fit_points)},
                  {"class", std::string(to_string(cls.kind))}};
    check(r, "verdict_matches_theory", rep.verdict == expected,
          "got " + std::string(to_string(rep.verdict)) + ", expected " + std::string(to_string(expected)));
    return r;
}

StudyResult fullsystem(const ExperimentConfig& cfg, const Model& m) {
    StudyResult r;
    const auto& gen = m.generator;
    if (gen.passive_dim() == 0) {
        throw Error(Errc::OutOfRange, "fullsystem study needs passive nodes");
    }
    const BlockSemigroup sg(gen);
    const CMatrix noise = active_noise_map(gen, m.coupling, Formulation::Full);
    const RMatrix cp = passive_noise_map(m.coupling);
    const std::size_t k = cell_count(cfg);
    const FbmSpec spec{cfg.hurst, m.coupling.node_count(), cfg.normalization, cfg.seed};
    const FbmSampler sampler(spec, TimeGrid::uniform(cfg.discretization.horizon, k), cfg.method);
    const FbmPath path = sampler.sample(0);
    const auto p = static_cast<Eigen::Index>(gen.passive_dim());
    const CVector phi0 = CVector::Zero(p);
    const auto traj = full_system_solve(sg, noise, cp, path, CVector::Zero(static_cast<Eigen::Index>(gen.dim())), phi0);

    r.header = {"time", "state_norm"};
    for (Eigen::Index i = 0; i < p; ++i) {
        r.header.push_back("boundary_" + std::to_string(i + 1));
    }
    bool exact = true;
    for (Eigen::Index c = 0; c < traj.states.cols(); ++c) {
        std::vector<double> row{traj.grid[static_cast<std::size_t>(c)], mass_norm(traj.states.col(c), gen.mass())};
        const CVector expected = passive_data(cp, path.values, c, phi0);
        for (Eigen::Index i = 0; i < p; ++i) {
            row.push_back(traj.boundary(i, c).real());
            exact = exact && traj.boundary(i, c) == expected(i);
        }
        r.rows.push_back(std::move(row));
    }
    check(r, "boundary_equals_CpZ", exact, "second component against C_p Z(t)");
    if (!m.coupling.has_passive_noise()) {
        const Trajectory active = convolve(gen, noise, path);
        check(r, "reduces_to_active_solution", active.states == traj.states, "C_p = 0");
    }
    r.verdicts = {{"passive_noise", m.coupling.has_passive_noise() ? "yes" : "no"}};
    return r;
}

}  // namespace

bool StudyResult::passed() const {
    for (const auto& a : assertions) {
        if (!a.passed) {
            return false;
        }
    }
    return true;
}

StudyResult run_study(const ExperimentConfig& config, const Model& model) {
    StudyResult r;
    const auto& name = config.study.name;
    if (name == "stability") {
        r = stability(model);
    } else if (name == "convolution") {
        r = convolution(config, model);
    } else if (name == "yosida") {
        r = yosida_study(config, model);
    } else if (name == "regularity") {
        r = regularity(config, model);
    } else if (name == "longtime") {
        r = longtime(config, model);
    } else if (name == "fullsystem") {
        r = fullsystem(config, model);
    } else {
        throw Error(Errc::OutOfRange, "unknown study '" + name + "'");
    }
    r.study = name;
    return r;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::Io, "SHA-256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4U];
        out += hex[digest[i] & 0xfU];
    }
    return out;
}

std::string config_hash(const ExperimentConfig& config) {
    // Where results land does not change what they are.
    ExperimentConfig canonical = config;
    canonical.output_dir.clear();
    return sha256_hex(serialize(canonical));
}

std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        out += (i ? "," : "") + header[i];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += (i ? "," : "") + num(row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string_view library_version() noexcept { return NETFBM_VERSION; }

RunOutcome run_and_write(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const std::string hash = config_hash(config);
    const std::filesystem::path dir = config.output_dir;
    std::filesystem::create_directories(dir);
    const std::string stem = config.study.name + "_" + hash.substr(0, 16) + "_seed" + std::to_string(config.seed);

    RunOutcome outcome;
    outcome.manifest = dir / (stem + ".json");
    nlohmann::json manifest;
    manifest["study"] = config.study.name;
    manifest["config_hash"] = hash;
    manifest["seed"] = config.seed;
    manifest["version"] = std::string(library_version());
    manifest["threads"] = worker_count();
    manifest["config"] = serialize(config);
    manifest["outputs"] = nlohmann::json::array();
    try {
        const Model model = build_model(config);
        const StudyResult result = run_study(config, model);
        outcome.csv = dir / (stem + ".csv");
        std::ofstream csv(outcome.csv, std::ios::binary);
        csv << csv_text(result.header, result.rows);
        if (!csv) {
            throw Error(Errc::Io, "cannot write " + outcome.csv.string());
        }
        manifest["outputs"].push_back(outcome.csv.filename().string());
        nlohmann::json verdicts = nlohmann::json::object();
        for (const auto& [k, v] : result.verdicts) {
            verdicts[k] = v;
        }
        manifest["verdicts"] = verdicts;
        nlohmann::json asserts = nlohmann::json::array();
        for (const auto& a : result.assertions) {
            asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
        }
        manifest["assertions"] = asserts;
        outcome.passed = result.passed();
    } catch (const std::exception& e) {
        outcome.error = e.what();
        manifest["error"] = outcome.error;
        outcome.passed = false;
    }
    manifest["passed"] = outcome.passed;
    manifest["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream out(outcome.manifest, std::ios::binary);
    out << manifest.dump(2) << '\n';
    if (!out) {
        throw Error(Errc::Io, "cannot write " + outcome.manifest.string());
    }
    return outcome;
}

}  // namespace netfbm
