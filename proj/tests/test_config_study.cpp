#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "netfbm/config.hpp"
#include "netfbm/error.hpp"
#include "netfbm/study.hpp"

using namespace netfbm;

namespace {

const char* kMinimal = R"(
[graph]
edges = 1-2
n0 = 2

[coupling]
C = 1, 0; 0, 1

[noise]
hurst = 0.7

[study]
name = stability
)";

Errc code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return Errc::Io;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("netfbm_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("defaults are filled in") {
    const auto cfg = parse_config(kMinimal);
    CHECK(cfg.discretization.subdivisions == 32);
    CHECK(cfg.discretization.dt == 1e-2);
    CHECK(cfg.discretization.replicates == 2000);
    CHECK(cfg.normalization == Normalization::Standard);
    CHECK(cfg.b.isZero(0.0));
    CHECK(cfg.edges == std::vector<Edge>{{0, 1}});
    CHECK(serialize(cfg).find("replicates") == std::string::npos);
    CHECK(serialize(cfg).find("mc = 2000") != std::string::npos);
}

TEST_CASE("round trip of the minimal config") {
    const auto cfg = parse_config(kMinimal);
    const auto again = parse_config(serialize(cfg));
    CHECK(again == cfg);
    CHECK(serialize(again) == serialize(cfg));
}

TEST_CASE("config errors") {
    CHECK(code_of([] { (void)parse_config(replace(kMinimal, "hurst = 0.7", "hurst = 1.2")); }) == Errc::OutOfRange);
    try {
        (void)parse_config(replace(kMinimal, "hurst = 0.7", "hurts = 0.7"));
        FAIL("accepted a misspelled key");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::UnknownKey);
        CHECK(std::string(e.what()).find("hurts") != std::string::npos);
    }
    CHECK(code_of([] { (void)parse_config(replace(kMinimal, "[study]\nname = stability", "")); }) ==
          Errc::MissingSection);
    CHECK(code_of([] { (void)parse_config(std::string(kMinimal) + "[extra]\nkey = 1\n"); }) == Errc::UnknownKey);
    CHECK(code_of([] { (void)parse_config(replace(kMinimal, "hurst = 0.7", "hurst = abc")); }) == Errc::ParseError);
    CHECK(code_of([] { (void)parse_config(replace(kMinimal, "name = stability", "name = plotting")); }) ==
          Errc::OutOfRange);
    CHECK(code_of([] { (void)load_config("/nonexistent/netfbm.ini"); }) == Errc::Io);
}

TEST_CASE("property: random configs round trip") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        ExperimentConfig cfg;
        const std::size_t n = 2 + rng() % 3;
        for (std::size_t v = 1; v < n; ++v) {
            cfg.edges.push_back({rng() % v, v});
        }
        cfg.active_count = 1 + rng() % n;
        cfg.b = CMatrix::Zero(n, n);
        cfg.c = RMatrix::Identity(n, n);
        for (Eigen::Index i = 0; i < cfg.b.size(); ++i) {
            cfg.b(i) = Complex(u(rng) / 3.0, (rng() % 2) ? u(rng) : 0.0);
        }
        cfg.c(0, 0) = 0.1 + u(rng);
        if (rng() % 2) {
            cfg.potential.kind = PotentialConfig::Kind::PerEdge;
            for (std::size_t j = 0; j < cfg.edges.size(); ++j) {
                cfg.potential.per_edge.push_back(u(rng));
            }
        } else {
            cfg.potential.constant = u(rng) * 1e-3;
        }
        cfg.hurst = 0.5 + 0.49 * u(rng);
        cfg.seed = rng();
        cfg.normalization = (rng() % 2) ? Normalization::Standard : Normalization::PaperPrefactor;
        cfg.method = (rng() % 2) ? SampleMethod::Cholesky : SampleMethod::CirculantEmbedding;
        cfg.discretization.dt = 1.0 / (1 + rng() % 500);
        cfg.study.name = study_names()[rng() % study_names().size()];
        cfg.study.alpha = 0.2 * u(rng);
        cfg.output_dir = "out/run" + std::to_string(trial);
        CHECK(parse_config(serialize(cfg)) == cfg);
    }
}

TEST_CASE("stability study on the free edge") {
    const auto cfg = parse_config(kMinimal);
    const auto result = run_study(cfg, build_model(cfg));
    CHECK(result.passed());
    bool found = false;
    for (const auto& [k, v] : result.verdicts) {
        found = found || (k == "class" && v == "ProjectionLimit");
    }
    CHECK(found);
}

TEST_CASE("artifacts and manifest") {
    auto cfg = parse_config(kMinimal);
    cfg.output_dir = scratch("artifacts").string();
    cfg.seed = 42;
    const auto outcome = run_and_write(cfg);
    CHECK(outcome.passed);
    const std::string hash = config_hash(cfg).substr(0, 16);
    CHECK(outcome.csv.filename().string() == "stability_" + hash + "_seed42.csv");
    CHECK(outcome.manifest.filename().string() == "stability_" + hash + "_seed42.json");
    const auto manifest = nlohmann::json::parse(read_file(outcome.manifest));
    CHECK(manifest["config_hash"] == config_hash(cfg));
    CHECK(manifest["seed"] == 42);
    CHECK(manifest["version"] == std::string(library_version()));
    CHECK(manifest["passed"] == true);
    CHECK(manifest.contains("wall_time_seconds"));
    const std::string csv = read_file(outcome.csv);
    CHECK(csv.rfind("index,real,imag\n", 0) == 0);

    // The output location does not enter the hash.
    auto moved = cfg;
    moved.output_dir = "elsewhere";
    CHECK(config_hash(moved) == config_hash(cfg));
}

TEST_CASE("failing study still writes a manifest") {
    auto cfg = parse_config(replace(kMinimal, "name = stability", "name = regularity"));
    cfg.discretization.subdivisions = 4;
    cfg.output_dir = scratch("failure").string();
    cfg.study.alpha = 0.3;
    const auto outcome = run_and_write(cfg);
    CHECK_FALSE(outcome.passed);
    CHECK(outcome.csv.empty());
    REQUIRE(std::filesystem::exists(outcome.manifest));
    const auto manifest = nlohmann::json::parse(read_file(outcome.manifest));
    CHECK(manifest["passed"] == false);
    CHECK(manifest["error"].get<std::string>().find("AlphaTooLarge") != std::string::npos);
}

TEST_CASE("CSV formatting keeps 17 significant digits") {
    const auto text = csv_text({"a", "b"}, {{0.1, 1.0 / 3.0}});
    CHECK(text == "a,b\n0.10000000000000001,0.33333333333333331\n");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
