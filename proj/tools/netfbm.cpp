#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "netfbm/config.hpp"
#include "netfbm/error.hpp"
#include "netfbm/study.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Diffusion on metric graphs with fractional node noise"};
    app.require_subcommand(1);

    std::string run_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    auto* run = app.add_subcommand("run", "Run the study described by a config file");
    run->add_option("config", run_path, "Config file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the noise seed");
    run->add_option("--out", out_dir, "Override the output directory");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse a config and build its model");
    validate->add_option("config", validate_path, "Config file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) {
            const auto cfg = netfbm::load_config(validate_path);
            const auto model = netfbm::build_model(cfg);
            std::cout << "valid: study=" << cfg.study.name << " dim=" << model.generator.dim()
                      << " hash=" << netfbm::config_hash(cfg) << '\n';
            return 0;
        }
        auto cfg = netfbm::load_config(run_path);
        if (seed) {
            cfg.seed = *seed;
        }
        if (out_dir) {
            cfg.output_dir = *out_dir;
        }
        const auto outcome = netfbm::run_and_write(cfg);
        if (!outcome.csv.empty()) {
            std::cout << "csv: " << outcome.csv.string() << '\n';
        }
        std::cout << "manifest: " << outcome.manifest.string() << '\n';
        if (!outcome.error.empty()) {
            std::cerr << "error: " << outcome.error << '\n';
        }
        std::cout << (outcome.passed ? "PASS" : "FAIL") << '\n';
        return outcome.passed ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
