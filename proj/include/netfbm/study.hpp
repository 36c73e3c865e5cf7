#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netfbm/config.hpp"

namespace netfbm {

struct Assertion {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct StudyResult {
    std::string study;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> verdicts;
    std::vector<Assertion> assertions;

    [[nodiscard]] bool passed() const;
};

/// Computes the study named in the config. Throws whatever the inner
/// operations throw.
[[nodiscard]] StudyResult run_study(const ExperimentConfig& config, const Model& model);

/// Lower-case hex SHA-256.
[[nodiscard]] std::string sha256_hex(std::string_view data);

/// SHA-256 of the canonical config text, output directory excluded.
[[nodiscard]] std::string config_hash(const ExperimentConfig& config);

/// Header line plus rows, values at 17 significant digits.
[[nodiscard]] std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

struct RunOutcome {
    bool passed = false;
    std::filesystem::path csv;       ///< empty when the study failed before producing data
    std::filesystem::path manifest;
    std::string error;
};

/// Runs the study and writes `<study>_<hash>_seed<seed>.csv` plus a JSON
/// manifest into config.output_dir. The manifest is written even on failure.
[[nodiscard]] RunOutcome run_and_write(const ExperimentConfig& config);

[[nodiscard]] std::string_view library_version() noexcept;

}  // namespace netfbm
