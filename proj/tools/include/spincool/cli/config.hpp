#pragma once

// Run configuration for the spincool command-line tool.
//
// File format: `key = value` lines grouped in `[section]` blocks, `#`
// comments. Keys before any section header (or under `[common]`) apply to
// every experiment; `[<experiment>]` blocks apply to that experiment only.
// Precedence, lowest first: built-in experiment defaults, common keys,
// experiment section, `--set` overrides.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spincool/dynamics.hpp"
#include "spincool/lindblad.hpp"
#include "spincool/optimizer.hpp"

namespace spincool::cli {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

using Section = std::map<std::string, std::string>;
using ConfigFile = std::map<std::string, Section>;

/// Parses the text of a config file. Top-level keys land in "common".
ConfigFile parse_config_text(const std::string &text);
ConfigFile load_config_file(const std::filesystem::path &path);

enum class OutputFormat { csv, json };

const std::vector<std::string> &experiment_names();
bool is_experiment(const std::string &name);

struct RunConfig {
    std::string experiment;
    ModelParams model;
    int iterations = 1;
    std::filesystem::path out_dir = ".";
    OutputFormat format = OutputFormat::csv;
    int jobs = 1;

    // sweeps (fig1, fig2)
    int t_points = 64;
    int lambda_points = 61;
    double lambda_max = 0.3;
    int n_max = 4;

    // open
    std::optional<LindbladRates> rates;
    double dt = kDefaultOpenStep;
    std::optional<bool> reinitialize_spins;

    // optimize
    OptimizeConfig optimize;

    // estimate-coupling
    double dbdz = 1e6;
    double mass = 1e-14;
    double omega = 1e6;
    double dbdz_min = 1e4;
    double dbdz_max = 1e7;
    int dbdz_points = 31;

    /// Fully resolved configuration, keys in lower_snake_case.
    nlohmann::ordered_json to_json() const;
};

/// Applies defaults, file sections and `--set key=value` overrides for one
/// experiment, then validates. Throws ConfigError before any heavy work.
RunConfig resolve_config(const std::string &experiment, const ConfigFile &file,
                         const std::vector<std::string> &overrides,
                         const std::filesystem::path &out_dir, int jobs);

} // namespace spincool::cli
