#pragma once

#include "gvm/dynamics.hpp"
#include "gvm/fitting.hpp"
#include "gvm/ingest.hpp"
#include "gvm/measures.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gvm {

struct AnalysisOptions {
    std::size_t bins = 101;
    std::size_t max_lag = 0;      ///< 0: up to T - 2
    std::size_t acf_points = 200; ///< log-spaced lags in the export
    bool student_t = true;
    bool gaussian = true;
    bool exp_decay = true;
    bool binned_student_t = false; ///< also write fit_student_t_binned.json
};

enum class NoiseMode { AtQc, BelowQc, AboveQc, Explicit };

std::string to_string(NoiseMode mode);
NoiseMode noise_mode_from_string(const std::string& name);

struct SweepSpec {
    std::vector<double> mean_degrees;
    std::vector<double> fractions;
    NoiseMode noise_mode = NoiseMode::AtQc;
    std::vector<double> q_values; ///< used by NoiseMode::Explicit
    std::size_t replicas = 1;
    SimConfig base;               ///< n, MCS counts, root seed, field mode
};

/// Everything a config file can hold; missing keys keep these defaults.
struct ProjectConfig {
    SimConfig simulation;
    SweepSpec sweep;
    AnalysisOptions analysis;
    QcTable qc = default_qc_table();
};

/// INI-style file with [simulation], [sweep], [analysis] and [qc] sections.
/// Throws ConfigError on unknown keys or unparsable values.
ProjectConfig load_config(const std::filesystem::path& path);

/// key=value overrides addressed as section.key, e.g. "simulation.q=0.25".
void apply_override(ProjectConfig& cfg, const std::string& assignment);

nlohmann::ordered_json to_json(const AnalysisOptions& opt);
nlohmann::ordered_json to_json(const SweepSpec& spec, const QcTable& qc);

/// Writes acf, hist, ecdf, qq, folded density and fit files for `r` into
/// `dir` and returns a summary (kurtosis, fit parameters, skipped stages).
/// With `strict`, the first failing stage throws instead of being recorded.
nlohmann::ordered_json analyze_series(const ReturnSeries& r, const AnalysisOptions& opt,
                                      const std::filesystem::path& dir, bool strict);

/// One simulation plus full analysis in `dir` (created if missing).
nlohmann::ordered_json run_single(const SimConfig& sim, const AnalysisOptions& opt, const std::filesystem::path& dir);

struct SweepCell {
    std::size_t index = 0;
    std::string name;
    double mean_degree = 0.0;
    double q = 0.0;
    double f = 0.0;
    std::size_t replica = 0;
    std::uint64_t seed = 0;
};

/// Expands the grid in (mean degree, q, f, replica) order. Throws ConfigError
/// for empty lists or a mean degree without a q_c entry in the at/below/above modes.
std::vector<SweepCell> resolve_cells(const SweepSpec& spec, const QcTable& qc);

/// Runs every cell into dir/<cell name>/ on up to `workers` threads and writes
/// dir/manifest.json. Output content does not depend on `workers`.
nlohmann::ordered_json run_sweep(const SweepSpec& spec, const QcTable& qc, const AnalysisOptions& opt,
                                 const std::filesystem::path& dir, std::size_t workers);

enum class InputFormat { Returns, Prices };

/// Strict analysis of an existing returns CSV or price CSV.
nlohmann::ordered_json analyze_file(const std::filesystem::path& input, InputFormat format, const ColumnSpec& columns,
                                    const AnalysisOptions& opt, const std::filesystem::path& dir);

struct GraphCheckOptions {
    std::size_t n = 20000;
    std::vector<double> mean_degrees = {6.0, 8.0, 10.0, 20.0};
    std::size_t networks = 10;
    std::uint64_t seed = 1;
    double alpha = 0.01;
    bool edge_list = false; ///< export the first network of each degree
};

/// Pooled degree distributions against Poisson references.
nlohmann::ordered_json graph_check(const GraphCheckOptions& opt, const std::filesystem::path& dir);

/// "run-YYYYmmddTHHMMSS" in UTC.
std::string timestamped_id(const std::string& prefix);

} // namespace gvm
