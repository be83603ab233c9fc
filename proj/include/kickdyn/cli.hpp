#pragma once

// Configuration and run orchestration behind the kickdyn executable. The
// config is nested YAML with one section per concern; parse_config fills in
// every default and serialize_config writes the fully explicit form back.

#include "kickdyn/ensemble.hpp"
#include "kickdyn/h2plus.hpp"
#include "kickdyn/qdyn1d.hpp"
#include "kickdyn/shotnoise.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace kickdyn::cli {

enum class Model { atom1d, morse1d, h2plus };

std::string to_string(Model m);

struct NoiseConfig {
    double gamma_mean = 0.9;
    double spacing = 1.0; ///< <dt> / T_e
};

struct RunConfig {
    double final_time_fs = 100.0;
    double dt = 0.05;
    std::size_t record_every = 20;
};

struct EnsembleConfig {
    std::size_t realizations = 20;
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;
};

struct OutputConfig {
    std::string directory = "runs";
};

struct Grid1DConfig {
    std::size_t points;
    double x_min;
    double x_max;
    double absorber_fraction = 0.15;
    double absorber_strength;
    double relax_dt = 0.05;
    double relax_tol = 1e-12;
};

struct Atom1DConfig {
    qdyn1d::SoftCoreParams params{};
    Grid1DConfig grid{2048, -200.0, 200.0, 0.15, 0.1};
};

struct Morse1DConfig {
    qdyn1d::MorseParams params{};
    Grid1DConfig grid{1024, -2.0, 12.0, 0.15, 0.01};
};

struct H2PlusConfig {
    h2plus::H2Params params{};
    h2plus::GeometrySpec geometry{};
    h2plus::RelaxOptions relax = default_relax();

    static h2plus::RelaxOptions default_relax();
};

struct SweepConfig {
    std::string axis = "spacing"; ///< spacing | gamma_mean
    std::vector<double> values;
};

struct ValidateNoiseConfig {
    std::size_t samples = 10000;
    double horizon = 1000.0;        ///< a.u.
    double bin_width = 0.5;         ///< a.u., autocovariance binning
    std::size_t max_lag_bins = 32;
    std::size_t spectrum_bins = 4096;
    double omega_min = 0.1;         ///< flat-level frequency band (a.u.)
    double omega_max = 3.0;
    std::size_t omega_points = 30;
    double mean_tolerance = 0.01;   ///< relative
    double background_sigmas = 3.0;
    double flat_tolerance = 0.05;   ///< relative
};

struct SimConfig {
    Model model = Model::h2plus;
    NoiseConfig noise{};
    RunConfig run{};
    EnsembleConfig ensemble{};
    OutputConfig output{};
    Atom1DConfig atom1d{};
    Morse1DConfig morse1d{};
    H2PlusConfig h2plus{};
    SweepConfig sweep{};
    ValidateNoiseConfig validate_noise{};

    double final_time_au() const;
    shotnoise::NoiseParams noise_params(std::uint64_t seed) const;
    ensemble::EnsembleSpec ensemble_spec() const;
};

/// A config problem located by dotted key and, when known, 1-based line.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, int line, const std::string& message);
    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    std::string key_;
    int line_;
};

/// Parse and validate. Unknown keys, sections of another model, type
/// mismatches and constraint violations all throw ConfigError.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::filesystem::path& path);
/// Every field, fixed key order, doubles in round-trip precision.
std::string serialize_config(const SimConfig& config);
/// Throws ConfigError naming the first offending key.
void validate(const SimConfig& config);

/// "name:v1,v2,..." with name spacing or gamma_mean (alias gamma).
SweepConfig parse_axis(const std::string& text);

/// Thrown for run-time numerical failures (non-convergence, NaN).
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RelaxSummary {
    double energy;
    std::size_t steps;
    double parity_defect = 0.0;   ///< h2plus only
    double p_ionization = 0.0;    ///< h2plus only
    double p_dissociation = 0.0;  ///< h2plus only
    std::vector<double> x;        ///< profile abscissa (x, or R for h2plus)
    std::vector<double> density;  ///< |psi|^2, or f1 for h2plus
};

RelaxSummary cmd_relax(const SimConfig& config);

/// One realization (index 0 of the ensemble seeds).
ensemble::Series cmd_run(const SimConfig& config, shotnoise::KickSequence* kicks_out = nullptr);

ensemble::EnsembleResult cmd_ensemble(const SimConfig& config);

struct SweepRow {
    double value;
    std::vector<double> mean;           ///< per column at the final record
    std::vector<double> standard_error;
};

struct SweepTable {
    std::string axis;
    std::vector<std::string> columns;
    std::vector<SweepRow> rows;
    std::vector<ensemble::EnsembleResult> points; ///< full result per axis value
};

/// Thrown when an axis point fails; carries the point and the rows done so far.
class SweepPointError : public std::runtime_error {
public:
    SweepPointError(std::size_t point, double value, const std::string& message, SweepTable partial, bool partial_ensemble);
    std::size_t point() const noexcept { return point_; }
    double value() const noexcept { return value_; }
    const SweepTable& partial() const noexcept { return partial_; }
    bool partial_ensemble() const noexcept { return partial_ensemble_; }

private:
    std::size_t point_;
    double value_;
    SweepTable partial_;
    bool partial_ensemble_;
};

SweepTable cmd_sweep(const SimConfig& config);

struct NoiseCheck {
    std::string name;
    double empirical;
    double analytic;
    double tolerance;   ///< absolute, already scaled
    bool pass;
};

struct NoiseReport {
    std::vector<NoiseCheck> checks;
    bool pass() const;
};

NoiseReport cmd_validate_noise(const SimConfig& config);

void write_sweep_csv(std::ostream& out, const SweepTable& table);
void write_series_csv(std::ostream& out, const ensemble::Series& series);
void write_noise_report(std::ostream& out, const NoiseReport& report);
void write_relax_csv(std::ostream& out, const SimConfig& config, const RelaxSummary& summary);

/// Version, build type and compiler of this binary, one "key value" per line.
std::string version_stamp();

/// Create `dir` and write config.yaml and VERSION into it.
void prepare_run_directory(const std::filesystem::path& dir, const SimConfig& config);

} // namespace kickdyn::cli
