#pragma once

// Independent noise realizations of any solver, averaged by a deterministic
// reduction keyed on the realization index.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace kickdyn::ensemble {

/// Observables of one run on a common record grid: values[c][t] is column c at time[t].
struct Series {
    std::vector<double> time;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> values;

    std::size_t column(const std::string& name) const; ///< throws std::out_of_range
    friend bool operator==(const Series&, const Series&) = default;
};

struct EnsembleSpec {
    std::size_t n_realizations = 20;
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;        ///< no effect on results
    bool retain_realizations = false;

    void validate() const;
};

/// Seed of realization j.
std::uint64_t realization_seed(const EnsembleSpec& spec, std::size_t index);

struct EnsembleResult {
    Series mean;
    Series standard_error;              ///< sample std / sqrt(N); NaN for N = 1
    std::vector<Series> realizations;   ///< empty unless retained
    std::vector<std::uint64_t> seeds;   ///< seed manifest, by index
    std::size_t n = 0;

    friend bool operator==(const EnsembleResult&, const EnsembleResult&) = default;
};

using Solver = std::function<Series(std::size_t index, std::uint64_t seed)>;

struct FailedRealization {
    std::size_t index;
    std::uint64_t seed;
    std::string message;
};

/// Thrown when some realizations fail. The partial result averages the rest
/// (n may be 0, then mean is empty).
class PartialEnsembleError : public std::runtime_error {
public:
    PartialEnsembleError(std::vector<FailedRealization> failed, EnsembleResult partial);
    const std::vector<FailedRealization>& failed() const noexcept { return failed_; }
    const EnsembleResult& partial() const noexcept { return partial_; }

private:
    std::vector<FailedRealization> failed_;
    EnsembleResult partial_;
};

/// Run every realization (spec.workers threads) and merge by index. Throws
/// std::invalid_argument when realizations disagree on record times or columns.
EnsembleResult run_ensemble(const EnsembleSpec& spec, const Solver& solver);

/// Mean and standard error of an explicit set of series, in the given order.
EnsembleResult merge(std::vector<Series> runs, std::vector<std::uint64_t> seeds, bool retain);

struct ColumnReport {
    std::string column;
    double threshold;
    double max_standard_error;
    double time_of_max;
    std::size_t flagged; ///< record times where the standard error exceeds the threshold
};

struct ConvergenceReport {
    bool pass;
    std::vector<ColumnReport> columns;
};

/// thresholds[c] applies to column c of the result. Throws std::invalid_argument
/// for N < 2 or a size mismatch.
ConvergenceReport convergence_report(const EnsembleResult& result, const std::vector<double>& thresholds);

/// "index seed" per line, after a "# realization seed" header.
void write_seed_manifest(std::ostream& out, const std::vector<std::uint64_t>& seeds);
std::vector<std::uint64_t> read_seed_manifest(std::istream& in);

/// time, then mean_<col>, se_<col> for every column; 17 significant digits.
void write_csv(std::ostream& out, const EnsembleResult& result);

} // namespace kickdyn::ensemble
