#include "kickdyn/ensemble.hpp"

#include "kickdyn/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace kickdyn::ensemble {

std::size_t Series::column(const std::string& name) const
{
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("Series: no column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
}

void EnsembleSpec::validate() const
{
    if (n_realizations == 0) throw std::domain_error("ensemble: n_realizations must be >= 1");
    if (workers == 0) throw std::domain_error("ensemble: workers must be >= 1");
}

std::uint64_t realization_seed(const EnsembleSpec& spec, std::size_t index)
{
    return derive_seed(spec.master_seed, index);
}

PartialEnsembleError::PartialEnsembleError(std::vector<FailedRealization> failed, EnsembleResult partial)
    : std::runtime_error([&] {
          std::ostringstream msg;
          msg << failed.size() << " realization(s) failed; seeds:";
          for (const auto& f : failed) msg << ' ' << f.seed;
          if (!failed.empty()) msg << " (first: " << failed.front().message << ')';
          return msg.str();
      }()),
      failed_(std::move(failed)),
      partial_(std::move(partial))
{
}

EnsembleResult merge(std::vector<Series> runs, std::vector<std::uint64_t> seeds, bool retain)
{
    EnsembleResult out;
    out.seeds = std::move(seeds);
    out.n = runs.size();
    if (runs.empty()) return out;

    const Series& first = runs.front();
    for (const auto& r : runs) {
        if (r.time != first.time) throw std::invalid_argument("ensemble: realizations have different record times");
        if (r.columns != first.columns) throw std::invalid_argument("ensemble: realizations have different columns");
        for (const auto& v : r.values)
            if (v.size() != first.time.size()) throw std::invalid_argument("ensemble: column length mismatch");
        if (r.values.size() != r.columns.size()) throw std::invalid_argument("ensemble: column count mismatch");
    }

    const std::size_t nc = first.columns.size(), nt = first.time.size();
    const double n = static_cast<double>(runs.size());
    out.mean = {first.time, first.columns, std::vector<std::vector<double>>(nc, std::vector<double>(nt, 0.0))};
    out.standard_error = out.mean;
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t t = 0; t < nt; ++t) {
            // Shifted by the first value: identical inputs give exactly zero spread.
            const double x0 = first.values[c][t];
            double sum = 0.0;
            for (const auto& r : runs) sum += r.values[c][t] - x0;
            const double shift = sum / n;
            double ss = 0.0;
            for (const auto& r : runs) {
                const double d = r.values[c][t] - x0 - shift;
                ss += d * d;
            }
            out.mean.values[c][t] = x0 + shift;
            out.standard_error.values[c][t] =
                runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : std::numeric_limits<double>::quiet_NaN();
        }
    if (retain) out.realizations = std::move(runs);
    return out;
}

EnsembleResult run_ensemble(const EnsembleSpec& spec, const Solver& solver)
{
    spec.validate();
    const std::size_t n = spec.n_realizations;
    std::vector<std::uint64_t> seeds(n);
    for (std::size_t i = 0; i < n; ++i) seeds[i] = realization_seed(spec, i);

    std::vector<std::optional<Series>> slots(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i] = solver(i, seeds[i]);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            } catch (...) {
                errors[i] = "unknown error";
            }
        }
    };
    const std::size_t workers = std::min(spec.workers, n);
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }

    std::vector<Series> done;
    std::vector<std::uint64_t> done_seeds;
    std::vector<FailedRealization> failed;
    for (std::size_t i = 0; i < n; ++i) {
        if (slots[i]) {
            done.push_back(std::move(*slots[i]));
            done_seeds.push_back(seeds[i]);
        } else {
            failed.push_back({i, seeds[i], errors[i]});
        }
    }
    if (!failed.empty()) {
        auto partial = merge(std::move(done), std::move(done_seeds), spec.retain_realizations);
        throw PartialEnsembleError(std::move(failed), std::move(partial));
    }
    return merge(std::move(done), std::move(seeds), spec.retain_realizations);
}

ConvergenceReport convergence_report(const EnsembleResult& result, const std::vector<double>& thresholds)
{
    if (result.n < 2) throw std::invalid_argument("convergence_report: needs at least 2 realizations");
    const auto& se = result.standard_error;
    if (thresholds.size() != se.columns.size())
        throw std::invalid_argument("convergence_report: one threshold per column required");
    ConvergenceReport report{true, {}};
    for (std::size_t c = 0; c < se.columns.size(); ++c) {
        ColumnReport col{se.columns[c], thresholds[c], 0.0, 0.0, 0};
        for (std::size_t t = 0; t < se.time.size(); ++t) {
            const double v = se.values[c][t];
            if (v > col.max_standard_error) {
                col.max_standard_error = v;
                col.time_of_max = se.time[t];
            }
            if (v > thresholds[c]) ++col.flagged;
        }
        if (col.flagged > 0) report.pass = false;
        report.columns.push_back(col);
    }
    return report;
}

void write_seed_manifest(std::ostream& out, const std::vector<std::uint64_t>& seeds)
{
    out << "# realization seed\n";
    for (std::size_t i = 0; i < seeds.size(); ++i) out << i << ' ' << seeds[i] << '\n';
}

std::vector<std::uint64_t> read_seed_manifest(std::istream& in)
{
    std::vector<std::uint64_t> seeds;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        std::size_t index = 0;
        std::uint64_t seed = 0;
        if (!(fields >> index >> seed) || index != seeds.size())
            throw std::runtime_error("seed manifest: malformed line '" + line + "'");
        seeds.push_back(seed);
    }
    return seeds;
}

void write_csv(std::ostream& out, const EnsembleResult& result)
{
    const auto& m = result.mean;
    out << "time_au";
    for (const auto& c : m.columns) out << ",mean_" << c << ",se_" << c;
    out << '\n' << std::setprecision(17);
    for (std::size_t t = 0; t < m.time.size(); ++t) {
        out << m.time[t];
        for (std::size_t c = 0; c < m.columns.size(); ++c)
            out << ',' << m.values[c][t] << ',' << result.standard_error.values[c][t];
        out << '\n';
    }
}

} // namespace kickdyn::ensemble
