#include "kickdyn/shotnoise.hpp"

#include "kickdyn/random.hpp"
#include "kickdyn/spectral.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kickdyn::shotnoise {

void NoiseParams::validate() const
{
    if (!(gamma_mean > 0.0) || !std::isfinite(gamma_mean))
        throw std::domain_error("noise: gamma_mean must be positive and finite");
    if (!(dt_mean > 0.0) || !std::isfinite(dt_mean))
        throw std::domain_error("noise: dt_mean must be positive and finite");
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw std::domain_error("noise: horizon must be non-negative and finite");
}

KickSequence sample_kicks(const NoiseParams& params)
{
    params.validate();
    KickSequence seq;
    seq.horizon = params.horizon;
    if (params.horizon == 0.0) return seq;

    Xoshiro256pp rng(params.seed);
    double t = 0.0;
    for (;;) {
        const double gap = rng.exponential(params.dt_mean);
        const double strength = rng.exponential(params.gamma_mean);
        // A zero gap or strength has probability 2^-53; skip it so the
        // strict-ordering and positivity invariants hold unconditionally.
        if (gap <= 0.0 || strength <= 0.0) continue;
        const double next = t + gap;
        if (next > params.horizon) break;
        if (next == t) continue;
        t = next;
        seq.kicks.push_back({t, strength});
    }
    return seq;
}

double analytic_mean_force(double gamma_mean, double rate) noexcept { return gamma_mean * rate; }

double analytic_covariance_background(double gamma_mean, double rate) noexcept
{
    return gamma_mean * gamma_mean * rate * rate;
}

double analytic_delta_weight(double gamma_mean, double rate) noexcept
{
    return 2.0 * gamma_mean * gamma_mean * rate;
}

double analytic_flat_spectrum(double gamma_mean, double rate) noexcept
{
    return 4.0 * gamma_mean * gamma_mean * rate / std::sqrt(2.0 * std::numbers::pi);
}

namespace {

double common_horizon(std::span<const KickSequence> seqs, const char* who)
{
    if (seqs.empty()) throw std::invalid_argument(std::string(who) + ": no sequences given");
    const double horizon = seqs.front().horizon;
    for (const auto& s : seqs)
        if (s.horizon != horizon) throw std::invalid_argument(std::string(who) + ": sequences differ in horizon");
    if (!(horizon > 0.0)) throw std::domain_error(std::string(who) + ": horizon must be positive");
    return horizon;
}

// Sum of strengths per cell of width `bin` over [0, n*bin); a kick exactly at
// the horizon lands in the last cell.
void bin_force(const KickSequence& seq, double bin, std::vector<double>& cells)
{
    std::fill(cells.begin(), cells.end(), 0.0);
    const auto n = cells.size();
    for (const auto& k : seq.kicks) {
        auto idx = static_cast<std::size_t>(k.time / bin);
        if (idx >= n) idx = n - 1;
        cells[idx] += k.strength;
    }
}

} // namespace

double empirical_force_mean(std::span<const KickSequence> seqs)
{
    const double horizon = common_horizon(seqs, "empirical_force_mean");
    double total = 0.0;
    for (const auto& s : seqs)
        for (const auto& k : s.kicks) total += k.strength;
    return total / (static_cast<double>(seqs.size()) * horizon);
}

double Autocovariance::background() const
{
    if (value.size() < 2) throw std::logic_error("Autocovariance: no nonzero lags");
    double s = 0.0;
    for (std::size_t l = 1; l < value.size(); ++l) s += value[l];
    return s / static_cast<double>(value.size() - 1);
}

double Autocovariance::background_error() const
{
    // Lags are strongly correlated (same realizations), so combine errors
    // conservatively as the mean of the per-lag errors.
    if (standard_error.size() < 2) throw std::logic_error("Autocovariance: no nonzero lags");
    double s = 0.0;
    for (std::size_t l = 1; l < standard_error.size(); ++l) s += standard_error[l];
    return s / static_cast<double>(standard_error.size() - 1);
}

double Autocovariance::delta_weight() const { return (value.at(0) - background()) * bin_width; }

Autocovariance empirical_autocovariance(std::span<const KickSequence> seqs, double bin_width,
                                        std::size_t max_lag_bins)
{
    if (!(bin_width > 0.0)) throw std::domain_error("empirical_autocovariance: bin_width must be positive");
    const double horizon = common_horizon(seqs, "empirical_autocovariance");
    const auto n_bins = static_cast<std::size_t>(std::floor(horizon / bin_width));
    if (n_bins <= max_lag_bins) throw std::domain_error("empirical_autocovariance: bin_width too large for horizon");

    const std::size_t n_lags = max_lag_bins + 1;
    std::vector<double> sum(n_lags, 0.0), sum_sq(n_lags, 0.0);
    std::vector<double> cells(n_bins);
    for (const auto& seq : seqs) {
        bin_force(seq, bin_width, cells);
        for (auto& c : cells) c /= bin_width;
        for (std::size_t l = 0; l < n_lags; ++l) {
            double acc = 0.0;
            const std::size_t count = n_bins - l;
            for (std::size_t k = 0; k < count; ++k) acc += cells[k] * cells[k + l];
            const double per_seq = acc / static_cast<double>(count);
            sum[l] += per_seq;
            sum_sq[l] += per_seq * per_seq;
        }
    }

    Autocovariance out;
    out.bin_width = bin_width;
    const auto n = static_cast<double>(seqs.size());
    for (std::size_t l = 0; l < n_lags; ++l) {
        const double mean = sum[l] / n;
        out.lag.push_back(static_cast<double>(l) * bin_width);
        out.value.push_back(mean);
        const double var = (seqs.size() > 1) ? std::max(0.0, (sum_sq[l] - n * mean * mean) / (n - 1.0)) : 0.0;
        out.standard_error.push_back(std::sqrt(var / n));
    }
    return out;
}

std::vector<SpectrumSample> power_spectrum_estimate(std::span<const KickSequence> seqs,
                                                    std::span<const double> omegas, std::size_t n_bins)
{
    const double horizon = common_horizon(seqs, "power_spectrum_estimate");
    if (n_bins < 2) throw std::domain_error("power_spectrum_estimate: need at least 2 bins");
    const double bin = horizon / static_cast<double>(n_bins);
    const double d_omega = 2.0 * std::numbers::pi / horizon;
    const double nyquist = std::numbers::pi / bin;

    std::vector<std::size_t> index;
    for (double w : omegas) {
        if (!(w > 0.0) || w >= nyquist)
            throw std::domain_error("power_spectrum_estimate: frequencies must lie in (0, Nyquist)");
        index.push_back(static_cast<std::size_t>(std::llround(w / d_omega)));
        if (index.back() == 0) index.back() = 1;
    }

    spectral::FftPlan plan(n_bins);
    cvector buf(n_bins);
    std::vector<double> cells(n_bins);
    std::vector<double> sum(omegas.size(), 0.0), sum_sq(omegas.size(), 0.0);
    for (const auto& seq : seqs) {
        bin_force(seq, bin, cells);
        for (std::size_t k = 0; k < n_bins; ++k) buf[k] = cells[k];
        plan.forward(buf.data());
        for (std::size_t i = 0; i < index.size(); ++i) {
            const double p = std::norm(buf[index[i]]) / horizon;
            sum[i] += p;
            sum_sq[i] += p * p;
        }
    }

    // One-sided density with the 1/sqrt(2 pi) transform normalization.
    const double norm = 2.0 / std::sqrt(2.0 * std::numbers::pi);
    const auto n = static_cast<double>(seqs.size());
    std::vector<SpectrumSample> out;
    for (std::size_t i = 0; i < index.size(); ++i) {
        const double w = static_cast<double>(index[i]) * d_omega;
        const double x = 0.5 * w * bin;
        const double sinc = std::sin(x) / x;
        const double response = sinc * sinc;
        const double mean = sum[i] / n;
        const double var = (seqs.size() > 1) ? std::max(0.0, (sum_sq[i] - n * mean * mean) / (n - 1.0)) : 0.0;
        out.push_back({omegas[i], w, norm * mean / response, norm * std::sqrt(var / n) / response});
    }
    return out;
}

double flat_level(std::span<const SpectrumSample> samples)
{
    if (samples.empty()) throw std::invalid_argument("flat_level: no samples");
    double s = 0.0;
    for (const auto& x : samples) s += x.density;
    return s / static_cast<double>(samples.size());
}

void write_kicks(std::ostream& out, const KickSequence& seq)
{
    out << "# horizon_au " << std::setprecision(17) << seq.horizon << '\n';
    out << "# time_au strength_au\n";
    for (const auto& k : seq.kicks) out << std::setprecision(17) << k.time << ' ' << k.strength << '\n';
}

KickSequence read_kicks(std::istream& in)
{
    KickSequence seq;
    bool have_horizon = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            if (hs >> key && key == "horizon_au") {
                if (!(hs >> seq.horizon)) throw std::runtime_error("read_kicks: bad horizon on line " + std::to_string(line_no));
                have_horizon = true;
            }
            continue;
        }
        std::istringstream ls(line);
        Kick k{};
        if (!(ls >> k.time >> k.strength)) throw std::runtime_error("read_kicks: malformed line " + std::to_string(line_no));
        if (!seq.kicks.empty() && k.time <= seq.kicks.back().time)
            throw std::runtime_error("read_kicks: times not increasing at line " + std::to_string(line_no));
        if (!(k.strength > 0.0)) throw std::runtime_error("read_kicks: non-positive strength at line " + std::to_string(line_no));
        seq.kicks.push_back(k);
    }
    if (!have_horizon) throw std::runtime_error("read_kicks: missing horizon header");
    return seq;
}

} // namespace kickdyn::shotnoise
