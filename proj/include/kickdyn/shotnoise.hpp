#pragma once

// White shot noise: delta impulses at Poisson times with exponentially
// distributed positive strengths, plus the Monte Carlo estimators used to
// check its first and second moments and its power spectrum.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace kickdyn::shotnoise {

struct NoiseParams {
    double gamma_mean = 0.9;   ///< mean kick strength (a.u. impulse)
    double dt_mean = 6.283185307179586; ///< mean kick interval, 1/lambda (a.u. time)
    double horizon = 0.0;      ///< total duration (a.u. time)
    std::uint64_t seed = 0;

    double rate() const noexcept { return 1.0 / dt_mean; }

    /// Throws std::domain_error naming the offending field.
    void validate() const;
};

struct Kick {
    double time;     ///< a.u.
    double strength; ///< a.u. impulse, always > 0

    friend bool operator==(const Kick&, const Kick&) = default;
};

struct KickSequence {
    std::vector<Kick> kicks; ///< strictly increasing times in (0, horizon]
    double horizon = 0.0;

    std::size_t size() const noexcept { return kicks.size(); }
    bool empty() const noexcept { return kicks.empty(); }

    friend bool operator==(const KickSequence&, const KickSequence&) = default;
};

/// One realization of F(t) on (0, horizon]. Gaps and strengths are drawn from
/// one xoshiro256++ stream seeded by params.seed, alternating gap/strength.
KickSequence sample_kicks(const NoiseParams& params);

/// Analytic moments of the process.
double analytic_mean_force(double gamma_mean, double rate) noexcept;          // gamma*lambda
double analytic_covariance_background(double gamma_mean, double rate) noexcept; // (gamma*lambda)^2
double analytic_delta_weight(double gamma_mean, double rate) noexcept;        // 2 gamma^2 lambda
double analytic_flat_spectrum(double gamma_mean, double rate) noexcept;       // 4 gamma^2 lambda / sqrt(2 pi)

/// Total impulse per unit time, averaged over all sequences.
double empirical_force_mean(std::span<const KickSequence> seqs);

struct Autocovariance {
    double bin_width = 0.0;
    std::vector<double> lag;            ///< lag of each bin (a.u.), lag[0] == 0
    std::vector<double> value;          ///< <F(t) F(t+lag)> of the binned force
    std::vector<double> standard_error; ///< across realizations

    /// Mean of the nonzero-lag bins and its standard error.
    double background() const;
    double background_error() const;
    /// (value[0] - background()) * bin_width, the weight of the lag-0 delta.
    double delta_weight() const;
};

/// Bins each sequence's force into cells of `bin_width` and averages the
/// products F_k F_{k+l} for l = 0..max_lag_bins.
Autocovariance empirical_autocovariance(std::span<const KickSequence> seqs, double bin_width,
                                        std::size_t max_lag_bins = 32);

struct SpectrumSample {
    double omega;          ///< requested angular frequency
    double omega_bin;      ///< DFT frequency actually sampled
    double density;        ///< one-sided density, 1/sqrt(2 pi) normalization
    double standard_error;
};

/// Histogram-FFT-periodogram estimate of the power spectrum. Each sequence
/// is binned onto `n_bins` cells, transformed, and |F(omega)|^2 / horizon is
/// averaged over sequences. The histogram's sinc^2 response is divided out.
std::vector<SpectrumSample> power_spectrum_estimate(std::span<const KickSequence> seqs,
                                                    std::span<const double> omegas,
                                                    std::size_t n_bins = 4096);

/// Mean density over a set of spectrum samples (the flat level away from 0).
double flat_level(std::span<const SpectrumSample> samples);

/// Two-column text (t_i, gamma_i), one kick per line, 17 significant digits.
/// A leading comment records the horizon.
void write_kicks(std::ostream& out, const KickSequence& seq);
KickSequence read_kicks(std::istream& in);

} // namespace kickdyn::shotnoise
