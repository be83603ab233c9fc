#include "kickdyn/cli.hpp"
#include "kickdyn/random.hpp"
#include "kickdyn/units.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#ifndef KICKDYN_VERSION
#define KICKDYN_VERSION "unknown"
#endif
#ifndef KICKDYN_GIT_REVISION
#define KICKDYN_GIT_REVISION "unknown"
#endif
#ifndef KICKDYN_BUILD_TYPE
#define KICKDYN_BUILD_TYPE "unknown"
#endif

namespace kickdyn::cli {

namespace {

// Everything a realization needs that does not depend on its seed.
struct Prepared {
    Model model;
    RelaxSummary relax;

    std::shared_ptr<const qdyn1d::Hamiltonian1D> ham;
    std::shared_ptr<const qdyn1d::Wavefunction1D> initial;
    std::shared_ptr<const qdyn1d::Wavefunction1D> reference;
    qdyn1d::PropagationOptions options1d;

    std::shared_ptr<const h2plus::H2Operators> ops;
    std::shared_ptr<const h2plus::WavefunctionH2> ground;
};

Prepared prepare_1d(const SimConfig& c)
{
    Prepared p;
    p.model = c.model;
    const bool atom = c.model == Model::atom1d;
    const Grid1DConfig& gc = atom ? c.atom1d.grid : c.morse1d.grid;
    const spectral::UniformGrid grid(gc.points, gc.x_min, gc.x_max);
    std::function<double(double)> v;
    double mass_factor = 0.5;
    if (atom) {
        const auto a = c.atom1d.params;
        v = [a](double x) { return qdyn1d::softcore_potential(x, a); };
    } else {
        const auto m = c.morse1d.params;
        v = [m](double x) { return qdyn1d::morse_potential(x, m); };
        mass_factor = 0.5 / m.reduced_mass;
    }
    p.ham = std::make_shared<const qdyn1d::Hamiltonian1D>(grid, v, mass_factor);

    try {
        auto r = qdyn1d::relax_ground_state(*p.ham, gc.relax_dt, gc.relax_tol);
        p.relax.energy = r.energy;
        p.relax.steps = r.iterations;
        p.relax.x = grid.points();
        p.relax.density.resize(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) p.relax.density[j] = std::norm(r.state.amplitudes[j]);
        if (atom) {
            p.initial = std::make_shared<const qdyn1d::Wavefunction1D>(std::move(r.state));
        } else {
            // The analytic eigenfunction is the reference; the relaxed state only cross-checks it.
            p.initial = std::make_shared<const qdyn1d::Wavefunction1D>(
                qdyn1d::morse_eigenfunction(0, c.morse1d.params, grid));
        }
    } catch (const qdyn1d::ConvergenceError& e) {
        throw NumericalFailure(std::string("relaxation: ") + e.what());
    }
    p.reference = p.initial;

    p.options1d.dt = c.run.dt;
    p.options1d.record_every = c.run.record_every;
    p.options1d.coupling = atom ? 1.0 : c.morse1d.params.mu0;
    p.options1d.absorber = qdyn1d::Absorber{gc.absorber_fraction, gc.absorber_strength, atom, true};
    return p;
}

Prepared prepare_h2(const SimConfig& c)
{
    Prepared p;
    p.model = c.model;
    const auto geometry = std::make_shared<const h2plus::H2Geometry>(c.h2plus.geometry);
    p.ops = std::make_shared<const h2plus::H2Operators>(geometry, c.h2plus.params);
    try {
        auto r = h2plus::relax_h2_ground_state(*p.ops, c.h2plus.relax);
        p.relax.energy = r.energy;
        p.relax.steps = r.steps;
        p.relax.parity_defect = r.state.parity_defect();
        p.relax.density = h2plus::f1_profile(r.state);
        p.relax.p_ionization = h2plus::ionization_probability(p.relax.density, *geometry);
        p.relax.p_dissociation = h2plus::dissociation_probability(p.relax.density, *geometry);
        p.relax.x = geometry->r().points();
        p.ground = std::make_shared<const h2plus::WavefunctionH2>(std::move(r.state));
    } catch (const h2plus::ConvergenceError& e) {
        throw NumericalFailure(std::string("relaxation: ") + e.what());
    }
    return p;
}

Prepared prepare(const SimConfig& c)
{
    validate(c);
    return c.model == Model::h2plus ? prepare_h2(c) : prepare_1d(c);
}

ensemble::Series realize(const Prepared& p, const SimConfig& c, std::uint64_t seed,
                         shotnoise::KickSequence* kicks_out)
{
    const auto kicks = shotnoise::sample_kicks(c.noise_params(seed));
    if (kicks_out) *kicks_out = kicks;
    ensemble::Series s;
    if (p.model == Model::h2plus) {
        h2plus::H2PropagationOptions o;
        o.dt = c.run.dt;
        o.record_every = c.run.record_every;
        o.seed = seed;
        const auto series = h2plus::propagate_h2_realization(*p.ground, p.ops, kicks, o);
        s.columns = {"norm", "p_ionization", "p_dissociation", "absorbed_r"};
        s.values.assign(4, {});
        for (const auto& r : series.records) {
            s.time.push_back(r.time);
            s.values[0].push_back(r.norm);
            s.values[1].push_back(r.p_ionization);
            s.values[2].push_back(r.p_dissociation);
            s.values[3].push_back(r.absorbed_r);
        }
    } else {
        qdyn1d::Wavefunction1D psi = *p.initial;
        const auto series = qdyn1d::propagate_kicked(psi, *p.ham, kicks, p.options1d, *p.reference);
        s.columns = {"norm", "survival", "energy"};
        s.values.assign(3, {});
        for (const auto& r : series.records) {
            s.time.push_back(r.time);
            s.values[0].push_back(r.norm);
            s.values[1].push_back(r.survival);
            s.values[2].push_back(r.energy);
        }
    }
    return s;
}

ensemble::EnsembleResult run_prepared(const Prepared& p, const SimConfig& c)
{
    return ensemble::run_ensemble(c.ensemble_spec(), [&](std::size_t, std::uint64_t seed) {
        return realize(p, c, seed, nullptr);
    });
}

std::string csv_num(double v)
{
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

} // namespace

RelaxSummary cmd_relax(const SimConfig& config) { return prepare(config).relax; }

ensemble::Series cmd_run(const SimConfig& config, shotnoise::KickSequence* kicks_out)
{
    const Prepared p = prepare(config);
    const std::uint64_t seed = ensemble::realization_seed(config.ensemble_spec(), 0);
    try {
        return realize(p, config, seed, kicks_out);
    } catch (const h2plus::NumericalError& e) {
        throw NumericalFailure(e.what());
    } catch (const qdyn1d::NumericalError& e) {
        throw NumericalFailure(e.what());
    }
}

ensemble::EnsembleResult cmd_ensemble(const SimConfig& config)
{
    const Prepared p = prepare(config);
    return run_prepared(p, config);
}

SweepPointError::SweepPointError(std::size_t point, double value, const std::string& message, SweepTable partial,
                                 bool partial_ensemble)
    : std::runtime_error("sweep point " + std::to_string(point) + " (" + csv_num(value) + "): " + message),
      point_(point), value_(value), partial_(std::move(partial)), partial_ensemble_(partial_ensemble)
{
}

SweepTable cmd_sweep(const SimConfig& config)
{
    if (config.sweep.values.empty()) throw ConfigError("sweep.values", 0, "no axis values given");
    const Prepared p = prepare(config);
    SweepTable table;
    table.axis = config.sweep.axis;
    for (std::size_t i = 0; i < config.sweep.values.size(); ++i) {
        const double value = config.sweep.values[i];
        SimConfig point = config;
        if (config.sweep.axis == "spacing") point.noise.spacing = value;
        else point.noise.gamma_mean = value;
        ensemble::EnsembleResult result;
        try {
            result = run_prepared(p, point);
        } catch (const ensemble::PartialEnsembleError& e) {
            throw SweepPointError(i, value, e.what(), table, true);
        } catch (const std::exception& e) {
            throw SweepPointError(i, value, e.what(), table, false);
        }
        if (table.columns.empty()) table.columns = result.mean.columns;
        SweepRow row{value, {}, {}};
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            row.mean.push_back(result.mean.values[c].back());
            row.standard_error.push_back(result.standard_error.values[c].back());
        }
        table.rows.push_back(std::move(row));
        table.points.push_back(std::move(result));
    }
    return table;
}

bool NoiseReport::pass() const
{
    for (const auto& c : checks)
        if (!c.pass) return false;
    return !checks.empty();
}

NoiseReport cmd_validate_noise(const SimConfig& config)
{
    validate(config);
    const auto& v = config.validate_noise;
    std::vector<shotnoise::KickSequence> seqs;
    seqs.reserve(v.samples);
    for (std::size_t i = 0; i < v.samples; ++i) {
        auto params = config.noise_params(derive_seed(config.ensemble.master_seed, i));
        params.horizon = v.horizon;
        seqs.push_back(shotnoise::sample_kicks(params));
    }
    const double gamma = config.noise.gamma_mean;
    const double lambda = 1.0 / (config.noise.spacing * units::kElectronicPeriod);

    NoiseReport report;
    const double mean = shotnoise::empirical_force_mean(seqs);
    const double mean_ref = shotnoise::analytic_mean_force(gamma, lambda);
    const double mean_tol = v.mean_tolerance * mean_ref;
    report.checks.push_back({"mean_force", mean, mean_ref, mean_tol, std::abs(mean - mean_ref) <= mean_tol});

    const auto ac = shotnoise::empirical_autocovariance(seqs, v.bin_width, v.max_lag_bins);
    const double bg_ref = shotnoise::analytic_covariance_background(gamma, lambda);
    const double bg_tol = v.background_sigmas * ac.background_error();
    report.checks.push_back(
        {"autocovariance_background", ac.background(), bg_ref, bg_tol, std::abs(ac.background() - bg_ref) <= bg_tol});

    std::vector<double> omegas;
    for (std::size_t k = 0; k < v.omega_points; ++k)
        omegas.push_back(v.omega_points == 1 ? v.omega_min
                                             : v.omega_min + (v.omega_max - v.omega_min) * static_cast<double>(k) /
                                                                 static_cast<double>(v.omega_points - 1));
    const auto spectrum = shotnoise::power_spectrum_estimate(seqs, omegas, v.spectrum_bins);
    const double flat = shotnoise::flat_level(spectrum);
    const double flat_ref = shotnoise::analytic_flat_spectrum(gamma, lambda);
    const double flat_tol = v.flat_tolerance * flat_ref;
    report.checks.push_back({"spectrum_flat_level", flat, flat_ref, flat_tol, std::abs(flat - flat_ref) <= flat_tol});
    return report;
}

void write_sweep_csv(std::ostream& out, const SweepTable& table)
{
    out << table.axis;
    for (const auto& c : table.columns) out << ",mean_" << c << ",se_" << c;
    out << '\n' << std::setprecision(17);
    for (const auto& row : table.rows) {
        out << row.value;
        for (std::size_t c = 0; c < row.mean.size(); ++c) out << ',' << row.mean[c] << ',' << row.standard_error[c];
        out << '\n';
    }
}

void write_series_csv(std::ostream& out, const ensemble::Series& s)
{
    out << "time_au,time_fs";
    for (const auto& c : s.columns) out << ',' << c;
    out << '\n' << std::setprecision(17);
    for (std::size_t t = 0; t < s.time.size(); ++t) {
        out << s.time[t] << ',' << units::au_to_fs(s.time[t]);
        for (const auto& col : s.values) out << ',' << col[t];
        out << '\n';
    }
}

void write_noise_report(std::ostream& out, const NoiseReport& report)
{
    out << "check,empirical,analytic,tolerance,pass\n" << std::setprecision(17);
    for (const auto& c : report.checks)
        out << c.name << ',' << c.empirical << ',' << c.analytic << ',' << c.tolerance << ',' << (c.pass ? 1 : 0)
            << '\n';
}

void write_relax_csv(std::ostream& out, const SimConfig& config, const RelaxSummary& s)
{
    out << (config.model == Model::h2plus ? "r_au,f1\n" : "x_au,density\n") << std::setprecision(17);
    for (std::size_t j = 0; j < s.x.size(); ++j) out << s.x[j] << ',' << s.density[j] << '\n';
}

std::string version_stamp()
{
    std::ostringstream s;
    s << "kickdyn " << KICKDYN_VERSION << '\n'
      << "revision " << KICKDYN_GIT_REVISION << '\n'
      << "build_type " << KICKDYN_BUILD_TYPE << '\n'
      << "compiler " << __VERSION__ << '\n';
    return s.str();
}

void prepare_run_directory(const std::filesystem::path& dir, const SimConfig& config)
{
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "config.yaml") << serialize_config(config);
    std::ofstream(dir / "VERSION") << version_stamp();
}

} // namespace kickdyn::cli
