// kickdyn: relax | run | ensemble | sweep | validate-noise
//
// Exit codes: 0 success, 2 config or usage error, 3 numerical failure,
// 4 partial ensemble failure.

#include "kickdyn/cli.hpp"
#include "kickdyn/random.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace kickdyn;

namespace {

enum Exit { ok = 0, config_error = 2, numerical_failure = 3, partial_failure = 4 };

struct Overrides {
    std::string config;
    std::optional<std::size_t> workers;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<double> final_time;
    std::optional<std::string> axis;
};

cli::SimConfig materialize(const Overrides& o)
{
    cli::SimConfig c = o.config.empty() ? cli::parse_config("") : cli::load_config(o.config);
    if (o.workers) c.ensemble.workers = *o.workers;
    if (o.out) c.output.directory = *o.out;
    if (o.seed) c.ensemble.master_seed = *o.seed;
    if (o.final_time) c.run.final_time_fs = *o.final_time;
    if (o.axis) c.sweep = cli::parse_axis(*o.axis);
    cli::validate(c);
    return c;
}

void write_seeds(const fs::path& dir, const std::vector<std::uint64_t>& seeds)
{
    std::ofstream out(dir / "seeds.txt");
    ensemble::write_seed_manifest(out, seeds);
}

std::vector<std::uint64_t> all_seeds(const cli::SimConfig& c)
{
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < c.ensemble.realizations; ++i)
        seeds.push_back(ensemble::realization_seed(c.ensemble_spec(), i));
    return seeds;
}

void report_failures(const ensemble::PartialEnsembleError& e)
{
    for (const auto& f : e.failed())
        std::fprintf(stderr, "realization %zu (seed %llu) failed: %s\n", f.index,
                     static_cast<unsigned long long>(f.seed), f.message.c_str());
}

int run_command(const std::string& name, const cli::SimConfig& c)
{
    const fs::path dir = c.output.directory;
    cli::prepare_run_directory(dir, c);
    std::fprintf(stderr, "%s: model %s, output %s\n", name.c_str(), cli::to_string(c.model).c_str(),
                 dir.string().c_str());

    if (name == "relax") {
        const auto s = cli::cmd_relax(c);
        std::ofstream profile(dir / "relax_profile.csv");
        cli::write_relax_csv(profile, c, s);
        std::ofstream summary(dir / "relax_summary.csv");
        summary << "energy_au,steps,parity_defect,p_ionization,p_dissociation\n" << std::setprecision(17)
                << s.energy << ',' << s.steps << ',' << s.parity_defect << ',' << s.p_ionization << ','
                << s.p_dissociation << '\n';
        std::printf("ground energy %.12f a.u. after %zu steps\n", s.energy, s.steps);
        return ok;
    }
    if (name == "run") {
        shotnoise::KickSequence kicks;
        const auto series = cli::cmd_run(c, &kicks);
        write_seeds(dir, {ensemble::realization_seed(c.ensemble_spec(), 0)});
        std::ofstream kout(dir / "kicks.txt");
        shotnoise::write_kicks(kout, kicks);
        std::ofstream out(dir / "series.csv");
        cli::write_series_csv(out, series);
        std::printf("%zu kicks, %zu records\n", kicks.size(), series.time.size());
        return ok;
    }
    if (name == "ensemble") {
        write_seeds(dir, all_seeds(c));
        try {
            const auto result = cli::cmd_ensemble(c);
            std::ofstream out(dir / "ensemble.csv");
            ensemble::write_csv(out, result);
            std::printf("%zu realizations averaged\n", result.n);
            return ok;
        } catch (const ensemble::PartialEnsembleError& e) {
            report_failures(e);
            if (e.partial().n == 0) return numerical_failure;
            std::ofstream out(dir / "ensemble_partial.csv");
            ensemble::write_csv(out, e.partial());
            return partial_failure;
        }
    }
    if (name == "sweep") {
        write_seeds(dir, all_seeds(c));
        auto write_table = [&](const cli::SweepTable& t, const std::string& file) {
            std::ofstream out(dir / file);
            cli::write_sweep_csv(out, t);
            for (std::size_t i = 0; i < t.points.size(); ++i) {
                std::ofstream p(dir / ("point_" + std::to_string(i) + ".csv"));
                ensemble::write_csv(p, t.points[i]);
            }
        };
        try {
            const auto table = cli::cmd_sweep(c);
            write_table(table, "sweep.csv");
            std::printf("%zu sweep points\n", table.rows.size());
            return ok;
        } catch (const cli::SweepPointError& e) {
            std::fprintf(stderr, "%s\n", e.what());
            write_table(e.partial(), "sweep_partial.csv");
            return e.partial_ensemble() ? partial_failure : numerical_failure;
        }
    }
    if (name == "validate-noise") {
        std::vector<std::uint64_t> seeds;
        for (std::size_t i = 0; i < c.validate_noise.samples; ++i)
            seeds.push_back(derive_seed(c.ensemble.master_seed, i));
        write_seeds(dir, seeds);
        const auto report = cli::cmd_validate_noise(c);
        std::ofstream out(dir / "noise_report.csv");
        cli::write_noise_report(out, report);
        for (const auto& chk : report.checks)
            std::printf("%-26s empirical %.6g analytic %.6g tolerance %.3g  %s\n", chk.name.c_str(), chk.empirical,
                        chk.analytic, chk.tolerance, chk.pass ? "PASS" : "FAIL");
        return report.pass() ? ok : numerical_failure;
    }
    return config_error;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stochastically kicked atoms and molecules"};
    app.require_subcommand(1);
    Overrides o;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"relax", "Relax the ground state and write its profile"},
        {"run", "Propagate one noise realization"},
        {"ensemble", "Average independent realizations"},
        {"sweep", "One ensemble per axis value"},
        {"validate-noise", "Check the noise generator against its analytic moments"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "YAML config file")->check(CLI::ExistingFile);
        sub->add_option_function<std::size_t>("--workers", [&](std::size_t v) { o.workers = v; },
                                               "Worker threads (results do not depend on it)");
        sub->add_option_function<std::string>("--out", [&](const std::string& v) { o.out = v; }, "Run directory");
        sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { o.seed = v; },
                                                 "Master seed, overrides the config");
        sub->add_option_function<double>("--final-time", [&](double v) { o.final_time = v; }, "Final time in fs");
        sub->add_option_function<std::string>("--axis", [&](const std::string& v) { o.axis = v; },
                                              "Sweep axis, name:v1,v2,...");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        auto config = materialize(o);
        config.h2plus.relax.progress = [](std::size_t steps, double energy) {
            if (steps % 100 == 0) std::fprintf(stderr, "relax: step %zu, energy %.10f\n", steps, energy);
        };
        return run_command(name, config);
    } catch (const cli::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return config_error;
    } catch (const cli::NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return numerical_failure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return numerical_failure;
    }
}
